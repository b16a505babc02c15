#include "improv/textgen/generate.hpp"

#include <cmath>
#include <random>

#include "improv/error.hpp"

namespace improv::textgen {

namespace {

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

TokenId sample(std::span<const double> weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = unit_draw(rng) * total;
  double acc = 0.0;
  TokenId last_positive = kUnknownToken;
  for (TokenId i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

}  // namespace

std::vector<double> primed_distribution(const NGramModel& model, std::span<const TokenId> history,
                                        const TopicSet& topic) {
  std::vector<double> p = model.distribution(history);
  if (topic.empty() || topic.bonus == 0.0) return p;
  double total = 0.0;
  for (const auto& [word, weight] : topic.expanded) {
    const TokenId id = model.lookup(word);
    if (id != kUnknownToken) p[id] *= std::exp(topic.bonus * weight);
  }
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

NGramModel::History initial_history(const NGramModel& model, std::span<const Token> context) {
  NGramModel::History h = model.start_history();
  for (const Token& t : context) {
    h.erase(h.begin());
    h.push_back(model.lookup(t.surface));
  }
  if (model.history_count(h) == 0) return model.start_history();
  return h;
}

std::vector<Token> generate(const NGramModel& model, std::span<const Token> context,
                            const TopicSet& topic, std::uint64_t seed, std::size_t max_len) {
  if (max_len == 0) throw Error(ErrorKind::Parameter, "max_len must be >= 1");
  std::mt19937_64 rng(seed);
  NGramModel::History h = initial_history(model, context);
  const TokenId boundary = model.boundary_id();
  std::vector<Token> out;
  while (out.size() < max_len) {
    std::vector<double> p = primed_distribution(model, h, topic);
    if (out.empty()) {
      const double keep = p[boundary];
      p[boundary] = 0.0;
      bool any = false;
      for (double v : p) any = any || v > 0.0;
      if (!any) p[boundary] = keep;
    }
    const TokenId next = sample(p, rng);
    if (next == boundary || next == kUnknownToken) break;
    out.push_back(make_token(model.surface(next)));
    h.erase(h.begin());
    h.push_back(next);
  }
  return out;
}

}  // namespace improv::textgen
