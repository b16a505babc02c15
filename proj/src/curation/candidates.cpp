#include "improv/curation/candidates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "improv/error.hpp"

namespace improv::curation {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Pending: return "pending";
    case Outcome::Selected: return "selected";
    case Outcome::Discarded: return "discarded";
  }
  return "?";
}

const Candidate& CandidateSet::presented_at(int position) const {
  if (position < 1 || static_cast<std::size_t>(position) > presented.size()) {
    throw Error(ErrorKind::Parameter, "candidate position " + std::to_string(position) + " is not presented");
  }
  return generated.at(presented[static_cast<std::size_t>(position - 1)]);
}

Blocklist::Blocklist(std::set<std::string> words) {
  for (const auto& w : words) {
    for (const auto& t : textgen::words(textgen::tokenize(w))) words_.insert(t);
  }
}

Blocklist Blocklist::parse(std::string_view text) {
  std::set<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    words.insert(line.substr(first, last - first + 1));
  }
  return Blocklist(std::move(words));
}

Blocklist Blocklist::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, "cannot read blocklist: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Blocklist::contains(std::string_view word) const {
  std::string lowered(word);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return words_.find(lowered) != words_.end();
}

void filter_offensive(std::span<Candidate> candidates, const Blocklist& blocklist) {
  if (blocklist.empty()) return;
  for (Candidate& c : candidates) {
    if (c.flags.duplicate) continue;
    c.flags.offensive = std::any_of(c.tokens.begin(), c.tokens.end(), [&](const textgen::Token& t) {
      return t.kind == textgen::TokenKind::Word && blocklist.contains(t.surface);
    });
  }
}

void mark_duplicates(std::span<Candidate> candidates) {
  std::set<std::vector<textgen::Token>> seen;
  for (Candidate& c : candidates) {
    if (c.filtered()) continue;
    if (!seen.insert(c.tokens).second) c.flags.duplicate = true;
  }
}

std::vector<std::size_t> rank_and_present(std::span<Candidate> candidates, std::size_t k_show) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].rank.reset();
    if (!candidates[i].filtered()) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Candidate& x = candidates[a];
    const Candidate& y = candidates[b];
    if (x.rank_score != y.rank_score) return x.rank_score > y.rank_score;
    return x.text < y.text;
  });
  for (std::size_t r = 0; r < order.size(); ++r) candidates[order[r]].rank = static_cast<int>(r + 1);
  if (order.size() > k_show) order.resize(k_show);
  return order;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CandidateSet propose(const textgen::LanguageBackend& backend, std::string id, std::string_view context,
                     const textgen::TopicSet& topic, std::uint64_t seed, const Blocklist& blocklist,
                     const ProposeOptions& options, TimeMs created_at) {
  if (options.k_show < 1 || options.n_gen < options.k_show) {
    throw Error(ErrorKind::Parameter, "need n_gen >= k_show >= 1");
  }
  CandidateSet set;
  set.id = std::move(id);
  set.context = std::string(context);
  set.topic = topic;
  set.created_at = created_at;

  const auto context_tokens = textgen::tokenize(context);
  std::uint64_t stream = seed;
  set.generated.reserve(options.n_gen);
  for (std::size_t i = 0; i < options.n_gen; ++i) {
    Candidate c;
    c.tokens = backend.generate(context_tokens, topic, splitmix64(stream), options.max_len);
    c.text = textgen::detokenize(c.tokens);
    c.score = backend.score(c.tokens);
    c.rank_score = options.ranking == RankingMode::Sum
                       ? c.score
                       : c.score / static_cast<double>(c.tokens.size() + 1);
    set.generated.push_back(std::move(c));
  }
  filter_offensive(set.generated, blocklist);
  mark_duplicates(set.generated);
  set.presented = rank_and_present(set.generated, options.k_show);
  return set;
}

std::vector<LineRequest> resolve(CandidateSet& set, const Decision& decision) {
  if (set.outcome != Outcome::Pending) {
    throw Error(ErrorKind::State, "candidate set " + set.id + " is already " + std::string(to_string(set.outcome)));
  }
  if (decision.discard) {
    set.outcome = Outcome::Discarded;
    return {};
  }
  if (decision.positions.empty()) throw Error(ErrorKind::Parameter, "select at least one candidate or discard");
  std::set<int> unique;
  std::vector<LineRequest> lines;
  for (int pos : decision.positions) {
    const Candidate& c = set.presented_at(pos);
    if (!unique.insert(pos).second) {
      throw Error(ErrorKind::Parameter, "candidate position " + std::to_string(pos) + " selected twice");
    }
    lines.push_back({c.text, Source::AI, set.created_at, false});
  }
  set.outcome = Outcome::Selected;
  set.selected = decision.positions;
  return lines;
}

}  // namespace improv::curation
