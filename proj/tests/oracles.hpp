#pragma once

// Brute-force reference computations used by the tests. Nothing in here
// touches the library's counting or scoring code paths.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "improv/textgen/token.hpp"

namespace oracle {

inline std::vector<std::vector<std::string>> padded_lines(const std::vector<std::string>& corpus, int order) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : corpus) {
    auto toks = improv::textgen::surfaces(improv::textgen::tokenize(line));
    if (toks.empty()) continue;
    std::vector<std::string> p(static_cast<std::size_t>(order - 1), "<s>");
    p.insert(p.end(), toks.begin(), toks.end());
    p.push_back("<s>");
    out.push_back(std::move(p));
  }
  return out;
}

inline std::set<std::string> vocabulary(const std::vector<std::string>& corpus) {
  std::set<std::string> v{"<s>"};
  for (const auto& line : corpus) {
    for (const auto& t : improv::textgen::tokenize(line)) v.insert(t.surface);
  }
  return v;
}

// Number of positions where `history` is immediately followed by `next`
// (next empty: any continuation).
inline double count(const std::vector<std::string>& corpus, int order, const std::vector<std::string>& history,
                    const std::string* next) {
  double c = 0;
  for (const auto& p : padded_lines(corpus, order)) {
    for (std::size_t i = static_cast<std::size_t>(order - 1); i < p.size(); ++i) {
      bool match = true;
      for (std::size_t j = 0; j < history.size(); ++j) {
        if (p[i - history.size() + j] != history[j]) match = false;
      }
      if (match && (next == nullptr || p[i] == *next)) c += 1;
    }
  }
  return c;
}

inline double probability(const std::vector<std::string>& corpus, int order, double alpha,
                          const std::vector<std::string>& history, const std::string& next) {
  const double v = static_cast<double>(vocabulary(corpus).size());
  const double ch = count(corpus, order, history, nullptr);
  if (ch == 0 && alpha == 0) return 1.0 / v;
  return (count(corpus, order, history, &next) + alpha) / (ch + alpha * v);
}

// Chain product of conditional probabilities, evaluated in log space.
inline double score(const std::vector<std::string>& corpus, int order, double alpha,
                    const std::vector<std::string>& sentence) {
  std::vector<std::string> h(static_cast<std::size_t>(order - 1), "<s>");
  std::vector<std::string> seq = sentence;
  seq.push_back("<s>");
  double total = 0;
  for (const auto& w : seq) {
    total += std::log(probability(corpus, order, alpha, h, w));
    h.erase(h.begin());
    h.push_back(w);
  }
  return total;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_sd(const std::vector<double>& xs) {
  const double m = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace oracle
