#include "improv/textgen/topic.hpp"

#include <algorithm>

#include "improv/error.hpp"
#include "improv/textgen/ngram_model.hpp"
#include "improv/textgen/token.hpp"

namespace improv::textgen {

double TopicSet::weight(std::string_view word) const {
  auto it = expanded.find(std::string(word));
  return it == expanded.end() ? 0.0 : it->second;
}

TopicSet expand_topic(std::span<const std::vector<std::string>> line_words,
                      std::span<const std::string> seeds, std::size_t k, double bonus,
                      const std::set<std::string>& stopwords) {
  if (!(bonus >= 0.0)) throw Error(ErrorKind::Parameter, "topic bonus must be >= 0");
  TopicSet topic;
  topic.bonus = bonus;

  std::set<std::string> seed_set;
  for (const std::string& s : seeds) {
    for (const std::string& w : words(tokenize(s))) {
      if (seed_set.insert(w).second) topic.seeds.push_back(w);
    }
  }
  if (seed_set.empty()) return topic;
  for (const std::string& s : topic.seeds) topic.expanded[s] = 1.0;

  std::map<std::string, std::size_t> cooc;
  for (const auto& line : line_words) {
    const bool has_seed =
        std::any_of(line.begin(), line.end(), [&](const std::string& w) { return seed_set.count(w) > 0; });
    if (!has_seed) continue;
    std::set<std::string> distinct(line.begin(), line.end());
    for (const std::string& w : distinct) {
      if (!seed_set.count(w) && !stopwords.count(w)) ++cooc[w];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(cooc.begin(), cooc.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > k) ranked.resize(k);
  if (ranked.empty()) return topic;
  const auto top = static_cast<double>(ranked.front().second);
  for (const auto& [w, c] : ranked) topic.expanded[w] = static_cast<double>(c) / top;
  return topic;
}

TopicSet expand_topic(std::span<const std::string> corpus, std::span<const std::string> seeds,
                      std::size_t k, double bonus, const std::set<std::string>& stopwords) {
  std::vector<std::vector<std::string>> line_words;
  line_words.reserve(corpus.size());
  for (const std::string& line : corpus) line_words.push_back(words(tokenize(line)));
  return expand_topic(line_words, seeds, k, bonus, stopwords);
}

TopicSet expand_topic(const NGramModel& model, std::span<const std::string> seeds, std::size_t k,
                      double bonus, const std::set<std::string>& stopwords) {
  std::vector<std::vector<std::string>> line_words;
  line_words.reserve(model.line_words().size());
  for (const auto& ids : model.line_words()) {
    std::vector<std::string> ws;
    ws.reserve(ids.size());
    for (TokenId id : ids) ws.push_back(model.surface(id));
    line_words.push_back(std::move(ws));
  }
  return expand_topic(line_words, seeds, k, bonus, stopwords);
}

const std::set<std::string>& function_words() {
  static const std::set<std::string> words{
      "a", "about", "all", "am", "an", "and", "any", "are", "as", "at", "be", "been", "but", "by",
      "can", "could", "d", "did", "do", "does", "don", "for", "from", "had", "has", "have", "he",
      "her", "here", "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "just", "ll",
      "m", "me", "my", "no", "not", "now", "of", "on", "or", "our", "out", "re", "s", "she", "so",
      "t", "that", "the", "their", "them", "then", "there", "they", "this", "to", "up", "us", "ve",
      "was", "we", "were", "what", "when", "where", "which", "who", "why", "will", "with", "would",
      "you", "your"};
  return words;
}

}  // namespace improv::textgen
