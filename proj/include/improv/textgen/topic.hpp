#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace improv::textgen {

class NGramModel;

inline constexpr double kDefaultTopicBonus = 1.0;

/// Seed keywords plus co-occurring words, each weighted in (0, 1].
struct TopicSet {
  std::vector<std::string> seeds;
  std::map<std::string, double> expanded;
  double bonus = kDefaultTopicBonus;  // log-space weight applied while sampling

  bool empty() const { return expanded.empty(); }
  double weight(std::string_view word) const;
  bool contains(std::string_view word) const { return weight(word) > 0.0; }

  friend bool operator==(const TopicSet&, const TopicSet&) = default;
};

/// Seeds plus the top-k words ranked by the number of lines in which they
/// appear together with at least one seed. Ties go to the alphabetically
/// smaller word. Words in `stopwords` are never added (seeds always are).
TopicSet expand_topic(std::span<const std::vector<std::string>> line_words,
                      std::span<const std::string> seeds, std::size_t k,
                      double bonus = kDefaultTopicBonus, const std::set<std::string>& stopwords = {});

/// Convenience overload over raw corpus lines.
TopicSet expand_topic(std::span<const std::string> corpus, std::span<const std::string> seeds,
                      std::size_t k, double bonus = kDefaultTopicBonus,
                      const std::set<std::string>& stopwords = {});

/// Uses the line index stored in a trained model.
TopicSet expand_topic(const NGramModel& model, std::span<const std::string> seeds, std::size_t k,
                      double bonus = kDefaultTopicBonus, const std::set<std::string>& stopwords = {});

/// Common English function words, suitable as `stopwords`.
const std::set<std::string>& function_words();

}  // namespace improv::textgen
