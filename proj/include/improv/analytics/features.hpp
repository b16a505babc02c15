#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace improv::analytics {

enum class Feature { SyllablesPerWord, WordsPerSentence, DifficultRatio, Sentiment, ErrorCount };

inline constexpr std::array<Feature, 5> kAllFeatures{Feature::SyllablesPerWord, Feature::WordsPerSentence,
                                                     Feature::DifficultRatio, Feature::Sentiment,
                                                     Feature::ErrorCount};

std::string_view to_string(Feature f);

struct FeatureVector {
  double syllables_per_word = 0.0;
  double words_per_sentence = 0.0;
  double difficult_ratio = 0.0;  // [0, 1]
  double sentiment = 0.0;        // [-1, 1]
  int error_count = 0;

  double get(Feature f) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Word -> valence, read from "word<TAB>value[<TAB>...]" lines (the VADER
/// lexicon layout).
class SentimentLexicon {
 public:
  SentimentLexicon() = default;
  explicit SentimentLexicon(std::map<std::string, double, std::less<>> values) : values_(std::move(values)) {}

  static SentimentLexicon load_file(const std::string& path);
  static SentimentLexicon parse(std::string_view text);

  std::optional<double> valence(std::string_view word) const;
  std::size_t size() const { return values_.size(); }

 private:
  std::map<std::string, double, std::less<>> values_;
};

struct Resources {
  std::set<std::string, std::less<>> easy_words;
  std::set<std::string, std::less<>> dictionary;
  SentimentLexicon lexicon;

  /// Reads easy_words.txt, dictionary.txt and sentiment_lexicon.txt from dir.
  static Resources load_dir(const std::string& dir);
};

std::set<std::string, std::less<>> read_word_list(const std::string& path);

/// Vowel groups (a e i o u y), minus one for a silent final 'e' standing
/// alone after a consonant, never below 1.
int syllables(std::string_view word);

/// Alphabetic words of a line, lowercased, with contractions such as
/// "don't" kept whole. Tokens containing digits are dropped.
std::vector<std::string> analysis_words(std::string_view line);

inline constexpr double kSentimentAlpha = 15.0;

/// Lexicon sum with polarity flipped when "not", "never" or "no" occurs within
/// the two preceding words, normalised as s / sqrt(s^2 + 15) and clamped.
double sentiment(std::span<const std::string> words, const SentimentLexicon& lexicon);

/// Raw lexicon sum before normalisation.
double sentiment_sum(std::span<const std::string> words, const SentimentLexicon& lexicon);

/// Sentences (split at . ! ?) that contain words but do not end in . ! ?
int unterminated_sentences(std::string_view line);

FeatureVector features(std::string_view line, const Resources& resources);

}  // namespace improv::analytics
