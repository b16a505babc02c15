#include "improv/analytics/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "improv/error.hpp"
#include "improv/textgen/token.hpp"

namespace improv::analytics {

namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool alphabetic(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || static_cast<unsigned char>(c) >= 0x80;
  });
}

std::string slurp(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, std::string("cannot read ") + what + ": " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(Feature f) {
  switch (f) {
    case Feature::SyllablesPerWord: return "syllables_per_word";
    case Feature::WordsPerSentence: return "words_per_sentence";
    case Feature::DifficultRatio: return "difficult_ratio";
    case Feature::Sentiment: return "sentiment";
    case Feature::ErrorCount: return "error_count";
  }
  return "?";
}

double FeatureVector::get(Feature f) const {
  switch (f) {
    case Feature::SyllablesPerWord: return syllables_per_word;
    case Feature::WordsPerSentence: return words_per_sentence;
    case Feature::DifficultRatio: return difficult_ratio;
    case Feature::Sentiment: return sentiment;
    case Feature::ErrorCount: return error_count;
  }
  return 0.0;
}

SentimentLexicon SentimentLexicon::parse(std::string_view text) {
  std::map<std::string, double, std::less<>> values;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorKind::Data, "sentiment lexicon line " + std::to_string(line_no) + ": expected word<TAB>value");
    }
    const std::string value = line.substr(tab + 1, line.find('\t', tab + 1) - tab - 1);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str()) {
      throw Error(ErrorKind::Data, "sentiment lexicon line " + std::to_string(line_no) + ": bad value");
    }
    values[line.substr(0, tab)] = v;
  }
  return SentimentLexicon(std::move(values));
}

SentimentLexicon SentimentLexicon::load_file(const std::string& path) {
  return parse(slurp(path, "sentiment lexicon"));
}

std::optional<double> SentimentLexicon::valence(std::string_view word) const {
  auto it = values_.find(word);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string, std::less<>> read_word_list(const std::string& path) {
  std::set<std::string, std::less<>> words;
  std::istringstream in(slurp(path, "word list"));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::transform(line.begin(), line.end(), line.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words.insert(line);
  }
  return words;
}

Resources Resources::load_dir(const std::string& dir) {
  Resources r;
  r.easy_words = read_word_list(dir + "/easy_words.txt");
  r.dictionary = read_word_list(dir + "/dictionary.txt");
  r.lexicon = SentimentLexicon::load_file(dir + "/sentiment_lexicon.txt");
  return r;
}

int syllables(std::string_view word) {
  int groups = 0;
  bool in_group = false;
  for (char c : word) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const std::size_t n = word.size();
  if (n >= 2 && word[n - 1] == 'e' && !is_vowel(word[n - 2]) && groups > 1) --groups;
  return std::max(groups, 1);
}

std::vector<std::string> analysis_words(std::string_view line) {
  using textgen::TokenKind;
  const auto tokens = textgen::tokenize(line);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.kind != TokenKind::Word) continue;
    std::string w = t.surface;
    // word ' word -> contraction
    while (i + 2 < tokens.size() && tokens[i + 1].surface == "'" && tokens[i + 2].kind == TokenKind::Word) {
      w += "'" + tokens[i + 2].surface;
      i += 2;
    }
    std::string letters;
    std::copy_if(w.begin(), w.end(), std::back_inserter(letters), [](char c) { return c != '\''; });
    if (alphabetic(letters)) out.push_back(std::move(w));
  }
  return out;
}

double sentiment_sum(std::span<const std::string> words, const SentimentLexicon& lexicon) {
  auto negator = [](const std::string& w) { return w == "not" || w == "never" || w == "no"; };
  double s = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto v = lexicon.valence(words[i]);
    if (!v) continue;
    const bool negated = (i >= 1 && negator(words[i - 1])) || (i >= 2 && negator(words[i - 2]));
    s += negated ? -*v : *v;
  }
  return s;
}

double sentiment(std::span<const std::string> words, const SentimentLexicon& lexicon) {
  const double s = sentiment_sum(words, lexicon);
  return std::clamp(s / std::sqrt(s * s + kSentimentAlpha), -1.0, 1.0);
}

int unterminated_sentences(std::string_view line) {
  using textgen::TokenKind;
  int missing = 0;
  bool has_words = false;
  for (const auto& t : textgen::tokenize(line)) {
    if (t.kind == TokenKind::Word) {
      has_words = true;
    } else if (t.surface == "." || t.surface == "!" || t.surface == "?") {
      has_words = false;
    }
  }
  if (has_words) ++missing;
  return missing;
}

FeatureVector features(std::string_view line, const Resources& resources) {
  FeatureVector f;
  const auto words = analysis_words(line);
  if (words.empty()) return f;
  int total_syllables = 0;
  int difficult = 0;
  int misses = 0;
  for (const std::string& w : words) {
    std::string letters;
    std::copy_if(w.begin(), w.end(), std::back_inserter(letters), [](char c) { return c != '\''; });
    const int syl = syllables(letters);
    total_syllables += syl;
    if (syl >= 3 && !resources.easy_words.count(w)) ++difficult;
    if (!resources.dictionary.count(w)) ++misses;
  }
  const auto n = static_cast<double>(words.size());
  f.words_per_sentence = n;
  f.syllables_per_word = total_syllables / n;
  f.difficult_ratio = difficult / n;
  f.sentiment = sentiment(words, resources.lexicon);
  f.error_count = misses + unterminated_sentences(line);
  return f;
}

}  // namespace improv::analytics
