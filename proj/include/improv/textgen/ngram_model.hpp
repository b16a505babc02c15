#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "improv/textgen/token.hpp"

namespace improv::textgen {

using TokenId = std::uint32_t;
inline constexpr TokenId kUnknownToken = std::numeric_limits<TokenId>::max();

inline constexpr int kDefaultOrder = 3;
inline constexpr double kDefaultAlpha = 0.1;

struct CorpusInfo {
  std::string name;
  std::size_t lines = 0;   // non-empty lines actually trained on
  std::size_t tokens = 0;  // tokens excluding boundary padding

  friend bool operator==(const CorpusInfo&, const CorpusInfo&) = default;
};

/// Add-alpha smoothed n-gram model over whole-line utterances.
///
/// Every line is padded with order-1 boundary markers in front and one behind,
/// so P(w | h) = (count(h, w) + alpha) / (count(h) + alpha * |V|) where V is the
/// vocabulary including the boundary marker. A trained model is immutable and
/// safe to share across threads.
class NGramModel {
 public:
  using History = std::vector<TokenId>;

  struct Row {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> next;
  };

  /// Throws Error(Training) when no line yields a token and
  /// Error(Parameter) when order < 2 or alpha < 0.
  static NGramModel train(std::span<const std::string> lines, int order = kDefaultOrder,
                          double alpha = kDefaultAlpha, std::string name = "corpus");

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  const CorpusInfo& trained_on() const { return info_; }

  /// Sorted; ids index into it.
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  std::size_t vocabulary_size() const { return vocab_.size(); }
  TokenId boundary_id() const { return boundary_; }
  TokenId lookup(std::string_view surface) const;
  const std::string& surface(TokenId id) const { return vocab_.at(id); }

  std::uint64_t count(std::span<const TokenId> history, TokenId next) const;
  std::uint64_t history_count(std::span<const TokenId> history) const;
  const std::map<History, Row>& rows() const { return rows_; }

  /// history.size() must equal order-1. Unknown next tokens get the smoothing
  /// mass alone. An unseen history with alpha == 0 yields the uniform row.
  double probability(std::span<const TokenId> history, TokenId next) const;

  /// Full conditional row, indexed by TokenId.
  std::vector<double> distribution(std::span<const TokenId> history) const;

  /// ln P(sentence, end) with boundary padding; the empty sentence scores the
  /// boundary-only event.
  double score(std::span<const Token> sentence) const;

  /// Same as score() without the final end-of-line event.
  double score_prefix(std::span<const Token> sentence) const;

  /// Start-of-line history (order-1 boundary markers).
  History start_history() const { return History(static_cast<std::size_t>(order_ - 1), boundary_); }

  /// Per training line, the sorted distinct word-token ids it contains.
  const std::vector<std::vector<TokenId>>& line_words() const { return line_words_; }

  void save(std::ostream& out) const;
  static NGramModel load(std::istream& in);
  void save_file(const std::string& path) const;
  static NGramModel load_file(const std::string& path);

  std::vector<TokenId> ids(std::span<const Token> tokens) const;

 private:
  NGramModel() = default;
  void index_vocabulary();
  double log_chain(std::span<const Token> sentence, bool include_end) const;

  int order_ = kDefaultOrder;
  double alpha_ = kDefaultAlpha;
  CorpusInfo info_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId boundary_ = 0;
  std::map<History, Row> rows_;
  std::vector<std::vector<TokenId>> line_words_;
};

/// Reads a corpus file: one utterance per line, blank lines dropped.
std::vector<std::string> read_corpus_file(const std::string& path);

}  // namespace improv::textgen
