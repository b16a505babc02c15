#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace improv::textgen {

enum class TokenKind { Word, Punctuation, Boundary };

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::Word;

  friend bool operator==(const Token&, const Token&) = default;
  friend auto operator<=>(const Token&, const Token&) = default;
};

/// Reserved sentence-boundary marker. Used both as start padding and as the
/// end-of-line event. Tokenized text can never contain it because '<' and '>'
/// are separators.
inline constexpr std::string_view kBoundary = "<s>";

bool is_punctuation(char c);

/// Lowercases ASCII letters, splits each of . , ! ? ' - into its own token and
/// treats every other non-alphanumeric byte as whitespace. Bytes >= 0x80 are
/// kept inside words so UTF-8 sequences survive intact.
std::vector<Token> tokenize(std::string_view text);

/// Classifies a surface string the same way tokenize() would.
Token make_token(std::string_view surface);

/// Joins tokens back into display text: no space before . , ! ? ' and no space
/// after ' or around -. tokenize(detokenize(t)) == t for tokenizer output.
std::string detokenize(std::span<const Token> tokens);

std::vector<std::string> surfaces(std::span<const Token> tokens);

/// Word-kind tokens only.
std::vector<std::string> words(std::span<const Token> tokens);

}  // namespace improv::textgen
