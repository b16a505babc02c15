#include "improv/textgen/token.hpp"

namespace improv::textgen {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

bool is_punctuation(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case '\'': case '-':
      return true;
    default:
      return false;
  }
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back({std::move(word), TokenKind::Word});
      word.clear();
    }
  };
  for (char c : text) {
    if (is_word_byte(static_cast<unsigned char>(c))) {
      word.push_back(lower(c));
    } else {
      flush();
      if (is_punctuation(c)) out.push_back({std::string(1, c), TokenKind::Punctuation});
    }
  }
  flush();
  return out;
}

Token make_token(std::string_view surface) {
  if (surface == kBoundary) return {std::string(surface), TokenKind::Boundary};
  if (surface.size() == 1 && is_punctuation(surface[0])) {
    return {std::string(surface), TokenKind::Punctuation};
  }
  return {std::string(surface), TokenKind::Word};
}

std::string detokenize(std::span<const Token> tokens) {
  std::string out;
  bool glue_next = true;
  for (const Token& t : tokens) {
    if (t.kind == TokenKind::Boundary) continue;
    const bool attach = t.kind == TokenKind::Punctuation;
    if (!glue_next && !attach) out.push_back(' ');
    out += t.surface;
    glue_next = t.surface == "'" || t.surface == "-";
  }
  return out;
}

std::vector<std::string> surfaces(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.surface);
  return out;
}

std::vector<std::string> words(std::span<const Token> tokens) {
  std::vector<std::string> out;
  for (const Token& t : tokens) {
    if (t.kind == TokenKind::Word) out.push_back(t.surface);
  }
  return out;
}

}  // namespace improv::textgen
