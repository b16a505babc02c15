#include "improv/textgen/ngram_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "improv/error.hpp"

namespace improv::textgen {

namespace {

constexpr std::string_view kMagic = "improv-ngram-model v1";

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorKind::Data, "model file line " + std::to_string(line_no) + ": " + why);
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) malformed(line_no_ + 1, std::string("unexpected end of file, expected ") + what);
    ++line_no_;
    return line;
  }

  // "key value" with the value as the rest of the line.
  std::string field(std::string_view key) {
    std::string line = next(std::string(key).c_str());
    if (line.size() < key.size() + 1 || line.compare(0, key.size(), key) != 0 || line[key.size()] != ' ') {
      malformed(line_no_, "expected '" + std::string(key) + " <value>'");
    }
    return line.substr(key.size() + 1);
  }

  std::uint64_t number(std::string_view key) {
    return parse_u64(field(key));
  }

  std::uint64_t parse_u64(const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      malformed(line_no_, "expected an unsigned integer, got '" + s + "'");
    }
    return std::strtoull(s.c_str(), nullptr, 10);
  }

  std::vector<std::uint64_t> numbers(const std::string& line) {
    std::vector<std::uint64_t> out;
    std::istringstream ss(line);
    std::string piece;
    while (ss >> piece) out.push_back(parse_u64(piece));
    return out;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

NGramModel NGramModel::train(std::span<const std::string> lines, int order, double alpha,
                             std::string name) {
  if (order < 2) throw Error(ErrorKind::Parameter, "n-gram order must be >= 2");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::Parameter, "smoothing alpha must be finite and >= 0");
  }

  std::vector<std::vector<Token>> tokenized;
  std::set<std::string> vocab{std::string(kBoundary)};
  for (const std::string& line : lines) {
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    for (const Token& t : tokens) vocab.insert(t.surface);
    tokenized.push_back(std::move(tokens));
  }
  if (tokenized.empty()) throw Error(ErrorKind::Training, "corpus contains no tokens");

  NGramModel m;
  m.order_ = order;
  m.alpha_ = alpha;
  std::replace(name.begin(), name.end(), '\n', ' ');
  m.info_.name = std::move(name);
  m.info_.lines = tokenized.size();
  m.vocab_.assign(vocab.begin(), vocab.end());
  m.index_vocabulary();

  const auto context = static_cast<std::size_t>(order - 1);
  for (const auto& tokens : tokenized) {
    m.info_.tokens += tokens.size();
    std::vector<TokenId> padded(context, m.boundary_);
    std::set<TokenId> distinct_words;
    for (const Token& t : tokens) {
      padded.push_back(m.index_.at(t.surface));
      if (t.kind == TokenKind::Word) distinct_words.insert(padded.back());
    }
    padded.push_back(m.boundary_);
    for (std::size_t i = context; i < padded.size(); ++i) {
      History h(padded.begin() + static_cast<std::ptrdiff_t>(i - context),
                padded.begin() + static_cast<std::ptrdiff_t>(i));
      Row& row = m.rows_[std::move(h)];
      ++row.total;
      ++row.next[padded[i]];
    }
    m.line_words_.emplace_back(distinct_words.begin(), distinct_words.end());
  }
  return m;
}

void NGramModel::index_vocabulary() {
  index_.clear();
  for (TokenId i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], i);
  boundary_ = index_.at(std::string(kBoundary));
}

TokenId NGramModel::lookup(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  return it == index_.end() ? kUnknownToken : it->second;
}

std::vector<TokenId> NGramModel::ids(std::span<const Token> tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(lookup(t.surface));
  return out;
}

std::uint64_t NGramModel::count(std::span<const TokenId> history, TokenId next) const {
  auto it = rows_.find(History(history.begin(), history.end()));
  if (it == rows_.end()) return 0;
  auto jt = it->second.next.find(next);
  return jt == it->second.next.end() ? 0 : jt->second;
}

std::uint64_t NGramModel::history_count(std::span<const TokenId> history) const {
  auto it = rows_.find(History(history.begin(), history.end()));
  return it == rows_.end() ? 0 : it->second.total;
}

double NGramModel::probability(std::span<const TokenId> history, TokenId next) const {
  if (history.size() != static_cast<std::size_t>(order_ - 1)) {
    throw Error(ErrorKind::Parameter, "history length must equal order - 1");
  }
  const auto v = static_cast<double>(vocab_.size());
  auto it = rows_.find(History(history.begin(), history.end()));
  if (it == rows_.end()) {
    return next == kUnknownToken && alpha_ == 0.0 ? 0.0 : 1.0 / v;
  }
  const Row& row = it->second;
  auto jt = row.next.find(next);
  const double c = jt == row.next.end() ? 0.0 : static_cast<double>(jt->second);
  return (c + alpha_) / (static_cast<double>(row.total) + alpha_ * v);
}

std::vector<double> NGramModel::distribution(std::span<const TokenId> history) const {
  if (history.size() != static_cast<std::size_t>(order_ - 1)) {
    throw Error(ErrorKind::Parameter, "history length must equal order - 1");
  }
  const auto v = static_cast<double>(vocab_.size());
  auto it = rows_.find(History(history.begin(), history.end()));
  if (it == rows_.end()) return std::vector<double>(vocab_.size(), 1.0 / v);
  const Row& row = it->second;
  const double denom = static_cast<double>(row.total) + alpha_ * v;
  std::vector<double> p(vocab_.size(), alpha_ / denom);
  for (const auto& [id, c] : row.next) p[id] = (static_cast<double>(c) + alpha_) / denom;
  return p;
}

double NGramModel::log_chain(std::span<const Token> sentence, bool include_end) const {
  History h = start_history();
  double total = 0.0;
  auto step = [&](TokenId next) {
    total += std::log(probability(h, next));
    h.erase(h.begin());
    h.push_back(next);
  };
  for (const Token& t : sentence) step(lookup(t.surface));
  if (include_end) step(boundary_);
  return total;
}

double NGramModel::score(std::span<const Token> sentence) const { return log_chain(sentence, true); }

double NGramModel::score_prefix(std::span<const Token> sentence) const {
  return log_chain(sentence, false);
}

void NGramModel::save(std::ostream& out) const {
  out << kMagic << '\n';
  out << "order " << order_ << '\n';
  out << "alpha " << hexfloat(alpha_) << '\n';
  out << "corpus-lines " << info_.lines << '\n';
  out << "corpus-tokens " << info_.tokens << '\n';
  out << "corpus-name " << info_.name << '\n';
  out << "vocabulary " << vocab_.size() << '\n';
  for (const std::string& w : vocab_) out << w << '\n';
  std::size_t ngrams = 0;
  for (const auto& [h, row] : rows_) ngrams += row.next.size();
  out << "ngrams " << ngrams << '\n';
  for (const auto& [h, row] : rows_) {
    for (const auto& [next, c] : row.next) {
      for (TokenId id : h) out << id << ' ';
      out << next << ' ' << c << '\n';
    }
  }
  out << "lines " << line_words_.size() << '\n';
  for (const auto& ws : line_words_) {
    for (std::size_t i = 0; i < ws.size(); ++i) out << (i ? " " : "") << ws[i];
    out << '\n';
  }
  out << "end\n";
}

NGramModel NGramModel::load(std::istream& in) {
  LineReader r(in);
  if (r.next("header") != kMagic) malformed(r.line_no(), "not an improv n-gram model file");
  NGramModel m;
  const auto order = r.number("order");
  if (order < 2 || order > 16) malformed(r.line_no(), "order out of range");
  m.order_ = static_cast<int>(order);
  {
    const std::string a = r.field("alpha");
    char* end = nullptr;
    m.alpha_ = std::strtod(a.c_str(), &end);
    if (end == a.c_str() || *end != '\0' || !(m.alpha_ >= 0.0)) malformed(r.line_no(), "bad alpha");
  }
  m.info_.lines = r.number("corpus-lines");
  m.info_.tokens = r.number("corpus-tokens");
  m.info_.name = r.field("corpus-name");

  const auto vocab_size = r.number("vocabulary");
  m.vocab_.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    std::string w = r.next("vocabulary entry");
    if (w.empty()) malformed(r.line_no(), "empty vocabulary entry");
    if (!m.vocab_.empty() && !(m.vocab_.back() < w)) malformed(r.line_no(), "vocabulary not sorted");
    m.vocab_.push_back(std::move(w));
  }
  if (!std::binary_search(m.vocab_.begin(), m.vocab_.end(), std::string(kBoundary))) {
    malformed(r.line_no(), "vocabulary lacks the boundary marker");
  }
  m.index_vocabulary();

  const auto ngrams = r.number("ngrams");
  const auto width = static_cast<std::size_t>(m.order_) + 1;
  for (std::uint64_t i = 0; i < ngrams; ++i) {
    auto nums = r.numbers(r.next("n-gram entry"));
    if (nums.size() != width) malformed(r.line_no(), "n-gram entry has wrong arity");
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (nums[j] >= vocab_size) malformed(r.line_no(), "token id out of range");
    }
    if (nums.back() == 0) malformed(r.line_no(), "zero count");
    History h(nums.begin(), nums.begin() + static_cast<std::ptrdiff_t>(width - 2));
    Row& row = m.rows_[std::move(h)];
    const auto next = static_cast<TokenId>(nums[width - 2]);
    if (!row.next.emplace(next, nums.back()).second) malformed(r.line_no(), "duplicate n-gram");
    row.total += nums.back();
  }

  const auto lines = r.number("lines");
  m.line_words_.reserve(lines);
  for (std::uint64_t i = 0; i < lines; ++i) {
    auto nums = r.numbers(r.next("line index entry"));
    std::vector<TokenId> ws;
    for (auto n : nums) {
      if (n >= vocab_size) malformed(r.line_no(), "token id out of range");
      ws.push_back(static_cast<TokenId>(n));
    }
    m.line_words_.push_back(std::move(ws));
  }
  if (r.next("end marker") != "end") malformed(r.line_no(), "expected 'end'");
  return m;
}

void NGramModel::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Data, "cannot write model file: " + path);
  save(out);
  if (!out) throw Error(ErrorKind::Data, "failed writing model file: " + path);
}

NGramModel NGramModel::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, "cannot read model file: " + path);
  return load(in);
}

std::vector<std::string> read_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, "cannot read corpus file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace improv::textgen
