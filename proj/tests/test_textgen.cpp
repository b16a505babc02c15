#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "improv/error.hpp"
#include "improv/textgen/backend.hpp"
#include "improv/textgen/generate.hpp"
#include "improv/textgen/ngram_model.hpp"
#include "improv/textgen/token.hpp"
#include "improv/textgen/topic.hpp"
#include "oracles.hpp"

using namespace improv;
using namespace improv::textgen;

namespace {

std::vector<std::string> nautical() { return read_corpus_file(IMPROV_DATA_DIR "/corpora/nautical.txt"); }

std::vector<Token> toks(const std::string& s) { return tokenize(s); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an improv::Error");
  return ErrorKind::Input;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("").empty());
  CHECK(surfaces(tokenize("Hello, world!")) == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(surfaces(tokenize("We are stuck in the dessert?")) ==
        std::vector<std::string>{"we", "are", "stuck", "in", "the", "dessert", "?"});
  CHECK(surfaces(tokenize("don't  stop--now <s>")) ==
        std::vector<std::string>{"don", "'", "t", "stop", "-", "-", "now", "s"});
  auto t = tokenize("Ok.");
  CHECK(t[0].kind == TokenKind::Word);
  CHECK(t[1].kind == TokenKind::Punctuation);
}

TEST_CASE("detokenize round-trips tokenizer output") {
  std::mt19937 rng(7);
  const std::string alphabet = "ab Z9.,!?'-;:\t";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 30);
    for (int j = 0; j < len; ++j) s.push_back(alphabet[rng() % alphabet.size()]);
    const auto t = tokenize(s);
    CHECK(tokenize(detokenize(t)) == t);
  }
  CHECK(detokenize(tokenize("hello , world ! don ' t")) == "hello, world! don't");
}

TEST_CASE("train counts and smoothing") {
  SUBCASE("two lines, alpha 0") {
    const std::vector<std::string> corpus{"a b", "a c"};
    auto m = NGramModel::train(corpus, 2, 0.0);
    const std::vector<TokenId> h{m.lookup("a")};
    CHECK(m.probability(h, m.lookup("b")) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.probability(h, m.lookup("c")) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.probability(h, m.lookup("b")) == oracle::probability(corpus, 2, 0.0, {"a"}, "b"));
  }
  SUBCASE("add-one on 'a a'") {
    // V = {<s>, a}; history "a" is followed once by "a" and once by <s>:
    // P(a|a) = (1 + 1) / (2 + 1 * 2) = 0.5
    auto m = NGramModel::train(std::vector<std::string>{"a a"}, 2, 1.0);
    CHECK(m.vocabulary_size() == 2);
    const std::vector<TokenId> h{m.lookup("a")};
    CHECK(m.probability(h, m.lookup("a")) == doctest::Approx(0.5).epsilon(1e-12));
    // P(a|<s>) = (1 + 1) / (1 + 2) = 2/3
    CHECK(m.probability(m.start_history(), m.lookup("a")) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { NGramModel::train(std::vector<std::string>{""}, 2, 0.1); }) == ErrorKind::Training);
    CHECK(kind_of([] { NGramModel::train(std::vector<std::string>{}, 2, 0.1); }) == ErrorKind::Training);
    CHECK(kind_of([] { NGramModel::train(std::vector<std::string>{"a"}, 1, 0.1); }) == ErrorKind::Parameter);
    CHECK(kind_of([] { NGramModel::train(std::vector<std::string>{"a"}, 2, -1.0); }) == ErrorKind::Parameter);
  }
  SUBCASE("descriptor") {
    auto m = NGramModel::train(std::vector<std::string>{"one line", "", "two", "three!"}, 3, 0.1, "demo");
    CHECK(m.trained_on().lines == 3);
    CHECK(m.trained_on().tokens == 5);
    CHECK(m.trained_on().name == "demo");
  }
}

TEST_CASE("every stored count is positive and every history has order-1 tokens") {
  auto m = NGramModel::train(nautical(), 3, 0.1);
  for (const auto& [h, row] : m.rows()) {
    CHECK(h.size() == 2);
    std::uint64_t sum = 0;
    for (const auto& [next, c] : row.next) {
      CHECK(c >= 1);
      sum += c;
    }
    CHECK(sum == row.total);
  }
}

TEST_CASE("rows sum to one, including unseen histories") {
  const auto corpus = nautical();
  for (double alpha : {0.0, 0.1, 1.0}) {
    auto m = NGramModel::train(corpus, 3, alpha);
    for (const auto& [h, row] : m.rows()) {
      double s = 0;
      for (double p : m.distribution(h)) s += p;
      CHECK(std::abs(s - 1.0) < 1e-9);
    }
    const std::vector<TokenId> unseen{m.lookup("pirate"), m.lookup("kitchen")};
    double s = 0;
    for (double p : m.distribution(unseen)) s += p;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("score matches the brute-force chain product") {
  SUBCASE("deterministic transitions score zero") {
    auto m = NGramModel::train(std::vector<std::string>{"a b"}, 2, 0.0);
    CHECK(m.score(toks("a b")) == 0.0);
  }
  SUBCASE("nautical corpus, several orders and alphas") {
    const auto corpus = nautical();
    std::vector<std::string> probes = corpus;
    probes.insert(probes.end(), {"", "the ship", "pirate pirate pirate", "unknown words here", "the sea !"});
    for (int order : {2, 3, 4}) {
      for (double alpha : {0.1, 1.0}) {
        auto m = NGramModel::train(corpus, order, alpha);
        for (const auto& s : probes) {
          const double expected = oracle::score(corpus, order, alpha, surfaces(tokenize(s)));
          CHECK(std::abs(m.score(toks(s)) - expected) < 1e-9);
        }
      }
    }
  }
  SUBCASE("ranking of two candidates follows the oracle") {
    const auto corpus = nautical();
    auto m = NGramModel::train(corpus, 3, 0.1);
    const std::string x = "the pirate ship wants gold.";
    const std::string y = "the gold ship wants pirate.";
    const bool oracle_order = oracle::score(corpus, 3, 0.1, surfaces(tokenize(x))) >
                              oracle::score(corpus, 3, 0.1, surfaces(tokenize(y)));
    CHECK(oracle_order == (m.score(toks(x)) > m.score(toks(y))));
    CHECK(oracle_order);
  }
  SUBCASE("empty sentence scores the boundary-only event") {
    auto m = NGramModel::train(std::vector<std::string>{"a b", "c"}, 2, 0.5);
    const double expected = std::log(m.probability(m.start_history(), m.boundary_id()));
    CHECK(m.score(std::vector<Token>{}) == expected);
    CHECK(m.score(std::vector<Token>{}) <= 0.0);
  }
}

TEST_CASE("prefix score strictly decreases when a token is appended") {
  auto m = NGramModel::train(nautical(), 3, 0.1);
  std::mt19937 rng(11);
  const auto& vocab = m.vocabulary();
  for (int i = 0; i < 300; ++i) {
    std::vector<Token> s;
    const int len = static_cast<int>(rng() % 8);
    for (int j = 0; j < len; ++j) s.push_back(make_token(vocab[1 + rng() % (vocab.size() - 1)]));
    const double before = m.score_prefix(s);
    s.push_back(make_token(rng() % 5 == 0 ? std::string("zzz") : vocab[1 + rng() % (vocab.size() - 1)]));
    CHECK(m.score_prefix(s) < before);
    CHECK(m.score(s) <= 0.0);
  }
}

TEST_CASE("model file round-trips bit-exactly") {
  auto m = NGramModel::train(nautical(), 3, 0.1, "nautical fixture");
  std::ostringstream a;
  m.save(a);
  std::istringstream in(a.str());
  auto loaded = NGramModel::load(in);
  std::ostringstream b;
  loaded.save(b);
  CHECK(a.str() == b.str());
  CHECK(loaded.alpha() == m.alpha());
  CHECK(loaded.trained_on() == m.trained_on());
  CHECK(loaded.score(toks("the pirate ship")) == m.score(toks("the pirate ship")));
  CHECK(loaded.line_words() == m.line_words());
}

TEST_CASE("malformed model files name the offending line") {
  auto m = NGramModel::train(std::vector<std::string>{"a b"}, 2, 0.1);
  std::ostringstream out;
  m.save(out);
  std::string text = out.str();
  text.replace(text.find("order 2"), 7, "order x");
  std::istringstream in(text);
  try {
    NGramModel::load(in);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream truncated(out.str().substr(0, out.str().size() / 2));
  CHECK(kind_of([&] { NGramModel::load(truncated); }) == ErrorKind::Data);
}

TEST_CASE("expand_topic") {
  const std::vector<std::string> corpus{"the ship and the sail", "ship sail wind", "a ship with a sail",
                                        "ship rope", "dog cat", "wind and rain"};
  SUBCASE("no seeds disables priming") {
    CHECK(expand_topic(corpus, std::vector<std::string>{}, 5).empty());
  }
  SUBCASE("strongest co-occurring word is added") {
    const std::vector<std::string> seeds{"ship"};
    auto topic = expand_topic(corpus, seeds, 1, 1.0, function_words());
    // brute force: lines holding both "ship" and the word
    std::map<std::string, int> cooc;
    for (const auto& line : corpus) {
      auto ws = words(tokenize(line));
      std::set<std::string> d(ws.begin(), ws.end());
      if (!d.count("ship")) continue;
      for (const auto& w : d) {
        if (w != "ship" && !function_words().count(w)) ++cooc[w];
      }
    }
    CHECK(cooc["sail"] == 3);
    for (const auto& [w, c] : cooc) CHECK(c <= cooc["sail"]);
    CHECK(topic.contains("sail"));
    CHECK(topic.weight("ship") == 1.0);
    CHECK(topic.expanded.size() == 2);
  }
  SUBCASE("weights normalised by the top count") {
    auto topic = expand_topic(corpus, std::vector<std::string>{"ship"}, 3, 1.0, function_words());
    CHECK(topic.weight("sail") == 1.0);
    CHECK(topic.weight("rope") == doctest::Approx(1.0 / 3.0));
    CHECK(topic.weight("wind") == doctest::Approx(1.0 / 3.0));
    for (const auto& [w, x] : topic.expanded) {
      CHECK(x > 0.0);
      CHECK(x <= 1.0);
    }
  }
  SUBCASE("absent seeds give the seeds alone") {
    auto topic = expand_topic(corpus, std::vector<std::string>{"volcano"}, 5);
    CHECK(topic.expanded == std::map<std::string, double>{{"volcano", 1.0}});
  }
  SUBCASE("model line index agrees with raw corpus") {
    auto m = NGramModel::train(corpus, 3, 0.1);
    const std::vector<std::string> seeds{"ship", "pirate"};
    CHECK(expand_topic(m, seeds, 4) == expand_topic(corpus, seeds, 4));
  }
}

TEST_CASE("generate") {
  SUBCASE("single possible continuation") {
    auto m = NGramModel::train(std::vector<std::string>{"hello there friend"}, 2, 0.0);
    auto s = generate(m, {}, TopicSet{}, 1234, 25);
    CHECK(surfaces(s) == std::vector<std::string>{"hello", "there", "friend"});
  }
  SUBCASE("pure function of its inputs") {
    auto m = NGramModel::train(nautical(), 3, 0.1);
    auto topic = expand_topic(m, std::vector<std::string>{"ship", "pirate"}, 5);
    const auto context = tokenize("where are we going?");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CHECK(generate(m, context, topic, seed, 25) == generate(m, context, topic, seed, 25));
    }
  }
  SUBCASE("max_len bounds the output and never yields an empty sentence") {
    auto m = NGramModel::train(nautical(), 2, 1.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto s = generate(m, {}, TopicSet{}, seed, 3);
      CHECK(!s.empty());
      CHECK(s.size() <= 3);
    }
    CHECK(kind_of([&] { generate(m, {}, TopicSet{}, 1, 0); }) == ErrorKind::Parameter);
  }
  SUBCASE("context tail seeds the history when it was observed") {
    auto m = NGramModel::train(std::vector<std::string>{"x y z", "q r"}, 2, 0.0);
    CHECK(surfaces(generate(m, tokenize("x"), TopicSet{}, 3, 10)) == std::vector<std::string>{"y", "z"});
    CHECK(initial_history(m, tokenize("never seen")) == m.start_history());
  }
  SUBCASE("priming raises the topic word frequency") {
    auto m = NGramModel::train(nautical(), 3, 0.1);
    auto primed = expand_topic(m, std::vector<std::string>{"ship"}, 5, 1.0, function_words());
    auto flat = primed;
    flat.bonus = 0.0;
    auto freq = [&](const TopicSet& t) {
      double hits = 0, total = 0;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        for (const auto& w : words(generate(m, {}, t, seed, 25))) {
          total += 1;
          hits += primed.contains(w) ? 1 : 0;
        }
      }
      return hits / total;
    };
    CHECK(freq(primed) > freq(flat));
  }
}

TEST_CASE("raising the bonus never lowers topic mass or a seed word's probability") {
  auto m = NGramModel::train(nautical(), 3, 0.1);
  auto topic = expand_topic(m, std::vector<std::string>{"ship", "pirate"}, 6, 0.0, function_words());
  std::vector<NGramModel::History> histories{m.start_history()};
  for (const auto& [h, row] : m.rows()) histories.push_back(h);
  for (const auto& h : histories) {
    double prev_mass = -1, prev_ship = -1;
    for (double bonus : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
      topic.bonus = bonus;
      auto p = primed_distribution(m, h, topic);
      double mass = 0;
      for (const auto& [w, x] : topic.expanded) mass += p[m.lookup(w)];
      const double ship = p[m.lookup("ship")];
      CHECK(mass >= prev_mass - 1e-15);
      CHECK(ship >= prev_ship - 1e-15);
      prev_mass = mass;
      prev_ship = ship;
    }
  }
}

TEST_CASE("concurrent scoring is consistent") {
  auto model = std::make_shared<const NGramModel>(NGramModel::train(nautical(), 3, 0.1));
  NGramBackend backend(model);
  const auto corpus = nautical();
  std::vector<double> reference;
  for (const auto& s : corpus) reference.push_back(backend.score(tokenize(s)));
  std::vector<std::thread> threads;
  std::vector<int> mismatches(8, 0);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int rep = 0; rep < 20; ++rep) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          if (backend.score(tokenize(corpus[i])) != reference[i]) ++mismatches[t];
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  for (int n : mismatches) CHECK(n == 0);
}
