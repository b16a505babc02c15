#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "analytics_fixtures.hpp"
#include "improv/analytics/report.hpp"
#include "improv/analytics/stats.hpp"
#include "improv/error.hpp"
#include "oracles.hpp"

using namespace improv;
using namespace improv::analytics;

namespace {

const Resources& fixture_resources() {
  static const Resources r = Resources::load_dir(fixture::analytics_dir());
  return r;
}

const Resources& bundled_resources() {
  static const Resources r = Resources::load_dir(std::string(IMPROV_DATA_DIR) + "/lexicon");
  return r;
}

Interval ci_oracle(const std::vector<double>& xs) {
  const double m = oracle::mean(xs);
  if (xs.size() == 1) return {m, m, m};
  const double h = 1.96 * oracle::sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
  return {m, m - h, m + h};
}

const Claim& claim(const CompareReport& r, const std::string& name) {
  auto it = std::find_if(r.claims.begin(), r.claims.end(), [&](const Claim& c) { return c.name == name; });
  REQUIRE(it != r.claims.end());
  return *it;
}

const FeatureComparison& comparison(const CompareReport& r, Feature f) {
  auto it = std::find_if(r.comparisons.begin(), r.comparisons.end(),
                         [&](const FeatureComparison& c) { return c.feature == f; });
  REQUIRE(it != r.comparisons.end());
  return *it;
}

CompareReport directional(const std::string& name) {
  auto lines = read_tagged_lines(std::string(IMPROV_DATA_DIR) + "/fixtures/directional/" + name + ".tsv");
  return compare_report(group_stats(lines, bundled_resources()));
}

}  // namespace

TEST_CASE("syllable heuristic") {
  CHECK(syllables("cat") == 1);
  CHECK(syllables("hello") == 2);
  CHECK(syllables("queue") == 1);
  CHECK(syllables("the") == 1);
  CHECK(syllables("made") == 1);
  CHECK(syllables("terrible") == 2);
  CHECK(syllables("rhythm") == 1);
  CHECK(syllables("psst") == 1);
}

TEST_CASE("analysis words keep contractions and drop numbers") {
  CHECK(analysis_words("Don't be sad, 42 pirates") == std::vector<std::string>{"don't", "be", "sad", "pirates"});
  CHECK(analysis_words("...!").empty());
}

TEST_CASE("hand-scored ten-line fixture") {
  const auto lines = read_tagged_lines(fixture::analytics_dir() + "/ten_lines.tsv");
  REQUIRE(lines.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& want = fixture::kTenLines[i];
    CAPTURE(want.text);
    REQUIRE(lines[i].text == want.text);
    const FeatureVector got = features(lines[i].text, fixture_resources());
    CHECK(got.error_count == want.error_count);
    CHECK(got.words_per_sentence == want.words_per_sentence);
    CHECK(std::abs(got.syllables_per_word - want.syllables_per_word) <= 1e-9);
    CHECK(std::abs(got.difficult_ratio - want.difficult_ratio) <= 1e-9);
    CHECK(std::abs(got.sentiment - want.sentiment) <= 1e-9);
  }
}

TEST_CASE("empty line is the zero vector") {
  CHECK(features("", fixture_resources()) == FeatureVector{});
  CHECK(features("  ?! ", fixture_resources()) == FeatureVector{});
}

TEST_CASE("bundled lexicon sentiment for 'good'") {
  const auto v = bundled_resources().lexicon.valence("good");
  REQUIRE(v);
  CHECK(*v == doctest::Approx(1.9));
  CHECK(std::abs(features("good", bundled_resources()).sentiment - *v / std::sqrt(*v * *v + 15)) <= 1e-12);
}

TEST_CASE("typo line against bundled dictionary") {
  CHECK(features("We are stuck in the dessert?", fixture_resources()).error_count == 1);
  CHECK(features("We are stuck in the desert?", fixture_resources()).error_count == 0);
}

TEST_CASE("negation flips a single lexicon word") {
  const auto& lex = fixture_resources().lexicon;
  for (const char* w : {"good", "bad", "happy", "love"}) {
    const std::vector<std::string> plain{w};
    for (const char* neg : {"not", "never", "no"}) {
      const std::vector<std::string> one{neg, w};
      const std::vector<std::string> two{neg, "very", w};
      const std::vector<std::string> three{neg, "so", "very", w};
      CHECK(sentiment_sum(one, lex) == -sentiment_sum(plain, lex));
      CHECK(sentiment_sum(two, lex) == -sentiment_sum(plain, lex));
      CHECK(sentiment_sum(three, lex) == sentiment_sum(plain, lex));
    }
  }
}

TEST_CASE("feature ranges over random lines") {
  std::mt19937 rng(7);
  const std::vector<std::string> pool{"good", "bad", "love", "love", "hate", "not", "never", "elephant",
                                      "beautiful", "xyzzy", "the", "ship", ".", "!", "?", ",", "42", "terrible"};
  const auto& res = bundled_resources();
  for (int i = 0; i < 500; ++i) {
    std::string line;
    const int n = static_cast<int>(rng() % 30);
    for (int k = 0; k < n; ++k) line += pool[rng() % pool.size()] + " ";
    const auto f = features(line, res);
    CAPTURE(line);
    CHECK(std::isfinite(f.sentiment));
    CHECK(f.sentiment >= -1.0);
    CHECK(f.sentiment <= 1.0);
    CHECK(f.difficult_ratio >= 0.0);
    CHECK(f.difficult_ratio <= 1.0);
    CHECK(f.error_count >= 0);
    // appending a short easy word never raises the difficult ratio
    CHECK(features(line + " the", res).difficult_ratio <= f.difficult_ratio + 1e-15);
  }
}

TEST_CASE("mean_ci closed form") {
  const std::vector<double> xs{1, 2, 3};
  const Interval i = mean_ci(xs);
  CHECK(i.mean == 2.0);
  CHECK(std::abs(i.ci_low - (2 - 1.96 / std::sqrt(3.0))) <= 1e-12);
  CHECK(std::abs(i.ci_high - (2 + 1.96 / std::sqrt(3.0))) <= 1e-12);

  const std::vector<double> one{4.5};
  const Interval d = mean_ci(one);
  CHECK(d.ci_low == 4.5);
  CHECK(d.ci_high == 4.5);

  CHECK_THROWS_AS(mean_ci(std::vector<double>{}), Error);

  // Student-t with 2 degrees of freedom: t(0.975, 2) = 4.3026527297...
  const Interval t = mean_ci(xs, IntervalMethod::StudentT);
  CHECK(t.half_width() == doctest::Approx(4.302652729749464 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("group_stats against oracle and under duplication") {
  const auto lines = read_tagged_lines(fixture::analytics_dir() + "/ten_lines.tsv");
  const auto groups = group_stats(lines, fixture_resources());
  REQUIRE(groups.size() == 4);
  CHECK(groups[0].source == Source::PuppetMaster);
  CHECK(groups[1].source == Source::AI);
  CHECK(groups[2].source == Source::Script);
  CHECK(groups[3].source == Source::Human);
  for (const auto& g : groups) {
    std::vector<double> column[5];
    for (std::size_t i = 0; i < 10; ++i) {
      if (lines[i].source != g.source) continue;
      const auto& h = fixture::kTenLines[i];
      column[0].push_back(h.syllables_per_word);
      column[1].push_back(h.words_per_sentence);
      column[2].push_back(h.difficult_ratio);
      column[3].push_back(h.sentiment);
      column[4].push_back(h.error_count);
    }
    CHECK(g.n == column[0].size());
    for (std::size_t f = 0; f < 5; ++f) {
      const Interval want = ci_oracle(column[f]);
      const Interval got = g.features.at(kAllFeatures[f]);
      CHECK(std::abs(got.mean - want.mean) <= 1e-9);
      CHECK(std::abs(got.ci_low - want.ci_low) <= 1e-9);
      CHECK(std::abs(got.ci_high - want.ci_high) <= 1e-9);
      CHECK(got.ci_low <= got.mean);
      CHECK(got.mean <= got.ci_high);
    }
  }

  // permutation invariance
  auto shuffled = lines;
  std::mt19937 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto again = group_stats(shuffled, fixture_resources());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (Feature f : kAllFeatures) {
      CHECK(again[g].features.at(f).mean == doctest::Approx(groups[g].features.at(f).mean).epsilon(1e-12));
      CHECK(again[g].features.at(f).half_width() ==
            doctest::Approx(groups[g].features.at(f).half_width()).epsilon(1e-12));
    }
}

TEST_CASE("duplicating a sample") {
  const std::vector<double> xs{0.5, 1.25, 3.0, 2.0, 7.5};
  std::vector<double> doubled = xs;
  doubled.insert(doubled.end(), xs.begin(), xs.end());
  const Interval a = mean_ci(xs);
  const Interval b = mean_ci(doubled);
  CHECK(std::abs(a.mean - b.mean) <= 1e-12);
  // With s held fixed the half width scales as 1/sqrt(n).
  const double ratio_fixed_s = (a.half_width() / oracle::sample_sd(xs)) / (b.half_width() / oracle::sample_sd(doubled));
  CHECK(std::abs(ratio_fixed_s - std::sqrt(2.0)) <= 1e-9);
  // The sample deviation itself moves by sqrt((n-1)/(2n-1)) * sqrt(2).
  const double n = 5;
  CHECK(std::abs(a.half_width() / b.half_width() - std::sqrt((2 * n - 1) / (n - 1))) <= 1e-9);
}

TEST_CASE("tagged line parsing errors") {
  CHECK(parse_tagged_lines("AI\thello\n\nHUMAN\thi\n").size() == 2);
  try {
    parse_tagged_lines("AI\thello\nROBOT\thi\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_tagged_lines("AI hello"), Error);
}

TEST_CASE("survey parsing and aggregation") {
  const auto one = parse_survey("TOR\t4,4,4,4,4\n");
  const auto agg = survey_aggregate(one);
  REQUIRE(agg.size() == 1);
  for (const auto& q : agg[0].questions) {
    CHECK(q.mean == 4.0);
    CHECK(q.ci_low == 4.0);
    CHECK(q.ci_high == 4.0);
  }

  const char* seven =
      "LON\t1,2,3,4,5\nLON\t2,2,3,4,6\nLON\t3,2,3,5,7\nLON\t4,3,3,5,7\n"
      "LON\t5,3,3,6,7\nLON\t6,4,3,6,1\nLON\t7,5,3,7,2\n";
  const auto responses = parse_survey(seven);
  REQUIRE(responses.size() == 7);
  const auto stats = survey_aggregate(responses);
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].n == 7);
  for (std::size_t q = 0; q < 5; ++q) {
    std::vector<double> col;
    for (const auto& r : responses) col.push_back(r.answers[q]);
    const Interval want = ci_oracle(col);
    CHECK(std::abs(stats[0].questions[q].mean - want.mean) <= 1e-9);
    CHECK(std::abs(stats[0].questions[q].ci_low - want.ci_low) <= 1e-9);
    CHECK(std::abs(stats[0].questions[q].ci_high - want.ci_high) <= 1e-9);
  }
  // constant column collapses
  CHECK(stats[0].questions[2].half_width() == 0.0);

  CHECK_THROWS_AS(parse_survey("TOR\t4,4,4,4,8\n"), Error);
  CHECK_THROWS_AS(parse_survey("TOR\t4,4,4,4\n"), Error);
  CHECK_THROWS_AS(parse_survey("TOR\t4,4,4,4,4,4\n"), Error);
  CHECK_THROWS_AS(parse_survey("TOR\t4,4,x,4,4\n"), Error);
  CHECK(parse_survey("TOR\t9,9,9,9,9\n", 1, 9).size() == 1);
  try {
    parse_survey("TOR\t1,1,1,1,1\nSTO\t0,1,1,1,1\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("bundled survey demo cohorts") {
  const auto stats = survey_aggregate(read_survey(std::string(IMPROV_DATA_DIR) + "/fixtures/survey_demo.tsv"));
  const std::vector<std::pair<std::string, std::size_t>> want{{"TOR", 4},     {"STO", 6},      {"LON", 7},
                                                              {"EDM", 9},     {"LON-AUD", 6}, {"STO-AUD", 22},
                                                              {"EDM-AUD", 29}};
  REQUIRE(stats.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(stats[i].group == want[i].first);
    CHECK(stats[i].n == want[i].second);
  }
}

TEST_CASE("directional fixture: shorter puppet lines") {
  const auto r = directional("shorter_puppet");
  const auto& wps = comparison(r, Feature::WordsPerSentence);
  REQUIRE(!wps.ascending.empty());
  CHECK(wps.ascending.front() == Source::PuppetMaster);
  const auto pm = std::find(wps.ascending.begin(), wps.ascending.end(), Source::PuppetMaster);
  const auto script = std::find(wps.ascending.begin(), wps.ascending.end(), Source::Script);
  CHECK(pm < script);
  CHECK(claim(r, "puppet_shorter_lines").status == ClaimStatus::Supported);
  CHECK(claim(r, "puppet_shorter_lines").ci_separated);
  CHECK(claim(r, "human_more_positive").status == ClaimStatus::NotEvaluable);
}

TEST_CASE("directional fixture: misspellings in puppet lines") {
  const auto r = directional("puppet_errors");
  CHECK(comparison(r, Feature::ErrorCount).ascending.back() == Source::PuppetMaster);
  CHECK(claim(r, "puppet_more_errors").status == ClaimStatus::Supported);
}

TEST_CASE("directional fixture: positive human lines") {
  const auto r = directional("human_positive");
  CHECK(comparison(r, Feature::Sentiment).ascending.back() == Source::Human);
  CHECK(claim(r, "human_more_positive").status == ClaimStatus::Supported);
  CHECK(claim(r, "human_more_positive").ci_separated);
}

TEST_CASE("claims can be contradicted") {
  // swap tags: script lines labelled as puppet
  auto lines = read_tagged_lines(std::string(IMPROV_DATA_DIR) + "/fixtures/directional/shorter_puppet.tsv");
  for (auto& l : lines) {
    if (l.source == Source::PuppetMaster) l.source = Source::Script;
    else if (l.source == Source::Script) l.source = Source::PuppetMaster;
  }
  const auto r = compare_report(group_stats(lines, bundled_resources()));
  CHECK(claim(r, "puppet_shorter_lines").status == ClaimStatus::Contradicted);
}

TEST_CASE("single source report has no comparisons") {
  const std::vector<TaggedLine> lines{{Source::AI, "hello there."}, {Source::AI, "the ship sails."}};
  const auto r = compare_report(group_stats(lines, bundled_resources()));
  CHECK(r.groups.size() == 1);
  CHECK(r.comparisons.empty());
  for (const auto& c : r.claims) CHECK(c.status == ClaimStatus::NotEvaluable);
  const auto j = to_json(r);
  CHECK(j["sources"].contains("AI"));
  CHECK(j["sources"]["AI"]["n"] == 2);
  CHECK(j["sources"]["AI"]["words_per_sentence"]["mean"] == 2.5);
  CHECK(j["comparisons"].empty());
}
