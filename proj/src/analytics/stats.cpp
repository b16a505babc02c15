#include "improv/analytics/stats.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "improv/error.hpp"

namespace improv::analytics {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void bad_line(const char* what, std::size_t line_no, const std::string& why) {
  throw Error(ErrorKind::Input, std::string(what) + " line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

Interval mean_ci(std::span<const double> values, IntervalMethod method) {
  if (values.empty()) throw Error(ErrorKind::Input, "cannot summarise an empty sample");
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() == 1) return {mean, mean, mean};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  double z = kNormalZ95;
  if (method == IntervalMethod::StudentT) {
    boost::math::students_t dist(n - 1.0);
    z = boost::math::quantile(boost::math::complement(dist, 0.025));
  }
  const double half = z * sd / std::sqrt(n);
  return {mean, mean - half, mean + half};
}

std::vector<TaggedLine> parse_tagged_lines(std::string_view text) {
  std::vector<TaggedLine> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) bad_line("tagged lines", line_no, "expected SOURCE<TAB>text");
    auto source = parse_source(line.substr(0, tab));
    if (!source) bad_line("tagged lines", line_no, "unknown source tag '" + line.substr(0, tab) + "'");
    out.push_back({*source, line.substr(tab + 1)});
  }
  return out;
}

std::vector<TaggedLine> read_tagged_lines(const std::string& path) { return parse_tagged_lines(slurp(path)); }

std::vector<GroupStats> group_stats(std::span<const std::pair<Source, FeatureVector>> rows, IntervalMethod method) {
  std::vector<GroupStats> out;
  for (Source source : kAllSources) {
    std::map<Feature, std::vector<double>> columns;
    std::size_t n = 0;
    for (const auto& [s, fv] : rows) {
      if (s != source) continue;
      ++n;
      for (Feature f : kAllFeatures) columns[f].push_back(fv.get(f));
    }
    if (n == 0) continue;
    GroupStats g;
    g.source = source;
    g.n = n;
    for (Feature f : kAllFeatures) g.features[f] = mean_ci(columns[f], method);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GroupStats> group_stats(std::span<const TaggedLine> lines, const Resources& resources,
                                    IntervalMethod method) {
  std::vector<std::pair<Source, FeatureVector>> rows;
  rows.reserve(lines.size());
  for (const TaggedLine& l : lines) rows.emplace_back(l.source, features(l.text, resources));
  return group_stats(rows, method);
}

std::vector<SurveyResponse> parse_survey(std::string_view text, int scale_min, int scale_max) {
  if (scale_min > scale_max) throw Error(ErrorKind::Parameter, "empty survey scale");
  std::vector<SurveyResponse> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) bad_line("survey", line_no, "expected GROUP<TAB>q1,q2,q3,q4,q5");
    SurveyResponse r;
    r.group = line.substr(0, tab);
    std::istringstream answers(line.substr(tab + 1));
    std::string piece;
    int q = 0;
    while (std::getline(answers, piece, ',')) {
      if (q == kSurveyQuestions) bad_line("survey", line_no, "more than five answers");
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(piece, &used);
      } catch (const std::exception&) {
        bad_line("survey", line_no, "answer '" + piece + "' is not an integer");
      }
      if (used != piece.size()) bad_line("survey", line_no, "answer '" + piece + "' is not an integer");
      if (v < scale_min || v > scale_max) {
        bad_line("survey", line_no,
                 "answer " + std::to_string(v) + " outside [" + std::to_string(scale_min) + ", " +
                     std::to_string(scale_max) + "]");
      }
      r.answers[static_cast<std::size_t>(q++)] = v;
    }
    if (q != kSurveyQuestions) bad_line("survey", line_no, "expected exactly five answers");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SurveyResponse> read_survey(const std::string& path, int scale_min, int scale_max) {
  return parse_survey(slurp(path), scale_min, scale_max);
}

std::vector<SurveyGroupStats> survey_aggregate(std::span<const SurveyResponse> responses, IntervalMethod method) {
  std::vector<std::string> order;
  std::map<std::string, std::array<std::vector<double>, kSurveyQuestions>> columns;
  for (const SurveyResponse& r : responses) {
    if (!columns.count(r.group)) order.push_back(r.group);
    auto& cols = columns[r.group];
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) cols[q].push_back(r.answers[q]);
  }
  std::vector<SurveyGroupStats> out;
  for (const std::string& g : order) {
    SurveyGroupStats s;
    s.group = g;
    s.n = columns[g][0].size();
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) s.questions[q] = mean_ci(columns[g][q], method);
    out.push_back(std::move(s));
  }
  return out;
}

nlohmann::json to_json(const Interval& i) {
  return {{"mean", i.mean}, {"ci_low", i.ci_low}, {"ci_high", i.ci_high}};
}

nlohmann::json to_json(std::span<const SurveyGroupStats> groups) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& g : groups) {
    nlohmann::json questions = nlohmann::json::object();
    for (std::size_t q = 0; q < kSurveyQuestions; ++q) questions["q" + std::to_string(q + 1)] = to_json(g.questions[q]);
    out[g.group] = {{"n", g.n}, {"questions", questions}};
  }
  return out;
}

}  // namespace improv::analytics
