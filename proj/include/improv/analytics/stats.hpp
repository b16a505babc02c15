#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "improv/analytics/features.hpp"
#include "improv/types.hpp"

namespace improv::analytics {

inline constexpr double kNormalZ95 = 1.96;

enum class IntervalMethod { Normal, StudentT };

struct Interval {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  double half_width() const { return (ci_high - ci_low) / 2.0; }
  bool overlaps(const Interval& other) const { return ci_low <= other.ci_high && other.ci_low <= ci_high; }
};

/// mean +- z * s / sqrt(n) with the sample standard deviation s. n = 1
/// collapses to the mean. Throws Error(Input) on an empty sample.
Interval mean_ci(std::span<const double> values, IntervalMethod method = IntervalMethod::Normal);

struct GroupStats {
  Source source = Source::Human;
  std::size_t n = 0;
  std::map<Feature, Interval> features;
};

struct TaggedLine {
  Source source = Source::Human;
  std::string text;
};

/// "SOURCE<TAB>text" per line; blank lines skipped. Unknown tags raise
/// Error(Input) naming the line.
std::vector<TaggedLine> parse_tagged_lines(std::string_view text);
std::vector<TaggedLine> read_tagged_lines(const std::string& path);

/// Per-source statistics for every source that has at least one line, in
/// the order PUPPET_MASTER, AI, SCRIPT, HUMAN.
std::vector<GroupStats> group_stats(std::span<const TaggedLine> lines, const Resources& resources,
                                    IntervalMethod method = IntervalMethod::Normal);
std::vector<GroupStats> group_stats(std::span<const std::pair<Source, FeatureVector>> rows,
                                    IntervalMethod method = IntervalMethod::Normal);

inline constexpr int kSurveyQuestions = 5;
inline constexpr int kDefaultScaleMax = 7;

struct SurveyResponse {
  std::string group;
  std::array<int, kSurveyQuestions> answers{};
};

/// "GROUP<TAB>q1,q2,q3,q4,q5" per line. Answers outside [scale_min,
/// scale_max] raise Error(Input) naming the line.
std::vector<SurveyResponse> parse_survey(std::string_view text, int scale_min = 1,
                                         int scale_max = kDefaultScaleMax);
std::vector<SurveyResponse> read_survey(const std::string& path, int scale_min = 1,
                                        int scale_max = kDefaultScaleMax);

struct SurveyGroupStats {
  std::string group;
  std::size_t n = 0;
  std::array<Interval, kSurveyQuestions> questions{};
};

/// Groups in order of first appearance.
std::vector<SurveyGroupStats> survey_aggregate(std::span<const SurveyResponse> responses,
                                               IntervalMethod method = IntervalMethod::Normal);

nlohmann::json to_json(const Interval& i);
nlohmann::json to_json(std::span<const SurveyGroupStats> groups);

}  // namespace improv::analytics
