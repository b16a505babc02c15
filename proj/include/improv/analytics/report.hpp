#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "improv/analytics/stats.hpp"

namespace improv::analytics {

struct PairOverlap {
  Source a = Source::Human;
  Source b = Source::Human;
  bool overlap = true;
};

struct FeatureComparison {
  Feature feature = Feature::SyllablesPerWord;
  std::vector<Source> ascending;  // by mean, ties broken by source order
  std::vector<PairOverlap> pairs;
};

enum class ClaimStatus { Supported, Contradicted, NotEvaluable };
std::string_view to_string(ClaimStatus s);

/// A directional statement of the form "subject is lowest/highest on feature
/// among all sources present".
struct Claim {
  std::string name;
  Source subject = Source::PuppetMaster;
  Feature feature = Feature::WordsPerSentence;
  bool highest = false;
  ClaimStatus status = ClaimStatus::NotEvaluable;
  bool ci_separated = false;  // subject CI overlaps no other source's CI
};

struct CompareReport {
  std::vector<GroupStats> groups;
  std::vector<FeatureComparison> comparisons;  // empty with fewer than two sources
  std::vector<Claim> claims;
};

/// Directions reported in the study: puppet-master lines are shorter and
/// carry more errors; human lines are more positive.
std::vector<Claim> default_claims();

CompareReport compare_report(std::vector<GroupStats> groups, std::vector<Claim> claims = default_claims());

/// {"sources": {SOURCE: {"n": .., FEATURE: {mean, ci_low, ci_high}}},
///  "comparisons": {FEATURE: {"ascending": [...], "overlaps": [...]}},
///  "claims": [...]}
nlohmann::json to_json(const CompareReport& report);

}  // namespace improv::analytics
