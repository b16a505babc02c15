#include "improv/analytics/report.hpp"

#include <algorithm>

namespace improv::analytics {

namespace {

std::size_t source_rank(Source s) {
  return static_cast<std::size_t>(std::find(kAllSources.begin(), kAllSources.end(), s) - kAllSources.begin());
}

const GroupStats* find_group(const std::vector<GroupStats>& groups, Source s) {
  for (const auto& g : groups)
    if (g.source == s) return &g;
  return nullptr;
}

void evaluate(Claim& claim, const std::vector<GroupStats>& groups) {
  const GroupStats* subject = find_group(groups, claim.subject);
  if (!subject || groups.size() < 2) {
    claim.status = ClaimStatus::NotEvaluable;
    claim.ci_separated = false;
    return;
  }
  const Interval& mine = subject->features.at(claim.feature);
  bool holds = true;
  bool separated = true;
  for (const auto& g : groups) {
    if (g.source == claim.subject) continue;
    const Interval& other = g.features.at(claim.feature);
    holds = holds && (claim.highest ? mine.mean > other.mean : mine.mean < other.mean);
    separated = separated && !mine.overlaps(other);
  }
  claim.status = holds ? ClaimStatus::Supported : ClaimStatus::Contradicted;
  claim.ci_separated = holds && separated;
}

}  // namespace

std::string_view to_string(ClaimStatus s) {
  switch (s) {
    case ClaimStatus::Supported: return "supported";
    case ClaimStatus::Contradicted: return "contradicted";
    case ClaimStatus::NotEvaluable: return "not_evaluable";
  }
  return "?";
}

std::vector<Claim> default_claims() {
  return {
      {"puppet_shorter_lines", Source::PuppetMaster, Feature::WordsPerSentence, false},
      {"puppet_more_errors", Source::PuppetMaster, Feature::ErrorCount, true},
      {"human_more_positive", Source::Human, Feature::Sentiment, true},
  };
}

CompareReport compare_report(std::vector<GroupStats> groups, std::vector<Claim> claims) {
  std::sort(groups.begin(), groups.end(),
            [](const GroupStats& a, const GroupStats& b) { return source_rank(a.source) < source_rank(b.source); });
  CompareReport report;
  if (groups.size() >= 2) {
    for (Feature f : kAllFeatures) {
      FeatureComparison cmp;
      cmp.feature = f;
      std::vector<const GroupStats*> order;
      for (const auto& g : groups) order.push_back(&g);
      std::stable_sort(order.begin(), order.end(), [f](const GroupStats* a, const GroupStats* b) {
        return a->features.at(f).mean < b->features.at(f).mean;
      });
      for (const auto* g : order) cmp.ascending.push_back(g->source);
      for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = i + 1; j < groups.size(); ++j)
          cmp.pairs.push_back({groups[i].source, groups[j].source,
                               groups[i].features.at(f).overlaps(groups[j].features.at(f))});
      report.comparisons.push_back(std::move(cmp));
    }
  }
  for (Claim& c : claims) evaluate(c, groups);
  report.groups = std::move(groups);
  report.claims = std::move(claims);
  return report;
}

nlohmann::json to_json(const CompareReport& report) {
  using nlohmann::json;
  json sources = json::object();
  for (const auto& g : report.groups) {
    json entry = {{"n", g.n}};
    for (Feature f : kAllFeatures) entry[std::string(to_string(f))] = to_json(g.features.at(f));
    sources[std::string(to_string(g.source))] = entry;
  }
  json comparisons = json::object();
  for (const auto& c : report.comparisons) {
    json ascending = json::array();
    for (Source s : c.ascending) ascending.push_back(std::string(to_string(s)));
    json overlaps = json::array();
    for (const auto& p : c.pairs)
      overlaps.push_back({{"a", std::string(to_string(p.a))}, {"b", std::string(to_string(p.b))}, {"overlap", p.overlap}});
    comparisons[std::string(to_string(c.feature))] = {{"ascending", ascending}, {"overlaps", overlaps}};
  }
  json claims = json::array();
  for (const auto& c : report.claims) {
    claims.push_back({{"name", c.name},
                      {"source", std::string(to_string(c.subject))},
                      {"feature", std::string(to_string(c.feature))},
                      {"direction", c.highest ? "highest" : "lowest"},
                      {"status", std::string(to_string(c.status))},
                      {"ci_separated", c.ci_separated}});
  }
  return {{"sources", sources}, {"comparisons", comparisons}, {"claims", claims}};
}

}  // namespace improv::analytics
