#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "improv/analytics/report.hpp"
#include "improv/show/session.hpp"

namespace improv::gateway {

struct ModelDescriptor {
  std::string path;
  std::string corpus;
  int order = 0;
  double alpha = 0.0;
  std::size_t lines = 0;
  std::size_t tokens = 0;
  std::size_t vocabulary = 0;  // including the boundary marker
};

nlohmann::json to_json(const ModelDescriptor& d);

/// Trains on a corpus file and writes the model to `out_path`.
ModelDescriptor ingest_corpus(const std::string& corpus_path, int order, double alpha, const std::string& out_path);

/// Delivered lines of a show, tagged by source, in delivery order.
std::vector<analytics::TaggedLine> spoken_lines(const show::ShowSession& session);

struct ReplayReport {
  std::unique_ptr<show::ShowSession> session;
  show::LatencyStats latency;
  std::map<Source, std::size_t> line_counts;
  std::optional<analytics::CompareReport> analytics;  // when resources are given
};

nlohmann::json to_json(const ReplayReport& r);

/// Reads and replays a transcript file; analytics are computed when
/// `resources` is non-null. Parse errors carry the line number.
ReplayReport replay_file(const std::string& path, const analytics::Resources* resources = nullptr);
ReplayReport replay_text(std::string_view text, const analytics::Resources* resources = nullptr);

}  // namespace improv::gateway
