#include "improv/gateway/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "improv/error.hpp"
#include "improv/show/transcript.hpp"
#include "improv/textgen/ngram_model.hpp"

namespace improv::gateway {

using nlohmann::json;

json to_json(const ModelDescriptor& d) {
  return {{"path", d.path},   {"corpus", d.corpus}, {"order", d.order},          {"alpha", d.alpha},
          {"lines", d.lines}, {"tokens", d.tokens}, {"vocabulary", d.vocabulary}};
}

ModelDescriptor ingest_corpus(const std::string& corpus_path, int order, double alpha, const std::string& out_path) {
  const auto lines = textgen::read_corpus_file(corpus_path);
  const auto model = textgen::NGramModel::train(lines, order, alpha, corpus_path);
  model.save_file(out_path);
  return {out_path,
          corpus_path,
          model.order(),
          model.alpha(),
          model.trained_on().lines,
          model.trained_on().tokens,
          model.vocabulary_size()};
}

std::vector<analytics::TaggedLine> spoken_lines(const show::ShowSession& session) {
  std::vector<analytics::TaggedLine> out;
  for (const show::Utterance* u : session.spoken_transcript()) out.push_back({u->source, u->text});
  return out;
}

json to_json(const ReplayReport& r) {
  json per = json::array();
  for (const auto& [id, seconds] : r.latency.per_utterance) per.push_back({{"utterance", id}, {"seconds", seconds}});
  json counts = json::object();
  for (const auto& [source, n] : r.line_counts) counts[std::string(to_string(source))] = n;
  json out = {{"session_id", r.session->config().session_id},
              {"state", std::string(to_string(r.session->state()))},
              {"scenes", r.session->scenes().size()},
              {"line_counts", counts},
              {"latency",
               {{"median", r.latency.median ? json(*r.latency.median) : json(nullptr)},
                {"max", r.latency.max ? json(*r.latency.max) : json(nullptr)},
                {"per_utterance", per}}}};
  if (r.analytics) out["analytics"] = analytics::to_json(*r.analytics);
  return out;
}

ReplayReport replay_text(std::string_view text, const analytics::Resources* resources) {
  ReplayReport r;
  r.session = std::make_unique<show::ShowSession>(show::replay_transcript(show::parse_transcript(text)));
  r.latency = r.session->latency_stats();
  r.line_counts = show::line_counts(*r.session);
  if (resources) {
    const auto lines = spoken_lines(*r.session);
    if (!lines.empty()) r.analytics = analytics::compare_report(analytics::group_stats(lines, *resources));
  }
  return r;
}

ReplayReport replay_file(const std::string& path, const analytics::Resources* resources) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, "cannot read transcript: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return replay_text(ss.str(), resources);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace improv::gateway
