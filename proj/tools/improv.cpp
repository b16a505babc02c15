// improv: command line front end.
//
//   improv train   --corpus <path> --order <n> --alpha <a> --out <model>
//   improv serve   --model <path> --port <p> --blocklist <path> [--seed <s>]
//   improv analyze --lines <tagged-file> --out <report.json>
//   improv survey  --in <file> --out <report.json>
//   improv replay  --transcript <file>
//   improv demo    [--script <show.jsonl>] [--out <transcript.json>]
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "improv/analytics/report.hpp"
#include "improv/analytics/stats.hpp"
#include "improv/error.hpp"
#include "improv/gateway/artifacts.hpp"
#include "improv/gateway/demo.hpp"
#include "improv/gateway/server.hpp"
#include "improv/textgen/ngram_model.hpp"

namespace {

using namespace improv;
using nlohmann::json;

constexpr int kUsage = 1;
constexpr int kDataError = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Data, "cannot write " + path);
  out << text;
}

std::shared_ptr<const analytics::Resources> load_resources(const std::string& dir, bool required) {
  if (!std::filesystem::exists(dir)) {
    if (required) throw Error(ErrorKind::Data, "lexicon directory not found: " + dir);
    return nullptr;
  }
  return std::make_shared<const analytics::Resources>(analytics::Resources::load_dir(dir));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Improvised theatre show server, line generator and analytics"};
  app.require_subcommand(1);
  const std::string default_lexicon = std::string(IMPROV_DATA_DIR) + "/lexicon";

  // train
  auto* train = app.add_subcommand("train", "train an n-gram model on a corpus");
  std::string corpus, model_out;
  int order = textgen::kDefaultOrder;
  double alpha = textgen::kDefaultAlpha;
  train->add_option("--corpus", corpus, "one utterance per line")->required();
  train->add_option("--order", order, "n-gram order (>= 2)")->capture_default_str();
  train->add_option("--alpha", alpha, "add-alpha smoothing (>= 0)")->capture_default_str();
  train->add_option("--out", model_out, "model file to write")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "run the show gateway");
  std::string model_path, serve_corpus, blocklist_path, log_dir, lexicon_dir = default_lexicon, host = "127.0.0.1";
  int port = 7700, http_port = -1;
  std::uint64_t seed = 0;
  int timeout_ms = static_cast<int>(gateway::kDefaultProposeTimeout.count());
  auto* model_opt = serve->add_option("--model", model_path, "trained model file");
  serve->add_option("--corpus", serve_corpus, "train at startup instead of loading --model")->excludes(model_opt);
  serve->add_option("--port", port, "stream port; HTTP listens on port+1")->capture_default_str();
  serve->add_option("--http-port", http_port, "explicit HTTP port");
  serve->add_option("--host", host, "listen address")->capture_default_str();
  serve->add_option("--blocklist", blocklist_path, "words that must never reach a performer");
  serve->add_option("--seed", seed, "base seed for candidate generation")->capture_default_str();
  serve->add_option("--log-dir", log_dir, "directory for durable session logs");
  serve->add_option("--lexicon", lexicon_dir, "analytics resources directory")->capture_default_str();
  serve->add_option("--timeout-ms", timeout_ms, "candidate generation deadline")->capture_default_str();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "lexical features per source");
  std::string lines_path, analyze_out;
  bool student_t = false;
  analyze->add_option("--lines", lines_path, "SOURCE<TAB>text per line")->required();
  analyze->add_option("--out", analyze_out, "report file ('-' for stdout)")->required();
  analyze->add_option("--lexicon", lexicon_dir, "analytics resources directory")->capture_default_str();
  analyze->add_flag("--student-t", student_t, "Student-t intervals instead of the normal approximation");

  // survey
  auto* survey = app.add_subcommand("survey", "aggregate questionnaire answers");
  std::string survey_in, survey_out;
  int scale_min = 1, scale_max = analytics::kDefaultScaleMax;
  survey->add_option("--in", survey_in, "GROUP<TAB>q1,...,q5 per line")->required();
  survey->add_option("--out", survey_out, "report file ('-' for stdout)")->required();
  survey->add_option("--scale-min", scale_min)->capture_default_str();
  survey->add_option("--scale-max", scale_max)->capture_default_str();
  survey->add_flag("--student-t", student_t, "Student-t intervals instead of the normal approximation");

  // replay
  auto* replay = app.add_subcommand("replay", "rebuild a show from its transcript");
  std::string transcript_path, replay_out = "-";
  replay->add_option("--transcript", transcript_path, "exported transcript")->required();
  replay->add_option("--out", replay_out, "report file ('-' for stdout)")->capture_default_str();
  replay->add_option("--lexicon", lexicon_dir, "analytics resources directory")->capture_default_str();

  // demo
  auto* demo = app.add_subcommand("demo", "run a scripted show and export its transcript");
  std::string script_path = std::string(IMPROV_DATA_DIR) + "/demo/two_scene_show.jsonl", demo_out = "-";
  bool trace = false;
  demo->add_option("--script", script_path, "show script (JSON lines)")->capture_default_str();
  demo->add_option("--out", demo_out, "transcript file ('-' for stdout)")->capture_default_str();
  demo->add_flag("--trace", trace, "print every message to stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train) {
      const auto d = gateway::ingest_corpus(corpus, order, alpha, model_out);
      std::cout << gateway::to_json(d).dump(2) << "\n";
    } else if (*serve) {
      if (model_path.empty() && serve_corpus.empty()) {
        std::cerr << "serve: one of --model or --corpus is required\n";
        return kUsage;
      }
      std::shared_ptr<const textgen::NGramModel> model;
      if (!model_path.empty()) {
        model = std::make_shared<const textgen::NGramModel>(textgen::NGramModel::load_file(model_path));
      } else {
        model = std::make_shared<const textgen::NGramModel>(
            textgen::NGramModel::train(textgen::read_corpus_file(serve_corpus), order, alpha, serve_corpus));
      }
      gateway::GatewayOptions o;
      o.backend = std::make_shared<const textgen::NGramBackend>(model);
      if (!blocklist_path.empty()) o.blocklist = curation::Blocklist::load_file(blocklist_path);
      o.seed = seed;
      o.propose_timeout = std::chrono::milliseconds(timeout_ms);
      if (!log_dir.empty()) o.log_dir = log_dir;
      gateway::Gateway gw(std::move(o));
      gateway::ServerConfig sc;
      sc.host = host;
      sc.port = port;
      if (http_port >= 0) sc.http_port = http_port;
      sc.resources = load_resources(lexicon_dir, false);
      gateway::Server server(gw, sc);
      server.start();
      std::cerr << "stream on " << host << ":" << server.stream_port() << ", http on " << host << ":"
                << server.http_port() << " (" << model->vocabulary_size() << " word vocabulary, "
                << gw.session_ids().size() << " recovered sessions)\n";
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    } else if (*analyze) {
      const auto resources = load_resources(lexicon_dir, true);
      const auto lines = analytics::read_tagged_lines(lines_path);
      const auto method = student_t ? analytics::IntervalMethod::StudentT : analytics::IntervalMethod::Normal;
      const auto report = analytics::compare_report(analytics::group_stats(lines, *resources, method));
      write_output(analyze_out, analytics::to_json(report).dump(2) + "\n");
    } else if (*survey) {
      const auto method = student_t ? analytics::IntervalMethod::StudentT : analytics::IntervalMethod::Normal;
      const auto stats = analytics::survey_aggregate(analytics::read_survey(survey_in, scale_min, scale_max), method);
      write_output(survey_out, analytics::to_json(stats).dump(2) + "\n");
    } else if (*replay) {
      const auto resources = load_resources(lexicon_dir, false);
      const auto report = gateway::replay_file(transcript_path, resources.get());
      write_output(replay_out, gateway::to_json(report).dump(2) + "\n");
    } else if (*demo) {
      const auto result = gateway::run_demo_file(script_path);
      if (trace)
        for (const auto& t : result.trace) std::cerr << t << "\n";
      write_output(demo_out, result.transcript);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Parameter ? kUsage : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return 0;
}
