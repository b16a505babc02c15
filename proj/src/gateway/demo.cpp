#include "improv/gateway/demo.hpp"

#include <fstream>
#include <sstream>

#include "improv/error.hpp"
#include "improv/show/transcript.hpp"
#include "improv/textgen/ngram_model.hpp"

namespace improv::gateway {

using nlohmann::json;

namespace {

constexpr std::int64_t kScriptEpoch = 1'600'000'000'000;

std::shared_ptr<const textgen::LanguageBackend> backend_from(const json& step, const std::filesystem::path& base) {
  std::vector<std::string> lines;
  for (const auto& c : step.at("corpora")) {
    auto more = textgen::read_corpus_file((base / c.get<std::string>()).string());
    lines.insert(lines.end(), more.begin(), more.end());
  }
  auto model = std::make_shared<const textgen::NGramModel>(textgen::NGramModel::train(
      lines, step.value("order", textgen::kDefaultOrder), step.value("alpha", textgen::kDefaultAlpha), "demo"));
  return std::make_shared<const textgen::NGramBackend>(model);
}

}  // namespace

DemoResult run_demo_script(std::string_view script, const std::filesystem::path& base_dir) {
  auto now = std::make_shared<std::int64_t>(kScriptEpoch);
  std::unique_ptr<Gateway> gw;
  std::map<std::string, std::uint64_t> seq;
  DemoResult result;
  std::istringstream in{std::string(script)};
  std::string line;
  std::size_t line_no = 0;

  auto record = [&](const std::vector<Delivery>& out, const std::string& where) {
    for (const auto& d : out) {
      result.trace.push_back(d.token + " <- " + to_json(d.message).dump());
      if (d.message.type == MessageType::Error) {
        throw Error(ErrorKind::Data, where + ": " + d.token + " got ERROR " + d.message.payload.dump());
      }
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "script line " + std::to_string(line_no);
    json step = json::parse(line, nullptr, false);
    if (step.is_discarded() || !step.is_object()) throw Error(ErrorKind::Data, where + ": not a JSON object");
    try {
      const std::string op = step.at("op").get<std::string>();
      if (op == "model") {
        GatewayOptions o;
        o.backend = backend_from(step, base_dir);
        o.seed = step.value("seed", std::uint64_t{0});
        o.clock = [now] { return *now; };
        gw = std::make_unique<Gateway>(std::move(o));
        continue;
      }
      if (!gw) throw Error(ErrorKind::Data, "the first step must be \"model\"");
      *now = kScriptEpoch + step.at("at").get<std::int64_t>();
      if (op == "create") {
        show::SessionConfig c;
        c.session_id = step.at("session_id").get<std::string>();
        c.n_gen = step.value("n_gen", c.n_gen);
        c.k_show = step.value("k_show", c.k_show);
        gw->create_session(c);
        result.session_id = c.session_id;
      } else if (op == "role") {
        auto kind = parse_role(step.at("role").get<std::string>());
        if (!kind) throw Error(ErrorKind::Input, "unknown role");
        gw->assign_role(result.session_id, step.at("performer").get<std::string>(), *kind, step.value("secret", true));
      } else if (op == "token") {
        std::optional<std::string> performer;
        if (step.contains("performer") && !step["performer"].is_null()) performer = step["performer"].get<std::string>();
        gw->issue_token(result.session_id, performer, step.at("token").get<std::string>());
      } else if (op == "connect") {
        record(gw->connect(step.at("token").get<std::string>()), where);
      } else if (op == "disconnect") {
        gw->disconnect(step.at("token").get<std::string>());
      } else if (op == "live") {
        record(gw->go_live(result.session_id), where);
      } else if (op == "voting") {
        record(gw->open_voting(result.session_id), where);
      } else if (op == "close") {
        record(gw->close_session(result.session_id), where);
      } else if (op == "send") {
        const std::string token = step.at("token").get<std::string>();
        const json msg = {{"type", step.at("type")},
                          {"session_id", result.session_id},
                          {"seq", ++seq[token]},
                          {"payload", step.value("payload", json::object())}};
        const auto out = gw->handle(token, msg);
        record(out, where);
        if (step.contains("expect")) {
          for (const auto& [who, types] : step["expect"].items()) {
            for (const auto& [type, count] : types.items()) {
              std::size_t n = 0;
              for (const auto& d : out) n += d.token == who && to_string(d.message.type) == type;
              if (n != count.get<std::size_t>()) {
                throw Error(ErrorKind::Data, where + ": expected " + count.dump() + " " + type + " for " + who +
                                                 ", got " + std::to_string(n));
              }
            }
          }
        }
      } else {
        throw Error(ErrorKind::Data, "unknown op '" + op + "'");
      }
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.rfind("script line", 0) == 0) throw;
      throw Error(e.kind(), where + ": " + what);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Data, where + ": " + e.what());
    }
  }
  if (!gw || result.session_id.empty()) throw Error(ErrorKind::Data, "script never created a session");
  gw->inspect(result.session_id, [&](const show::ShowSession& s) { result.transcript = show::export_transcript_text(s); });
  return result;
}

DemoResult run_demo_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Data, "cannot read show script: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return run_demo_script(ss.str(), path.parent_path());
}

}  // namespace improv::gateway
