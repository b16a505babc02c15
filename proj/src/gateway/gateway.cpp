#include "improv/gateway/gateway.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <random>
#include <thread>

#include "improv/error.hpp"
#include "improv/show/transcript.hpp"

namespace improv::gateway {

using nlohmann::json;

struct Gateway::Slot {
  mutable std::mutex mu;
  std::string id;
  std::int64_t epoch = 0;
  show::SessionConfig config;
  std::unique_ptr<show::ShowSession> session;
  std::map<std::string, std::uint64_t> last_seq;
  std::map<std::string, curation::CandidateSet> sets;
  std::size_t next_set = 1;
  std::uint64_t out_seq = 0;
  std::FILE* log = nullptr;

  ~Slot() {
    if (log) std::fclose(log);
  }
};

namespace {

std::string error_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::State: return code::kState;
    case ErrorKind::Role: return code::kRoleForbidden;
    default: return code::kInvalid;
  }
}

std::string random_token() {
  static std::mutex mu;
  static std::random_device rd;
  std::lock_guard lock(mu);
  static const char* hex = "0123456789abcdef";
  std::string t;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t v = rd();
    for (int k = 0; k < 8; ++k, v >>= 4) t.push_back(hex[v & 0xf]);
  }
  return t;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool is_controller(RoleKind k) { return k == RoleKind::CeoController || k == RoleKind::PuppetMaster; }

bool allowed(MessageType type, std::optional<RoleKind> role) {
  if (type == MessageType::Tally) return true;
  if (!role) return type == MessageType::VoteSubmit;
  switch (type) {
    case MessageType::ContextSubmit:
    case MessageType::LineSelect:
      return *role == RoleKind::CeoController;
    case MessageType::LineTyped:
      return *role == RoleKind::PuppetMaster;
    case MessageType::SceneStart:
    case MessageType::SceneEnd:
      return is_controller(*role);
    case MessageType::LineSkip:
    case MessageType::LineSpoken:
      return receives_lines(*role);
    default:
      return false;
  }
}

json events_json(const show::ShowSession& s, std::size_t from) {
  json out = json::array();
  const auto& log = s.event_log();
  for (std::size_t i = from; i < log.size(); ++i) out.push_back(show::to_json(log[i]));
  return out;
}

json candidate_set_json(const curation::CandidateSet& set) {
  json cands = json::array();
  for (std::size_t idx : set.presented) {
    const auto& c = set.generated[idx];
    cands.push_back({{"text", c.text}, {"score", c.score}});
  }
  return {{"id", set.id}, {"context", set.context}, {"created_at", set.created_at}, {"candidates", cands}};
}

curation::CandidateSet candidate_set_from_json(const json& j) {
  curation::CandidateSet set;
  set.id = j.at("id").get<std::string>();
  set.context = j.at("context").get<std::string>();
  set.created_at = j.at("created_at").get<TimeMs>();
  int rank = 1;
  for (const auto& c : j.at("candidates")) {
    curation::Candidate cand;
    cand.text = c.at("text").get<std::string>();
    cand.tokens = textgen::tokenize(cand.text);
    cand.score = c.at("score").get<double>();
    cand.rank_score = cand.score;
    cand.rank = rank++;
    set.presented.push_back(set.generated.size());
    set.generated.push_back(std::move(cand));
  }
  return set;
}

std::string sole_receiver(const show::ShowSession& s, RoleKind kind, const json& payload) {
  if (payload.contains("performer")) {
    const std::string p = payload["performer"].get<std::string>();
    const show::Role* r = s.role_of(p);
    if (!r || r->kind != kind) {
      throw ProtocolError(code::kInvalid, "'" + p + "' is not a " + std::string(to_string(kind)));
    }
    return p;
  }
  std::vector<std::string> found;
  for (const auto& [name, role] : s.roster())
    if (role.kind == kind) found.push_back(name);
  if (found.size() != 1) {
    throw ProtocolError(code::kInvalid, "name the target performer: the session has " + std::to_string(found.size()) +
                                            " " + std::string(to_string(kind)) + " performers");
  }
  return found.front();
}

Message make(MessageType type, const std::string& session_id, json payload) {
  Message m;
  m.type = type;
  m.session_id = session_id;
  m.payload = std::move(payload);
  return m;
}

}  // namespace

WallClock system_clock_ms() {
  return [] {
    return static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                         std::chrono::system_clock::now().time_since_epoch())
                                         .count());
  };
}

json to_json(const show::VoteTally& tally) {
  json counts = json::object();
  for (const auto& [performer, guesses] : tally.counts) {
    json g = json::object();
    for (const auto& [kind, n] : guesses) g[std::string(to_string(kind))] = n;
    counts[performer] = g;
  }
  json accuracy = json::object();
  for (const auto& [kind, a] : tally.accuracy) accuracy[std::string(to_string(kind))] = a;
  return {{"ballots", tally.ballots}, {"counts", counts}, {"accuracy", accuracy}};
}

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_clock_ms();
  if (!options_.log_dir) return;
  std::filesystem::create_directories(*options_.log_dir);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(*options_.log_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) recover(f);
}

Gateway::~Gateway() = default;

Gateway::Slot& Gateway::slot(const std::string& session_id) const {
  std::shared_lock lock(registry_mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorKind::Parameter, "no session '" + session_id + "'");
  return *it->second;
}

void Gateway::append(Slot& s, json record) {
  if (!s.log) return;
  const std::string line = record.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), s.log) != line.size() || std::fflush(s.log) != 0 ||
      ::fsync(fileno(s.log)) != 0) {
    throw Error(ErrorKind::Data, "cannot append to the log of session " + s.id);
  }
}

void Gateway::recover(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::string line;
  std::uintmax_t good_bytes = 0;
  std::size_t line_no = 0;
  auto s = std::make_unique<Slot>();
  std::vector<show::Event> events;
  std::vector<TokenClaim> claims;
  bool created = false;
  while (std::getline(in, line)) {
    ++line_no;
    const bool complete = !in.eof();
    json rec = json::parse(line, nullptr, false);
    if (!complete || rec.is_discarded()) {
      // A torn final record is the only acceptable damage: it was never
      // acknowledged, so dropping it is the "absent" outcome.
      if (in.peek() != std::char_traits<char>::eof() && complete) {
        throw Error(ErrorKind::Data, file.string() + " line " + std::to_string(line_no) + ": corrupt record");
      }
      break;
    }
    good_bytes += line.size() + 1;
    const std::string kind = rec.at("kind").get<std::string>();
    if (kind == "create") {
      s->config = show::config_from_json(rec.at("config"));
      s->epoch = rec.at("epoch").get<std::int64_t>();
      s->id = s->config.session_id;
      created = true;
      continue;
    }
    if (!created) throw Error(ErrorKind::Data, file.string() + ": log does not start with a create record");
    if (kind == "token") {
      TokenClaim c{rec.at("token").get<std::string>(), s->id, std::nullopt};
      if (!rec.at("performer").is_null()) c.performer = rec.at("performer").get<std::string>();
      claims.push_back(std::move(c));
    }
    if (rec.contains("events"))
      for (const auto& e : rec["events"]) events.push_back(show::event_from_json(e));
    if (rec.contains("out")) s->out_seq = rec["out"].get<std::uint64_t>();
    if (kind == "message") s->last_seq[rec.at("token").get<std::string>()] = rec.at("seq").get<std::uint64_t>();
    if (rec.contains("set")) {
      auto set = candidate_set_from_json(rec["set"]);
      s->next_set = std::max<std::size_t>(s->next_set, std::stoul(set.id.substr(1)) + 1);
      s->sets[set.id] = std::move(set);
    }
    if (rec.contains("resolved")) {
      auto& set = s->sets.at(rec["resolved"].at("id").get<std::string>());
      set.outcome = rec["resolved"].at("discard").get<bool>() ? curation::Outcome::Discarded
                                                                : curation::Outcome::Selected;
      set.selected = rec["resolved"].at("positions").get<std::vector<int>>();
    }
  }
  in.close();
  if (!created) return;
  std::filesystem::resize_file(file, good_bytes);
  const auto clock = options_.clock;
  const auto epoch = s->epoch;
  s->session = std::make_unique<show::ShowSession>(
      show::ShowSession::replay(s->config, events, [clock, epoch] { return clock() - epoch; }));
  s->log = std::fopen(file.c_str(), "ab");
  if (!s->log) throw Error(ErrorKind::Data, "cannot reopen " + file.string());
  std::unique_lock lock(registry_mu_);
  for (auto& c : claims) tokens_[c.token] = std::move(c);
  const std::string id = s->id;
  sessions_[id] = std::move(s);
}

void Gateway::create_session(const show::SessionConfig& config) {
  if (config.session_id.empty() ||
      !std::all_of(config.session_id.begin(), config.session_id.end(),
                   [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'; })) {
    throw Error(ErrorKind::Parameter, "session id must be non-empty and use only letters, digits, '-' and '_'");
  }
  auto s = std::make_unique<Slot>();
  s->id = config.session_id;
  s->config = config;
  s->epoch = options_.clock();
  const auto clock = options_.clock;
  const auto epoch = s->epoch;
  s->session = std::make_unique<show::ShowSession>(config, [clock, epoch] { return clock() - epoch; });
  std::unique_lock lock(registry_mu_);
  if (sessions_.count(config.session_id)) throw Error(ErrorKind::State, "session '" + config.session_id + "' exists");
  if (options_.log_dir) {
    const auto path = *options_.log_dir / (config.session_id + ".jsonl");
    s->log = std::fopen(path.c_str(), "ab");
    if (!s->log) throw Error(ErrorKind::Data, "cannot create " + path.string());
    append(*s, {{"kind", "create"}, {"config", show::to_json(config)}, {"epoch", s->epoch}});
  }
  sessions_[config.session_id] = std::move(s);
}

bool Gateway::has_session(const std::string& session_id) const {
  std::shared_lock lock(registry_mu_);
  return sessions_.count(session_id) > 0;
}

std::vector<std::string> Gateway::session_ids() const {
  std::shared_lock lock(registry_mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::vector<Delivery> Gateway::admin_step(const std::string& session_id,
                                          const std::function<void(show::ShowSession&)>& step,
                                          bool broadcast_tally) {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mu);
  const std::size_t before = s.session->event_log().size();
  try {
    step(*s.session);
  } catch (...) {
    if (s.session->event_log().size() != before) {
      std::vector<show::Event> prefix(s.session->event_log().begin(), s.session->event_log().begin() + before);
      const auto clock = options_.clock;
      const auto epoch = s.epoch;
      s.session = std::make_unique<show::ShowSession>(
          show::ShowSession::replay(s.config, prefix, [clock, epoch] { return clock() - epoch; }));
    }
    throw;
  }
  std::vector<Delivery> out = broadcast_hello(s);
  if (broadcast_tally) {
    const json tally = to_json(s.session->tally_votes());
    for (const auto& t : tokens_where(s.id, [](const TokenClaim&) { return true; }))
      out.push_back({t, make(MessageType::Tally, s.id, tally)});
  }
  stamp(s, out);
  append(s, {{"kind", "admin"}, {"events", events_json(*s.session, before)}, {"out", s.out_seq}});
  return out;
}

void Gateway::assign_role(const std::string& session_id, const std::string& performer, RoleKind kind, bool secret) {
  admin_step(session_id, [&](show::ShowSession& s) { s.assign_role(performer, kind, secret); }, false);
}

std::vector<Delivery> Gateway::go_live(const std::string& session_id) {
  return admin_step(session_id, [](show::ShowSession& s) { s.go_live(); }, false);
}

std::vector<Delivery> Gateway::open_voting(const std::string& session_id) {
  return admin_step(session_id, [](show::ShowSession& s) { s.open_voting(); }, false);
}

std::vector<Delivery> Gateway::close_session(const std::string& session_id) {
  return admin_step(session_id, [](show::ShowSession& s) { s.close(); }, true);
}

std::string Gateway::issue_token(const std::string& session_id, std::optional<std::string> performer,
                                 std::string token) {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mu);
  if (performer && !s.session->role_of(*performer)) {
    throw Error(ErrorKind::Parameter, "'" + *performer + "' has no role in session " + session_id);
  }
  if (token.empty()) token = random_token();
  {
    std::unique_lock reg(registry_mu_);
    if (tokens_.count(token)) throw Error(ErrorKind::Parameter, "token already issued");
    tokens_[token] = {token, session_id, performer};
  }
  append(s, {{"kind", "token"}, {"token", token}, {"performer", performer ? json(*performer) : json(nullptr)}});
  return token;
}

std::optional<TokenClaim> Gateway::claim(const std::string& token) const {
  std::shared_lock lock(registry_mu_);
  auto it = tokens_.find(token);
  if (it == tokens_.end()) return std::nullopt;
  return it->second;
}

bool Gateway::connected(const std::string& token) const {
  std::shared_lock lock(registry_mu_);
  return connected_.count(token) > 0;
}

std::vector<std::string> Gateway::tokens_where(const std::string& session_id,
                                               const std::function<bool(const TokenClaim&)>& pred) const {
  std::shared_lock lock(registry_mu_);
  std::vector<std::string> out;
  for (const auto& t : connected_) {
    const TokenClaim& c = tokens_.at(t);
    if (c.session_id == session_id && pred(c)) out.push_back(t);
  }
  return out;
}

json Gateway::hello_payload(const Slot& s, const TokenClaim& c) const {
  const show::ShowSession& session = *s.session;
  json p = {{"state", std::string(to_string(session.state()))}};
  std::optional<RoleKind> kind;
  if (c.performer) {
    p["performer"] = *c.performer;
    kind = session.role_of(*c.performer)->kind;
    p["role"] = std::string(to_string(*kind));
  } else {
    p["role"] = "AUDIENCE";
  }
  // Controllers run the hidden set-up and see it; everyone else only learns
  // who is on stage.
  json roster = json::array();
  for (const auto& [name, role] : session.roster()) {
    if (kind && is_controller(*kind)) {
      roster.push_back({{"performer", name}, {"role", std::string(to_string(role.kind))}});
    } else if (on_stage(role.kind)) {
      roster.push_back({{"performer", name}});
    }
  }
  p["roster"] = roster;
  return p;
}

std::vector<Delivery> Gateway::broadcast_hello(Slot& s) {
  std::vector<Delivery> out;
  for (const auto& t : tokens_where(s.id, [](const TokenClaim&) { return true; }))
    out.push_back({t, make(MessageType::Hello, s.id, hello_payload(s, *claim(t)))});
  return out;
}

Message Gateway::line_deliver(const Slot& s, const show::Utterance& u) const {
  return make(MessageType::LineDeliver, s.id,
              {{"utterance_id", u.id}, {"text", u.text}, {"speak", true}, {"interrupting", u.interrupting}});
}

std::vector<Delivery> Gateway::push_queue(Slot& s, const std::string& performer) {
  std::vector<Delivery> out;
  const auto targets =
      tokens_where(s.id, [&](const TokenClaim& c) { return c.performer && *c.performer == performer; });
  if (targets.empty()) return out;
  for (const auto& id : s.session->queue(performer))
    for (const auto& t : targets) out.push_back({t, line_deliver(s, s.session->utterance(id))});
  return out;
}

void Gateway::stamp(Slot& s, std::vector<Delivery>& out) {
  for (auto& d : out) d.message.seq = ++s.out_seq;
}

std::vector<Delivery> Gateway::connect(const std::string& token) {
  auto c = claim(token);
  if (!c) throw ProtocolError(code::kUnauthorized, "unknown token");
  Slot& s = slot(c->session_id);
  std::lock_guard lock(s.mu);
  {
    std::unique_lock reg(registry_mu_);
    connected_.insert(token);
  }
  std::vector<Delivery> out{{token, make(MessageType::Hello, s.id, hello_payload(s, *c))}};
  if (c->performer) {
    // Re-send this performer's whole queue, in order, to the new stream only.
    for (const auto& id : s.session->queue(*c->performer))
      out.push_back({token, line_deliver(s, s.session->utterance(id))});
  }
  stamp(s, out);
  append(s, {{"kind", "admin"}, {"events", json::array()}, {"out", s.out_seq}});
  return out;
}

void Gateway::disconnect(const std::string& token) {
  std::unique_lock reg(registry_mu_);
  connected_.erase(token);
}

std::vector<Delivery> Gateway::handle(const std::string& token, std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    auto c = claim(token);
    return {{token, make_error(c ? c->session_id : "", code::kBadMessage, "message is not valid JSON")}};
  }
  return handle(token, j);
}

std::vector<Delivery> Gateway::handle(const std::string& token, const json& raw) {
  auto c = claim(token);
  if (!c) return {{token, make_error("", code::kUnauthorized, "unknown token")}};
  std::optional<std::uint64_t> ref;
  if (raw.is_object() && raw.contains("seq") && raw["seq"].is_number_integer() && raw["seq"].get<std::int64_t>() >= 0) ref = raw["seq"].get<std::uint64_t>();
  Message m;
  try {
    m = parse_message(raw);
  } catch (const ProtocolError& e) {
    return {{token, make_error(c->session_id, e.code(), e.what(), ref)}};
  }
  if (m.session_id != c->session_id) {
    return {{token, make_error(c->session_id, code::kUnauthorized, "token is not valid for this session", ref)}};
  }
  Slot& s = slot(c->session_id);
  std::lock_guard lock(s.mu);
  std::vector<Delivery> out;
  if (m.type == MessageType::Hello) {
    out.push_back({token, make(MessageType::Hello, s.id, hello_payload(s, *c))});
    stamp(s, out);
    append(s, {{"kind", "admin"}, {"events", json::array()}, {"out", s.out_seq}});
    return out;
  }
  const std::uint64_t last = s.last_seq.count(token) ? s.last_seq.at(token) : 0;
  if (m.seq <= last) {
    out.push_back({token, make(MessageType::Ack, s.id, {{"ack", m.seq}, {"duplicate", true}})});
    stamp(s, out);
    append(s, {{"kind", "admin"}, {"events", json::array()}, {"out", s.out_seq}});
    return out;
  }
  if (m.seq != last + 1) {
    out.push_back({token, make_error(s.id, code::kSeqGap,
                                     "expected seq " + std::to_string(last + 1) + ", got " + std::to_string(m.seq),
                                     m.seq)});
    stamp(s, out);
    append(s, {{"kind", "admin"}, {"events", json::array()}, {"out", s.out_seq}});
    return out;
  }

  const std::size_t before = s.session->event_log().size();
  json record = {{"kind", "message"}, {"token", token}, {"seq", m.seq}};
  std::optional<RoleKind> role;
  if (c->performer) role = s.session->role_of(*c->performer)->kind;
  try {
    if (server_only(m.type) || !allowed(m.type, role)) {
      throw ProtocolError(code::kRoleForbidden, std::string(role ? to_string(*role) : "AUDIENCE") + " may not send " +
                                                   std::string(to_string(m.type)));
    }
    out = dispatch(s, *c, m, record);
    out.insert(out.begin(), {token, make(MessageType::Ack, s.id, {{"ack", m.seq}})});
  } catch (const std::exception& e) {
    if (s.session->event_log().size() != before) {
      std::vector<show::Event> prefix(s.session->event_log().begin(), s.session->event_log().begin() + before);
      const auto clock = options_.clock;
      const auto epoch = s.epoch;
      s.session = std::make_unique<show::ShowSession>(
          show::ShowSession::replay(s.config, prefix, [clock, epoch] { return clock() - epoch; }));
    }
    record.erase("set");
    record.erase("resolved");
    std::string ecode = code::kInternal;
    if (auto* pe = dynamic_cast<const ProtocolError*>(&e)) ecode = pe->code();
    if (auto* ie = dynamic_cast<const Error*>(&e)) ecode = error_code(ie->kind());
    out = {{token, make_error(s.id, ecode, e.what(), m.seq)}};
  }
  s.last_seq[token] = m.seq;
  stamp(s, out);
  record["events"] = events_json(*s.session, before);
  record["out"] = s.out_seq;
  append(s, std::move(record));
  return out;
}

std::vector<Delivery> Gateway::dispatch(Slot& s, const TokenClaim& c, const Message& m, json& record) {
  show::ShowSession& session = *s.session;
  const json& p = m.payload;
  std::vector<Delivery> out;
  auto everyone = [&](MessageType type, json payload) {
    for (const auto& t : tokens_where(s.id, [](const TokenClaim&) { return true; }))
      out.push_back({t, make(type, s.id, payload)});
  };

  switch (m.type) {
    case MessageType::ContextSubmit: {
      if (session.state() != show::SessionState::Live) throw Error(ErrorKind::State, "the show is not live");
      if (!options_.backend) throw Error(ErrorKind::State, "no language model is loaded");
      const TimeMs created_at = options_.clock() - s.epoch;
      const std::string set_id = "c" + std::to_string(s.next_set);
      std::uint64_t seed_state = options_.seed ^ fnv1a(s.id) ^ (s.next_set * 0x9e3779b97f4a7c15ull);
      const std::uint64_t seed = p.contains("seed") ? p["seed"].get<std::uint64_t>() : curation::splitmix64(seed_state);
      std::vector<std::string> seeds = p.value("topic", std::vector<std::string>{});
      const double lambda = p.value("lambda", textgen::kDefaultTopicBonus);
      const std::string context = p["context"].get<std::string>();

      curation::ProposeOptions po;
      po.n_gen = s.config.n_gen;
      po.k_show = s.config.k_show;
      po.ranking = options_.ranking;
      auto promise = std::make_shared<std::promise<curation::CandidateSet>>();
      auto future = promise->get_future();
      std::thread([promise, backend = options_.backend, blocklist = options_.blocklist, seeds, lambda, context,
                   set_id, seed, po, created_at, k = options_.topic_expansion] {
        try {
          textgen::TopicSet topic;
          if (!seeds.empty()) topic = backend->prime(seeds, k, lambda);
          promise->set_value(curation::propose(*backend, set_id, context, topic, seed, blocklist, po, created_at));
        } catch (...) {
          promise->set_exception(std::current_exception());
        }
      }).detach();
      if (future.wait_for(options_.propose_timeout) != std::future_status::ready) {
        throw ProtocolError(code::kTimeout, "candidate generation exceeded " +
                                                std::to_string(options_.propose_timeout.count()) + " ms");
      }
      curation::CandidateSet set = future.get();
      ++s.next_set;
      json cands = json::array();
      for (std::size_t i = 0; i < set.presented.size(); ++i) {
        const auto& cand = set.generated[set.presented[i]];
        cands.push_back({{"position", i + 1}, {"text", cand.text}, {"score", cand.score}});
      }
      record["set"] = candidate_set_json(set);
      out.push_back({c.token, make(MessageType::Candidates, s.id,
                                   {{"set_id", set.id}, {"context", set.context}, {"candidates", cands}})});
      s.sets[set.id] = std::move(set);
      break;
    }
    case MessageType::LineSelect: {
      auto it = s.sets.find(p["set_id"].get<std::string>());
      if (it == s.sets.end()) throw ProtocolError(code::kInvalid, "unknown candidate set");
      const std::string target = sole_receiver(session, RoleKind::Cyborg, p);
      curation::CandidateSet trial = it->second;
      const bool discard = p.value("discard", false);
      const auto decision = discard ? curation::Decision::discard_all()
                                    : curation::Decision::select(p["positions"].get<std::vector<int>>());
      const auto lines = curation::resolve(trial, decision);
      for (const auto& line : lines) {
        const auto& u = session.enqueue_line(target, line);
        for (const auto& t :
             tokens_where(s.id, [&](const TokenClaim& tc) { return tc.performer && *tc.performer == target; }))
          out.push_back({t, line_deliver(s, u)});
      }
      it->second = std::move(trial);
      record["resolved"] = {{"id", it->first}, {"discard", discard}, {"positions", it->second.selected}};
      break;
    }
    case MessageType::LineTyped: {
      const std::string target = sole_receiver(session, RoleKind::Puppet, p);
      LineRequest line{p["text"].get<std::string>(), Source::PuppetMaster, options_.clock() - s.epoch,
                       p.value("interrupting", false)};
      const auto& u = session.enqueue_line(target, line);
      for (const auto& t :
           tokens_where(s.id, [&](const TokenClaim& tc) { return tc.performer && *tc.performer == target; }))
        out.push_back({t, line_deliver(s, u)});
      break;
    }
    case MessageType::LineSkip:
      session.skip_line(*c.performer, p["utterance_id"].get<std::string>());
      break;
    case MessageType::LineSpoken: {
      const std::string id = p["utterance_id"].get<std::string>();
      const auto q = session.queue(*c.performer);
      if (q.empty() || q.front() != id) {
        throw Error(ErrorKind::State, "utterance " + id + " is not at the head of the queue");
      }
      session.next_line(*c.performer);
      session.acknowledge_spoken(*c.performer, id);
      break;
    }
    case MessageType::SceneStart: {
      const auto& scene = session.start_scene(p["suggestion"].get<std::string>());
      everyone(MessageType::SceneStart, {{"scene_id", scene.id}, {"suggestion", scene.suggestion}});
      break;
    }
    case MessageType::SceneEnd: {
      const auto& scene = session.end_scene();
      everyone(MessageType::SceneEnd, {{"scene_id", scene.id}});
      break;
    }
    case MessageType::VoteSubmit: {
      if (session.state() != show::SessionState::Voting) throw Error(ErrorKind::State, "voting is not open");
      show::Ballot ballot;
      for (const auto& [performer, guess] : p["ballot"].items()) {
        auto kind = parse_role(guess.get<std::string>());
        if (!kind) throw ProtocolError(code::kInvalid, "unknown role '" + guess.get<std::string>() + "'");
        ballot[performer] = *kind;
      }
      session.submit_vote(c.token, ballot);
      break;
    }
    case MessageType::Tally: {
      if (session.state() != show::SessionState::Voting && session.state() != show::SessionState::Closed) {
        throw Error(ErrorKind::State, "the tally is available once voting opens");
      }
      out.push_back({c.token, make(MessageType::Tally, s.id, to_json(session.tally_votes()))});
      break;
    }
    default:
      throw ProtocolError(code::kRoleForbidden, "clients may not send " + std::string(to_string(m.type)));
  }
  return out;
}

void Gateway::inspect(const std::string& session_id, const std::function<void(const show::ShowSession&)>& fn) const {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mu);
  fn(*s.session);
}

json Gateway::public_snapshot(const std::string& session_id) const {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mu);
  const auto& session = *s.session;
  json performers = json::array();
  for (const auto& [name, role] : session.roster())
    if (on_stage(role.kind)) performers.push_back(name);
  const show::Scene* open = session.open_scene();
  const auto c = session.counters();
  return {{"session_id", s.id},
          {"state", std::string(to_string(session.state()))},
          {"performers", performers},
          {"scenes", session.scenes().size()},
          {"open_scene", open ? json(open->id) : json(nullptr)},
          {"lines", {{"enqueued", c.enqueued}, {"delivered", c.delivered}, {"skipped", c.skipped}, {"queued", c.queued}}},
          {"ballots", session.votes().size()}};
}

std::optional<curation::CandidateSet> Gateway::candidate_set(const std::string& session_id,
                                                             const std::string& set_id) const {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mu);
  auto it = s.sets.find(set_id);
  if (it == s.sets.end()) return std::nullopt;
  return it->second;
}

}  // namespace improv::gateway
