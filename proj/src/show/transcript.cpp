#include "improv/show/transcript.hpp"

#include <algorithm>

#include "improv/error.hpp"

namespace improv::show {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& why) {
  throw Error(ErrorKind::Data, "transcript " + where + ": " + why);
}

const json& member(const json& j, const std::string& where, const char* key) {
  if (!j.is_object()) bad(where, "expected an object");
  if (!j.contains(key)) bad(where, std::string("missing '") + key + "'");
  return j.at(key);
}

std::string str(const json& j, const std::string& where, const char* key) {
  const json& v = member(j, where, key);
  if (!v.is_string()) bad(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

TimeMs integer(const json& j, const std::string& where, const char* key) {
  const json& v = member(j, where, key);
  if (!v.is_number_integer()) bad(where, std::string("'") + key + "' must be an integer");
  return v.get<TimeMs>();
}

std::optional<TimeMs> optional_integer(const json& j, const std::string& where, const char* key) {
  const json& v = member(j, where, key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_integer()) bad(where, std::string("'") + key + "' must be an integer or null");
  return v.get<TimeMs>();
}

const json& array(const json& j, const std::string& where, const char* key) {
  const json& v = member(j, where, key);
  if (!v.is_array()) bad(where, std::string("'") + key + "' must be an array");
  return v;
}

json optional_time(const std::optional<TimeMs>& t) { return t ? json(*t) : json(nullptr); }

}  // namespace

json to_json(const SessionConfig& c) {
  return {{"session_id", c.session_id},   {"n_gen", c.n_gen},
          {"k_show", c.k_show},           {"scale_min", c.scale_min},
          {"scale_max", c.scale_max},     {"ceo_controllers", c.ceo_controllers},
          {"max_puppet_masters", c.max_puppet_masters}};
}

SessionConfig config_from_json(const json& j) {
  const std::string where = "config";
  SessionConfig c;
  c.session_id = str(j, where, "session_id");
  const TimeMs n_gen = integer(j, where, "n_gen");
  const TimeMs k_show = integer(j, where, "k_show");
  if (n_gen < 1 || k_show < 1) bad(where, "n_gen and k_show must be positive");
  c.n_gen = static_cast<std::size_t>(n_gen);
  c.k_show = static_cast<std::size_t>(k_show);
  c.scale_min = static_cast<int>(integer(j, where, "scale_min"));
  c.scale_max = static_cast<int>(integer(j, where, "scale_max"));
  c.ceo_controllers = static_cast<int>(integer(j, where, "ceo_controllers"));
  c.max_puppet_masters = static_cast<int>(integer(j, where, "max_puppet_masters"));
  return c;
}

std::map<Source, std::size_t> line_counts(const ShowSession& session) {
  std::map<Source, std::size_t> counts;
  for (Source s : kAllSources) counts[s] = 0;
  for (const Utterance* u : session.spoken_transcript()) ++counts[u->source];
  return counts;
}

json export_transcript(const ShowSession& session) {
  if (session.state() != SessionState::Voting && session.state() != SessionState::Closed) {
    throw Error(ErrorKind::State, "transcripts can be exported once voting has opened");
  }
  json config = to_json(session.config());
  json roster = json::array();
  for (const auto& [id, r] : session.roster()) {
    roster.push_back({{"performer", id}, {"role", to_string(r.kind)}, {"secret", r.secret}});
  }
  config["roster"] = roster;

  json scenes = json::array();
  std::size_t total = 0;
  for (const Scene& s : session.scenes()) {
    json utterances = json::array();
    for (const std::string& id : s.turns) {
      const Utterance& u = session.utterance(id);
      utterances.push_back({{"id", u.id},
                            {"text", u.text},
                            {"source", to_string(u.source)},
                            {"performer", u.performer},
                            {"created_at", u.created_at},
                            {"delivered_at", optional_time(u.delivered_at)},
                            {"spoken_ack_at", optional_time(u.spoken_ack_at)},
                            {"status", to_string(u.status)}});
      ++total;
    }
    scenes.push_back({{"id", s.id},
                      {"suggestion", s.suggestion},
                      {"started_at", s.started_at},
                      {"ended_at", optional_time(s.ended_at)},
                      {"utterances", utterances}});
  }

  json counts = json::object();
  for (const auto& [source, n] : line_counts(session)) counts[std::string(to_string(source))] = n;

  json votes = json::array();
  for (const auto& v : session.votes()) {
    json ballot = json::object();
    for (const auto& [performer, guess] : v.ballot) ballot[performer] = to_string(guess);
    votes.push_back({{"token", v.token}, {"ballot", ballot}});
  }

  return {{"session_id", session.config().session_id},
          {"state", to_string(session.state())},
          {"config", config},
          {"manifest", {{"line_counts", counts}, {"utterances", total}}},
          {"scenes", scenes},
          {"votes", votes}};
}

std::string export_transcript_text(const ShowSession& session) {
  return export_transcript(session).dump(2) + "\n";
}

json parse_transcript(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw Error(ErrorKind::Data, "transcript line " + std::to_string(line) + ": " + e.what());
  }
}

ShowSession replay_transcript(const json& t) {
  if (!t.is_object()) bad("", "top level must be an object");
  const json& config_json = member(t, "", "config");
  SessionConfig config = config_from_json(config_json);
  if (str(t, "", "session_id") != config.session_id) bad("", "session_id disagrees with config");
  const std::string state = str(t, "", "state");
  if (state != "voting" && state != "closed") bad("", "state must be 'voting' or 'closed'");

  std::vector<EventBody> setup;
  const json& roster = array(config_json, "config", "roster");
  for (std::size_t i = 0; i < roster.size(); ++i) {
    const std::string where = "config.roster[" + std::to_string(i) + "]";
    auto kind = parse_role(str(roster[i], where, "role"));
    if (!kind) bad(where, "unknown role");
    const json& secret = member(roster[i], where, "secret");
    if (!secret.is_boolean()) bad(where, "'secret' must be a boolean");
    setup.emplace_back(event::RoleAssigned{str(roster[i], where, "performer"), *kind, secret.get<bool>()});
  }
  setup.emplace_back(event::WentLive{});

  struct Timed {
    TimeMs at;
    EventBody body;
  };
  std::vector<Timed> timed;
  std::map<Source, std::size_t> counts;
  std::size_t total = 0;
  const json& scenes = array(t, "", "scenes");
  TimeMs last = 0;
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const std::string where = "scenes[" + std::to_string(si) + "]";
    const json& s = scenes[si];
    const std::string scene_id = str(s, where, "id");
    const TimeMs started = integer(s, where, "started_at");
    const auto ended = optional_integer(s, where, "ended_at");
    if (!ended) bad(where, "scene was never ended");
    timed.push_back({started, event::SceneStarted{scene_id, str(s, where, "suggestion")}});
    const json& us = array(s, where, "utterances");
    for (std::size_t ui = 0; ui < us.size(); ++ui) {
      const std::string uw = where + ".utterances[" + std::to_string(ui) + "]";
      const json& u = us[ui];
      auto source = parse_source(str(u, uw, "source"));
      if (!source) bad(uw, "unknown source");
      if (str(u, uw, "status") != "delivered") bad(uw, "only delivered lines belong in a transcript");
      const auto delivered = optional_integer(u, uw, "delivered_at");
      if (!delivered) bad(uw, "delivered line without delivered_at");
      const std::string id = str(u, uw, "id");
      timed.push_back({*delivered, event::LineEnqueued{id, str(u, uw, "performer"), str(u, uw, "text"), *source,
                                                       integer(u, uw, "created_at"), false}});
      timed.push_back({*delivered, event::LineDelivered{id}});
      if (auto ack = optional_integer(u, uw, "spoken_ack_at")) timed.push_back({*ack, event::SpokenAck{id}});
      ++counts[*source];
      ++total;
    }
    timed.push_back({*ended, event::SceneEnded{scene_id}});
  }
  std::stable_sort(timed.begin(), timed.end(), [](const Timed& a, const Timed& b) { return a.at < b.at; });
  for (const Timed& x : timed) last = std::max(last, x.at);

  const json& manifest = member(t, "", "manifest");
  const json& manifest_counts = member(manifest, "manifest", "line_counts");
  for (Source s : kAllSources) {
    const auto expected = integer(manifest_counts, "manifest.line_counts", std::string(to_string(s)).c_str());
    if (static_cast<std::size_t>(expected) != counts[s]) {
      bad("manifest", "line count for " + std::string(to_string(s)) + " is " + std::to_string(expected) +
                          " but the scenes hold " + std::to_string(counts[s]));
    }
  }
  if (static_cast<std::size_t>(integer(manifest, "manifest", "utterances")) != total) {
    bad("manifest", "utterance total disagrees with the scenes");
  }

  std::vector<Event> events;
  auto push = [&](TimeMs at, EventBody body) { events.push_back(Event{events.size(), at, std::move(body)}); };
  for (auto& b : setup) push(0, std::move(b));
  for (auto& x : timed) push(x.at, std::move(x.body));
  push(last, event::VotingOpened{});
  const json& votes = array(t, "", "votes");
  for (std::size_t vi = 0; vi < votes.size(); ++vi) {
    const std::string where = "votes[" + std::to_string(vi) + "]";
    event::VoteSubmitted v;
    v.token = str(votes[vi], where, "token");
    const json& ballot = member(votes[vi], where, "ballot");
    if (!ballot.is_object()) bad(where, "'ballot' must be an object");
    for (const auto& [performer, guess] : ballot.items()) {
      if (!guess.is_string()) bad(where, "guesses must be role names");
      auto kind = parse_role(guess.get<std::string>());
      if (!kind) bad(where, "unknown role in ballot");
      v.ballot[performer] = *kind;
    }
    push(last, std::move(v));
  }
  if (state == "closed") push(last, event::SessionClosed{});

  try {
    return ShowSession::replay(std::move(config), events, [] { return TimeMs{0}; });
  } catch (const Error& e) {
    throw Error(ErrorKind::Data, std::string("transcript is not a valid show history: ") + e.what());
  }
}

}  // namespace improv::show
