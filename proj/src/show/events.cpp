#include "improv/show/events.hpp"

#include "improv/error.hpp"

namespace improv::show {

using nlohmann::json;

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorKind::Data, "malformed event: " + why); }

const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing '") + key + "'");
  return j.at(key);
}

std::string str(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_string()) bad(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t integer(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_number_integer()) bad(std::string("'") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

bool boolean(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_boolean()) bad(std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

RoleKind role(const std::string& s) {
  auto k = parse_role(s);
  if (!k) bad("unknown role '" + s + "'");
  return *k;
}

}  // namespace

std::string_view event_name(const EventBody& body) {
  return std::visit(overloaded{
                        [](const event::RoleAssigned&) { return "role_assigned"; },
                        [](const event::WentLive&) { return "went_live"; },
                        [](const event::SceneStarted&) { return "scene_started"; },
                        [](const event::SceneEnded&) { return "scene_ended"; },
                        [](const event::LineEnqueued&) { return "line_enqueued"; },
                        [](const event::LineDelivered&) { return "line_delivered"; },
                        [](const event::LineSkipped&) { return "line_skipped"; },
                        [](const event::SpokenAck&) { return "spoken_ack"; },
                        [](const event::VotingOpened&) { return "voting_opened"; },
                        [](const event::VoteSubmitted&) { return "vote_submitted"; },
                        [](const event::SessionClosed&) { return "session_closed"; },
                    },
                    body);
}

json to_json(const Event& e) {
  json j{{"index", e.index}, {"at", e.at}, {"type", event_name(e.body)}};
  std::visit(overloaded{
                 [&](const event::RoleAssigned& b) {
                   j["performer"] = b.performer;
                   j["role"] = to_string(b.kind);
                   j["secret"] = b.secret;
                 },
                 [](const event::WentLive&) {},
                 [&](const event::SceneStarted& b) {
                   j["scene_id"] = b.scene_id;
                   j["suggestion"] = b.suggestion;
                 },
                 [&](const event::SceneEnded& b) { j["scene_id"] = b.scene_id; },
                 [&](const event::LineEnqueued& b) {
                   j["utterance_id"] = b.utterance_id;
                   j["performer"] = b.performer;
                   j["text"] = b.text;
                   j["source"] = to_string(b.source);
                   j["created_at"] = b.created_at;
                   j["interrupting"] = b.interrupting;
                 },
                 [&](const event::LineDelivered& b) { j["utterance_id"] = b.utterance_id; },
                 [&](const event::LineSkipped& b) { j["utterance_id"] = b.utterance_id; },
                 [&](const event::SpokenAck& b) { j["utterance_id"] = b.utterance_id; },
                 [](const event::VotingOpened&) {},
                 [&](const event::VoteSubmitted& b) {
                   j["token"] = b.token;
                   json ballot = json::object();
                   for (const auto& [performer, guess] : b.ballot) ballot[performer] = to_string(guess);
                   j["ballot"] = ballot;
                 },
                 [](const event::SessionClosed&) {},
             },
             e.body);
  return j;
}

Event event_from_json(const json& j) {
  Event e;
  const std::int64_t index = integer(j, "index");
  if (index < 0) bad("negative index");
  e.index = static_cast<std::uint64_t>(index);
  e.at = integer(j, "at");
  const std::string type = str(j, "type");
  if (type == "role_assigned") {
    e.body = event::RoleAssigned{str(j, "performer"), role(str(j, "role")), boolean(j, "secret")};
  } else if (type == "went_live") {
    e.body = event::WentLive{};
  } else if (type == "scene_started") {
    e.body = event::SceneStarted{str(j, "scene_id"), str(j, "suggestion")};
  } else if (type == "scene_ended") {
    e.body = event::SceneEnded{str(j, "scene_id")};
  } else if (type == "line_enqueued") {
    auto source = parse_source(str(j, "source"));
    if (!source) bad("unknown source");
    e.body = event::LineEnqueued{str(j, "utterance_id"), str(j, "performer"), str(j, "text"), *source,
                                 integer(j, "created_at"), boolean(j, "interrupting")};
  } else if (type == "line_delivered") {
    e.body = event::LineDelivered{str(j, "utterance_id")};
  } else if (type == "line_skipped") {
    e.body = event::LineSkipped{str(j, "utterance_id")};
  } else if (type == "spoken_ack") {
    e.body = event::SpokenAck{str(j, "utterance_id")};
  } else if (type == "voting_opened") {
    e.body = event::VotingOpened{};
  } else if (type == "vote_submitted") {
    event::VoteSubmitted v;
    v.token = str(j, "token");
    const json& ballot = member(j, "ballot");
    if (!ballot.is_object()) bad("'ballot' must be an object");
    for (const auto& [performer, guess] : ballot.items()) {
      if (!guess.is_string()) bad("ballot guesses must be strings");
      v.ballot[performer] = role(guess.get<std::string>());
    }
    e.body = std::move(v);
  } else if (type == "session_closed") {
    e.body = event::SessionClosed{};
  } else {
    bad("unknown type '" + type + "'");
  }
  return e;
}

}  // namespace improv::show
