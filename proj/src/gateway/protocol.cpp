#include "improv/gateway/protocol.hpp"

#include <array>
#include <utility>

namespace improv::gateway {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<MessageType, std::string_view>, 14> kNames{{
    {MessageType::Hello, "HELLO"},
    {MessageType::Ack, "ACK"},
    {MessageType::ContextSubmit, "CONTEXT_SUBMIT"},
    {MessageType::Candidates, "CANDIDATES"},
    {MessageType::LineSelect, "LINE_SELECT"},
    {MessageType::LineTyped, "LINE_TYPED"},
    {MessageType::LineDeliver, "LINE_DELIVER"},
    {MessageType::LineSkip, "LINE_SKIP"},
    {MessageType::LineSpoken, "LINE_SPOKEN"},
    {MessageType::SceneStart, "SCENE_START"},
    {MessageType::SceneEnd, "SCENE_END"},
    {MessageType::VoteSubmit, "VOTE_SUBMIT"},
    {MessageType::Tally, "TALLY"},
    {MessageType::Error, "ERROR"},
}};

[[noreturn]] void bad(const std::string& what) { throw ProtocolError(code::kBadMessage, what); }

// Field checkers. `required` false means the key may be absent.
void want_string(const json& p, const char* key, bool required = true, bool non_empty = false) {
  if (!p.contains(key)) {
    if (required) bad(std::string("missing field '") + key + "'");
    return;
  }
  if (!p[key].is_string()) bad(std::string("field '") + key + "' must be a string");
  if (non_empty && p[key].get_ref<const std::string&>().empty()) bad(std::string("field '") + key + "' is empty");
}

void want_bool(const json& p, const char* key) {
  if (p.contains(key) && !p[key].is_boolean()) bad(std::string("field '") + key + "' must be a boolean");
}

void want_uint(const json& p, const char* key, bool required) {
  if (!p.contains(key)) {
    if (required) bad(std::string("missing field '") + key + "'");
    return;
  }
  if (!p[key].is_number_integer() || p[key].get<std::int64_t>() < 0) bad(std::string("field '") + key + "' must be a non-negative integer");
}

void want_number(const json& p, const char* key, bool required) {
  if (!p.contains(key)) {
    if (required) bad(std::string("missing field '") + key + "'");
    return;
  }
  if (!p[key].is_number()) bad(std::string("field '") + key + "' must be a number");
}

void want_string_array(const json& p, const char* key) {
  if (!p.contains(key)) return;
  if (!p[key].is_array()) bad(std::string("field '") + key + "' must be an array");
  for (const auto& v : p[key])
    if (!v.is_string()) bad(std::string("field '") + key + "' must hold strings");
}

void only_keys(const json& p, std::initializer_list<const char*> keys) {
  for (const auto& [k, _] : p.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) bad("unexpected field '" + k + "'");
  }
}

}  // namespace

std::string_view to_string(MessageType t) {
  for (const auto& [type, name] : kNames)
    if (type == t) return name;
  return "?";
}

std::optional<MessageType> parse_message_type(std::string_view text) {
  for (const auto& [type, name] : kNames)
    if (name == text) return type;
  return std::nullopt;
}

bool server_only(MessageType t) {
  switch (t) {
    case MessageType::Ack:
    case MessageType::Candidates:
    case MessageType::LineDeliver:
    case MessageType::Error:
      return true;
    default:
      return false;
  }
}

void validate_payload(MessageType type, const json& p) {
  if (!p.is_object()) bad("payload must be an object");
  switch (type) {
    case MessageType::Hello:
      only_keys(p, {"token", "role", "performer", "roster", "state"});
      want_string(p, "token", false);
      want_string(p, "role", false);
      want_string(p, "performer", false);
      want_string(p, "state", false);
      break;
    case MessageType::Ack:
      only_keys(p, {"ack", "duplicate"});
      want_uint(p, "ack", true);
      want_bool(p, "duplicate");
      break;
    case MessageType::ContextSubmit:
      only_keys(p, {"context", "topic", "lambda", "seed"});
      want_string(p, "context", true, true);
      want_string_array(p, "topic");
      want_number(p, "lambda", false);
      want_uint(p, "seed", false);
      break;
    case MessageType::Candidates:
      only_keys(p, {"set_id", "context", "candidates"});
      want_string(p, "set_id");
      want_string(p, "context");
      if (!p.contains("candidates") || !p["candidates"].is_array()) bad("field 'candidates' must be an array");
      for (const auto& c : p["candidates"]) {
        if (!c.is_object()) bad("candidate must be an object");
        want_uint(c, "position", true);
        want_string(c, "text");
        want_number(c, "score", true);
      }
      break;
    case MessageType::LineSelect:
      only_keys(p, {"set_id", "positions", "discard", "performer"});
      want_string(p, "set_id", true, true);
      want_bool(p, "discard");
      want_string(p, "performer", false, true);
      if (p.contains("positions")) {
        if (!p["positions"].is_array()) bad("field 'positions' must be an array");
        for (const auto& v : p["positions"])
          if (!v.is_number_integer()) bad("field 'positions' must hold integers");
      }
      if (p.value("discard", false) == p.contains("positions"))
        bad("LINE_SELECT needs exactly one of 'positions' or 'discard': true");
      break;
    case MessageType::LineTyped:
      only_keys(p, {"text", "performer", "interrupting"});
      want_string(p, "text", true, true);
      want_string(p, "performer", false, true);
      want_bool(p, "interrupting");
      break;
    case MessageType::LineDeliver:
      only_keys(p, {"utterance_id", "text", "speak", "interrupting", "source"});
      want_string(p, "utterance_id");
      want_string(p, "text");
      want_bool(p, "speak");
      want_bool(p, "interrupting");
      want_string(p, "source", false);
      break;
    case MessageType::LineSkip:
    case MessageType::LineSpoken:
      only_keys(p, {"utterance_id"});
      want_string(p, "utterance_id", true, true);
      break;
    case MessageType::SceneStart:
      only_keys(p, {"suggestion", "scene_id"});
      want_string(p, "suggestion");
      want_string(p, "scene_id", false);
      break;
    case MessageType::SceneEnd:
      only_keys(p, {"scene_id"});
      want_string(p, "scene_id", false);
      break;
    case MessageType::VoteSubmit:
      only_keys(p, {"ballot"});
      if (!p.contains("ballot") || !p["ballot"].is_object()) bad("field 'ballot' must be an object");
      for (const auto& [k, v] : p["ballot"].items())
        if (!v.is_string()) bad("ballot entry for '" + k + "' must be a role name");
      break;
    case MessageType::Tally:
      // Empty when requested by a client; filled when sent by the server.
      only_keys(p, {"ballots", "counts", "accuracy"});
      break;
    case MessageType::Error:
      only_keys(p, {"code", "message", "ref_seq"});
      want_string(p, "code");
      want_string(p, "message");
      want_uint(p, "ref_seq", false);
      break;
  }
}

Message parse_message(const json& j) {
  if (!j.is_object()) bad("message must be a JSON object");
  for (const auto& [k, _] : j.items())
    if (k != "type" && k != "session_id" && k != "seq" && k != "payload") bad("unexpected envelope field '" + k + "'");
  want_string(j, "type");
  want_string(j, "session_id");
  want_uint(j, "seq", true);
  auto type = parse_message_type(j["type"].get<std::string>());
  if (!type) bad("unknown message type '" + j["type"].get<std::string>() + "'");
  Message m;
  m.type = *type;
  m.session_id = j["session_id"].get<std::string>();
  m.seq = j["seq"].get<std::uint64_t>();
  m.payload = j.contains("payload") ? j["payload"] : json::object();
  validate_payload(m.type, m.payload);
  return m;
}

Message parse_message(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) bad("message is not valid JSON");
  return parse_message(j);
}

json to_json(const Message& m) {
  return {{"type", std::string(to_string(m.type))}, {"session_id", m.session_id}, {"seq", m.seq}, {"payload", m.payload}};
}

Message make_error(const std::string& session_id, const std::string& error_code, const std::string& message,
                   std::optional<std::uint64_t> ref_seq) {
  Message m;
  m.type = MessageType::Error;
  m.session_id = session_id;
  m.payload = {{"code", error_code}, {"message", message}};
  if (ref_seq) m.payload["ref_seq"] = *ref_seq;
  return m;
}

std::string encode_frame(std::string_view body) {
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(body.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.append(body);
  return out;
}

std::optional<std::string> decode_frame(std::string& buffer) {
  if (buffer.size() < 4) return std::nullopt;
  const auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer[i])); };
  const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  if (n > kMaxFrame) bad("frame of " + std::to_string(n) + " bytes exceeds the limit");
  if (buffer.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string body = buffer.substr(4, n);
  buffer.erase(0, 4 + static_cast<std::size_t>(n));
  return body;
}

}  // namespace improv::gateway
