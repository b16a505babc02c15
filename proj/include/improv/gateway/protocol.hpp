#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace improv::gateway {

/// Wire message types. HELLO, ACK and LINE_SPOKEN extend the base set: HELLO
/// binds a stream to its token, ACK confirms an applied (or already applied)
/// client message, LINE_SPOKEN reports that a delivered line was voiced.
enum class MessageType {
  Hello,
  Ack,
  ContextSubmit,
  Candidates,
  LineSelect,
  LineTyped,
  LineDeliver,
  LineSkip,
  LineSpoken,
  SceneStart,
  SceneEnd,
  VoteSubmit,
  Tally,
  Error,
};

std::string_view to_string(MessageType t);
std::optional<MessageType> parse_message_type(std::string_view text);

/// Messages the server emits and a client may never send.
bool server_only(MessageType t);

struct Message {
  MessageType type = MessageType::Error;
  std::string session_id;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();
};

namespace code {
inline constexpr const char* kBadMessage = "BAD_MESSAGE";
inline constexpr const char* kUnauthorized = "UNAUTHORIZED";
inline constexpr const char* kRoleForbidden = "ROLE_FORBIDDEN";
inline constexpr const char* kSeqGap = "SEQ_GAP";
inline constexpr const char* kState = "STATE";
inline constexpr const char* kInvalid = "INVALID";
inline constexpr const char* kTimeout = "TIMEOUT";
inline constexpr const char* kInternal = "INTERNAL";
}  // namespace code

/// Raised for anything that must be answered with an ERROR message.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Checks the envelope and the payload schema of the declared type. Throws
/// ProtocolError(BAD_MESSAGE) on any violation.
Message parse_message(const nlohmann::json& j);
Message parse_message(std::string_view text);

/// Payload schema check alone.
void validate_payload(MessageType type, const nlohmann::json& payload);

nlohmann::json to_json(const Message& m);

Message make_error(const std::string& session_id, const std::string& code, const std::string& message,
                   std::optional<std::uint64_t> ref_seq = std::nullopt);

// Stream framing: 4-byte big-endian length followed by that many bytes of
// UTF-8 JSON.
inline constexpr std::uint32_t kMaxFrame = 1u << 20;
std::string encode_frame(std::string_view body);
/// Pops one complete frame from the front of `buffer` if present. Throws
/// ProtocolError(BAD_MESSAGE) for a frame larger than kMaxFrame.
std::optional<std::string> decode_frame(std::string& buffer);

}  // namespace improv::gateway
