#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "json.hpp"

#include "improv/types.hpp"

namespace improv::show {

/// performer id -> guessed role
using Ballot = std::map<std::string, RoleKind>;

namespace event {

struct RoleAssigned {
  std::string performer;
  RoleKind kind = RoleKind::FreeWill;
  bool secret = true;
};
struct WentLive {};
struct SceneStarted {
  std::string scene_id;
  std::string suggestion;
};
struct SceneEnded {
  std::string scene_id;
};
struct LineEnqueued {
  std::string utterance_id;
  std::string performer;
  std::string text;
  Source source = Source::Human;
  TimeMs created_at = 0;
  bool interrupting = false;
};
struct LineDelivered {
  std::string utterance_id;
};
struct LineSkipped {
  std::string utterance_id;
};
struct SpokenAck {
  std::string utterance_id;
};
struct VotingOpened {};
struct VoteSubmitted {
  std::string token;
  Ballot ballot;
};
struct SessionClosed {};

}  // namespace event

using EventBody = std::variant<event::RoleAssigned, event::WentLive, event::SceneStarted, event::SceneEnded,
                               event::LineEnqueued, event::LineDelivered, event::LineSkipped, event::SpokenAck,
                               event::VotingOpened, event::VoteSubmitted, event::SessionClosed>;

/// One entry of the append-only session log.
struct Event {
  std::uint64_t index = 0;  // position in the log, from 0
  TimeMs at = 0;
  EventBody body;
};

std::string_view event_name(const EventBody& body);

nlohmann::json to_json(const Event& e);
/// Throws Error(Data) on malformed input.
Event event_from_json(const nlohmann::json& j);

}  // namespace improv::show
