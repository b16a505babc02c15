#pragma once

#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

#include "improv/show/session.hpp"

namespace improv::show {

/// Transcript document:
///
///   { "session_id", "state", "config": {..., "roster": [...]},
///     "manifest": {"line_counts": {SOURCE: n}, "utterances": n},
///     "scenes": [{"id", "suggestion", "started_at", "ended_at",
///                 "utterances": [{"id", "text", "source", "performer",
///                                 "created_at", "delivered_at",
///                                 "spoken_ack_at", "status"}]}],
///     "votes": [{"token", "ballot": {performer: ROLE}}] }
///
/// Timestamps are integer milliseconds since session start. Skipped lines are
/// not part of the spoken transcript and are omitted.
nlohmann::json export_transcript(const ShowSession& session);

/// Canonical text form (2-space indent, trailing newline).
std::string export_transcript_text(const ShowSession& session);

/// Parses transcript text; syntax errors report the line number.
nlohmann::json parse_transcript(std::string_view text);

/// Rebuilds the spoken history of a show from its transcript. Throws
/// Error(Data) on schema violations or a manifest that disagrees with the
/// utterances.
ShowSession replay_transcript(const nlohmann::json& transcript);

std::map<Source, std::size_t> line_counts(const ShowSession& session);

nlohmann::json to_json(const SessionConfig& config);
SessionConfig config_from_json(const nlohmann::json& j);

}  // namespace improv::show
