#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace improv {

/// Milliseconds since session start.
using TimeMs = std::int64_t;

/// Who wrote a line.
enum class Source { AI, PuppetMaster, Script, Human };

inline constexpr std::array<Source, 4> kAllSources{Source::PuppetMaster, Source::AI, Source::Script,
                                                   Source::Human};

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view text);

enum class RoleKind { Cyborg, Puppet, FreeWill, CeoController, PuppetMaster };

inline constexpr std::array<RoleKind, 5> kAllRoleKinds{RoleKind::Cyborg, RoleKind::Puppet, RoleKind::FreeWill,
                                                       RoleKind::CeoController, RoleKind::PuppetMaster};

std::string_view to_string(RoleKind kind);
std::optional<RoleKind> parse_role(std::string_view text);

/// Performers on stage; the audience guesses among these.
inline bool on_stage(RoleKind kind) {
  return kind == RoleKind::Cyborg || kind == RoleKind::Puppet || kind == RoleKind::FreeWill;
}

/// Performers that receive lines through an earpiece.
inline bool receives_lines(RoleKind kind) { return kind == RoleKind::Cyborg || kind == RoleKind::Puppet; }

/// A line ready to be queued to a performer.
struct LineRequest {
  std::string text;
  Source source = Source::Human;
  TimeMs created_at = 0;  // when the triggering context was submitted
  bool interrupting = false;
};

}  // namespace improv
