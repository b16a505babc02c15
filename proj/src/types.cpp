#include "improv/types.hpp"

namespace improv {

std::string_view to_string(Source source) {
  switch (source) {
    case Source::AI: return "AI";
    case Source::PuppetMaster: return "PUPPET_MASTER";
    case Source::Script: return "SCRIPT";
    case Source::Human: return "HUMAN";
  }
  return "?";
}

std::optional<Source> parse_source(std::string_view text) {
  for (Source s : kAllSources) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(RoleKind kind) {
  switch (kind) {
    case RoleKind::Cyborg: return "CYBORG";
    case RoleKind::Puppet: return "PUPPET";
    case RoleKind::FreeWill: return "FREE_WILL";
    case RoleKind::CeoController: return "CEO_CONTROLLER";
    case RoleKind::PuppetMaster: return "PUPPET_MASTER";
  }
  return "?";
}

std::optional<RoleKind> parse_role(std::string_view text) {
  for (RoleKind k : kAllRoleKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

}  // namespace improv
