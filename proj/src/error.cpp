#include "improv/error.hpp"

namespace improv {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::State: return "state";
    case ErrorKind::Role: return "role";
    case ErrorKind::Training: return "training";
    case ErrorKind::Data: return "data";
    case ErrorKind::Input: return "input";
  }
  return "unknown";
}

}  // namespace improv
