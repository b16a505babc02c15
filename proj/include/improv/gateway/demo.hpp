#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "improv/gateway/gateway.hpp"

namespace improv::gateway {

/// A show script is JSON lines, one step each:
///
///   {"op": "model", "corpora": [paths relative to the script], "order": 3,
///    "alpha": 0.1, "seed": 11}                      (first line)
///   {"at": ms, "op": "create", "session_id": ...}
///   {"at": ms, "op": "role", "performer": ..., "role": ..., "secret": bool}
///   {"at": ms, "op": "token", "token": ..., "performer": ... | null}
///   {"at": ms, "op": "connect" | "disconnect", "token": ...}
///   {"at": ms, "op": "live" | "voting" | "close"}
///   {"at": ms, "op": "send", "token": ..., "type": ..., "payload": {...},
///    "expect": {TOKEN: {TYPE: count}}}
///
/// `at` is milliseconds after the script's start. Client seq numbers are
/// assigned automatically. Any ERROR, or an "expect" that is not met, stops
/// the run with Error(Data) naming the script line.
struct DemoResult {
  std::string session_id;
  std::string transcript;       // canonical export text
  std::vector<std::string> trace;  // one line per message produced
};

DemoResult run_demo_script(std::string_view script, const std::filesystem::path& base_dir);
DemoResult run_demo_file(const std::filesystem::path& path);

}  // namespace improv::gateway
