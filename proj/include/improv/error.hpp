#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace improv {

enum class ErrorKind {
  Parameter,  // argument outside its documented domain
  State,      // operation not allowed in the current state
  Role,       // caller's role may not do this
  Training,   // nothing to train on
  Data,       // malformed file or document
  Input,      // unknown tag or out-of-range value in user data
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace improv
