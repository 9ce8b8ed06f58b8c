// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace paysec {

/// Failure categories. The CLI maps each category to a distinct exit code,
/// so library code should pick the category a scripted caller would dispatch on.
enum class ErrorKind {
  Io,           // file or socket trouble
  Usage,        // bad command-line input
  Validation,   // argument outside its documented domain
  Format,       // malformed document or wire bytes
  Auth,         // tag/MAC verification failed (includes masked padding errors)
  Key,          // no key material for (sender, epoch)
  Freshness,    // duplicate or stale sequence number
  Policy,       // suite contradicts the privacy decision, or a protocol rule broken
  Measurement,  // benchmark preconditions or timer resolution not met
  Entropy,      // secure random source failed; unrecoverable
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Format: return "format";
    case ErrorKind::Auth: return "auth";
    case ErrorKind::Key: return "key";
    case ErrorKind::Freshness: return "freshness";
    case ErrorKind::Policy: return "policy";
    case ErrorKind::Measurement: return "measurement";
    case ErrorKind::Entropy: return "entropy";
  }
  return "unknown";
}

}  // namespace paysec
