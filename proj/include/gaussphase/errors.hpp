#pragma once

#include <stdexcept>
#include <string>

namespace gaussphase {

enum class ErrorKind {
  InvalidState,
  UnsupportedKind,
  Domain,
  IllConditioned,
  NumericFailure,
  UndefinedType,
  NoRealSopt,
  CutoffExceeded,
  DecompositionFailure,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::UnsupportedKind: return "unsupported-kind";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::NumericFailure: return "numeric-failure";
    case ErrorKind::UndefinedType: return "undefined-type";
    case ErrorKind::NoRealSopt: return "no-real-s_opt";
    case ErrorKind::CutoffExceeded: return "cutoff-exceeded";
    case ErrorKind::DecompositionFailure: return "decomposition-failure";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gaussphase
