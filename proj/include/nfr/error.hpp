#pragma once

#include <stdexcept>
#include <string>

namespace nfr {

enum class ErrorKind {
  InvalidArgument,
  InvalidInput,
  InvalidTuple,
  InvalidIndex,
  InvalidSpec,
  GridMismatch,
  ResourceLimit,
  NoContraction,
  Blowup,
  FitUndefined,
  Config,
  Io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidTuple: return "invalid-tuple";
    case ErrorKind::InvalidIndex: return "invalid-index";
    case ErrorKind::InvalidSpec: return "invalid-spec";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::ResourceLimit: return "resource-limit";
    case ErrorKind::NoContraction: return "no-contraction";
    case ErrorKind::Blowup: return "blowup";
    case ErrorKind::FitUndefined: return "fit-undefined";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nfr
