// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gssfront {

enum class ErrorKind {
  kInvalidConfig,
  kConfigParse,
  kStream,        // shape or framing mismatch between stages
  kOverDetermined,  // more sources than microphones
  kInvalidInput,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` lets the
// CLI map them onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace gssfront
