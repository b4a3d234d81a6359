// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/error.hpp"

namespace gssfront {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kConfigParse: return "config-parse";
    case ErrorKind::kStream: return "stream";
    case ErrorKind::kOverDetermined: return "over-determined-scene";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace gssfront
