// Copyright 2026-present the dupbug authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace dupbug {

/// Failure classes surfaced by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
  kConfig,      // contradictory or missing configuration
  kInput,       // malformed or inconsistent input data
  kFormat,      // binary file with bad magic, version or truncated payload
  kProvider,    // embedding provider failed after retries
  kIo,          // unreadable / unwritable path
  kValidation,  // argument violates an operation precondition
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kProvider: return "provider";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kValidation: return "validation";
  }
  return "unknown";
}

}  // namespace dupbug
