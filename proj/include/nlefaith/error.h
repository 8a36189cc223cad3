//
// Copyright 2026 The nlefaith Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef NLEFAITH_ERROR_H_
#define NLEFAITH_ERROR_H_

#include <stdexcept>
#include <string>

namespace nlefaith {

// Failure categories. Each maps to one CLI exit status.
enum class ErrorKind {
  kUsage,        // bad flags or config (exit 1)
  kConformance,  // endpoint violated the wire contract (exit 2)
  kTransport,    // endpoint unreachable, timed out or crashed (exit 2)
  kData,         // dataset, lexicon, template or record file problem (exit 3)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error UsageError(const std::string& m) {
  return Error(ErrorKind::kUsage, m);
}
inline Error ConformanceError(const std::string& m) {
  return Error(ErrorKind::kConformance, m);
}
inline Error TransportError(const std::string& m) {
  return Error(ErrorKind::kTransport, m);
}
inline Error DataError(const std::string& m) {
  return Error(ErrorKind::kData, m);
}

inline int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kConformance:
    case ErrorKind::kTransport:
      return 2;
    case ErrorKind::kData:
      return 3;
  }
  return 1;
}

}  // namespace nlefaith

#endif  // NLEFAITH_ERROR_H_
