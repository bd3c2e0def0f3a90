// Copyright 2026 The clockauction Authors.
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

#ifndef CLOCKAUCTION_ERROR_HPP
#define CLOCKAUCTION_ERROR_HPP

#include <stdexcept>
#include <string>

namespace clockauction {

enum class ErrorKind {
  kMalformedInput,
  kRejectedInput,
  kEnumerationLimit,
  kContractViolation,
  kGenerationFailure,
  kSizeGuard,
  kIo,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedInput: return "malformed_input";
    case ErrorKind::kRejectedInput: return "rejected_input";
    case ErrorKind::kEnumerationLimit: return "enumeration_limit";
    case ErrorKind::kContractViolation: return "contract_violation";
    case ErrorKind::kGenerationFailure: return "generation_failure";
    case ErrorKind::kSizeGuard: return "size_guard";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define CLOCKAUCTION_CHECK(cond, kind, msg)                        \
  do {                                                             \
    if (!(cond)) throw ::clockauction::Error((kind), (msg));       \
  } while (0)

}  // namespace clockauction

#endif  // CLOCKAUCTION_ERROR_HPP
