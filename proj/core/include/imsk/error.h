// Copyright 2026 The imsk Authors.
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

#ifndef IMSK_ERROR_H_
#define IMSK_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace imsk {

enum class Errc {
  kInvalidArgument,
  kIo,
  kFormat,
  kUnsupportedEncoding,
  kMultichannel,
  kTruncated,
  kShortInput,
  kEmptyInput,
  kDimMismatch,
  kOutOfRange,
  kInfeasibleAlignment,
  kNonFinite,
  kDivergence,
  kVocabMismatch,
  kConfig,
};

std::string_view ErrcName(Errc code);

// All library failures are reported with this exception; `code()` lets
// callers (and tests) tell failure kinds apart without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void Fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

// Takes a view so literal messages cost nothing unless the check fails.
inline void Require(bool condition, Errc code, std::string_view message) {
  if (!condition) Fail(code, std::string(message));
}

}  // namespace imsk

#endif  // IMSK_ERROR_H_
