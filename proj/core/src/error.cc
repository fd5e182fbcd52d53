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

#include "imsk/error.h"

namespace imsk {

std::string_view ErrcName(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument:
      return "invalid-argument";
    case Errc::kIo:
      return "io";
    case Errc::kFormat:
      return "format";
    case Errc::kUnsupportedEncoding:
      return "unsupported-encoding";
    case Errc::kMultichannel:
      return "multichannel";
    case Errc::kTruncated:
      return "truncated";
    case Errc::kShortInput:
      return "short-input";
    case Errc::kEmptyInput:
      return "empty-input";
    case Errc::kDimMismatch:
      return "dim-mismatch";
    case Errc::kOutOfRange:
      return "out-of-range";
    case Errc::kInfeasibleAlignment:
      return "infeasible-alignment";
    case Errc::kNonFinite:
      return "non-finite";
    case Errc::kDivergence:
      return "divergence";
    case Errc::kVocabMismatch:
      return "vocab-mismatch";
    case Errc::kConfig:
      return "config";
  }
  return "unknown";
}

}  // namespace imsk
