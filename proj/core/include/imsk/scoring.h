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

// Word error rate by minimum-edit alignment, and real-time factor.

#ifndef IMSK_SCORING_H_
#define IMSK_SCORING_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace imsk {

enum class EditOp { kCorrect, kSubstitution, kInsertion, kDeletion };

struct AlignmentResult {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int correct = 0;
  int ref_words = 0;
  std::vector<EditOp> ops;  // in reference/hypothesis order

  int Errors() const { return substitutions + insertions + deletions; }
};

// Unit-cost alignment. Among minimal alignments the backtrace prefers a
// substitution, then an insertion, then a deletion.
AlignmentResult Align(std::span<const std::string> ref,
                      std::span<const std::string> hyp);
AlignmentResult AlignText(const std::string& ref, const std::string& hyp);

struct WerResult {
  double wer = 0.0;  // percent
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long correct = 0;
  long ref_words = 0;
};

// Pooled over the corpus: 100 * total errors / total reference words.
WerResult CorpusWer(std::span<const std::pair<std::string, std::string>> pairs);

double RtFactor(double processing_seconds, double audio_seconds);

}  // namespace imsk

#endif  // IMSK_SCORING_H_
