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

// "NNK1" checkpoints: a JSON configuration followed by named float32 tensors.

#ifndef IMSK_CHECKPOINT_H_
#define IMSK_CHECKPOINT_H_

#include <string>
#include <vector>

#include "imsk/tensor.h"

namespace imsk {

struct NamedTensor {
  std::string name;
  Mat<float> value;
};

struct CheckpointData {
  std::string config;  // JSON text
  std::vector<NamedTensor> tensors;
};

template <typename T>
void SaveCheckpoint(const std::string& path, const std::string& config,
                    const ParamList<T>& params);

CheckpointData ReadCheckpoint(const std::string& path);

// Copies tensors into `params`; names and shapes must match in order.
template <typename T>
void AssignParameters(const CheckpointData& data, const ParamList<T>& params);

}  // namespace imsk

#endif  // IMSK_CHECKPOINT_H_
