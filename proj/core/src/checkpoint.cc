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

#include "imsk/checkpoint.h"

#include <fstream>

#include "imsk/binary_io.h"
#include "imsk/error.h"

namespace imsk {
namespace {

constexpr char kMagic[] = "NNK1";

}  // namespace

template <typename T>
void SaveCheckpoint(const std::string& path, const std::string& config,
                    const ParamList<T>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(static_cast<bool>(out), Errc::kIo, "cannot write " + path);
  io::WriteMagic(out, kMagic);
  io::WriteString(out, config);
  io::WriteLe<uint32_t>(out, static_cast<uint32_t>(params.size()));
  for (auto* p : params) {
    io::WriteString(out, p->name);
    io::WriteLe<uint32_t>(out, 2);
    io::WriteLe<uint32_t>(out, static_cast<uint32_t>(p->value.rows()));
    io::WriteLe<uint32_t>(out, static_cast<uint32_t>(p->value.cols()));
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        io::WriteLe<float>(out, static_cast<float>(p->value(r, c)));
      }
    }
  }
  Require(static_cast<bool>(out), Errc::kIo, "write failed for " + path);
}

CheckpointData ReadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), Errc::kIo, "cannot open " + path);
  Require(io::ReadMagic(in, kMagic), Errc::kFormat,
          path + " is not a checkpoint");
  CheckpointData data;
  data.config = io::ReadString(in);
  const uint32_t n = io::ReadLe<uint32_t>(in);
  for (uint32_t i = 0; i < n; ++i) {
    NamedTensor t;
    t.name = io::ReadString(in);
    const uint32_t ndim = io::ReadLe<uint32_t>(in);
    Require(ndim >= 1 && ndim <= 2, Errc::kFormat,
            "tensor " + t.name + " has unsupported rank");
    const uint32_t rows = io::ReadLe<uint32_t>(in);
    const uint32_t cols = ndim == 2 ? io::ReadLe<uint32_t>(in) : 1;
    t.value.resize(rows, cols);
    for (uint32_t r = 0; r < rows; ++r) {
      for (uint32_t c = 0; c < cols; ++c) t.value(r, c) = io::ReadLe<float>(in);
    }
    data.tensors.push_back(std::move(t));
  }
  return data;
}

template <typename T>
void AssignParameters(const CheckpointData& data, const ParamList<T>& params) {
  Require(data.tensors.size() == params.size(), Errc::kFormat,
          "checkpoint holds " + std::to_string(data.tensors.size()) +
              " tensors, model expects " + std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    const NamedTensor& t = data.tensors[i];
    Parameter<T>& p = *params[i];
    Require(t.name == p.name, Errc::kFormat,
            "checkpoint tensor " + t.name + " where " + p.name + " expected");
    Require(
        t.value.rows() == p.value.rows() && t.value.cols() == p.value.cols(),
        Errc::kFormat, "shape mismatch for " + p.name);
    p.value = t.value.template cast<T>();
    p.ZeroGrad();
  }
}

template void SaveCheckpoint(const std::string&, const std::string&,
                             const ParamList<float>&);
template void SaveCheckpoint(const std::string&, const std::string&,
                             const ParamList<double>&);
template void AssignParameters(const CheckpointData&, const ParamList<float>&);
template void AssignParameters(const CheckpointData&, const ParamList<double>&);

}  // namespace imsk
