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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "imsk/checkpoint.h"
#include "imsk/error.h"
#include "imsk/gradient_check.h"
#include "imsk/graph.h"
#include "imsk/layers.h"
#include "imsk/optim.h"
#include "imsk/tensor.h"
#include "support/test_support.h"

namespace imsk {
namespace {

using MatD = Mat<double>;
using testing::RandomMatrix;

Parameter<double> RandomParam(const std::string& name, int rows, int cols,
                              uint64_t seed, double scale = 1.0) {
  Parameter<double> p(name, rows, cols);
  p.value = RandomMatrix(rows, cols, seed, scale);
  return p;
}

// Finite-difference check of `f` with respect to the given inputs. The
// output is contracted with a fixed random matrix so every output entry
// contributes to the scalar loss.
GradCheckReport CheckOp(
    std::vector<Parameter<double>*> inputs,
    const std::function<Var(Graph<double>&, std::vector<Var>&)>& f) {
  MatD weights;
  auto loss = [&](bool backward) {
    Graph<double> g(backward);
    std::vector<Var> vars;
    for (auto* p : inputs) vars.push_back(g.Param(*p));
    const Var y = f(g, vars);
    if (weights.size() == 0) {
      const MatD& v = g.Value(y);
      weights = RandomMatrix(static_cast<int>(v.rows()),
                             static_cast<int>(v.cols()), 99);
    }
    const Var l = g.Sum(g.Mul(y, g.Input(weights)));
    if (backward) g.Backward(l);
    return g.Scalar(l);
  };
  return CheckGradients(ParamList<double>(inputs.begin(), inputs.end()), loss);
}

constexpr double kTol = 1e-6;

// ---- ops: gradients -------------------------------------------------------

TEST(OpGradTest, MatMulAddSubMul) {
  auto a = RandomParam("a", 3, 4, 1), b = RandomParam("b", 4, 2, 2);
  auto c = RandomParam("c", 3, 2, 3), d = RandomParam("d", 3, 2, 4);
  const auto r =
      CheckOp({&a, &b, &c, &d}, [](Graph<double>& g, std::vector<Var>& v) {
        return g.Mul(g.Sub(g.Add(g.MatMul(v[0], v[1]), v[2]), v[3]), v[2]);
      });
  EXPECT_TRUE(r.Passed(kTol)) << r.worst_param << " " << r.max_rel_error;
}

TEST(OpGradTest, ScaleAddBiasTranspose) {
  auto x = RandomParam("x", 3, 5, 1), b = RandomParam("b", 3, 1, 2);
  const auto r = CheckOp({&x, &b}, [](Graph<double>& g, std::vector<Var>& v) {
    return g.Transpose(g.Scale(g.AddBias(v[0], v[1]), -1.7));
  });
  EXPECT_TRUE(r.Passed(kTol)) << r.max_rel_error;
}

TEST(OpGradTest, Activations) {
  auto x = RandomParam("x", 4, 6, 5, 2.0);
  for (int which = 0; which < 3; ++which) {
    const auto r =
        CheckOp({&x}, [which](Graph<double>& g, std::vector<Var>& v) {
          return which == 0   ? g.Sigmoid(v[0])
                 : which == 1 ? g.Tanh(v[0])
                              : g.Relu(v[0]);
        });
    EXPECT_TRUE(r.Passed(kTol)) << which << " " << r.max_rel_error;
  }
}

TEST(OpGradTest, SoftmaxAndLogSoftmax) {
  auto x = RandomParam("x", 5, 3, 6, 3.0);
  for (bool log : {false, true}) {
    const auto r = CheckOp({&x}, [log](Graph<double>& g, std::vector<Var>& v) {
      return log ? g.LogSoftmax(v[0]) : g.Softmax(v[0]);
    });
    EXPECT_TRUE(r.Passed(kTol)) << log << " " << r.max_rel_error;
  }
}

TEST(OpGradTest, SlicingAndConcatenation) {
  auto x = RandomParam("x", 6, 5, 7), y = RandomParam("y", 2, 5, 8);
  const auto r = CheckOp({&x, &y}, [](Graph<double>& g, std::vector<Var>& v) {
    const Var rows = g.Rows(v[0], 1, 3);
    const Var parts[] = {rows, v[1]};
    const Var stacked = g.ConcatRows(parts);
    const Var cols[] = {g.Cols(stacked, 3, 2), g.Cols(stacked, 0, 2)};
    return g.ConcatCols(cols);
  });
  EXPECT_TRUE(r.Passed(kTol)) << r.max_rel_error;
}

TEST(OpGradTest, GatherPickSum) {
  auto x = RandomParam("x", 3, 4, 9);
  const auto r = CheckOp({&x}, [](Graph<double>& g, std::vector<Var>& v) {
    // Repeated and padded (-1) indices exercise the scatter-add backward.
    const Var gathered = g.Gather(v[0], {0, 5, 5, -1, 11, 2, 7, 7}, 4, 2);
    const int rows[] = {1, 3};
    const Var picked = g.Pick(gathered, rows);
    const Var parts[] = {g.Rows(gathered, 0, 1), picked,
                         g.Scale(g.Sum(v[0]), 1.0)};
    return g.ConcatCols(std::span<const Var>(parts, 2));
  });
  EXPECT_TRUE(r.Passed(kTol)) << r.max_rel_error;
  auto y = RandomParam("y", 3, 4, 10);
  const auto s = CheckOp(
      {&y}, [](Graph<double>& g, std::vector<Var>& v) { return g.Sum(v[0]); });
  EXPECT_TRUE(s.Passed(kTol));
}

TEST(OpGradTest, MaxPool) {
  auto x = RandomParam("x", 2, 5 * 3, 11);  // 5 x 3 map, 2 channels
  const auto r = CheckOp({&x}, [](Graph<double>& g, std::vector<Var>& v) {
    return g.MaxPool2x2(v[0], 5, 3);
  });
  EXPECT_TRUE(r.Passed(kTol)) << r.max_rel_error;
}

TEST(OpGradTest, LstmPointwise) {
  auto gates = RandomParam("gates", 12, 2, 12, 2.0),
       c = RandomParam("c", 3, 2, 13);
  const auto r =
      CheckOp({&gates, &c}, [](Graph<double>& g, std::vector<Var>& v) {
        return g.LstmPointwise(v[0], v[1]);
      });
  EXPECT_TRUE(r.Passed(kTol)) << r.max_rel_error;
}

TEST(OpGradTest, StatsPool) {
  auto x = RandomParam("x", 3, 9, 14);
  const auto r = CheckOp({&x}, [](Graph<double>& g, std::vector<Var>& v) {
    return g.StatsPool(v[0], 2, 3);
  });
  EXPECT_TRUE(r.Passed(kTol)) << r.max_rel_error;
}

// ---- ops: values ----------------------------------------------------------

TEST(OpValueTest, SoftmaxColumnsAreDistributions) {
  Graph<double> g(false);
  const MatD& p = g.Value(g.Softmax(g.Input(RandomMatrix(7, 4, 3, 5.0))));
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(p.col(j).sum(), 1.0, 1e-12);
    EXPECT_GT(p.col(j).minCoeff(), 0.0);
  }
  const MatD& u = g.Value(g.Softmax(g.Input(MatD::Zero(4, 2))));
  EXPECT_LE((u.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(OpValueTest, LogSoftmaxIsStableForLargeLogits) {
  Graph<double> g(false);
  MatD x(3, 1);
  x << 1000.0, 0.0, -1000.0;
  const MatD& y = g.Value(g.LogSoftmax(g.Input(x)));
  EXPECT_NEAR(y(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(y(1, 0), -1000.0, 1e-9);
  EXPECT_TRUE(y.allFinite());
}

TEST(OpValueTest, MaxPoolCeilModeAndConstantInput) {
  Graph<double> g(false);
  const MatD& y =
      g.Value(g.MaxPool2x2(g.Input(MatD::Constant(3, 5 * 7, 2.5)), 5, 7));
  EXPECT_EQ(y.rows(), 3);
  EXPECT_EQ(y.cols(), 3 * 4);
  EXPECT_EQ((y.array() != 2.5).count(), 0);
}

TEST(OpValueTest, MaxPoolPicksWindowMaximum) {
  // One channel, 2 x 3 map; column index h * 3 + w.
  MatD x(1, 6);
  x << 1, 9, 3, 4, 2, 8;
  Graph<double> g(false);
  const MatD& y = g.Value(g.MaxPool2x2(g.Input(x), 2, 3));
  ASSERT_EQ(y.cols(), 2);
  EXPECT_EQ(y(0, 0), 9);
  EXPECT_EQ(y(0, 1), 8);
}

TEST(OpValueTest, StatsPoolMatchesDirectWindowStatistics) {
  const MatD x = RandomMatrix(2, 10, 21);
  Graph<double> g(false);
  const MatD& y = g.Value(g.StatsPool(g.Input(x), 3, 1));
  for (int t = 0; t < 10; ++t) {
    const int lo = std::max(0, t - 3), hi = std::min(9, t + 1);
    for (int k = 0; k < 2; ++k) {
      const Eigen::VectorXd w = x.row(k).segment(lo, hi - lo + 1).transpose();
      const double mean = w.mean();
      EXPECT_NEAR(y(k, t), mean, 1e-12);
      EXPECT_NEAR(y(2 + k, t), std::sqrt((w.array() - mean).square().mean()),
                  1e-12);
    }
  }
}

TEST(OpValueTest, StatsPoolOfConstantHasZeroDeviation) {
  Graph<double> g(false);
  const MatD& y =
      g.Value(g.StatsPool(g.Input(MatD::Constant(3, 8, -1.25)), 4, 4));
  EXPECT_EQ(y.topRows(3), MatD::Constant(3, 8, -1.25));
  EXPECT_EQ(y.bottomRows(3), MatD::Zero(3, 8));
}

TEST(OpValueTest, GatherPadsWithZero) {
  MatD x(2, 2);
  x << 1, 2, 3, 4;  // column-major storage 1 3 2 4
  Graph<double> g(false);
  const MatD& y = g.Value(g.Gather(g.Input(x), {3, -1, 0}, 3, 1));
  EXPECT_EQ(y(0, 0), 4);
  EXPECT_EQ(y(1, 0), 0);
  EXPECT_EQ(y(2, 0), 1);
}

TEST(OpValueTest, LstmPointwiseMatchesGateFormulas) {
  const MatD a = RandomMatrix(8, 1, 31, 2.0), c = RandomMatrix(2, 1, 32);
  Graph<double> g(false);
  const MatD& y = g.Value(g.LstmPointwise(g.Input(a), g.Input(c)));
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (int k = 0; k < 2; ++k) {
    const double cn =
        sig(a(2 + k, 0)) * c(k, 0) + sig(a(k, 0)) * std::tanh(a(4 + k, 0));
    EXPECT_NEAR(y(2 + k, 0), cn, 1e-14);
    EXPECT_NEAR(y(k, 0), sig(a(6 + k, 0)) * std::tanh(cn), 1e-14);
  }
}

TEST(OpValueTest, ShapeMismatchIsReported) {
  Graph<double> g(false);
  const Var a = g.Input(MatD::Zero(2, 3)), b = g.Input(MatD::Zero(2, 3));
  try {
    g.MatMul(a, b);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDimMismatch);
  }
}

// ---- matmul kernel ----------------------------------------------------------

TEST(MatMulTest, MatchesEigenProduct) {
  const Mat<float> a = RandomMatrix(37, 29, 1).cast<float>();
  const Mat<float> b = RandomMatrix(29, 11, 2).cast<float>();
  Mat<float> c;
  MatMulInto(a, b, &c);
  const Mat<double> ref = a.cast<double>() * b.cast<double>();
  EXPECT_LE((c.cast<double>() - ref).cwiseAbs().maxCoeff(), 1e-4);
}

// Each output column is bitwise independent of the other columns.
TEST(MatMulTest, ColumnsDoNotDependOnBatchWidth) {
  const Mat<float> a = RandomMatrix(64, 48, 3).cast<float>();
  const Mat<float> b = RandomMatrix(48, 13, 4).cast<float>();
  Mat<float> all;
  MatMulInto(a, b, &all);
  for (int j = 0; j < 13; ++j) {
    Mat<float> one;
    MatMulInto(a, Mat<float>(b.col(j)), &one);
    EXPECT_EQ(one.col(0), all.col(j)) << j;
  }
}

// ---- layers -----------------------------------------------------------------

TEST(AffineTest, IdentityAndBias) {
  Affine<double> layer("aff", 3, 3);
  layer.weight().value = MatD::Identity(3, 3);
  layer.bias().value.setZero();
  const MatD x = RandomMatrix(3, 4, 5);
  Graph<double> g(false);
  EXPECT_EQ(g.Value(layer.Apply(g, g.Input(x))), x);
  layer.bias().value = RandomMatrix(3, 1, 6);
  const MatD& y = g.Value(layer.Apply(g, g.Input(MatD::Zero(3, 2))));
  EXPECT_EQ(y.col(0), layer.bias().value.col(0));
  EXPECT_EQ(y.col(1), layer.bias().value.col(0));
}

TEST(AffineTest, GradientCheck) {
  Affine<double> layer("aff", 4, 3);
  ParamList<double> params;
  layer.Collect(&params);
  InitUniform(params, 0.5, 3);
  auto x = RandomParam("x", 4, 5, 7);
  params.push_back(&x);
  const MatD w = RandomMatrix(3, 5, 8);
  const auto r = CheckGradients(params, [&](bool backward) {
    Graph<double> g(backward);
    const Var l = g.Sum(g.Mul(layer.Apply(g, g.Param(x)), g.Input(w)));
    if (backward) g.Backward(l);
    return g.Scalar(l);
  });
  EXPECT_TRUE(r.Passed(1e-6)) << r.max_rel_error;
}

// A custom op whose backward is off by a factor must be caught.
TEST(GradCheckTest, CorruptedBackwardFails) {
  auto x = RandomParam("x", 3, 2, 9);
  const auto r = CheckOp({&x}, [](Graph<double>& g, std::vector<Var>& v) {
    const MatD value = g.Value(v[0]).array().square().matrix();
    const MatD xv = g.Value(v[0]);
    return g.Custom(std::span<const Var>(&v[0], 1), value,
                    [xv](const MatD& dy, std::span<MatD*> dx) {
                      if (dx[0])
                        *dx[0] += (3.0 * xv.array() * dy.array()).matrix();
                    });
  });
  EXPECT_FALSE(r.Passed(1e-3));
  EXPECT_EQ(r.worst_param, "x");
}

TEST(LstmTest, ZeroWeightsAndInputsGiveZeroState) {
  Lstm<double> lstm("l", 3, 4);
  Graph<double> g(false);
  LstmState s = lstm.ZeroState(g, 2);
  s = lstm.Step(g, g.Input(MatD::Zero(3, 2)), s);
  EXPECT_EQ(g.Value(s.h), MatD::Zero(4, 2));
  EXPECT_EQ(g.Value(s.c), MatD::Zero(4, 2));
}

TEST(LstmTest, ThreeStepGradientCheck) {
  Lstm<double> lstm("l", 3, 4);
  ParamList<double> params;
  lstm.Collect(&params);
  InitUniform(params, 0.5, 11);
  auto xs = RandomParam("xs", 3, 3, 12);
  params.push_back(&xs);
  const MatD w = RandomMatrix(4, 3, 13);
  for (bool reverse : {false, true}) {
    const auto r = CheckGradients(params, [&](bool backward) {
      Graph<double> g(backward);
      const Var l = g.Sum(g.Mul(lstm.Run(g, g.Param(xs), reverse), g.Input(w)));
      if (backward) g.Backward(l);
      return g.Scalar(l);
    });
    EXPECT_TRUE(r.Passed(1e-6)) << reverse << " " << r.max_rel_error;
  }
}

TEST(BlstmTest, OutputDimensionAndBatchEquality) {
  Blstm<float> blstm("b", 5, 6);
  ParamList<float> params;
  blstm.Collect(&params);
  InitUniform(params, 0.3, 2);
  EXPECT_EQ(blstm.out_dim(), 12);
  std::vector<Mat<float>> seqs;
  for (int len : {7, 3, 9, 1})
    seqs.push_back(RandomMatrix(5, len, len).cast<float>());
  Graph<float> g(false);
  std::vector<Var> xs;
  for (const auto& s : seqs) xs.push_back(g.Input(s));
  const auto batched = blstm.ApplyBatch(g, xs);
  for (size_t i = 0; i < seqs.size(); ++i) {
    Graph<float> one(false);
    const Mat<float>& ref = one.Value(blstm.Apply(one, one.Input(seqs[i])));
    EXPECT_EQ(ref.rows(), 12);
    EXPECT_EQ(g.Value(batched[i]), ref) << i;
  }
}

MatD DirectConv(const MatD& x, const MatD& w, const MatD& b, int h, int wd) {
  const int cin = static_cast<int>(x.rows()), cout = static_cast<int>(w.rows());
  MatD y(cout, h * wd);
  for (int o = 0; o < cout; ++o) {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < wd; ++j) {
        double acc = b(o, 0);
        for (int dh = 0; dh < 3; ++dh) {
          for (int dw = 0; dw < 3; ++dw) {
            const int ii = i + dh - 1, jj = j + dw - 1;
            if (ii < 0 || ii >= h || jj < 0 || jj >= wd) continue;
            for (int c = 0; c < cin; ++c) {
              acc += w(o, (dh * 3 + dw) * cin + c) * x(c, ii * wd + jj);
            }
          }
        }
        y(o, i * wd + j) = acc;
      }
    }
  }
  return y;
}

TEST(ConvTest, MatchesDirectConvolution) {
  Conv3x3<double> conv("c", 2, 3);
  ParamList<double> params;
  conv.Collect(&params);
  InitUniform(params, 1.0, 4);
  const MatD x = RandomMatrix(2, 5 * 4, 5);
  Graph<double> g(false);
  const MatD& y = g.Value(conv.Apply(g, g.Input(x), 5, 4));
  const MatD ref = DirectConv(x, params[0]->value, params[1]->value, 5, 4);
  EXPECT_LE((y - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ConvTest, TwoBlocksQuarterTheTimeAxis) {
  VggBlock<float> b1("v1", 1, 2), b2("v2", 2, 3);
  ParamList<float> params;
  b1.Collect(&params);
  b2.Collect(&params);
  InitUniform(params, 0.2, 1);
  Graph<float> g(false);
  int h = 100, w = 8;
  Var y = b1.Apply(g, g.Input(RandomMatrix(1, h * w, 2).cast<float>()), &h, &w);
  y = b2.Apply(g, y, &h, &w);
  EXPECT_EQ(h, 25);
  EXPECT_EQ(w, 2);
  EXPECT_EQ(g.Value(y).cols(), 25 * 2);
}

TEST(ConvTest, EmptyInputIsRejected) {
  Conv3x3<double> conv("c", 1, 1);
  Graph<double> g(false);
  try {
    conv.Apply(g, g.Input(MatD::Zero(1, 0)), 0, 4);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kEmptyInput);
  }
}

TEST(ConvTest, BlockGradientCheck) {
  VggBlock<double> block("v", 2, 2);
  ParamList<double> params;
  block.Collect(&params);
  InitUniform(params, 0.5, 6);
  auto x = RandomParam("x", 2, 5 * 3, 7);
  params.push_back(&x);
  const MatD w = RandomMatrix(2, 3 * 2, 8);
  const auto r = CheckGradients(params, [&](bool backward) {
    Graph<double> g(backward);
    int h = 5, wd = 3;
    const Var y = block.Apply(g, g.Param(x), &h, &wd);
    const Var l = g.Sum(g.Mul(y, g.Input(w)));
    if (backward) g.Backward(l);
    return g.Scalar(l);
  });
  EXPECT_TRUE(r.Passed(1e-6)) << r.worst_param << " " << r.max_rel_error;
}

TEST(EmbeddingTest, LookupReturnsTableColumns) {
  Embedding<double> e("e", 5, 3);
  ParamList<double> params;
  e.Collect(&params);
  InitUniform(params, 1.0, 3);
  Graph<double> g(false);
  const int ids[] = {4, 0, 4};
  const MatD& y = g.Value(e.Lookup(g, ids));
  EXPECT_EQ(y.col(0), params[0]->value.col(4));
  EXPECT_EQ(y.col(1), params[0]->value.col(0));
  EXPECT_EQ(y.col(2), params[0]->value.col(4));
}

// ---- optimizers -------------------------------------------------------------

TEST(AdaDeltaTest, ZeroGradientLeavesParameterAndDecaysAccumulators) {
  Parameter<double> p("p", 2, 1);
  p.value << 1.0, -2.0;
  ParamList<double> params = {&p};
  AdaDelta<double> opt({0.95, 1e-6});
  p.grad << 0.5, 0.25;
  opt.Step(params);
  const MatD x = p.value;
  const MatD eg = opt.sq_grad()[0], ex = opt.sq_update()[0];
  opt.Step(params);  // grads were zeroed by the previous step
  EXPECT_EQ(p.value, x);
  EXPECT_LE((opt.sq_grad()[0] - 0.95 * eg).cwiseAbs().maxCoeff(), 1e-18);
  EXPECT_LE((opt.sq_update()[0] - 0.95 * ex).cwiseAbs().maxCoeff(), 1e-18);
}

TEST(AdaDeltaTest, FirstStepFormula) {
  const double rho = 0.95, eps = 1e-8, g = 0.7;
  Parameter<double> p("p", 1, 1);
  p.value(0, 0) = 3.0;
  p.grad(0, 0) = g;
  ParamList<double> params = {&p};
  AdaDelta<double> opt({rho, eps});
  opt.Step(params);
  const double dx = -std::sqrt(eps) / std::sqrt(g * g * (1 - rho) + eps) * g;
  EXPECT_NEAR(p.value(0, 0), 3.0 + dx, 1e-15);
  EXPECT_EQ(p.grad(0, 0), 0.0);
}

// Fifty steps on f(x) = x^2 from x = 1, against a scripted run of the same
// update rule.
TEST(AdaDeltaTest, QuadraticMatchesScriptedReference) {
  const double rho = 0.95, eps = 1e-6;
  Parameter<double> p("p", 1, 1);
  p.value(0, 0) = 1.0;
  ParamList<double> params = {&p};
  AdaDelta<double> opt({rho, eps});
  double x = 1.0, eg = 0.0, ex = 0.0;
  for (int i = 0; i < 50; ++i) {
    p.grad(0, 0) = 2.0 * p.value(0, 0);
    opt.Step(params);
    const double g = 2.0 * x;
    eg = rho * eg + (1 - rho) * g * g;
    const double dx = -std::sqrt(ex + eps) / std::sqrt(eg + eps) * g;
    ex = rho * ex + (1 - rho) * dx * dx;
    x += dx;
  }
  EXPECT_NEAR(p.value(0, 0), x, 1e-12);
  EXPECT_LT(std::abs(p.value(0, 0)), 1.0);
}

TEST(AdaDeltaTest, EpsCanBeHalved) {
  AdaDelta<float> opt({0.95, 1e-8});
  opt.set_eps(opt.eps() / 2);
  opt.set_eps(opt.eps() / 2);
  EXPECT_DOUBLE_EQ(opt.eps(), 2.5e-9);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Parameter<double> p("p", 2, 1);
  p.value << 1.0, 1.0;
  p.grad << 3.0, -0.01;
  ParamList<double> params = {&p};
  Adam<double> opt({0.01, 0.9, 0.999, 1e-8});
  opt.Step(params);
  EXPECT_NEAR(p.value(0, 0), 1.0 - 0.01, 1e-8);
  EXPECT_NEAR(p.value(1, 0), 1.0 + 0.01, 1e-6);
}

TEST(SgdTest, StepIsMinusLrTimesGradient) {
  Parameter<double> p("p", 1, 2);
  p.value << 1.0, 2.0;
  p.grad << 0.5, -1.0;
  ParamList<double> params = {&p};
  Sgd<double> opt(0.1);
  opt.Step(params);
  EXPECT_NEAR(p.value(0, 0), 0.95, 1e-15);
  EXPECT_NEAR(p.value(0, 1), 2.1, 1e-15);
  EXPECT_EQ(p.grad, MatD::Zero(1, 2));
}

TEST(ClipTest, BelowThresholdUnchanged) {
  Parameter<double> p("p", 1, 2);
  p.grad << 0.3, 0.4;
  ParamList<double> params = {&p};
  EXPECT_NEAR(ClipGradients(params, 1.0), 0.5, 1e-15);
  EXPECT_EQ(p.grad(0, 0), 0.3);
  EXPECT_EQ(p.grad(0, 1), 0.4);
}

TEST(ClipTest, ThreeFourFive) {
  Parameter<double> p("p", 1, 2);
  p.grad << 3.0, 4.0;
  ParamList<double> params = {&p};
  EXPECT_NEAR(ClipGradients(params, 1.0), 5.0, 1e-15);
  EXPECT_NEAR(p.grad(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(p.grad(0, 1), 0.8, 1e-15);
}

TEST(ClipTest, GlobalNormBoundedAcrossParameters) {
  Parameter<double> a("a", 3, 4), b("b", 5, 1);
  a.grad = RandomMatrix(3, 4, 1, 10.0);
  b.grad = RandomMatrix(5, 1, 2, 10.0);
  ParamList<double> params = {&a, &b};
  ClipGradients(params, 2.0);
  const double norm = std::sqrt(a.grad.squaredNorm() + b.grad.squaredNorm());
  EXPECT_LE(norm, 2.0 + 1e-9);
}

TEST(ClipTest, NonFiniteGradientNamesTheParameter) {
  Parameter<double> a("first", 1, 1), b("second", 1, 1);
  b.grad(0, 0) = std::nan("");
  ParamList<double> params = {&a, &b};
  try {
    CheckFiniteGradients(params);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonFinite);
    EXPECT_NE(std::string(e.what()).find("second"), std::string::npos);
  }
}

// ---- initialization and checkpoints
// ------------------------------------------

TEST(InitTest, UniformRangeAndSeedDeterminism) {
  Parameter<double> a("a", 20, 20), b("b", 20, 20);
  ParamList<double> pa = {&a}, pb = {&b};
  InitUniform(pa, 0.1, 5);
  InitUniform(pb, 0.1, 5);
  EXPECT_EQ(a.value, b.value);
  EXPECT_LE(a.value.cwiseAbs().maxCoeff(), 0.1);
  InitUniform(pb, 0.1, 6);
  EXPECT_NE(a.value, b.value);
}

TEST(CheckpointTest, RoundTripAndMismatch) {
  testing::TempDir dir("ckpt");
  Parameter<float> a("enc.w", 3, 2), b("enc.b", 3, 1);
  ParamList<float> params = {&a, &b};
  InitUniform(params, 1.0, 9);
  SaveCheckpoint(dir / "m.nnk", R"({"kind":"test"})", params);
  const CheckpointData data = ReadCheckpoint(dir / "m.nnk");
  EXPECT_EQ(data.config, R"({"kind":"test"})");
  Parameter<float> a2("enc.w", 3, 2), b2("enc.b", 3, 1);
  ParamList<float> loaded = {&a2, &b2};
  AssignParameters(data, loaded);
  EXPECT_EQ(a2.value, a.value);
  EXPECT_EQ(b2.value, b.value);
  Parameter<float> wrong("enc.w", 2, 3);
  ParamList<float> bad = {&wrong, &b2};
  EXPECT_THROW(AssignParameters(data, bad), Error);
}

TEST(CheckpointTest, TruncatedFileIsRejected) {
  testing::TempDir dir("ckpt");
  Parameter<float> a("w", 10, 10);
  ParamList<float> params = {&a};
  SaveCheckpoint(dir / "m.nnk", "{}", params);
  std::string bytes = testing::ReadFile(dir / "m.nnk");
  testing::WriteFile(dir / "t.nnk", bytes.substr(0, bytes.size() - 7));
  try {
    ReadCheckpoint(dir / "t.nnk");
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTruncated);
  }
}

TEST(CheckpointTest, CopyBetweenPrecisions) {
  Parameter<float> f("w", 2, 2);
  Parameter<double> d("w", 2, 2);
  ParamList<float> pf = {&f};
  ParamList<double> pd = {&d};
  InitUniform(pf, 1.0, 3);
  CopyParameters(pf, pd);
  EXPECT_EQ(d.value.cast<float>(), f.value);
}

}  // namespace
}  // namespace imsk
