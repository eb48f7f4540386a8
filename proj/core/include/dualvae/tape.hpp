// Copyright 2026 The dualvae Authors.
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

#include <cstddef>
#include <span>
#include <vector>

#include "dualvae/tensor.hpp"

namespace dualvae {

// Handle to a node recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

// The closed set of differentiable operations the model graph is built from.
enum class Op {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kAffine,
  kSigmoid,
  kTanh,
  kExp,
  kLog,
  kClamp,
  kSoftmaxRows,
  kSum,
  kMean,
  kDotRows,
  kCosineRows,
  kNormalizeRows,
  kConcatRows,
  kConcatCols,
  kSliceRows,
  kSliceCols,
  kMaskedLogSumExpRows,
};

const char* op_name(Op op);

/// Tape-based reverse-mode differentiation over the fixed Op set.
///
/// Nodes are appended in evaluation order, so the node list is always
/// topologically sorted. Each node keeps only what its backward rule needs
/// (e.g. the sigmoid output, not its input). Constants and everything that
/// depends on constants only are marked as not requiring gradients, and
/// their backward rules are skipped.
///
/// Binary elementwise ops accept the second operand either with the same
/// shape, as a 1 x cols row broadcast over all rows, or as a 1 x 1 scalar.
///
/// A Tape is single-owner and not thread-safe.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  const Tensor& value(Var v) const;
  // Gradient of the last backward root with respect to v; an all-zero tensor
  // for nodes the root does not depend on.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const;
  Op op(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a 1 x 1 root. Gradients from a previous sweep are
  // cleared first.
  void backward(Var root);

  Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // scale * a + shift
  Var affine(Var a, double scale, double shift = 0.0);
  Var scale(Var a, double s) { return affine(a, s, 0.0); }
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  // Natural log. With a mask, entries whose mask value is zero yield 0 and
  // are not domain-checked.
  Var log(Var a);
  Var log(Var a, const Tensor& mask);
  Var clamp(Var a, double lo, double hi);
  Var softmax_rows(Var a);
  Var sum(Var a);
  Var mean(Var a);
  // Row-wise inner products, m x 1. `b` may be a broadcast row.
  Var dot_rows(Var a, Var b);
  // Row-wise cosine similarity, m x 1. `b` may be a broadcast row. A zero
  // norm on either side gives similarity 0 (and zero gradient).
  Var cosine_rows(Var a, Var b);
  // Rows scaled to unit L2 norm; zero rows stay zero.
  Var normalize_rows(Var a);
  Var concat_rows(std::span<const Var> parts);
  Var concat_cols(std::span<const Var> parts);
  Var slice_rows(Var a, std::size_t start, std::size_t count);
  Var slice_cols(Var a, std::size_t start, std::size_t count);
  // Per-row log-sum-exp over the entries whose mask is non-zero, m x 1.
  // Every row must keep at least one entry.
  Var masked_logsumexp_rows(Var a, const Tensor& mask);

  // Number of cosine/normalize evaluations that hit a zero-norm vector since
  // the tape was created.
  std::size_t zero_norm_events() const { return zero_norm_events_; }

 private:
  struct Node {
    Op op = Op::kLeaf;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    // Op-specific saved data: norms, masks, softmax weights, ...
    Tensor saved;
    Tensor saved2;
    double p0 = 0.0;
    double p1 = 0.0;
    std::size_t i0 = 0;
    bool trans_a = false;
    bool trans_b = false;
    bool needs_grad = false;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  bool any_needs_grad(std::initializer_list<std::size_t> ids) const;
  void accumulate(std::size_t id, const Tensor& g);
  void backward_node(std::size_t id);

  std::vector<Node> nodes_;
  std::size_t zero_norm_events_ = 0;
};

}  // namespace dualvae
