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

#include "dualvae/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dualvae/errors.hpp"

namespace dualvae {
namespace {

enum Broadcast : std::size_t { kSame = 0, kRow = 1, kScalar = 2 };

Broadcast classify(const Tensor& a, const Tensor& b, const char* what) {
  if (a.same_shape(b)) return kSame;
  if (b.rows() == 1 && b.cols() == 1) return kScalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return kRow;
  throw DimensionError(fmt::format("{}: cannot broadcast {}x{} against {}x{}", what,
                                   b.rows(), b.cols(), a.rows(), a.cols()));
}

inline double bval(const Tensor& b, Broadcast mode, std::size_t r, std::size_t c) {
  switch (mode) {
    case kSame:
      return b(r, c);
    case kRow:
      return b(0, c);
    default:
      return b[0];
  }
}

// Sums a full-shape gradient down to the broadcast operand's shape.
Tensor reduce_to(const Tensor& g, Broadcast mode, const Tensor& like) {
  if (mode == kSame) return g;
  Tensor out(like.rows(), like.cols());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (mode == kRow)
        out(0, c) += g(r, c);
      else
        out[0] += g(r, c);
    }
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatMul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kAffine: return "affine";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kClamp: return "clamp";
    case Op::kSoftmaxRows: return "softmax_rows";
    case Op::kSum: return "sum";
    case Op::kMean: return "mean";
    case Op::kDotRows: return "dot_rows";
    case Op::kCosineRows: return "cosine_rows";
    case Op::kNormalizeRows: return "normalize_rows";
    case Op::kConcatRows: return "concat_rows";
    case Op::kConcatCols: return "concat_cols";
    case Op::kSliceRows: return "slice_rows";
    case Op::kSliceCols: return "slice_cols";
    case Op::kMaskedLogSumExpRows: return "masked_logsumexp_rows";
  }
  return "?";
}

Var Tape::push(Node n) {
  if (!n.value.all_finite()) {
    throw NumericError(fmt::format("non-finite value produced by {}", op_name(n.op)));
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw ContractError("Var does not belong to this tape");
  return nodes_[v.id];
}

bool Tape::any_needs_grad(std::initializer_list<std::size_t> ids) const {
  return std::any_of(ids.begin(), ids.end(),
                     [&](std::size_t id) { return nodes_[id].needs_grad; });
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

Tensor Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) return Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

bool Tape::requires_grad(Var v) const { return node(v).needs_grad; }
Op Tape::op(Var v) const { return node(v).op; }

Var Tape::matmul(Var a, Var b, bool trans_a, bool trans_b) {
  Node n;
  n.op = Op::kMatMul;
  n.inputs = {a.id, b.id};
  n.trans_a = trans_a;
  n.trans_b = trans_b;
  gemm(node(a).value, trans_a, node(b).value, trans_b, n.value);
  n.needs_grad = any_needs_grad({a.id, b.id});
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  Broadcast mode = classify(av, bv, "add");
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a.id, b.id};
  n.i0 = mode;
  n.value = Tensor(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) n.value(r, c) = av(r, c) + bval(bv, mode, r, c);
  n.needs_grad = any_needs_grad({a.id, b.id});
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  Broadcast mode = classify(av, bv, "sub");
  Node n;
  n.op = Op::kSub;
  n.inputs = {a.id, b.id};
  n.i0 = mode;
  n.value = Tensor(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) n.value(r, c) = av(r, c) - bval(bv, mode, r, c);
  n.needs_grad = any_needs_grad({a.id, b.id});
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  Broadcast mode = classify(av, bv, "mul");
  Node n;
  n.op = Op::kMul;
  n.inputs = {a.id, b.id};
  n.i0 = mode;
  n.value = Tensor(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) n.value(r, c) = av(r, c) * bval(bv, mode, r, c);
  n.needs_grad = any_needs_grad({a.id, b.id});
  return push(std::move(n));
}

Var Tape::affine(Var a, double scale, double shift) {
  Node n;
  n.op = Op::kAffine;
  n.inputs = {a.id};
  n.p0 = scale;
  n.p1 = shift;
  n.value = node(a).value;
  for (double& v : n.value.data()) v = scale * v + shift;
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.inputs = {a.id};
  n.value = node(a).value;
  for (double& v : n.value.data()) v = stable_sigmoid(v);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.inputs = {a.id};
  n.value = node(a).value;
  for (double& v : n.value.data()) v = std::tanh(v);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::exp(Var a) {
  Node n;
  n.op = Op::kExp;
  n.inputs = {a.id};
  n.value = node(a).value;
  for (double& v : n.value.data()) v = std::exp(v);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::log(Var a) {
  const Tensor& av = node(a).value;
  return log(a, Tensor(av.rows(), av.cols(), 1.0));
}

Var Tape::log(Var a, const Tensor& mask) {
  const Tensor& av = node(a).value;
  if (!mask.same_shape(av)) throw DimensionError("log mask shape mismatch");
  Node n;
  n.op = Op::kLog;
  n.inputs = {a.id};
  n.value = Tensor(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (mask[i] == 0.0) continue;
    if (!(av[i] > 0.0)) {
      throw DomainError(fmt::format("log of non-positive value {} at flat index {}", av[i], i));
    }
    n.value[i] = std::log(av[i]);
  }
  n.saved = mask;
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::clamp(Var a, double lo, double hi) {
  Node n;
  n.op = Op::kClamp;
  n.inputs = {a.id};
  n.p0 = lo;
  n.p1 = hi;
  n.value = node(a).value;
  for (double& v : n.value.data()) v = std::clamp(v, lo, hi);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::softmax_rows(Var a) {
  const Tensor& av = node(a).value;
  Node n;
  n.op = Op::kSoftmaxRows;
  n.inputs = {a.id};
  n.value = Tensor(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    auto in = av.row_span(r);
    auto out = n.value.row_span(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - mx);
      total += out[c];
    }
    for (double& v : out) v /= total;
  }
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.inputs = {a.id};
  double s = 0.0;
  for (double v : node(a).value.data()) s += v;
  n.value = Tensor::scalar(s);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  const Tensor& av = node(a).value;
  if (av.size() == 0) throw DimensionError("mean of an empty tensor");
  Node n;
  n.op = Op::kMean;
  n.inputs = {a.id};
  double s = 0.0;
  for (double v : av.data()) s += v;
  n.value = Tensor::scalar(s / static_cast<double>(av.size()));
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::dot_rows(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  Broadcast mode = classify(av, bv, "dot_rows");
  if (mode == kScalar && av.cols() != 1) throw DimensionError("dot_rows needs a row operand");
  Node n;
  n.op = Op::kDotRows;
  n.inputs = {a.id, b.id};
  n.i0 = mode;
  n.value = Tensor(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < av.cols(); ++c) s += av(r, c) * bval(bv, mode, r, c);
    n.value(r, 0) = s;
  }
  n.needs_grad = any_needs_grad({a.id, b.id});
  return push(std::move(n));
}

Var Tape::cosine_rows(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  Broadcast mode = classify(av, bv, "cosine_rows");
  if (mode == kScalar && av.cols() != 1) throw DimensionError("cosine_rows needs a row operand");
  Node n;
  n.op = Op::kCosineRows;
  n.inputs = {a.id, b.id};
  n.i0 = mode;
  n.value = Tensor(av.rows(), 1);
  n.saved = Tensor(av.rows(), 1);   // |a_r|
  n.saved2 = Tensor(av.rows(), 1);  // |b_r|
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t c = 0; c < av.cols(); ++c) {
      const double x = av(r, c);
      const double y = bval(bv, mode, r, c);
      ab += x * y;
      aa += x * x;
      bb += y * y;
    }
    const double na = std::sqrt(aa);
    const double nb = std::sqrt(bb);
    n.saved(r, 0) = na;
    n.saved2(r, 0) = nb;
    if (na == 0.0 || nb == 0.0) {
      ++zero_norm_events_;
      continue;
    }
    n.value(r, 0) = ab / (na * nb);
  }
  n.needs_grad = any_needs_grad({a.id, b.id});
  return push(std::move(n));
}

Var Tape::normalize_rows(Var a) {
  const Tensor& av = node(a).value;
  Node n;
  n.op = Op::kNormalizeRows;
  n.inputs = {a.id};
  n.value = Tensor(av.rows(), av.cols());
  n.saved = Tensor(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double ss = 0.0;
    for (double v : av.row_span(r)) ss += v * v;
    const double norm = std::sqrt(ss);
    n.saved(r, 0) = norm;
    if (norm == 0.0) {
      ++zero_norm_events_;
      continue;
    }
    for (std::size_t c = 0; c < av.cols(); ++c) n.value(r, c) = av(r, c) / norm;
  }
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows of nothing");
  const std::size_t cols = node(parts[0]).value.cols();
  std::size_t rows = 0;
  Node n;
  n.op = Op::kConcatRows;
  for (Var p : parts) {
    const Tensor& pv = node(p).value;
    if (pv.cols() != cols) throw DimensionError("concat_rows column mismatch");
    rows += pv.rows();
    n.inputs.push_back(p.id);
    n.needs_grad = n.needs_grad || node(p).needs_grad;
  }
  n.value = Tensor(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& pv = node(p).value;
    std::copy(pv.data().begin(), pv.data().end(), n.value.data().begin() + offset * cols);
    offset += pv.rows();
  }
  return push(std::move(n));
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  const std::size_t rows = node(parts[0]).value.rows();
  std::size_t cols = 0;
  Node n;
  n.op = Op::kConcatCols;
  for (Var p : parts) {
    const Tensor& pv = node(p).value;
    if (pv.rows() != rows) throw DimensionError("concat_cols row mismatch");
    cols += pv.cols();
    n.inputs.push_back(p.id);
    n.needs_grad = n.needs_grad || node(p).needs_grad;
  }
  n.value = Tensor(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& pv = node(p).value;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < pv.cols(); ++c) n.value(r, offset + c) = pv(r, c);
    offset += pv.cols();
  }
  return push(std::move(n));
}

Var Tape::slice_rows(Var a, std::size_t start, std::size_t count) {
  const Tensor& av = node(a).value;
  if (start + count > av.rows()) throw DimensionError("slice_rows out of range");
  Node n;
  n.op = Op::kSliceRows;
  n.inputs = {a.id};
  n.i0 = start;
  n.value = Tensor(count, av.cols());
  std::copy(av.data().begin() + start * av.cols(),
            av.data().begin() + (start + count) * av.cols(), n.value.data().begin());
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::slice_cols(Var a, std::size_t start, std::size_t count) {
  const Tensor& av = node(a).value;
  if (start + count > av.cols()) throw DimensionError("slice_cols out of range");
  Node n;
  n.op = Op::kSliceCols;
  n.inputs = {a.id};
  n.i0 = start;
  n.value = Tensor(av.rows(), count);
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) n.value(r, c) = av(r, start + c);
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

Var Tape::masked_logsumexp_rows(Var a, const Tensor& mask) {
  const Tensor& av = node(a).value;
  if (!mask.same_shape(av)) throw DimensionError("masked_logsumexp_rows mask shape mismatch");
  Node n;
  n.op = Op::kMaskedLogSumExpRows;
  n.inputs = {a.id};
  n.value = Tensor(av.rows(), 1);
  n.saved = Tensor(av.rows(), av.cols());  // softmax weights over kept entries
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < av.cols(); ++c)
      if (mask(r, c) != 0.0) mx = std::max(mx, av(r, c));
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw ContractError(fmt::format("masked_logsumexp_rows: row {} has no kept entries", r));
    }
    double total = 0.0;
    for (std::size_t c = 0; c < av.cols(); ++c) {
      if (mask(r, c) == 0.0) continue;
      const double e = std::exp(av(r, c) - mx);
      n.saved(r, c) = e;
      total += e;
    }
    for (std::size_t c = 0; c < av.cols(); ++c) n.saved(r, c) /= total;
    n.value(r, 0) = mx + std::log(total);
  }
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.grad.empty())
    n.grad = g;
  else
    n.grad += g;
}

void Tape::backward(Var root) {
  const Node& r = node(root);
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw ContractError(fmt::format("backward root must be scalar, got {}x{}",
                                    r.value.rows(), r.value.cols()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  if (!r.needs_grad) return;
  nodes_[root.id].grad = Tensor::scalar(1.0);
  for (std::size_t id = root.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (n.op == Op::kLeaf || !n.needs_grad || n.grad.empty()) continue;
    backward_node(id);
  }
}

void Tape::backward_node(std::size_t id) {
  const Node& n = nodes_[id];
  const Tensor& g = n.grad;
  auto input = [&](std::size_t k) -> const Node& { return nodes_[n.inputs[k]]; };
  auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].needs_grad; };
  const Broadcast mode = static_cast<Broadcast>(n.i0);

  switch (n.op) {
    case Op::kLeaf:
      return;
    case Op::kMatMul: {
      const Tensor& a = input(0).value;
      const Tensor& b = input(1).value;
      if (wants(0)) {
        Tensor ga;
        if (!n.trans_a)
          gemm(g, false, b, !n.trans_b, ga);
        else
          gemm(b, n.trans_b, g, true, ga);
        accumulate(n.inputs[0], ga);
      }
      if (wants(1)) {
        Tensor gb;
        if (!n.trans_b)
          gemm(a, !n.trans_a, g, false, gb);
        else
          gemm(g, true, a, n.trans_a, gb);
        accumulate(n.inputs[1], gb);
      }
      return;
    }
    case Op::kAdd:
    case Op::kSub: {
      if (wants(0)) accumulate(n.inputs[0], g);
      if (wants(1)) {
        Tensor gb = reduce_to(g, mode, input(1).value);
        if (n.op == Op::kSub) gb *= -1.0;
        accumulate(n.inputs[1], gb);
      }
      return;
    }
    case Op::kMul: {
      const Tensor& a = input(0).value;
      const Tensor& b = input(1).value;
      if (wants(0)) {
        Tensor ga(g.rows(), g.cols());
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) = g(r, c) * bval(b, mode, r, c);
        accumulate(n.inputs[0], ga);
      }
      if (wants(1)) {
        Tensor full(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) full[i] = g[i] * a[i];
        accumulate(n.inputs[1], reduce_to(full, mode, b));
      }
      return;
    }
    case Op::kAffine: {
      Tensor ga = g;
      ga *= n.p0;
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kSigmoid: {
      Tensor ga(g.rows(), g.cols());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = n.value[i];
        ga[i] = g[i] * y * (1.0 - y);
      }
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kTanh: {
      Tensor ga(g.rows(), g.cols());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = n.value[i];
        ga[i] = g[i] * (1.0 - y * y);
      }
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kExp: {
      Tensor ga(g.rows(), g.cols());
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * n.value[i];
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kLog: {
      const Tensor& a = input(0).value;
      Tensor ga(g.rows(), g.cols());
      for (std::size_t i = 0; i < g.size(); ++i)
        if (n.saved[i] != 0.0) ga[i] = g[i] / a[i];
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kClamp: {
      const Tensor& a = input(0).value;
      Tensor ga(g.rows(), g.cols());
      for (std::size_t i = 0; i < g.size(); ++i)
        if (a[i] >= n.p0 && a[i] <= n.p1) ga[i] = g[i];
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kSoftmaxRows: {
      Tensor ga(g.rows(), g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * n.value(r, c);
        for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) = n.value(r, c) * (g(r, c) - dot);
      }
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kSum:
    case Op::kMean: {
      const Tensor& a = input(0).value;
      double v = g[0];
      if (n.op == Op::kMean) v /= static_cast<double>(a.size());
      accumulate(n.inputs[0], Tensor(a.rows(), a.cols(), v));
      return;
    }
    case Op::kDotRows: {
      const Tensor& a = input(0).value;
      const Tensor& b = input(1).value;
      if (wants(0)) {
        Tensor ga(a.rows(), a.cols());
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) ga(r, c) = g(r, 0) * bval(b, mode, r, c);
        accumulate(n.inputs[0], ga);
      }
      if (wants(1)) {
        Tensor full(a.rows(), a.cols());
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) full(r, c) = g(r, 0) * a(r, c);
        accumulate(n.inputs[1], reduce_to(full, mode, b));
      }
      return;
    }
    case Op::kCosineRows: {
      const Tensor& a = input(0).value;
      const Tensor& b = input(1).value;
      Tensor ga(a.rows(), a.cols());
      Tensor gfull(a.rows(), a.cols());
      for (std::size_t r = 0; r < a.rows(); ++r) {
        const double na = n.saved(r, 0);
        const double nb = n.saved2(r, 0);
        if (na == 0.0 || nb == 0.0) continue;
        const double y = n.value(r, 0);
        const double gr = g(r, 0);
        for (std::size_t c = 0; c < a.cols(); ++c) {
          const double x = a(r, c);
          const double z = bval(b, mode, r, c);
          ga(r, c) = gr * (z / (na * nb) - y * x / (na * na));
          gfull(r, c) = gr * (x / (na * nb) - y * z / (nb * nb));
        }
      }
      if (wants(0)) accumulate(n.inputs[0], ga);
      if (wants(1)) accumulate(n.inputs[1], reduce_to(gfull, mode, b));
      return;
    }
    case Op::kNormalizeRows: {
      Tensor ga(g.rows(), g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r) {
        const double norm = n.saved(r, 0);
        if (norm == 0.0) continue;
        double dot = 0.0;
        for (std::size_t c = 0; c < g.cols(); ++c) dot += n.value(r, c) * g(r, c);
        for (std::size_t c = 0; c < g.cols(); ++c)
          ga(r, c) = (g(r, c) - n.value(r, c) * dot) / norm;
      }
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kConcatRows: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Tensor& part = input(k).value;
        if (wants(k)) {
          Tensor gp(part.rows(), part.cols());
          std::copy(g.data().begin() + offset * g.cols(),
                    g.data().begin() + (offset + part.rows()) * g.cols(), gp.data().begin());
          accumulate(n.inputs[k], gp);
        }
        offset += part.rows();
      }
      return;
    }
    case Op::kConcatCols: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Tensor& part = input(k).value;
        if (wants(k)) {
          Tensor gp(part.rows(), part.cols());
          for (std::size_t r = 0; r < part.rows(); ++r)
            for (std::size_t c = 0; c < part.cols(); ++c) gp(r, c) = g(r, offset + c);
          accumulate(n.inputs[k], gp);
        }
        offset += part.cols();
      }
      return;
    }
    case Op::kSliceRows: {
      const Tensor& a = input(0).value;
      Tensor ga(a.rows(), a.cols());
      std::copy(g.data().begin(), g.data().end(), ga.data().begin() + n.i0 * a.cols());
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kSliceCols: {
      const Tensor& a = input(0).value;
      Tensor ga(a.rows(), a.cols());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) ga(r, n.i0 + c) = g(r, c);
      accumulate(n.inputs[0], ga);
      return;
    }
    case Op::kMaskedLogSumExpRows: {
      Tensor ga(n.saved.rows(), n.saved.cols());
      for (std::size_t r = 0; r < ga.rows(); ++r)
        for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) = g(r, 0) * n.saved(r, c);
      accumulate(n.inputs[0], ga);
      return;
    }
  }
}

}  // namespace dualvae
