#include "scan/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Dense>

namespace scan {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXd;
using MatMap = Eigen::Map<RowMat>;
using CMatMap = Eigen::Map<const RowMat>;
using ColMap = Eigen::Map<ColMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;

}  // namespace

NodeId Tape::push(Op op, std::uint32_t rows, std::uint32_t cols, NodeId a,
                  NodeId b, NodeId c, NodeId d, NodeId e) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  const std::size_t count = std::size_t(rows) * cols;
  n.val = values_.alloc(count);
  n.grad = grads_.alloc_zero(count);
  n.in[0] = a;
  n.in[1] = b;
  n.in[2] = c;
  n.in[3] = d;
  n.in[4] = e;
  n.aux = 0;
  nodes_.push_back(n);
  return NodeId(nodes_.size() - 1);
}

NodeId Tape::push_list(Op op, std::uint32_t rows, std::uint32_t cols,
                       std::span<const NodeId> parts) {
  const std::size_t off = lists_.size();
  lists_.insert(lists_.end(), parts.begin(), parts.end());
  return push(op, rows, cols, NodeId(off), NodeId(parts.size()));
}

void Tape::require_vector(NodeId id, const char* what) const {
  if (cols(id) != 1) {
    throw ShapeMismatchError(std::string(what) + ": expected a column vector, got " +
                             std::to_string(rows(id)) + "x" +
                             std::to_string(cols(id)));
  }
}

void Tape::require_same_shape(NodeId a, NodeId b, const char* what) const {
  if (rows(a) != rows(b) || cols(a) != cols(b)) {
    throw ShapeMismatchError(std::string(what) + ": " + std::to_string(rows(a)) +
                             "x" + std::to_string(cols(a)) + " vs " +
                             std::to_string(rows(b)) + "x" +
                             std::to_string(cols(b)));
  }
}

NodeId Tape::leaf(std::size_t rows, std::size_t cols) {
  NodeId id = push(Op::kLeaf, std::uint32_t(rows), std::uint32_t(cols), kNoNode);
  std::fill(value(id), value(id) + size(id), 0.0);
  return id;
}

void Tape::freeze_leaves() {
  frozen_nodes_ = nodes_.size();
  frozen_values_ = values_.size();
  frozen_grads_ = grads_.size();
  frozen_aux_ = aux_.size();
  frozen_lists_ = lists_.size();
}

void Tape::reset() {
  nodes_.resize(frozen_nodes_);
  values_.truncate(frozen_values_);
  grads_.truncate(frozen_grads_);
  aux_.truncate(frozen_aux_);
  lists_.resize(frozen_lists_);
  backward_done_ = false;
}

NodeId Tape::matvec(NodeId a, NodeId x) {
  require_vector(x, "matvec x");
  if (cols(a) != rows(x)) {
    throw ShapeMismatchError("matvec: " + std::to_string(rows(a)) + "x" +
                             std::to_string(cols(a)) + " times " +
                             std::to_string(rows(x)));
  }
  NodeId y = push(Op::kMatvec, nodes_[a].rows, 1, a, x);
  VecMap(value(y), rows(y)).noalias() =
      CMatMap(value(a), rows(a), cols(a)) * CVecMap(value(x), rows(x));
  return y;
}

NodeId Tape::matvec_t(NodeId a, NodeId x) {
  require_vector(x, "matvec_t x");
  if (rows(a) != rows(x)) {
    throw ShapeMismatchError("matvec_t: " + std::to_string(rows(a)) + "x" +
                             std::to_string(cols(a)) + " transposed times " +
                             std::to_string(rows(x)));
  }
  NodeId y = push(Op::kMatvecT, nodes_[a].cols, 1, a, x);
  VecMap(value(y), rows(y)).noalias() =
      CMatMap(value(a), rows(a), cols(a)).transpose() *
      CVecMap(value(x), rows(x));
  return y;
}

NodeId Tape::matmul_bt(NodeId a, NodeId b) {
  if (cols(a) != cols(b)) {
    throw ShapeMismatchError("matmul_bt: inner dims " + std::to_string(cols(a)) +
                             " vs " + std::to_string(cols(b)));
  }
  NodeId y = push(Op::kMatmulBt, nodes_[a].rows, nodes_[b].rows, a, b);
  MatMap(value(y), rows(y), cols(y)).noalias() =
      CMatMap(value(a), rows(a), cols(a)) *
      CMatMap(value(b), rows(b), cols(b)).transpose();
  return y;
}

NodeId Tape::affine2(NodeId w, NodeId x, NodeId u, NodeId h, NodeId b) {
  require_vector(x, "affine2 x");
  require_vector(h, "affine2 h");
  require_vector(b, "affine2 b");
  if (cols(w) != rows(x) || cols(u) != rows(h) || rows(w) != rows(u) ||
      rows(w) != rows(b)) {
    throw ShapeMismatchError("affine2: incompatible shapes");
  }
  NodeId y = push(Op::kAffine2, nodes_[w].rows, 1, w, x, u, h, b);
  VecMap out(value(y), rows(y));
  out = CVecMap(value(b), rows(b));
  out.noalias() += CMatMap(value(w), rows(w), cols(w)) * CVecMap(value(x), rows(x));
  out.noalias() += CMatMap(value(u), rows(u), cols(u)) * CVecMap(value(h), rows(h));
  return y;
}

NodeId Tape::add(NodeId a, NodeId b) {
  require_same_shape(a, b, "add");
  NodeId y = push(Op::kAdd, nodes_[a].rows, nodes_[a].cols, a, b);
  const std::size_t n = size(y);
  VecMap(value(y), n) = CVecMap(value(a), n) + CVecMap(value(b), n);
  return y;
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same_shape(a, b, "sub");
  NodeId y = push(Op::kSub, nodes_[a].rows, nodes_[a].cols, a, b);
  const std::size_t n = size(y);
  VecMap(value(y), n) = CVecMap(value(a), n) - CVecMap(value(b), n);
  return y;
}

NodeId Tape::mul(NodeId a, NodeId b) {
  require_same_shape(a, b, "mul");
  NodeId y = push(Op::kMul, nodes_[a].rows, nodes_[a].cols, a, b);
  const std::size_t n = size(y);
  VecMap(value(y), n) =
      CVecMap(value(a), n).cwiseProduct(CVecMap(value(b), n));
  return y;
}

NodeId Tape::scale(NodeId x, double alpha) {
  NodeId y = push(Op::kScale, nodes_[x].rows, nodes_[x].cols, x);
  nodes_[y].aux = aux_.alloc(1);
  *aux_.at(nodes_[y].aux) = alpha;
  const std::size_t n = size(y);
  VecMap(value(y), n) = alpha * CVecMap(value(x), n);
  return y;
}

NodeId Tape::sigmoid(NodeId x) {
  NodeId y = push(Op::kSigmoid, nodes_[x].rows, nodes_[x].cols, x);
  const double* in = value(x);
  double* out = value(y);
  for (std::size_t i = 0, n = size(y); i < n; ++i) {
    out[i] = 1.0 / (1.0 + std::exp(-in[i]));
  }
  return y;
}

NodeId Tape::tanh_of(NodeId x) {
  NodeId y = push(Op::kTanh, nodes_[x].rows, nodes_[x].cols, x);
  const double* in = value(x);
  double* out = value(y);
  for (std::size_t i = 0, n = size(y); i < n; ++i) out[i] = std::tanh(in[i]);
  return y;
}

NodeId Tape::softmax(NodeId x) {
  require_vector(x, "softmax");
  NodeId y = push(Op::kSoftmax, nodes_[x].rows, 1, x);
  const double* in = value(x);
  double* out = value(y);
  const std::size_t n = size(y);
  double mx = in[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, in[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - mx);
    z += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= z;
  return y;
}

NodeId Tape::rowwise_add(NodeId m, NodeId v) {
  require_vector(v, "rowwise_add v");
  if (cols(m) != rows(v)) {
    throw ShapeMismatchError("rowwise_add: " + std::to_string(cols(m)) +
                             " cols vs vector length " + std::to_string(rows(v)));
  }
  NodeId y = push(Op::kRowwiseAdd, nodes_[m].rows, nodes_[m].cols, m, v);
  MatMap(value(y), rows(y), cols(y)) =
      CMatMap(value(m), rows(m), cols(m)).rowwise() +
      CVecMap(value(v), rows(v)).transpose();
  return y;
}

NodeId Tape::concat(NodeId a, NodeId b) {
  require_vector(a, "concat a");
  require_vector(b, "concat b");
  NodeId y = push(Op::kConcat, nodes_[a].rows + nodes_[b].rows, 1, a, b);
  std::memcpy(value(y), value(a), rows(a) * sizeof(double));
  std::memcpy(value(y) + rows(a), value(b), rows(b) * sizeof(double));
  return y;
}

NodeId Tape::view(NodeId parent, std::size_t offset, std::size_t vrows,
                  std::size_t vcols) {
  const std::size_t count = vrows * vcols;
  if (offset + count > size(parent)) {
    throw ShapeMismatchError("view: range exceeds parent storage");
  }
  Node n;
  n.op = Op::kView;
  n.rows = std::uint32_t(vrows);
  n.cols = std::uint32_t(vcols);
  n.val = nodes_[parent].val + offset;
  n.grad = nodes_[parent].grad + offset;
  n.in[0] = parent;
  n.in[1] = n.in[2] = n.in[3] = n.in[4] = kNoNode;
  n.aux = 0;
  nodes_.push_back(n);
  return NodeId(nodes_.size() - 1);
}

NodeId Tape::embedding(NodeId table, std::size_t row) {
  if (row >= rows(table)) {
    throw ShapeMismatchError("embedding: row " + std::to_string(row) +
                             " out of " + std::to_string(rows(table)));
  }
  return view(table, row * cols(table), cols(table), 1);
}

NodeId Tape::stack_rows(std::span<const NodeId> parts) {
  if (parts.empty()) throw ShapeMismatchError("stack_rows: no parts");
  const std::size_t len = rows(parts[0]);
  for (NodeId p : parts) {
    require_vector(p, "stack_rows part");
    if (rows(p) != len) {
      throw ShapeMismatchError("stack_rows: ragged part lengths");
    }
  }
  NodeId y = push_list(Op::kStackRows, std::uint32_t(parts.size()),
                       std::uint32_t(len), parts);
  for (std::size_t t = 0; t < parts.size(); ++t) {
    std::memcpy(value(y) + t * len, value(parts[t]), len * sizeof(double));
  }
  return y;
}

NodeId Tape::sum_many(std::span<const NodeId> parts) {
  if (parts.empty()) throw ShapeMismatchError("sum_many: no parts");
  for (NodeId p : parts) require_same_shape(parts[0], p, "sum_many");
  NodeId y = push_list(Op::kSumMany, nodes_[parts[0]].rows,
                       nodes_[parts[0]].cols, parts);
  const std::size_t n = size(y);
  VecMap out(value(y), n);
  out = CVecMap(value(parts[0]), n);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out += CVecMap(value(parts[i]), n);
  }
  return y;
}

NodeId Tape::cross_entropy_logits(NodeId logits, std::size_t target) {
  require_vector(logits, "cross_entropy logits");
  if (target >= rows(logits)) {
    throw ShapeMismatchError("cross_entropy: target " + std::to_string(target) +
                             " out of " + std::to_string(rows(logits)));
  }
  NodeId y = push(Op::kCrossEntropy, 1, 1, logits);
  nodes_[y].aux = target;
  const double* l = value(logits);
  const std::size_t n = rows(logits);
  double mx = l[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, l[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += std::exp(l[i] - mx);
  value(y)[0] = mx + std::log(z) - l[target];
  return y;
}

NodeId Tape::dropout(NodeId x, double rate, Rng& rng, bool training) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout rate must be in [0,1)");
  }
  if (!training || rate == 0.0) return x;
  NodeId y = push(Op::kDropout, nodes_[x].rows, nodes_[x].cols, x);
  const std::size_t n = size(y);
  nodes_[y].aux = aux_.alloc(n);
  double* mask = aux_.at(nodes_[y].aux);
  const double keep = 1.0 - rate;
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = rng.next_bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  const double* in = value(x);
  double* out = value(y);
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * mask[i];
  return y;
}

template <typename Fn>
void Tape::for_each_input(const Node& n, Fn&& fn) const {
  if (n.op == Op::kStackRows || n.op == Op::kSumMany) {
    const std::size_t off = n.in[0];
    const std::size_t count = n.in[1];
    for (std::size_t i = 0; i < count; ++i) fn(lists_[off + i]);
    return;
  }
  for (NodeId id : n.in) {
    if (id != kNoNode) fn(id);
  }
}

void Tape::flush_pending(NodeId target) {
  if (target >= pending_.size()) return;
  auto& bucket = pending_[target];
  if (bucket.empty()) return;
  const Node& n = nodes_[target];
  const std::size_t r = n.rows, c = n.cols, k = bucket.size();
  MatMap ga(grads_.at(n.grad), r, c);
  if (k == 1) {
    ga.noalias() += CVecMap(bucket[0].u, r) * CVecMap(bucket[0].v, c).transpose();
  } else {
    scratch_u_.resize(r * k);
    scratch_v_.resize(c * k);
    for (std::size_t i = 0; i < k; ++i) {
      std::memcpy(scratch_u_.data() + i * r, bucket[i].u, r * sizeof(double));
      std::memcpy(scratch_v_.data() + i * c, bucket[i].v, c * sizeof(double));
    }
    ColMap mu(scratch_u_.data(), r, k);
    ColMap mv(scratch_v_.data(), c, k);
    ga.noalias() += mu * mv.transpose();
  }
  bucket.clear();
}

void Tape::backward(NodeId loss) {
  if (size(loss) != 1) {
    throw NonScalarLossError("backward: loss has " + std::to_string(size(loss)) +
                             " elements, expected 1");
  }
  if (backward_done_) {
    throw std::logic_error("backward already ran on this tape; reset() first");
  }
  backward_done_ = true;

  const std::size_t count = nodes_.size();
  reachable_.assign(count, 0);
  if (pending_.size() < count) pending_.resize(count);
  reachable_[loss] = 1;
  grad(loss)[0] += 1.0;

  for (std::size_t i = loss + 1; i-- > 0;) {
    if (!reachable_[i]) continue;
    const Node& n = nodes_[i];
    for_each_input(n, [&](NodeId in) { reachable_[in] = 1; });
    flush_pending(NodeId(i));
    const double* gy = grads_.at(n.grad);
    const std::size_t sz = std::size_t(n.rows) * n.cols;
    switch (n.op) {
      case Op::kLeaf:
      case Op::kView:
        break;
      case Op::kMatvec: {
        const Node& a = nodes_[n.in[0]];
        VecMap(grad(n.in[1]), a.cols).noalias() +=
            CMatMap(values_.at(a.val), a.rows, a.cols).transpose() *
            CVecMap(gy, n.rows);
        pending_[n.in[0]].push_back({gy, values_.at(nodes_[n.in[1]].val)});
        break;
      }
      case Op::kMatvecT: {
        const Node& a = nodes_[n.in[0]];
        VecMap(grad(n.in[1]), a.rows).noalias() +=
            CMatMap(values_.at(a.val), a.rows, a.cols) * CVecMap(gy, n.rows);
        pending_[n.in[0]].push_back({values_.at(nodes_[n.in[1]].val), gy});
        break;
      }
      case Op::kMatmulBt: {
        const Node& a = nodes_[n.in[0]];
        const Node& b = nodes_[n.in[1]];
        CMatMap gc(gy, n.rows, n.cols);
        MatMap(grad(n.in[0]), a.rows, a.cols).noalias() +=
            gc * CMatMap(values_.at(b.val), b.rows, b.cols);
        MatMap(grad(n.in[1]), b.rows, b.cols).noalias() +=
            gc.transpose() * CMatMap(values_.at(a.val), a.rows, a.cols);
        break;
      }
      case Op::kAffine2: {
        const Node& w = nodes_[n.in[0]];
        const Node& u = nodes_[n.in[2]];
        CVecMap g(gy, n.rows);
        VecMap(grad(n.in[1]), w.cols).noalias() +=
            CMatMap(values_.at(w.val), w.rows, w.cols).transpose() * g;
        VecMap(grad(n.in[3]), u.cols).noalias() +=
            CMatMap(values_.at(u.val), u.rows, u.cols).transpose() * g;
        VecMap(grad(n.in[4]), n.rows) += g;
        pending_[n.in[0]].push_back({gy, values_.at(nodes_[n.in[1]].val)});
        pending_[n.in[2]].push_back({gy, values_.at(nodes_[n.in[3]].val)});
        break;
      }
      case Op::kAdd:
        VecMap(grad(n.in[0]), sz) += CVecMap(gy, sz);
        VecMap(grad(n.in[1]), sz) += CVecMap(gy, sz);
        break;
      case Op::kSub:
        VecMap(grad(n.in[0]), sz) += CVecMap(gy, sz);
        VecMap(grad(n.in[1]), sz) -= CVecMap(gy, sz);
        break;
      case Op::kMul:
        VecMap(grad(n.in[0]), sz) +=
            CVecMap(gy, sz).cwiseProduct(CVecMap(value(n.in[1]), sz));
        VecMap(grad(n.in[1]), sz) +=
            CVecMap(gy, sz).cwiseProduct(CVecMap(value(n.in[0]), sz));
        break;
      case Op::kScale:
        VecMap(grad(n.in[0]), sz) += *aux_.at(n.aux) * CVecMap(gy, sz);
        break;
      case Op::kSigmoid: {
        const double* y = values_.at(n.val);
        double* gx = grad(n.in[0]);
        for (std::size_t j = 0; j < sz; ++j) {
          gx[j] += gy[j] * y[j] * (1.0 - y[j]);
        }
        break;
      }
      case Op::kTanh: {
        const double* y = values_.at(n.val);
        double* gx = grad(n.in[0]);
        for (std::size_t j = 0; j < sz; ++j) {
          gx[j] += gy[j] * (1.0 - y[j] * y[j]);
        }
        break;
      }
      case Op::kSoftmax: {
        const double* y = values_.at(n.val);
        double dot = 0.0;
        for (std::size_t j = 0; j < sz; ++j) dot += gy[j] * y[j];
        double* gx = grad(n.in[0]);
        for (std::size_t j = 0; j < sz; ++j) gx[j] += y[j] * (gy[j] - dot);
        break;
      }
      case Op::kRowwiseAdd: {
        MatMap(grad(n.in[0]), n.rows, n.cols) += CMatMap(gy, n.rows, n.cols);
        // Row-order accumulation; Eigen's colwise sum splits by pointer
        // alignment, which is not reproducible across allocations.
        double* gv = grad(n.in[1]);
        for (std::size_t t = 0; t < n.rows; ++t) {
          const double* row = gy + t * n.cols;
          for (std::size_t j = 0; j < n.cols; ++j) gv[j] += row[j];
        }
        break;
      }
      case Op::kConcat: {
        const std::size_t na = rows(n.in[0]);
        VecMap(grad(n.in[0]), na) += CVecMap(gy, na);
        VecMap(grad(n.in[1]), sz - na) += CVecMap(gy + na, sz - na);
        break;
      }
      case Op::kStackRows: {
        const std::size_t off = n.in[0];
        for (std::size_t t = 0; t < n.rows; ++t) {
          VecMap(grad(lists_[off + t]), n.cols) +=
              CVecMap(gy + t * n.cols, n.cols);
        }
        break;
      }
      case Op::kSumMany: {
        const std::size_t off = n.in[0];
        const std::size_t parts = n.in[1];
        for (std::size_t j = 0; j < parts; ++j) {
          VecMap(grad(lists_[off + j]), sz) += CVecMap(gy, sz);
        }
        break;
      }
      case Op::kCrossEntropy: {
        const Node& l = nodes_[n.in[0]];
        const double* lv = values_.at(l.val);
        double* gl = grad(n.in[0]);
        const std::size_t nl = l.rows;
        double mx = lv[0];
        for (std::size_t j = 1; j < nl; ++j) mx = std::max(mx, lv[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < nl; ++j) z += std::exp(lv[j] - mx);
        const double g = gy[0];
        for (std::size_t j = 0; j < nl; ++j) {
          gl[j] += g * (std::exp(lv[j] - mx) / z - (j == n.aux ? 1.0 : 0.0));
        }
        break;
      }
      case Op::kDropout: {
        const double* mask = aux_.at(n.aux);
        double* gx = grad(n.in[0]);
        for (std::size_t j = 0; j < sz; ++j) gx[j] += gy[j] * mask[j];
        break;
      }
    }
  }
}

void Tape::zero_all_grads() {
  std::fill(grads_.at(0), grads_.at(0) + grads_.size(), 0.0);
}

}  // namespace scan
