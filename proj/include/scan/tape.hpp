#pragma once

// Reverse-mode autodiff on a flat tape of f64 values.
//
// Values and gradients live in growable arenas addressed by offset, so
// recording never invalidates handles. Node creation order is a topological
// order; backward() sweeps ids in reverse and visits each reachable node
// exactly once. Leaves created before freeze_leaves() survive reset() and
// keep their storage offsets; everything recorded after is transient and is
// dropped by reset().
//
// Gradient contract: grads accumulate across a backward pass (shared
// subexpressions sum). Leaf grads are NOT cleared by reset(); the optimizer
// clears them as it consumes them, or call zero_all_grads() by hand.
// A second backward() without an intervening reset() throws.
//
// Weight-gradient updates of matvec-style ops are rank-1 outer products.
// They are not applied immediately: backward batches all pending outer
// products aimed at one node and applies them as a single matrix product
// when the sweep reaches that node. Same arithmetic, much better locality.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scan/rng.hpp"

namespace scan {

class ShapeMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonScalarLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

enum class Op : std::uint8_t {
  kLeaf,
  kView,        // aliases a contiguous range of the parent; backward no-op
  kMatvec,      // y = A x
  kMatvecT,     // y = A^T x
  kMatmulBt,    // C = A B^T
  kAffine2,     // y = W x + U h + b, one node
  kAdd,
  kSub,
  kMul,         // elementwise
  kScale,       // y = alpha * x
  kSigmoid,
  kTanh,
  kSoftmax,     // vector only
  kRowwiseAdd,  // M + (v broadcast to every row)
  kConcat,      // [a; b] for column vectors
  kStackRows,   // T vectors of length L -> T x L matrix
  kSumMany,     // elementwise sum of same-shape nodes
  kCrossEntropy,  // -log softmax(logits)[target], scalar
  kDropout,     // inverted scaling, mask recorded on the tape
};

struct Node {
  Op op;
  std::uint32_t rows, cols;
  std::size_t val;   // offset into the value arena
  std::size_t grad;  // offset into the grad arena
  NodeId in[5];      // operand ids; kStackRows/kSumMany pack {list offset, count}
  std::size_t aux;   // op-specific: scale factor offset, dropout mask offset, target index
};

namespace detail {

// Raw growable f64 storage. Offsets remain valid across growth.
class Arena {
 public:
  std::size_t alloc(std::size_t n) {
    grow_to(size_ + n);
    std::size_t off = size_;
    size_ += n;
    return off;
  }
  std::size_t alloc_zero(std::size_t n) {
    std::size_t off = alloc(n);
    std::fill(data_.get() + off, data_.get() + off + n, 0.0);
    return off;
  }
  double* at(std::size_t off) { return data_.get() + off; }
  const double* at(std::size_t off) const { return data_.get() + off; }
  void truncate(std::size_t mark) { size_ = mark; }
  std::size_t size() const { return size_; }

 private:
  void grow_to(std::size_t need) {
    if (need <= cap_) return;
    std::size_t cap = cap_ ? cap_ : 4096;
    while (cap < need) cap *= 2;
    auto next = std::make_unique<double[]>(cap);
    std::copy(data_.get(), data_.get() + size_, next.get());
    data_ = std::move(next);
    cap_ = cap;
  }
  std::unique_ptr<double[]> data_;
  std::size_t cap_ = 0;
  std::size_t size_ = 0;
};

}  // namespace detail

class Tape {
 public:
  NodeId leaf(std::size_t rows, std::size_t cols = 1);

  // Marks the boundary between persistent leaves and transient graph.
  void freeze_leaves();
  // Drops everything recorded after freeze_leaves(); re-arms backward().
  void reset();

  double* value(NodeId id) { return values_.at(nodes_[id].val); }
  const double* value(NodeId id) const { return values_.at(nodes_[id].val); }
  double* grad(NodeId id) { return grads_.at(nodes_[id].grad); }
  const double* grad(NodeId id) const { return grads_.at(nodes_[id].grad); }
  std::size_t rows(NodeId id) const { return nodes_[id].rows; }
  std::size_t cols(NodeId id) const { return nodes_[id].cols; }
  std::size_t size(NodeId id) const {
    return std::size_t(nodes_[id].rows) * nodes_[id].cols;
  }
  std::size_t node_count() const { return nodes_.size(); }

  NodeId matvec(NodeId a, NodeId x);
  NodeId matvec_t(NodeId a, NodeId x);
  NodeId matmul_bt(NodeId a, NodeId b);
  NodeId affine2(NodeId w, NodeId x, NodeId u, NodeId h, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId x, double alpha);
  NodeId sigmoid(NodeId x);
  NodeId tanh_of(NodeId x);
  NodeId softmax(NodeId x);
  NodeId rowwise_add(NodeId m, NodeId v);
  NodeId concat(NodeId a, NodeId b);
  // Contiguous alias of `count` elements of parent starting at `offset`
  // (row-major element offset). Shares value and grad storage; free.
  NodeId view(NodeId parent, std::size_t offset, std::size_t rows,
              std::size_t cols = 1);
  NodeId embedding(NodeId table, std::size_t row);
  NodeId stack_rows(std::span<const NodeId> parts);
  NodeId sum_many(std::span<const NodeId> parts);
  NodeId cross_entropy_logits(NodeId logits, std::size_t target);
  // rate in [0,1). training=false returns x unchanged.
  NodeId dropout(NodeId x, double rate, Rng& rng, bool training);

  void backward(NodeId loss);
  void zero_all_grads();

 private:
  NodeId push(Op op, std::uint32_t rows, std::uint32_t cols, NodeId a,
              NodeId b = kNoNode, NodeId c = kNoNode, NodeId d = kNoNode,
              NodeId e = kNoNode);
  NodeId push_list(Op op, std::uint32_t rows, std::uint32_t cols,
                   std::span<const NodeId> parts);
  void require_vector(NodeId id, const char* what) const;
  void require_same_shape(NodeId a, NodeId b, const char* what) const;
  template <typename Fn>
  void for_each_input(const Node& n, Fn&& fn) const;
  void flush_pending(NodeId target);

  struct PendingOuter {
    const double* u;  // length rows(target)
    const double* v;  // length cols(target)
  };

  std::vector<Node> nodes_;
  detail::Arena values_;
  detail::Arena grads_;
  detail::Arena aux_;
  std::vector<NodeId> lists_;
  std::vector<std::vector<PendingOuter>> pending_;
  std::vector<double> scratch_u_, scratch_v_;
  std::vector<std::uint8_t> reachable_;
  std::size_t frozen_nodes_ = 0;
  std::size_t frozen_values_ = 0;
  std::size_t frozen_grads_ = 0;
  std::size_t frozen_aux_ = 0;
  std::size_t frozen_lists_ = 0;
  bool backward_done_ = false;
};

}  // namespace scan
