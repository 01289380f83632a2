#pragma once

// Named parameter registry on a tape, plus ADAM and global-norm clipping.
//
// Parameters are tape leaves registered before freeze_leaves(). ADAM moments
// live here, flat and parallel to each parameter's storage. adam_step()
// zeroes each gradient as it consumes it, so the usual loop is
// backward / clip_gradients / adam_step with no separate zeroing pass.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scan/rng.hpp"
#include "scan/tape.hpp"

namespace scan {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;  // added outside the square root
};

struct ParamInfo {
  std::string name;
  NodeId node = kNoNode;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t fan_in = 0;   // 0 for zero-initialized parameters
  std::size_t offset = 0;   // into the flat moment arrays
};

class ParamStore {
 public:
  explicit ParamStore(Tape& tape) : tape_(&tape) {}

  // Uniform init on [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  NodeId add(const std::string& name, std::size_t rows, std::size_t cols,
             std::size_t fan_in, Rng& rng);
  // Zero init (biases).
  NodeId add_zeros(const std::string& name, std::size_t rows,
                   std::size_t cols = 1);

  NodeId find(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<ParamInfo>& params() const { return params_; }
  std::size_t total_size() const { return total_; }
  Tape& tape() { return *tape_; }

  double grad_norm() const;
  // Scales all gradients jointly to max_norm when the global L2 norm
  // exceeds it. Returns the pre-clip norm.
  double clip_gradients(double max_norm);
  // Standard ADAM with bias correction; consumes and zeroes gradients.
  void adam_step(const AdamConfig& cfg);
  void zero_grads();

  std::uint64_t step_count() const { return t_; }
  const std::vector<double>& moment1() const { return m_; }
  const std::vector<double>& moment2() const { return v_; }
  // Checkpoint restore hooks.
  void restore_moments(const std::vector<double>& m, const std::vector<double>& v,
                       std::uint64_t t);

 private:
  NodeId add_raw(const std::string& name, std::size_t rows, std::size_t cols,
                 std::size_t fan_in);

  Tape* tape_;
  std::vector<ParamInfo> params_;
  std::vector<double> m_, v_;
  std::size_t total_ = 0;
  std::uint64_t t_ = 0;
};

}  // namespace scan
