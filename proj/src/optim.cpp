// Built with fp-contract=off: the update loops must produce the same bits
// for the same inputs no matter how the compiler or a SIMD library splits
// them into vector body and scalar remainder, so no path may fuse a
// multiply-add the other rounds in two steps.

#include "scan/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scan {

NodeId ParamStore::add_raw(const std::string& name, std::size_t rows,
                           std::size_t cols, std::size_t fan_in) {
  if (has(name)) throw std::logic_error("duplicate parameter: " + name);
  ParamInfo info;
  info.name = name;
  info.node = tape_->leaf(rows, cols);
  info.rows = rows;
  info.cols = cols;
  info.fan_in = fan_in;
  info.offset = total_;
  total_ += rows * cols;
  m_.resize(total_, 0.0);
  v_.resize(total_, 0.0);
  params_.push_back(info);
  return info.node;
}

NodeId ParamStore::add(const std::string& name, std::size_t rows,
                       std::size_t cols, std::size_t fan_in, Rng& rng) {
  NodeId node = add_raw(name, rows, cols, fan_in);
  const double bound = 1.0 / std::sqrt(double(fan_in));
  double* p = tape_->value(node);
  for (std::size_t i = 0, n = rows * cols; i < n; ++i) {
    p[i] = rng.next_uniform(-bound, bound);
  }
  return node;
}

NodeId ParamStore::add_zeros(const std::string& name, std::size_t rows,
                             std::size_t cols) {
  return add_raw(name, rows, cols, 0);
}

NodeId ParamStore::find(const std::string& name) const {
  for (const ParamInfo& p : params_) {
    if (p.name == name) return p.node;
  }
  throw std::out_of_range("no such parameter: " + name);
}

bool ParamStore::has(const std::string& name) const {
  for (const ParamInfo& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

double ParamStore::grad_norm() const {
  // Eight index-keyed accumulators: a fixed summation order that is still
  // several dependency chains wide.
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (const ParamInfo& p : params_) {
    const double* g = tape_->grad(p.node);
    const std::size_t n = p.rows * p.cols;
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
      for (int k = 0; k < 8; ++k) acc[k] += g[i + k] * g[i + k];
    }
    for (; i < n; ++i) acc[0] += g[i] * g[i];
  }
  const double sq = ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
                    ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  return std::sqrt(sq);
}

double ParamStore::clip_gradients(double max_norm) {
  const double norm = grad_norm();
  // Small absolute slack so re-clipping an already-clipped gradient is a
  // no-op despite rounding in the recomputed norm.
  if (norm > max_norm + 1e-9) {
    const double s = max_norm / norm;
    for (const ParamInfo& p : params_) {
      double* g = tape_->grad(p.node);
      const std::size_t n = p.rows * p.cols;
      for (std::size_t i = 0; i < n; ++i) g[i] *= s;
    }
  }
  return norm;
}

void ParamStore::adam_step(const AdamConfig& cfg) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg.beta1, double(t_));
  const double c2 = 1.0 - std::pow(cfg.beta2, double(t_));
  for (const ParamInfo& param : params_) {
    const std::size_t n = param.rows * param.cols;
    double* p = tape_->value(param.node);
    double* g = tape_->grad(param.node);
    double* m = m_.data() + param.offset;
    double* v = v_.data() + param.offset;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * (g[i] * g[i]);
      p[i] -= cfg.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
      g[i] = 0.0;
    }
  }
}

void ParamStore::zero_grads() {
  for (const ParamInfo& p : params_) {
    double* g = tape_->grad(p.node);
    std::fill(g, g + p.rows * p.cols, 0.0);
  }
}

void ParamStore::restore_moments(const std::vector<double>& m,
                                 const std::vector<double>& v,
                                 std::uint64_t t) {
  if (m.size() != total_ || v.size() != total_) {
    throw std::invalid_argument("moment size mismatch on restore");
  }
  m_ = m;
  v_ = v;
  t_ = t;
}

}  // namespace scan
