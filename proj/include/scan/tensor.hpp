#pragma once

// Plain dense f64 array with a shape. Value semantics; no math of its own.
// Autodiff runs on the tape arenas, so this type only carries data at rest
// (checkpoints, evaluation reports, hidden-state tables).

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace scan {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(numel(), 0.0);
  }
  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != numel()) {
      throw std::invalid_argument("tensor data does not match shape");
    }
  }

  std::size_t numel() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, std::size_t b) { return a * b; });
  }
  double& at(std::size_t i) { return data.at(i); }
  double at(std::size_t i) const { return data.at(i); }

  bool all_finite() const {
    for (double x : data) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(const std::vector<double>& a) {
  return std::sqrt(dot(a, a));
}

// Cosine similarity; zero vectors compare as 0.
inline double cosine(const std::vector<double>& a,
                     const std::vector<double>& b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

}  // namespace scan
