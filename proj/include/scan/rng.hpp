#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <vector>

namespace scan {

// Mixing step of the splitmix64 generator. Used to derive independent child
// seeds from a single run seed so that every randomized component (parameter
// init, presentation sampling, teacher-forcing draws, dropout masks) has its
// own stream while the whole run stays reproducible from one number.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base + 0x632be59bd9b4e019ull * (stream + 1));
}

// Seedable portable generator: the engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard, and all draw algorithms below are
// implemented here rather than delegated to std::*_distribution (whose
// results vary across standard libraries). Same seed, same platform-
// independent stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) built from the top 53 bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) by rejection; unbiased for any bound >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  friend std::ostream& operator<<(std::ostream& os, const Rng& r) {
    return os << r.engine_;
  }
  friend std::istream& operator>>(std::istream& is, Rng& r) {
    return is >> r.engine_;
  }
  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_;
  }

 private:
  std::mt19937_64 engine_;
};

// Fisher-Yates shuffle driven by Rng::next_below.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.next_below(i)]);
  }
}

}  // namespace scan
