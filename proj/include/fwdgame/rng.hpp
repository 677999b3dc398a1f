#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fwdgame {

// Deterministic RNG wrapper. All draws go through the helpers below so that a
// given seed produces the same stream on every platform (no reliance on
// std::uniform_*_distribution, whose output is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // uniform in [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform integer in [0, n), unbiased
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    std::uint64_t r;
    do {
      r = gen_();
    } while (r < threshold);
    return r % n;
  }

  int index(int n) { return static_cast<int>(bounded(static_cast<std::uint64_t>(n))); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = bounded(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Stateless mix used to derive independent per-replicate seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace fwdgame
