#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace duet {

// mt19937_64 with hand-rolled draws. std::*_distribution output is
// implementation-defined, which would make seeded runs differ across
// standard libraries; the raw engine sequence is pinned by the standard.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n). Rejection-free modulo; the bias is < 2^-53 for the
  // n used here and determinism is what matters.
  uint64_t next_below(uint64_t n) { return engine_() % n; }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return (engine_() >> 11) * (1.0 / 9007199254740992.0); }

  float next_float() { return static_cast<float>(next_double()); }

  // Uniform in [-a, a).
  float next_symmetric(float a) { return (2.0f * next_float() - 1.0f) * a; }

  bool bernoulli(double p) { return next_double() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    // Fisher-Yates, fixed draw order.
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<size_t> sample_without_replacement(size_t n, size_t k);

 private:
  std::mt19937_64 engine_;
};

inline std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
  // Partial Fisher-Yates over an index map; fine for the corpus sizes here.
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::vector<size_t> out;
  out.reserve(k);
  for (size_t i = 0; i < k && i < n; ++i) {
    size_t j = i + static_cast<size_t>(next_below(n - i));
    std::swap(idx[i], idx[j]);
    out.push_back(idx[i]);
  }
  return out;
}

}  // namespace duet
