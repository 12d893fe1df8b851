#pragma once

// Hand-rolled generators for the property tests. Each draws from its own
// SeededRng so failures replay from the printed case seed.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ais/rng.hpp"
#include "ais/shape_space.hpp"

namespace ais::testing {

inline RealVector gen_real(SeededRng& rng, std::size_t dim, double lo = -10.0, double hi = 10.0) {
  RealVector v(dim);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline BitVector gen_bits(SeededRng& rng, std::size_t len) { return random_bits(len, rng); }

inline std::size_t gen_size(SeededRng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

inline std::vector<RealVector> gen_cloud(SeededRng& rng, std::size_t n, std::size_t dim, double lo = 0.0,
                                         double hi = 1.0) {
  std::vector<RealVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(gen_real(rng, dim, lo, hi));
  return out;
}

/// `base` with exactly the listed positions flipped.
inline BitVector flip_at(BitVector base, const std::vector<std::size_t>& positions) {
  for (auto p : positions) base[p] ^= 1u;
  return base;
}

/// `count` distinct positions in [0, len).
inline std::vector<std::size_t> distinct_positions(SeededRng& rng, std::size_t len, std::size_t count) {
  std::vector<std::size_t> idx(len);
  for (std::size_t i = 0; i < len; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.below(len - i)]);
  idx.resize(count);
  return idx;
}

}  // namespace ais::testing
