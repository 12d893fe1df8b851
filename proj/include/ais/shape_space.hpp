#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ais/rng.hpp"

namespace ais {

// A point in L-dimensional shape-space. Antibodies and antigens share the
// representation; the two variants never mix inside one population.
using RealVector = std::vector<double>;
using BitVector = std::vector<std::uint8_t>;

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t a, std::size_t b)
      : std::invalid_argument("dimension mismatch: " + std::to_string(a) + " vs " +
                              std::to_string(b)) {}
};

enum class Metric { euclidean, manhattan, hamming };
enum class BindingShape { step, s_curve };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::manhattan: return "manhattan";
    case Metric::hamming: return "hamming";
  }
  return "?";
}

inline Metric metric_from_string(const std::string& s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "manhattan") return Metric::manhattan;
  if (s == "hamming") return Metric::hamming;
  throw std::invalid_argument("unknown metric '" + s + "'");
}

struct AffinityConfig {
  Metric metric = Metric::euclidean;
  double epsilon = 0.0;  // binding threshold
  BindingShape binding_shape = BindingShape::step;
  double slope = 10.0;  // s_curve steepness
  // Apply the square root over the absolute-value sum, i.e. sqrt(sum |a_i - b_i|).
  bool manhattan_root = false;
};

inline bool is_binary(std::span<const std::uint8_t> v) {
  return std::all_of(v.begin(), v.end(), [](std::uint8_t b) { return b <= 1; });
}

namespace detail {
inline void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionMismatch(a, b);
}
}  // namespace detail

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  detail::require_same_dim(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  detail::require_same_dim(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline double manhattan_distance(std::span<const double> a, std::span<const double> b) {
  detail::require_same_dim(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

inline std::size_t hamming_distance(std::span<const std::uint8_t> a,
                                    std::span<const std::uint8_t> b) {
  detail::require_same_dim(a.size(), b.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 1 || b[i] > 1) throw std::invalid_argument("hamming_distance: non-binary input");
    n += (a[i] != b[i]);
  }
  return n;
}

/// Metric dispatch for real vectors. Hamming is rejected here.
inline double distance(std::span<const double> a, std::span<const double> b,
                       const AffinityConfig& cfg) {
  switch (cfg.metric) {
    case Metric::euclidean: return euclidean_distance(a, b);
    case Metric::manhattan: {
      const double d = manhattan_distance(a, b);
      return cfg.manhattan_root ? std::sqrt(d) : d;
    }
    case Metric::hamming: break;
  }
  throw std::invalid_argument("hamming metric requires binary vectors");
}

/// Metric dispatch for bit vectors. Only Hamming applies.
inline double distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                       const AffinityConfig& cfg) {
  if (cfg.metric != Metric::hamming)
    throw std::invalid_argument(std::string(to_string(cfg.metric)) +
                                " metric requires real-valued vectors");
  return static_cast<double>(hamming_distance(a, b));
}

/// Degree of binding for a given antibody-antigen distance. Large distance
/// means high complementarity, so binding grows with distance. The step
/// form binds inclusively at epsilon.
inline double binding_value(double distance, const AffinityConfig& cfg) {
  switch (cfg.binding_shape) {
    case BindingShape::step: return distance >= cfg.epsilon ? 1.0 : 0.0;
    case BindingShape::s_curve: return 1.0 / (1.0 + std::exp(-cfg.slope * (distance - cfg.epsilon)));
  }
  return 0.0;
}

inline BitVector complement(std::span<const std::uint8_t> bits) {
  BitVector out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out[i] = bits[i] ? 0 : 1;
  return out;
}

inline BitVector random_bits(std::size_t length, SeededRng& rng) {
  BitVector out(length);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.next() >> 63);
  return out;
}

}  // namespace ais
