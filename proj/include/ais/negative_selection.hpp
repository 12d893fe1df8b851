#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "ais/rng.hpp"
#include "ais/shape_space.hpp"

namespace ais {

/// Thrown when the attempt budget runs out before a single admissible
/// detector was drawn, i.e. the self set covers the space at this
/// threshold.
class DetectorGenerationError : public std::runtime_error {
 public:
  explicit DetectorGenerationError(std::size_t attempts)
      : std::runtime_error("no detector found after " + std::to_string(attempts) +
                           " attempts; self set covers the space at this threshold"),
        attempts_(attempts) {}
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

template <class Vec>
struct SelfSet {
  std::vector<Vec> patterns;

  void validate() const {
    if (patterns.empty()) throw std::invalid_argument("SelfSet: empty");
    const std::size_t length = patterns.front().size();
    if (length == 0) throw std::invalid_argument("SelfSet: zero-length pattern");
    for (const auto& p : patterns) {
      if (p.size() != length) throw DimensionMismatch(length, p.size());
      if constexpr (std::is_same_v<Vec, BitVector>) {
        if (!is_binary(p)) throw std::invalid_argument("SelfSet: non-binary pattern");
      }
    }
  }
};

/// A detector matches a sample when their distance is at or below
/// `match_threshold`. Censoring guarantees no detector matches any self
/// pattern.
template <class Vec>
struct DetectorSet {
  std::vector<Vec> detectors;
  double match_threshold = 0.0;
  AffinityConfig metric;
  std::size_t attempts_used = 0;
};

template <class Vec>
bool matches(const Vec& a, const Vec& b, double threshold, const AffinityConfig& cfg) {
  return distance(std::span(a), std::span(b), cfg) <= threshold;
}

template <class Vec>
bool matches_any(const Vec& candidate, const std::vector<Vec>& set, double threshold,
                 const AffinityConfig& cfg) {
  return std::any_of(set.begin(), set.end(),
                     [&](const Vec& s) { return matches(candidate, s, threshold, cfg); });
}

/// Draws candidates for a self set: uniform bits for binary spaces, or
/// uniform reals over the self bounding box widened by 10% of its extent
/// on each side (a flat dimension is widened by 0.1 * max(1, |value|)).
template <class Vec>
class CandidateStream {
 public:
  explicit CandidateStream(const SelfSet<Vec>& self) : length_(self.patterns.front().size()) {
    if constexpr (std::is_same_v<Vec, RealVector>) {
      lo_.assign(length_, std::numeric_limits<double>::infinity());
      hi_.assign(length_, -std::numeric_limits<double>::infinity());
      for (const auto& p : self.patterns) {
        for (std::size_t i = 0; i < length_; ++i) {
          lo_[i] = std::min(lo_[i], p[i]);
          hi_[i] = std::max(hi_[i], p[i]);
        }
      }
      for (std::size_t i = 0; i < length_; ++i) {
        const double extent = hi_[i] - lo_[i];
        const double pad = extent > 0.0 ? 0.1 * extent : 0.1 * std::max(1.0, std::abs(lo_[i]));
        lo_[i] -= pad;
        hi_[i] += pad;
      }
    }
  }

  Vec next(SeededRng& rng) const {
    if constexpr (std::is_same_v<Vec, BitVector>) {
      return random_bits(length_, rng);
    } else {
      Vec v(length_);
      for (std::size_t i = 0; i < length_; ++i) v[i] = rng.uniform(lo_[i], hi_[i]);
      return v;
    }
  }

  const RealVector& lower() const { return lo_; }
  const RealVector& upper() const { return hi_; }

 private:
  std::size_t length_;
  RealVector lo_, hi_;
};

/// Censoring phase: generate-and-test until `target_count` detectors are
/// found or `max_attempts` candidates have been drawn. Returns fewer than
/// `target_count` detectors when the budget runs out after at least one
/// success.
template <class Vec>
DetectorSet<Vec> generate_detectors(const SelfSet<Vec>& self, std::size_t target_count,
                                    double match_threshold, const AffinityConfig& cfg, SeededRng& rng,
                                    std::size_t max_attempts) {
  self.validate();
  if (target_count == 0) throw std::invalid_argument("generate_detectors: target_count must be >= 1");
  if (!(match_threshold >= 0.0))
    throw std::invalid_argument("generate_detectors: match_threshold must be >= 0");

  CandidateStream<Vec> stream(self);
  DetectorSet<Vec> out;
  out.match_threshold = match_threshold;
  out.metric = cfg;
  while (out.detectors.size() < target_count && out.attempts_used < max_attempts) {
    Vec candidate = stream.next(rng);
    ++out.attempts_used;
    if (!matches_any(candidate, self.patterns, match_threshold, cfg))
      out.detectors.push_back(std::move(candidate));
  }
  if (out.detectors.empty()) throw DetectorGenerationError(out.attempts_used);
  return out;
}

/// Monitoring phase: number of detectors matching each sample. A sample is
/// nonself when its count is at least one.
template <class Vec>
std::vector<std::size_t> monitor(const DetectorSet<Vec>& detectors, const std::vector<Vec>& samples) {
  std::vector<std::size_t> counts(samples.size(), 0);
  for (std::size_t s = 0; s < samples.size(); ++s)
    for (const auto& d : detectors.detectors)
      counts[s] += matches(samples[s], d, detectors.match_threshold, detectors.metric);
  return counts;
}

/// Sliding windows over a series, each window one real vector of length
/// `window`, starting every `stride` samples.
inline std::vector<RealVector> window_encode(std::span<const double> series, std::size_t window,
                                             std::size_t stride) {
  if (window == 0 || stride == 0) throw std::invalid_argument("window_encode: window and stride must be >= 1");
  if (series.size() < window)
    throw std::invalid_argument("window_encode: series shorter than window (" +
                                std::to_string(series.size()) + " < " + std::to_string(window) + ")");
  std::vector<RealVector> out;
  for (std::size_t start = 0; start + window <= series.size(); start += stride)
    out.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(start),
                     series.begin() + static_cast<std::ptrdiff_t>(start + window));
  return out;
}

}  // namespace ais
