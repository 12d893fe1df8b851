#pragma once

// Partitional clustering driven by clonal selection (UCSC) and the K-means
// baseline, sharing one criterion: D = sum over points of the Euclidean
// distance to the centroid of the cluster that owns them.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ais/clonal_selection.hpp"
#include "ais/rng.hpp"
#include "ais/shape_space.hpp"

namespace ais {

using Dataset = std::vector<RealVector>;

namespace detail {

inline std::size_t require_data(const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("clustering: empty data set");
  const std::size_t dim = data.front().size();
  if (dim == 0) throw std::invalid_argument("clustering: zero-dimensional points");
  for (const auto& x : data)
    if (x.size() != dim) throw DimensionMismatch(dim, x.size());
  return dim;
}

template <class Centers>
std::size_t nearest(std::span<const double> x, const Centers& centers, std::size_t k) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_euclidean(x, centers(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace detail

/// K centroids of dimension L stored row-major in one flat vector.
class CentroidAntibody {
 public:
  CentroidAntibody() = default;
  CentroidAntibody(RealVector flat, std::size_t clusters) : flat_(std::move(flat)), k_(clusters) {
    if (k_ == 0) throw std::invalid_argument("CentroidAntibody: K must be >= 1");
    if (flat_.empty() || flat_.size() % k_ != 0)
      throw std::invalid_argument("CentroidAntibody: length " + std::to_string(flat_.size()) +
                                  " is not a positive multiple of K=" + std::to_string(k_));
  }

  static CentroidAntibody from_centers(const std::vector<RealVector>& centers) {
    if (centers.empty()) throw std::invalid_argument("CentroidAntibody: no centers");
    RealVector flat;
    for (const auto& c : centers) {
      if (c.size() != centers.front().size()) throw DimensionMismatch(centers.front().size(), c.size());
      flat.insert(flat.end(), c.begin(), c.end());
    }
    return CentroidAntibody(std::move(flat), centers.size());
  }

  std::size_t clusters() const { return k_; }
  std::size_t dim() const { return k_ ? flat_.size() / k_ : 0; }
  std::span<const double> centroid(std::size_t i) const {
    return std::span<const double>(flat_).subspan(i * dim(), dim());
  }
  std::vector<RealVector> centers() const {
    std::vector<RealVector> out;
    for (std::size_t i = 0; i < k_; ++i) out.emplace_back(centroid(i).begin(), centroid(i).end());
    return out;
  }
  const RealVector& flat() const { return flat_; }
  RealVector& flat() { return flat_; }

 private:
  RealVector flat_;
  std::size_t k_ = 0;
};

/// Sum of distances from each point to its nearest center.
inline double criterion_D(const std::vector<RealVector>& centers, const Dataset& data) {
  if (centers.empty()) throw std::invalid_argument("criterion_D: no centers");
  double total = 0.0;
  auto at = [&](std::size_t c) { return std::span<const double>(centers[c]); };
  for (const auto& x : data) {
    const std::size_t c = detail::nearest(x, at, centers.size());
    total += euclidean_distance(x, centers[c]);
  }
  return total;
}

struct ClusterSolution {
  CentroidAntibody antibody;
  std::vector<std::size_t> labels;           // nearest encoded centroid per point
  std::vector<RealVector> refined_centroids;  // member means
  double D = 0.0;                             // against the refined centroids
  double affinity = 0.0;                      // 1/D, or 0 when rejected
  bool rejected = false;                      // some cluster is empty
};

/// Cluster by the encoded centroids, recompute each centroid as its member
/// mean, and score D against those means. An empty cluster rejects the
/// solution (affinity 0). The antibody itself is left untouched.
inline ClusterSolution ucsc_affinity(const CentroidAntibody& antibody, const Dataset& data) {
  const std::size_t dim = detail::require_data(data);
  if (antibody.dim() != dim) throw DimensionMismatch(antibody.dim(), dim);
  const std::size_t k = antibody.clusters();

  ClusterSolution sol;
  sol.antibody = antibody;
  sol.labels.resize(data.size());
  std::vector<std::size_t> count(k, 0);
  sol.refined_centroids.assign(k, RealVector(dim, 0.0));
  auto at = [&](std::size_t c) { return antibody.centroid(c); };
  for (std::size_t j = 0; j < data.size(); ++j) {
    const std::size_t c = detail::nearest(data[j], at, k);
    sol.labels[j] = c;
    ++count[c];
    for (std::size_t d = 0; d < dim; ++d) sol.refined_centroids[c][d] += data[j][d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) {
      sol.rejected = true;
      sol.refined_centroids[c].assign(antibody.centroid(c).begin(), antibody.centroid(c).end());
      continue;
    }
    for (auto& v : sol.refined_centroids[c]) v /= static_cast<double>(count[c]);
  }
  for (std::size_t j = 0; j < data.size(); ++j)
    sol.D += euclidean_distance(data[j], sol.refined_centroids[sol.labels[j]]);

  if (sol.rejected) sol.affinity = 0.0;
  else sol.affinity = sol.D > 0.0 ? 1.0 / sol.D : std::numeric_limits<double>::max();
  return sol;
}

struct SearchBounds {
  RealVector upper;  // per-dimension max
  RealVector lower;  // per-dimension min
  double rho = 0.0;  // (largest attribute - smallest attribute) / 10
};

inline SearchBounds search_bounds(const Dataset& data) {
  const std::size_t dim = detail::require_data(data);
  SearchBounds b;
  b.upper = data.front();
  b.lower = data.front();
  for (const auto& x : data) {
    for (std::size_t d = 0; d < dim; ++d) {
      b.upper[d] = std::max(b.upper[d], x[d]);
      b.lower[d] = std::min(b.lower[d], x[d]);
    }
  }
  const double hi = *std::max_element(b.upper.begin(), b.upper.end());
  const double lo = *std::min_element(b.lower.begin(), b.lower.end());
  b.rho = (hi - lo) / 10.0;
  return b;
}

/// Gaussian hypermutation with step alpha = rho * exp(-aff_norm).
inline CentroidAntibody ucsc_mutate(const CentroidAntibody& antibody, double aff_norm, double rho,
                                    SeededRng& rng) {
  CentroidAntibody out = antibody;
  const double alpha = rho * std::exp(-aff_norm);
  if (alpha == 0.0) return out;
  for (auto& v : out.flat()) v += alpha * rng.normal();
  return out;
}

/// Every coordinate uniform in [LL_d, UL_d].
inline CentroidAntibody random_antibody(std::span<const double> upper, std::span<const double> lower,
                                        std::size_t clusters, SeededRng& rng) {
  if (upper.size() != lower.size()) throw DimensionMismatch(upper.size(), lower.size());
  for (std::size_t d = 0; d < upper.size(); ++d)
    if (upper[d] < lower[d]) throw std::invalid_argument("random_antibody: upper bound below lower bound");
  const std::size_t dim = upper.size();
  RealVector flat(clusters * dim);
  for (std::size_t c = 0; c < clusters; ++c)
    for (std::size_t d = 0; d < dim; ++d)
      flat[c * dim + d] = lower[d] + (upper[d] - lower[d]) * rng.uniform();
  return CentroidAntibody(std::move(flat), clusters);
}

struct UcscParams {
  std::size_t population = 10;          // N
  double beta = 1.0;                    // clonal factor
  std::size_t random_replacements = 2;  // d
  std::size_t generations = 20;         // gen
  std::size_t clusters = 2;             // K
  std::size_t max_reinitializations = 100;

  void validate() const {
    if (population == 0) throw std::invalid_argument("UcscParams: N must be >= 1");
    if (clusters == 0) throw std::invalid_argument("UcscParams: K must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("UcscParams: beta must be > 0");
  }
};

struct UcscResult {
  ClusterSolution best;
  std::vector<double> best_affinity_trace;  // after survivor selection, per generation
  std::size_t reinitializations = 0;
  std::size_t evaluations = 0;
};

namespace detail {

inline void sort_by_affinity(std::vector<ClusterSolution>& pop) {
  std::stable_sort(pop.begin(), pop.end(), [](const ClusterSolution& a, const ClusterSolution& b) {
    return a.affinity > b.affinity;
  });
}

}  // namespace detail

/// Unsupervised clonal-selection clustering. Each generation: rank the
/// repertoire, clone every member by rank (round(beta * N / i)), mutate the
/// clones with a step that shrinks as normalized affinity grows, keep the N
/// best of parents and mutants, then swap the d worst for random antibodies.
inline UcscResult ucsc_cluster(const Dataset& data, const UcscParams& params, SeededRng& rng) {
  params.validate();
  detail::require_data(data);
  if (params.clusters > data.size())
    throw std::invalid_argument("ucsc_cluster: K=" + std::to_string(params.clusters) +
                                " exceeds the " + std::to_string(data.size()) + " data points");
  const SearchBounds bounds = search_bounds(data);
  const std::size_t N = params.population;
  UcscResult res;

  auto fresh = [&] {
    ++res.evaluations;
    return ucsc_affinity(random_antibody(bounds.upper, bounds.lower, params.clusters, rng), data);
  };

  std::vector<ClusterSolution> pop;
  auto init = [&] {
    pop.clear();
    for (std::size_t i = 0; i < N; ++i) pop.push_back(fresh());
  };
  init();
  while (std::all_of(pop.begin(), pop.end(), [](const ClusterSolution& s) { return s.rejected; }) &&
         res.reinitializations < params.max_reinitializations) {
    ++res.reinitializations;
    init();
  }

  const auto counts = clone_counts(N, params.beta);
  const std::size_t d = std::min(params.random_replacements, N - 1);
  for (std::size_t g = 0; g < params.generations; ++g) {
    detail::sort_by_affinity(pop);
    const double amax = pop.front().affinity;
    const double amin = pop.back().affinity;

    std::vector<ClusterSolution> merged = pop;
    merged.reserve(N + total_clones(counts));
    for (std::size_t rank = 0; rank < N; ++rank) {
      const double norm = amax > amin ? (pop[rank].affinity - amin) / (amax - amin) : 1.0;
      for (std::size_t c = 0; c < counts[rank]; ++c) {
        merged.push_back(ucsc_affinity(ucsc_mutate(pop[rank].antibody, norm, bounds.rho, rng), data));
        ++res.evaluations;
      }
    }
    detail::sort_by_affinity(merged);
    merged.resize(N);
    pop = std::move(merged);
    res.best_affinity_trace.push_back(pop.front().affinity);

    for (std::size_t j = 0; j < d; ++j) pop[N - 1 - j] = fresh();
  }

  detail::sort_by_affinity(pop);
  res.best = pop.front();
  return res;
}

struct KMeansResult {
  std::vector<RealVector> centers;
  std::vector<std::size_t> labels;
  double sse = 0.0;  // E^2, squared-error criterion
  double D = 0.0;    // sum of distances, same criterion as UCSC
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> sse_trace;  // E^2 after each update step
};

/// Lloyd iterations from the given centers until assignments stop
/// changing or `max_iter` update steps. An empty cluster is reseeded at
/// the point farthest from its current center.
inline KMeansResult kmeans(const Dataset& data, std::vector<RealVector> centers, std::size_t max_iter) {
  const std::size_t dim = detail::require_data(data);
  const std::size_t k = centers.size();
  if (k == 0) throw std::invalid_argument("kmeans: K must be >= 1");
  if (k > data.size())
    throw std::invalid_argument("kmeans: K=" + std::to_string(k) + " exceeds the " +
                                std::to_string(data.size()) + " data points");
  for (const auto& c : centers)
    if (c.size() != dim) throw DimensionMismatch(dim, c.size());

  KMeansResult res;
  std::vector<std::size_t> labels(data.size(), k);  // k = unassigned
  auto at = [&](std::size_t c) { return std::span<const double>(centers[c]); };
  auto sse_of = [&] {
    double s = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) s += squared_euclidean(data[j], centers[labels[j]]);
    return s;
  };

  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t j = 0; j < data.size(); ++j) {
      const std::size_t c = detail::nearest(data[j], at, k);
      if (c != labels[j]) {
        labels[j] = c;
        changed = true;
      }
    }
    if (!changed) {
      res.converged = true;
      break;
    }

    std::vector<std::size_t> count(k, 0);
    std::vector<RealVector> sum(k, RealVector(dim, 0.0));
    for (std::size_t j = 0; j < data.size(); ++j) {
      ++count[labels[j]];
      for (std::size_t d = 0; d < dim; ++d) sum[labels[j]][d] += data[j][d];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (count[c] > 0)
        for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sum[c][d] / static_cast<double>(count[c]);

    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t j = 0; j < data.size(); ++j) {
        if (count[labels[j]] <= 1) continue;  // never empty another cluster
        const double dd = squared_euclidean(data[j], centers[labels[j]]);
        if (dd > far_d) {
          far_d = dd;
          far = j;
        }
      }
      if (far_d < 0.0) continue;
      --count[labels[far]];
      labels[far] = c;
      count[c] = 1;
      centers[c] = data[far];
    }

    ++res.iterations;
    res.sse_trace.push_back(sse_of());
  }

  // Final assignment against the final centers.
  for (std::size_t j = 0; j < data.size(); ++j) labels[j] = detail::nearest(data[j], at, k);
  res.centers = std::move(centers);
  res.labels = std::move(labels);
  res.sse = 0.0;
  res.D = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    res.sse += squared_euclidean(data[j], res.centers[res.labels[j]]);
    res.D += euclidean_distance(data[j], res.centers[res.labels[j]]);
  }
  return res;
}

/// K-means from K distinct data points drawn at random.
inline KMeansResult kmeans(const Dataset& data, std::size_t clusters, SeededRng& rng,
                           std::size_t max_iter = 300) {
  detail::require_data(data);
  if (clusters == 0) throw std::invalid_argument("kmeans: K must be >= 1");
  if (clusters > data.size())
    throw std::invalid_argument("kmeans: K=" + std::to_string(clusters) + " exceeds the " +
                                std::to_string(data.size()) + " data points");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `clusters` slots become the sample.
  for (std::size_t i = 0; i < clusters; ++i) std::swap(idx[i], idx[i + rng.below(data.size() - i)]);
  std::vector<RealVector> centers;
  for (std::size_t i = 0; i < clusters; ++i) centers.push_back(data[idx[i]]);
  return kmeans(data, std::move(centers), max_iter);
}

struct AccuracyReport {
  std::vector<double> per_class;          // percent, indexed by true class
  double overall = 0.0;                   // percent
  std::vector<std::size_t> cluster_to_class;
};

/// Per-class and overall accuracy under the cluster-to-class bijection
/// that maximizes overall accuracy (exact search over the K x K confusion
/// matrix).
inline AccuracyReport align_accuracy(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                                     std::size_t k) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("align_accuracy: label count mismatch (" + std::to_string(pred.size()) +
                                " vs " + std::to_string(truth.size()) + ")");
  if (k == 0 || k > 16) throw std::invalid_argument("align_accuracy: K must lie in [1, 16]");
  std::vector<std::vector<std::size_t>> confusion(k, std::vector<std::size_t>(k, 0));
  std::vector<std::size_t> class_size(k, 0);
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (pred[j] >= k || truth[j] >= k) throw std::invalid_argument("align_accuracy: label out of range");
    ++confusion[pred[j]][truth[j]];
    ++class_size[truth[j]];
  }

  // best[mask]: max matched count assigning clusters 0..popcount(mask)-1
  // to the classes in mask.
  const std::size_t full = std::size_t{1} << k;
  std::vector<long> best(full, -1);
  std::vector<std::size_t> choice(full, 0);
  best[0] = 0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (best[mask] < 0) continue;
    const auto cluster = static_cast<std::size_t>(std::popcount(mask));
    if (cluster >= k) continue;
    for (std::size_t cls = 0; cls < k; ++cls) {
      if (mask & (std::size_t{1} << cls)) continue;
      const std::size_t next = mask | (std::size_t{1} << cls);
      const long v = best[mask] + static_cast<long>(confusion[cluster][cls]);
      if (v > best[next]) {
        best[next] = v;
        choice[next] = cls;
      }
    }
  }

  AccuracyReport rep;
  rep.cluster_to_class.assign(k, 0);
  std::size_t mask = full - 1;
  for (std::size_t cluster = k; cluster-- > 0;) {
    const std::size_t cls = choice[mask];
    rep.cluster_to_class[cluster] = cls;
    mask &= ~(std::size_t{1} << cls);
  }
  rep.per_class.assign(k, 0.0);
  std::size_t hits = 0;
  for (std::size_t cluster = 0; cluster < k; ++cluster) {
    const std::size_t cls = rep.cluster_to_class[cluster];
    hits += confusion[cluster][cls];
    rep.per_class[cls] =
        class_size[cls] ? 100.0 * static_cast<double>(confusion[cluster][cls]) / static_cast<double>(class_size[cls])
                        : 100.0;
  }
  rep.overall = pred.empty() ? 100.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
  return rep;
}

}  // namespace ais
