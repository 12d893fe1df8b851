#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ais/clonal_selection.hpp"
#include "ais/partitional.hpp"
#include "ais/rng.hpp"
#include "ais/shape_space.hpp"

namespace ais {

struct AiNetParams {
  std::size_t selected = 4;           // n nearest cells cloned per antigen
  double beta = 10.0;                 // clone factor in round(beta * n / i)
  double zeta = 10.0;                 // percent of matured clones kept
  double sigma_d = 1.0;               // natural-death distance
  double sigma_s = 0.1;               // suppression distance
  std::size_t generations = 40;       // N_gen
  double replace_pct = 10.0;          // percent of worst cells swapped for randoms
  std::size_t initial_cells = 20;     // N_t
  bool scale_input = true;            // min-max scale data to [0, 1]
  bool prune_unrepresentative = true; // final pass: drop cells farther than sigma_s from every point

  void validate() const {
    if (selected == 0) throw std::invalid_argument("AiNetParams: n must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("AiNetParams: beta must be > 0");
    if (!(zeta > 0.0 && zeta <= 100.0)) throw std::invalid_argument("AiNetParams: zeta must be in (0, 100]");
    if (!(sigma_d > 0.0)) throw std::invalid_argument("AiNetParams: sigma_d must be > 0");
    if (!(sigma_s >= 0.0)) throw std::invalid_argument("AiNetParams: sigma_s must be >= 0");
    if (!(replace_pct >= 0.0 && replace_pct <= 100.0))
      throw std::invalid_argument("AiNetParams: replace_pct must be in [0, 100]");
    if (initial_cells == 0) throw std::invalid_argument("AiNetParams: initial cell count must be >= 1");
  }
};

/// Per-dimension affine map between data space and the working space the
/// network was trained in. Identity when scaling is off.
struct Scaling {
  RealVector lower;
  RealVector span;  // 0 for flat dimensions

  RealVector to_working(std::span<const double> x) const {
    RealVector out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = span[d] > 0.0 ? (x[d] - lower[d]) / span[d] : 0.0;
    return out;
  }
  RealVector to_data(std::span<const double> x) const {
    RealVector out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = lower[d] + x[d] * span[d];
    return out;
  }
};

struct ImmuneNetwork {
  Dataset cells;                          // working-space coordinates
  std::vector<std::vector<double>> similarity;  // pairwise Euclidean distances
  Scaling scaling;

  std::size_t size() const { return cells.size(); }
  double min_separation() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < similarity.size(); ++i)
      for (std::size_t j = i + 1; j < similarity.size(); ++j) m = std::min(m, similarity[i][j]);
    return m;
  }
  Dataset cells_in_data_space() const {
    Dataset out;
    out.reserve(cells.size());
    for (const auto& c : cells) out.push_back(scaling.to_data(c));
    return out;
  }
};

struct AiNetResult {
  ImmuneNetwork network;
  std::vector<std::size_t> size_trace;  // cell count at the end of each iteration
  std::size_t clones_processed = 0;     // matured clones kept as partial memory, summed
  std::size_t data_size = 0;

  double compression() const {
    return data_size ? 1.0 - static_cast<double>(network.size()) / static_cast<double>(data_size) : 0.0;
  }
};

/// c - alpha (c - antigen): moves the cell a fraction alpha of the way
/// toward the antigen.
inline RealVector ainet_mutate(std::span<const double> cell, std::span<const double> antigen, double alpha) {
  detail::require_same_dim(cell.size(), antigen.size());
  RealVector out(cell.size());
  for (std::size_t i = 0; i < cell.size(); ++i) out[i] = cell[i] - alpha * (cell[i] - antigen[i]);
  return out;
}

inline std::vector<std::vector<double>> distance_matrix(const Dataset& cells) {
  std::vector<std::vector<double>> s(cells.size(), std::vector<double>(cells.size(), 0.0));
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t j = i + 1; j < cells.size(); ++j) s[i][j] = s[j][i] = euclidean_distance(cells[i], cells[j]);
  return s;
}

/// Walks the cells in order and keeps each one only if it lies at least
/// sigma_s from every cell already kept; of any close pair the earlier
/// cell survives.
inline Dataset suppress(const Dataset& cells, double sigma_s) {
  Dataset kept;
  const double s2 = sigma_s * sigma_s;
  for (const auto& c : cells) {
    const bool close = std::any_of(kept.begin(), kept.end(),
                                   [&](const RealVector& k) { return squared_euclidean(c, k) < s2; });
    if (!close) kept.push_back(c);
  }
  return kept;
}

namespace detail {

inline double nearest_distance(std::span<const double> x, const Dataset& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : set) best = std::min(best, squared_euclidean(x, y));
  return std::sqrt(best);
}

inline RealVector random_in_box(const RealVector& lo, const RealVector& hi, SeededRng& rng) {
  RealVector out(lo.size());
  for (std::size_t d = 0; d < lo.size(); ++d) out[d] = lo[d] + (hi[d] - lo[d]) * rng.uniform();
  return out;
}

}  // namespace detail

inline AiNetResult ainet_train(const Dataset& raw, const AiNetParams& params, SeededRng& rng) {
  params.validate();
  const std::size_t dim = detail::require_data(raw);

  AiNetResult res;
  res.data_size = raw.size();
  Scaling& scaling = res.network.scaling;
  const SearchBounds bounds = search_bounds(raw);
  scaling.lower = params.scale_input ? bounds.lower : RealVector(dim, 0.0);
  scaling.span.assign(dim, 1.0);
  if (params.scale_input)
    for (std::size_t d = 0; d < dim; ++d) scaling.span[d] = bounds.upper[d] - bounds.lower[d];

  Dataset data;
  data.reserve(raw.size());
  for (const auto& x : raw) data.push_back(scaling.to_working(x));
  const SearchBounds box = search_bounds(data);

  Dataset cells;
  for (std::size_t i = 0; i < params.initial_cells; ++i)
    cells.push_back(detail::random_in_box(box.lower, box.upper, rng));

  for (std::size_t gen = 0; gen < params.generations; ++gen) {
    for (const auto& antigen : data) {
      std::vector<double> dist(cells.size());
      for (std::size_t j = 0; j < cells.size(); ++j) dist[j] = euclidean_distance(cells[j], antigen);
      std::vector<std::size_t> order(cells.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
      const std::size_t n = std::min(params.selected, cells.size());
      const double d_max = dist[order[n - 1]];
      const auto counts = clone_counts(n, params.beta);

      struct Clone {
        RealVector x;
        double d;
      };
      std::vector<Clone> clones;
      for (std::size_t rank = 0; rank < n; ++rank) {
        const auto& parent = cells[order[rank]];
        const double reach = d_max > 0.0 ? dist[order[rank]] / d_max : 0.0;
        for (std::size_t c = 0; c < counts[rank]; ++c) {
          RealVector x = ainet_mutate(parent, antigen, rng.uniform_open() * reach);
          const double d = euclidean_distance(x, antigen);
          clones.push_back({std::move(x), d});
        }
      }
      std::stable_sort(clones.begin(), clones.end(), [](const Clone& a, const Clone& b) { return a.d < b.d; });
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(params.zeta / 100.0 * static_cast<double>(clones.size()) - 1e-9)));
      clones.resize(std::min(keep, clones.size()));
      res.clones_processed += clones.size();

      Dataset partial;
      for (auto& c : clones)
        if (c.d <= params.sigma_d) partial.push_back(std::move(c.x));
      partial = suppress(partial, params.sigma_s);
      cells.insert(cells.end(), std::make_move_iterator(partial.begin()), std::make_move_iterator(partial.end()));
    }

    cells = suppress(cells, params.sigma_s);

    const bool last = gen + 1 == params.generations;
    if (!last && params.replace_pct > 0.0) {
      const auto r = static_cast<std::size_t>(std::round(params.replace_pct / 100.0 * static_cast<double>(cells.size())));
      if (r > 0) {
        std::vector<double> badness(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) badness[j] = detail::nearest_distance(cells[j], data);
        const auto worst = detail::rank_descending(badness);
        std::vector<bool> drop(cells.size(), false);
        for (std::size_t i = 0; i < r && i < worst.size(); ++i) drop[worst[i]] = true;
        Dataset next;
        for (std::size_t j = 0; j < cells.size(); ++j)
          if (!drop[j]) next.push_back(std::move(cells[j]));
        for (std::size_t i = 0; i < r; ++i) next.push_back(detail::random_in_box(box.lower, box.upper, rng));
        cells = suppress(next, params.sigma_s);
      }
    }
    if (last && params.prune_unrepresentative) {
      Dataset kept;
      for (auto& c : cells)
        if (detail::nearest_distance(c, data) <= std::max(params.sigma_s, 1e-12)) kept.push_back(std::move(c));
      if (!kept.empty()) cells = std::move(kept);
    }
    res.size_trace.push_back(cells.size());
  }

  res.network.cells = std::move(cells);
  res.network.similarity = distance_matrix(res.network.cells);
  return res;
}

struct MstEdge {
  std::size_t a, b;
  double length;
};

/// Prim's algorithm on the complete Euclidean graph. Returns n - 1 edges.
inline std::vector<MstEdge> minimum_spanning_tree(const Dataset& points) {
  const std::size_t n = points.size();
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  in_tree[0] = true;
  for (std::size_t j = 1; j < n; ++j) best[j] = euclidean_distance(points[0], points[j]);
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j)
      if (!in_tree[j] && (next == n || best[j] < best[next])) next = j;
    edges.push_back({from[next], next, best[next]});
    in_tree[next] = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = euclidean_distance(points[next], points[j]);
      if (d < best[j]) {
        best[j] = d;
        from[j] = next;
      }
    }
  }
  return edges;
}

enum class MstMode { automatic, fixed };

struct MstClustering {
  std::vector<std::size_t> labels;  // per cell, numbered by first appearance
  std::size_t clusters = 0;
  double cut_threshold = 0.0;  // automatic mode only
};

/// Clusters from the minimum spanning tree. Fixed mode cuts the K - 1
/// longest edges. Automatic mode cuts every edge longer than mean + one
/// standard deviation of the edge lengths.
inline MstClustering mst_clusters(const Dataset& points, MstMode mode, std::size_t k = 0) {
  if (points.empty()) throw std::invalid_argument("mst_clusters: no cells");
  if (mode == MstMode::fixed && (k == 0 || k > points.size()))
    throw std::invalid_argument("mst_clusters: K=" + std::to_string(k) + " outside [1, " +
                                std::to_string(points.size()) + "]");
  auto edges = minimum_spanning_tree(points);
  MstClustering out;
  std::vector<bool> cut(edges.size(), false);
  if (mode == MstMode::fixed) {
    std::vector<double> len(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) len[e] = edges[e].length;
    const auto order = detail::rank_descending(len);
    for (std::size_t i = 0; i + 1 < k; ++i) cut[order[i]] = true;
  } else if (!edges.empty()) {
    double mean = 0.0;
    for (const auto& e : edges) mean += e.length;
    mean /= static_cast<double>(edges.size());
    double var = 0.0;
    for (const auto& e : edges) var += (e.length - mean) * (e.length - mean);
    const double sd = std::sqrt(var / static_cast<double>(edges.size()));
    out.cut_threshold = mean + sd;
    for (std::size_t e = 0; e < edges.size(); ++e) cut[e] = edges[e].length > out.cut_threshold;
  }

  std::vector<std::size_t> parent(points.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (!cut[e]) parent[find(edges[e].a)] = find(edges[e].b);

  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> root_label(points.size(), unset);
  out.labels.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto r = find(i);
    if (root_label[r] == unset) root_label[r] = out.clusters++;
    out.labels[i] = root_label[r];
  }
  return out;
}

inline MstClustering mst_clusters(const ImmuneNetwork& net, MstMode mode, std::size_t k = 0) {
  return mst_clusters(net.cells, mode, k);
}

}  // namespace ais
