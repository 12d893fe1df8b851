#pragma once

// Clonal selection over binary shape-space: CLONALG for pattern memory,
// the k-replacement variant, class-generalized training (CLONCLAS), a
// partitioned driver, and real-valued function optimization via binary
// decoding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ais/rng.hpp"
#include "ais/shape_space.hpp"

namespace ais {

/// Which size goes in the numerator of the clone-count rule
/// round(beta * size / i).
enum class CloneBase {
  selected,    // size of the rank-sorted pool being cloned (n)
  population,  // whole repertoire size (N)
};

/// When the d random replacements of the remainder happen.
enum class ReplacementTiming { per_antigen, per_generation };

/// Outer loop of the memory-training routines.
enum class LoopOrder {
  generation_major,  // every antigen once per generation
  antigen_major,     // all generations for one antigen, then the next
};

struct ClonalParams {
  std::size_t population = 10;           // N
  std::size_t selected = 3;              // n
  double beta = 10.0;                    // clonal factor
  std::size_t random_replacements = 0;   // d
  std::size_t k_replace = 0;             // k, improved variant only
  double rho = 4.8;                      // mutation decay
  std::size_t generations = 500;         // gen
  double epsilon = 1.0;                  // target normalized affinity
  CloneBase clone_base = CloneBase::selected;
  ReplacementTiming replacement_timing = ReplacementTiming::per_antigen;
  LoopOrder improved_loop_order = LoopOrder::antigen_major;

  void validate() const {
    if (population == 0) throw std::invalid_argument("ClonalParams: population must be >= 1");
    if (selected == 0 || selected > population)
      throw std::invalid_argument("ClonalParams: need 1 <= n <= N");
    if (random_replacements > population) throw std::invalid_argument("ClonalParams: need d <= N");
    if (k_replace > population) throw std::invalid_argument("ClonalParams: need k <= N");
    if (!(beta > 0.0)) throw std::invalid_argument("ClonalParams: beta must be > 0");
    if (!(rho > 0.0)) throw std::invalid_argument("ClonalParams: rho must be > 0");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
      throw std::invalid_argument("ClonalParams: epsilon must lie in [0, 1]");
  }
};

/// Clone counts for a rank-sorted pool: entry i (1-based) is
/// round(beta * numerator / i), rounded half away from zero and clamped
/// to at least one clone.
inline std::vector<std::size_t> clone_counts(std::size_t ranks, double beta, std::size_t numerator) {
  std::vector<std::size_t> out(ranks);
  for (std::size_t i = 1; i <= ranks; ++i) {
    const double c = std::round(beta * static_cast<double>(numerator) / static_cast<double>(i));
    out[i - 1] = std::max<std::size_t>(1, static_cast<std::size_t>(c));
  }
  return out;
}

inline std::vector<std::size_t> clone_counts(std::size_t pop_size, double beta) {
  return clone_counts(pop_size, beta, pop_size);
}

/// Total clone pool size Nc.
inline std::size_t total_clones(std::span<const std::size_t> counts) {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

/// Per-bit flip probability exp(-rho * f) for normalized affinity f.
inline double mutation_rate(double f_norm, double rho) { return std::exp(-rho * f_norm); }

/// Flip each bit independently with probability `rate`.
inline BitVector multipoint_mutate(std::span<const std::uint8_t> bits, double rate, SeededRng& rng) {
  BitVector out(bits.begin(), bits.end());
  if (rate <= 0.0) return out;
  for (auto& b : out) {
    if (rate >= 1.0 || rng.uniform() < rate) b ^= 1u;
  }
  return out;
}

struct ClonalResult {
  std::vector<BitVector> memory;            // one cell per antigen (or class)
  std::vector<double> memory_affinity;      // normalized, aligned with memory
  std::vector<double> mean_affinity_trace;  // mean normalized memory affinity per generation
  // Normalized affinity of each memory cell after each generation,
  // [generation][cell].
  std::vector<std::vector<double>> cell_affinity_trace;
  std::size_t generations_used = 0;
  bool reached_epsilon = false;
};

namespace detail {

// Scores a bit vector against one target (an antigen or a class).
// Raw affinity lies in [0, max_affinity].
struct BitTarget {
  std::vector<BitVector> exemplars;

  std::size_t length() const { return exemplars.front().size(); }
  double max_affinity() const { return static_cast<double>(exemplars.size() * length()); }
  double affinity(const BitVector& ab) const {
    std::size_t sum = 0;
    for (const auto& e : exemplars) sum += hamming_distance(ab, e);
    return static_cast<double>(sum);
  }
};

inline std::vector<std::size_t> rank_descending(std::span<const double> f) {
  std::vector<std::size_t> idx(f.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
  return idx;
}

inline std::vector<std::size_t> rank_ascending(std::span<const double> f) {
  std::vector<std::size_t> idx(f.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  return idx;
}

enum class RemainderUpdate {
  none,         // plain CLONALG
  k_best,       // k worst of the remainder <- k best mutants
  replace_all,  // whole remainder <- best r mutants (CLONCLAS)
};

// Repertoire Ab = Ab_m + Ab_r plus the operators applied per target.
class Repertoire {
 public:
  Repertoire(std::size_t memory_cells, std::size_t length, const ClonalParams& params, SeededRng& rng)
      : params_(params), rng_(rng), length_(length) {
    if (params.population < memory_cells)
      throw std::invalid_argument("population N=" + std::to_string(params.population) +
                                  " is smaller than the " + std::to_string(memory_cells) +
                                  " memory cells required");
    memory_.reserve(memory_cells);
    for (std::size_t i = 0; i < memory_cells; ++i) memory_.push_back(random_bits(length, rng));
    const std::size_t r = params.population - memory_cells;
    remainder_.reserve(r);
    for (std::size_t i = 0; i < r; ++i) remainder_.push_back(random_bits(length, rng));
  }

  const std::vector<BitVector>& memory() const { return memory_; }
  const std::vector<BitVector>& remainder() const { return remainder_; }

  // One clonal-selection cycle of memory cell `cell` against `target`.
  void step(std::size_t cell, const BitTarget& target, RemainderUpdate update,
            bool random_replace_now) {
    const double fmax = target.max_affinity();
    const std::size_t m = memory_.size();
    const std::size_t total = m + remainder_.size();

    std::vector<double> f(total);
    for (std::size_t j = 0; j < total; ++j) f[j] = target.affinity(at(j));

    // Select the n best and clone them by rank.
    const std::size_t n = std::min(params_.selected, total);
    const auto order = rank_descending(f);
    const std::size_t numerator =
        params_.clone_base == CloneBase::selected ? n : params_.population;
    const auto counts = clone_counts(n, params_.beta, numerator);

    std::vector<BitVector> mutants;
    mutants.reserve(total_clones(counts));
    for (std::size_t rank = 0; rank < n; ++rank) {
      const BitVector& parent = at(order[rank]);
      const double rate = mutation_rate(f[order[rank]] / fmax, params_.rho);
      for (std::size_t c = 0; c < counts[rank]; ++c)
        mutants.push_back(multipoint_mutate(parent, rate, rng_));
    }

    std::vector<double> fstar(mutants.size());
    for (std::size_t j = 0; j < mutants.size(); ++j) fstar[j] = target.affinity(mutants[j]);
    const auto mut_order = rank_descending(fstar);

    // Memory replacement only on strict improvement.
    if (!mutants.empty() && fstar[mut_order[0]] > f[cell]) memory_[cell] = mutants[mut_order[0]];

    if (!remainder_.empty()) {
      std::vector<double> fr(f.begin() + static_cast<std::ptrdiff_t>(m), f.end());
      if (update == RemainderUpdate::k_best) {
        const std::size_t k = std::min({params_.k_replace, remainder_.size(), mutants.size()});
        const auto worst = rank_ascending(fr);
        for (std::size_t j = 0; j < k; ++j) {
          remainder_[worst[j]] = mutants[mut_order[j]];
          fr[worst[j]] = fstar[mut_order[j]];
        }
      } else if (update == RemainderUpdate::replace_all) {
        const std::size_t k = std::min(remainder_.size(), mutants.size());
        for (std::size_t j = 0; j < k; ++j) {
          remainder_[j] = mutants[mut_order[j]];
          fr[j] = fstar[mut_order[j]];
        }
      }
      if (random_replace_now) replace_worst_remainder(fr);
    }
  }

  // d lowest-affinity members of Ab_r <- fresh random antibodies.
  void replace_worst_remainder(std::span<const double> remainder_affinity) {
    const std::size_t d = std::min(params_.random_replacements, remainder_.size());
    if (d == 0) return;
    const auto worst = rank_ascending(remainder_affinity);
    for (std::size_t j = 0; j < d; ++j) remainder_[worst[j]] = random_bits(length_, rng_);
  }

  // Per-generation variant: a remainder cell scores its best normalized
  // affinity over all targets.
  void replace_worst_remainder(const std::vector<BitTarget>& targets) {
    std::vector<double> fr(remainder_.size(), 0.0);
    for (std::size_t j = 0; j < remainder_.size(); ++j)
      for (const auto& t : targets) fr[j] = std::max(fr[j], t.affinity(remainder_[j]) / t.max_affinity());
    replace_worst_remainder(fr);
  }

 private:
  const BitVector& at(std::size_t j) const {
    return j < memory_.size() ? memory_[j] : remainder_[j - memory_.size()];
  }

  const ClonalParams& params_;
  SeededRng& rng_;
  std::size_t length_;
  std::vector<BitVector> memory_;
  std::vector<BitVector> remainder_;
};

inline std::vector<double> normalized_memory_affinity(const std::vector<BitVector>& memory,
                                                      const std::vector<BitTarget>& targets) {
  std::vector<double> out(memory.size());
  for (std::size_t i = 0; i < memory.size(); ++i)
    out[i] = targets[i].affinity(memory[i]) / targets[i].max_affinity();
  return out;
}

inline bool all_at_least(std::span<const double> v, double eps) {
  return std::all_of(v.begin(), v.end(), [eps](double x) { return x >= eps; });
}

inline double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline std::size_t check_targets(const std::vector<BitTarget>& targets) {
  if (targets.empty()) throw std::invalid_argument("clonal training: empty antigen set");
  std::size_t length = 0;
  for (const auto& t : targets) {
    if (t.exemplars.empty()) throw std::invalid_argument("clonal training: empty class");
    for (const auto& e : t.exemplars) {
      if (e.empty()) throw std::invalid_argument("clonal training: zero-length pattern");
      if (!is_binary(e)) throw std::invalid_argument("clonal training: non-binary pattern");
      if (length == 0) length = e.size();
      if (e.size() != length) throw DimensionMismatch(length, e.size());
    }
  }
  return length;
}

// Every target visited once per generation.
inline ClonalResult train_generation_major(const std::vector<BitTarget>& targets,
                                           const ClonalParams& params, RemainderUpdate update,
                                           SeededRng& rng) {
  params.validate();
  const std::size_t length = check_targets(targets);
  Repertoire rep(targets.size(), length, params, rng);

  ClonalResult res;
  auto aff = normalized_memory_affinity(rep.memory(), targets);
  for (std::size_t g = 0; g < params.generations && !all_at_least(aff, params.epsilon); ++g) {
    const bool per_antigen = params.replacement_timing == ReplacementTiming::per_antigen;
    for (std::size_t i = 0; i < targets.size(); ++i) rep.step(i, targets[i], update, per_antigen);
    if (!per_antigen) rep.replace_worst_remainder(targets);
    aff = normalized_memory_affinity(rep.memory(), targets);
    res.cell_affinity_trace.push_back(aff);
    res.mean_affinity_trace.push_back(mean_of(aff));
    ++res.generations_used;
  }
  res.memory = rep.memory();
  res.memory_affinity = aff;
  res.reached_epsilon = all_at_least(aff, params.epsilon);
  return res;
}

// All generations for one target before moving on. Generation g of the
// trace is the state of each cell after its own g-th generation; cells that
// stopped early carry their final value forward.
inline ClonalResult train_target_major(const std::vector<BitTarget>& targets,
                                       const ClonalParams& params, RemainderUpdate update,
                                       SeededRng& rng) {
  params.validate();
  const std::size_t length = check_targets(targets);
  Repertoire rep(targets.size(), length, params, rng);
  const std::size_t m = targets.size();

  auto initial = normalized_memory_affinity(rep.memory(), targets);
  std::vector<std::vector<double>> history(m);  // history[i][g]
  for (std::size_t i = 0; i < m; ++i) {
    double a = targets[i].affinity(rep.memory()[i]) / targets[i].max_affinity();
    for (std::size_t g = 0; g < params.generations && a < params.epsilon; ++g) {
      rep.step(i, targets[i], update, true);
      a = targets[i].affinity(rep.memory()[i]) / targets[i].max_affinity();
      history[i].push_back(a);
    }
  }

  ClonalResult res;
  for (const auto& h : history) res.generations_used = std::max(res.generations_used, h.size());
  for (std::size_t g = 0; g < res.generations_used; ++g) {
    std::vector<double> row(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (history[i].empty()) row[i] = initial[i];
      else row[i] = history[i][std::min(g, history[i].size() - 1)];
    }
    res.mean_affinity_trace.push_back(mean_of(row));
    res.cell_affinity_trace.push_back(std::move(row));
  }
  res.memory = rep.memory();
  res.memory_affinity = normalized_memory_affinity(res.memory, targets);
  res.reached_epsilon = all_at_least(res.memory_affinity, params.epsilon);
  return res;
}

inline std::vector<BitTarget> single_targets(const std::vector<BitVector>& antigens) {
  std::vector<BitTarget> t;
  t.reserve(antigens.size());
  for (const auto& a : antigens) t.push_back(BitTarget{{a}});
  return t;
}

}  // namespace detail

/// CLONALG pattern memory. Affinity is Hamming distance (complementarity),
/// so a perfect memory cell is the bitwise complement of its antigen.
/// The repertoire must hold at least one cell per antigen (N >= |antigens|).
inline ClonalResult clonalg_train(const std::vector<BitVector>& antigens, const ClonalParams& params,
                                  SeededRng& rng) {
  return detail::train_generation_major(detail::single_targets(antigens), params,
                                        detail::RemainderUpdate::none, rng);
}

/// CLONALG with the k-replacement step: after each clonal cycle the k worst
/// remainder cells are overwritten by the k best mutants. The outer loop
/// order follows `params.improved_loop_order`; with the generation-major
/// order and k = 0 this reproduces clonalg_train draw for draw.
inline ClonalResult improved_clonalg_train(const std::vector<BitVector>& antigens,
                                           const ClonalParams& params, SeededRng& rng) {
  const auto targets = detail::single_targets(antigens);
  const auto update = params.k_replace > 0 ? detail::RemainderUpdate::k_best
                                           : detail::RemainderUpdate::none;
  if (params.improved_loop_order == LoopOrder::generation_major)
    return detail::train_generation_major(targets, params, update, rng);
  return detail::train_target_major(targets, params, update, rng);
}

struct LabeledPatterns {
  std::string label;
  std::vector<BitVector> exemplars;
};

/// Class-generalized memory: a candidate's affinity is the summed Hamming
/// distance to every exemplar of the class. Classes are trained one after
/// the other; each cycle refills the whole remainder with the best mutants.
inline ClonalResult clonclas_train(const std::vector<LabeledPatterns>& classes,
                                   const ClonalParams& params, SeededRng& rng) {
  std::vector<detail::BitTarget> targets;
  targets.reserve(classes.size());
  for (const auto& c : classes) {
    if (c.exemplars.empty()) throw std::invalid_argument("clonclas_train: class '" + c.label + "' is empty");
    targets.push_back(detail::BitTarget{c.exemplars});
  }
  return detail::train_target_major(targets, params, detail::RemainderUpdate::replace_all, rng);
}

/// Result of classify(): the winning class index, or nullopt for UNKNOWN.
struct Classification {
  std::optional<std::size_t> label;
  double affinity = 0.0;  // normalized affinity of the best memory cell
};

/// Assign `pattern` to the memory cell with the highest normalized affinity
/// (Hamming distance / L), provided it reaches `epsilon`. Ties go to the
/// lowest index.
inline Classification classify(std::span<const std::uint8_t> pattern,
                               const std::vector<BitVector>& memory, double epsilon) {
  if (memory.empty()) throw std::invalid_argument("classify: empty memory");
  const double length = static_cast<double>(pattern.size());
  Classification best;
  std::size_t best_idx = 0;
  double best_aff = -1.0;
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double a = static_cast<double>(hamming_distance(pattern, memory[i])) / length;
    if (a > best_aff) {
      best_aff = a;
      best_idx = i;
    }
  }
  best.affinity = best_aff;
  if (best_aff >= epsilon) best.label = best_idx;
  return best;
}

struct PartitionedResult {
  std::vector<BitVector> memory;            // concatenated in group order
  std::vector<std::size_t> antigen_index;   // source antigen of each memory cell
  std::vector<double> memory_affinity;
  std::vector<ClonalResult> groups;
};

/// Split the antigens round-robin into P groups, train each group with its
/// own seed, and concatenate the memories in group order. Groups share no
/// state, so the result does not depend on `concurrent`.
inline PartitionedResult partitioned_clonalg(const std::vector<BitVector>& antigens,
                                             std::size_t partitions, const ClonalParams& params,
                                             std::span<const std::uint64_t> seeds,
                                             bool concurrent = true) {
  if (antigens.empty()) throw std::invalid_argument("partitioned_clonalg: empty antigen set");
  if (partitions == 0 || partitions > antigens.size())
    throw std::invalid_argument("partitioned_clonalg: need 1 <= P <= |antigens|");
  if (seeds.size() != partitions)
    throw std::invalid_argument("partitioned_clonalg: need exactly one seed per partition");

  std::vector<std::vector<BitVector>> groups(partitions);
  std::vector<std::vector<std::size_t>> indices(partitions);
  for (std::size_t i = 0; i < antigens.size(); ++i) {
    groups[i % partitions].push_back(antigens[i]);
    indices[i % partitions].push_back(i);
  }

  auto run_group = [&](std::size_t g) {
    SeededRng rng(seeds[g]);
    return clonalg_train(groups[g], params, rng);
  };

  PartitionedResult out;
  out.groups.resize(partitions);
  if (concurrent && partitions > 1) {
    std::vector<std::future<ClonalResult>> futures;
    futures.reserve(partitions);
    for (std::size_t g = 0; g < partitions; ++g)
      futures.push_back(std::async(std::launch::async, run_group, g));
    for (std::size_t g = 0; g < partitions; ++g) out.groups[g] = futures[g].get();
  } else {
    for (std::size_t g = 0; g < partitions; ++g) out.groups[g] = run_group(g);
  }

  for (std::size_t g = 0; g < partitions; ++g) {
    const auto& r = out.groups[g];
    out.memory.insert(out.memory.end(), r.memory.begin(), r.memory.end());
    out.memory_affinity.insert(out.memory_affinity.end(), r.memory_affinity.begin(),
                               r.memory_affinity.end());
    out.antigen_index.insert(out.antigen_index.end(), indices[g].begin(), indices[g].end());
  }
  return out;
}

/// Affine map of an unsigned binary integer (bit i weighted 2^i) onto
/// [z_min, z_max].
inline double decode_binary(std::span<const std::uint8_t> bits, double z_min, double z_max) {
  if (bits.empty()) throw std::invalid_argument("decode_binary: empty bit string");
  if (bits.size() > 63) throw std::invalid_argument("decode_binary: at most 63 bits per value");
  double z = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) z += std::ldexp(1.0, static_cast<int>(i));
  const double top = std::ldexp(1.0, static_cast<int>(bits.size())) - 1.0;
  return z_min + z * (z_max - z_min) / top;
}

struct OptProblem {
  std::function<double(std::span<const double>)> objective;  // maximized
  RealVector z_min;
  RealVector z_max;
  std::size_t bits_per_dim = 16;

  std::size_t dims() const { return z_min.size(); }

  void validate() const {
    if (!objective) throw std::invalid_argument("OptProblem: objective missing");
    if (z_min.empty() || z_min.size() != z_max.size())
      throw std::invalid_argument("OptProblem: bounds must be non-empty and of equal length");
    for (std::size_t i = 0; i < z_min.size(); ++i)
      if (!(z_min[i] < z_max[i])) throw std::invalid_argument("OptProblem: need z_min < z_max");
    if (bits_per_dim == 0 || bits_per_dim > 63)
      throw std::invalid_argument("OptProblem: bits_per_dim must lie in [1, 63]");
  }

  /// Concatenated per-dimension bit fields, `bits_per_dim` each.
  RealVector decode(std::span<const std::uint8_t> bits) const {
    RealVector z(dims());
    for (std::size_t d = 0; d < dims(); ++d)
      z[d] = decode_binary(bits.subspan(d * bits_per_dim, bits_per_dim), z_min[d], z_max[d]);
    return z;
  }
};

struct OptResult {
  BitVector best_bits;
  RealVector best_point;
  double best_score = 0.0;
  std::vector<double> best_trace;  // best score after each generation
};

/// opt-CLONALG: the whole repertoire is memory. Each generation clones the
/// n best, hypermutates with rate exp(-rho * f), where f is the score
/// min-max normalized over the repertoire, keeps the N best of parents and
/// mutants, then replaces the d worst with random antibodies.
inline OptResult opt_clonalg(const OptProblem& problem, const ClonalParams& params, SeededRng& rng) {
  problem.validate();
  params.validate();
  const std::size_t length = problem.dims() * problem.bits_per_dim;
  const std::size_t N = params.population;

  std::vector<BitVector> pop;
  pop.reserve(N);
  for (std::size_t i = 0; i < N; ++i) pop.push_back(random_bits(length, rng));
  auto score = [&](const BitVector& b) { return problem.objective(problem.decode(b)); };
  std::vector<double> f(N);
  for (std::size_t i = 0; i < N; ++i) f[i] = score(pop[i]);

  OptResult res;
  for (std::size_t g = 0; g < params.generations; ++g) {
    const auto order = detail::rank_descending(f);
    const double fmax = f[order.front()];
    const double fmin = f[order.back()];
    const std::size_t n = params.selected;
    const std::size_t numerator = params.clone_base == CloneBase::selected ? n : N;
    const auto counts = clone_counts(n, params.beta, numerator);

    std::vector<BitVector> merged = pop;
    std::vector<double> fm = f;
    for (std::size_t rank = 0; rank < n; ++rank) {
      const std::size_t p = order[rank];
      const double norm = fmax > fmin ? (f[p] - fmin) / (fmax - fmin) : 1.0;
      const double rate = mutation_rate(norm, params.rho);
      for (std::size_t c = 0; c < counts[rank]; ++c) {
        merged.push_back(multipoint_mutate(pop[p], rate, rng));
        fm.push_back(score(merged.back()));
      }
    }

    const auto keep = detail::rank_descending(fm);
    for (std::size_t i = 0; i < N; ++i) {
      pop[i] = merged[keep[i]];
      f[i] = fm[keep[i]];
    }
    res.best_trace.push_back(f[0]);

    // pop is sorted best-first here, so the d worst sit at the tail.
    const std::size_t d = std::min(params.random_replacements, N - 1);
    for (std::size_t j = 0; j < d; ++j) {
      pop[N - 1 - j] = random_bits(length, rng);
      f[N - 1 - j] = score(pop[N - 1 - j]);
    }
  }

  const auto order = detail::rank_descending(f);
  res.best_bits = pop[order.front()];
  res.best_point = problem.decode(res.best_bits);
  res.best_score = f[order.front()];
  return res;
}

}  // namespace ais
