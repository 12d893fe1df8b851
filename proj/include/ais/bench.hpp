#pragma once

// Seeded experiment harness: resolve a dataset, run an algorithm `repeats`
// times with seeds base_seed + i, aggregate, and write CSV/JSON artifacts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ais/clonal_selection.hpp"
#include "ais/datasets.hpp"
#include "ais/immune_network.hpp"
#include "ais/negative_selection.hpp"
#include "ais/partitional.hpp"

#ifndef AIS_DATA_DIR
#define AIS_DATA_DIR "data"
#endif

namespace ais {

/// Invalid experiment setup; raised before any run starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Algorithm { ucsc, kmeans, clonalg, improved_clonalg, clonclas, negsel, ainet, opt_clonalg };

inline const std::vector<std::pair<std::string, Algorithm>>& algorithm_names() {
  static const std::vector<std::pair<std::string, Algorithm>> names = {
      {"ucsc", Algorithm::ucsc},       {"kmeans", Algorithm::kmeans},
      {"clonalg", Algorithm::clonalg}, {"improved_clonalg", Algorithm::improved_clonalg},
      {"clonclas", Algorithm::clonclas}, {"negsel", Algorithm::negsel},
      {"ainet", Algorithm::ainet},     {"opt_clonalg", Algorithm::opt_clonalg}};
  return names;
}

inline Algorithm algorithm_from_string(const std::string& s) {
  for (const auto& [name, a] : algorithm_names())
    if (name == s) return a;
  throw ConfigError("unknown algorithm '" + s + "'");
}

inline std::string to_string(Algorithm a) {
  for (const auto& [name, v] : algorithm_names())
    if (v == a) return name;
  return "?";
}

/// Lower D wins for the clustering algorithms; every other score is
/// maximized.
inline bool lower_is_better(Algorithm a) { return a == Algorithm::ucsc || a == Algorithm::kmeans; }

/// String-valued parameter map with typed, validated accessors.
class ParamMap {
 public:
  ParamMap() = default;
  explicit ParamMap(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Parses "key=value".
  void set_assignment(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("malformed parameter '" + kv + "', expected key=value");
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }

  double real(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto v = detail::parse_double(it->second);
    if (!v || !std::isfinite(*v)) throw ConfigError("parameter " + key + ": not a number: '" + it->second + "'");
    return *v;
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto v = detail::parse_double(it->second);
    if (!v || *v < 0.0 || *v != std::floor(*v) || *v > 1e15)
      throw ConfigError("parameter " + key + ": not a non-negative integer: '" + it->second + "'");
    return static_cast<std::size_t>(*v);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  void require_known(const std::set<std::string>& allowed, const std::string& context) const {
    for (const auto& [k, v] : values_)
      if (!allowed.count(k)) throw ConfigError("unknown parameter '" + k + "' for " + context);
  }

 private:
  std::map<std::string, std::string> values_;
};

struct SweepSpec {
  std::string key;
  std::vector<std::string> values;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::ucsc;
  std::string dataset = "iris";  // preset name or file path
  ParamMap params;
  std::size_t repeats = 1;
  std::uint64_t base_seed = 0;
  std::optional<SweepSpec> sweep;
  std::string outputs;  // directory; empty means no files
  MissingPolicy missing_policy = MissingPolicy::impute_mean;
  std::string data_dir = AIS_DATA_DIR;
  std::uint64_t dataset_seed = 1;  // synthetic presets are drawn once with this seed
  std::size_t threads = 1;

  void validate() const {
    if (repeats == 0) throw ConfigError("repeats must be >= 1");
    if (sweep && sweep->values.empty()) throw ConfigError("sweep '" + sweep->key + "' has no values");
    if (threads == 0) throw ConfigError("threads must be >= 1");
  }
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::size_t generations_used = 0;
  double best_score = 0.0;
  std::optional<double> accuracy;  // percent, when labels exist
  double wall_time = 0.0;          // seconds
  std::vector<double> trace;
  std::vector<std::size_t> labels;  // predicted labels for labeled datasets
  std::vector<double> per_class;    // percent per class, aligned with class names
};

struct Summary {
  double best = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over runs
  double repeat_rate = 0.0;  // fraction of runs within 0.5% of best
  std::uint64_t best_seed = 0;
  double mean_generations = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> records;  // sorted by seed
  Summary summary;
  std::vector<std::string> class_names;
};

// ---------------------------------------------------------------------------
// Dataset resolution

/// What a run operates on: labeled real points, binary patterns, a time
/// series, or an objective function.
struct Workload {
  std::optional<LabeledDataset> points;
  std::vector<Glyph> glyphs;
  std::vector<double> series;
  std::size_t series_change_at = 0;  // first sample of the changed segment, 0 if unknown
  std::optional<OptProblem> problem;
  std::string name;
};

inline const std::set<std::string>& point_presets() {
  static const std::set<std::string> s = {"dataset1", "dataset2", "dataset3", "iris", "breast_cancer",
                                          "two_spirals", "chainlink_rings", "concentric_circles"};
  return s;
}

inline bool is_mixture_preset(const std::string& s) { return s == "dataset1" || s == "dataset2" || s == "dataset3"; }
inline bool is_shape_preset(const std::string& s) {
  return s == "two_spirals" || s == "chainlink_rings" || s == "concentric_circles";
}

inline LabeledDataset resolve_points(const ExperimentConfig& cfg) {
  const auto& name = cfg.dataset;
  if (is_mixture_preset(name)) {
    SeededRng rng(cfg.dataset_seed);
    return gen_preset_mixture(name, rng);
  }
  if (is_shape_preset(name)) {
    SeededRng rng(cfg.dataset_seed);
    return gen_shapes(shape_from_string(name), {}, cfg.params.real("noise", 0.0), rng);
  }
  const std::filesystem::path dir(cfg.data_dir);
  if (name == "iris") return load_iris((dir / "iris.data").string());
  if (name == "breast_cancer")
    return load_breast_cancer((dir / "breast-cancer-wisconsin.data").string(), cfg.missing_policy);
  if (!std::filesystem::exists(name)) throw ConfigError("unknown dataset '" + name + "'");
  return load_csv(name, cfg.params.text("labels", "last") == "last");
}

/// Sine of period 20 samples for 400 samples, then a doubled frequency for
/// 200 samples. Window starts are multiples of the period inside the
/// unchanged part, so every unchanged window repeats a training window.
inline std::vector<double> sine_step_series(std::size_t normal = 400, std::size_t changed = 200) {
  std::vector<double> s;
  s.reserve(normal + changed);
  for (std::size_t t = 0; t < normal + changed; ++t) {
    const double period = t < normal ? 20.0 : 10.0;
    s.push_back(std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period));
  }
  return s;
}

inline OptProblem objective_preset(const std::string& name) {
  OptProblem p;
  p.z_min = {0.0};
  p.z_max = {10.0};
  if (name == "parabola") p.objective = [](std::span<const double> z) { return -(z[0] - 3.0) * (z[0] - 3.0); };
  else if (name == "zsin") p.objective = [](std::span<const double> z) { return z[0] * std::sin(z[0]); };
  else throw ConfigError("unknown objective '" + name + "' (expected parabola or zsin)");
  return p;
}

inline Workload resolve_workload(const ExperimentConfig& cfg) {
  Workload w;
  w.name = cfg.dataset;
  switch (cfg.algorithm) {
    case Algorithm::ucsc:
    case Algorithm::kmeans:
    case Algorithm::ainet:
      w.points = resolve_points(cfg);
      break;
    case Algorithm::clonalg:
    case Algorithm::improved_clonalg:
    case Algorithm::clonclas:
      if (cfg.dataset == "digits") w.glyphs = builtin_digit_glyphs();
      else if (std::filesystem::exists(cfg.dataset)) w.glyphs = load_glyphs(cfg.dataset);
      else throw ConfigError("unknown glyph set '" + cfg.dataset + "'");
      break;
    case Algorithm::negsel:
      if (cfg.dataset == "sine_step") {
        w.series = sine_step_series();
        w.series_change_at = 400;
      } else if (std::filesystem::exists(cfg.dataset)) {
        w.series = load_series(cfg.dataset);
      } else {
        throw ConfigError("unknown series '" + cfg.dataset + "'");
      }
      break;
    case Algorithm::opt_clonalg:
      w.problem = objective_preset(cfg.dataset);
      break;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Parameter binding

inline const std::set<std::string>& allowed_params(Algorithm a) {
  static const std::set<std::string> ucsc = {"N", "beta", "d", "gen", "K", "noise", "labels"};
  static const std::set<std::string> km = {"K", "max_iter", "noise", "labels"};
  static const std::set<std::string> clonal = {"N", "n", "beta", "d", "k", "rho", "gen", "epsilon",
                                               "clone_base", "timing", "loop_order"};
  static const std::set<std::string> clonclas = {"N", "n", "beta", "d", "rho", "gen", "epsilon",
                                                 "clone_base", "variants", "noise_rate"};
  static const std::set<std::string> negsel = {"window", "stride", "threshold", "detectors", "max_attempts",
                                               "train_len"};
  static const std::set<std::string> ainet = {"n", "beta", "zeta", "sigma_d", "sigma_s", "gen", "replace_pct",
                                              "initial_cells", "scale", "K", "noise", "labels"};
  static const std::set<std::string> opt = {"N", "n", "beta", "d", "rho", "gen", "bits", "clone_base"};
  switch (a) {
    case Algorithm::ucsc: return ucsc;
    case Algorithm::kmeans: return km;
    case Algorithm::clonalg:
    case Algorithm::improved_clonalg: return clonal;
    case Algorithm::clonclas: return clonclas;
    case Algorithm::negsel: return negsel;
    case Algorithm::ainet: return ainet;
    case Algorithm::opt_clonalg: return opt;
  }
  return ucsc;
}

inline ClonalParams bind_clonal(const ParamMap& p, std::size_t default_generations = 500, ClonalParams c = {}) {
  c.population = p.count("N", c.population);
  c.selected = p.count("n", c.selected);
  c.beta = p.real("beta", c.beta);
  c.random_replacements = p.count("d", c.random_replacements);
  c.k_replace = p.count("k", c.k_replace);
  c.rho = p.real("rho", c.rho);
  c.generations = p.count("gen", default_generations);
  c.epsilon = p.real("epsilon", c.epsilon);
  const auto base = p.text("clone_base", "selected");
  if (base == "selected") c.clone_base = CloneBase::selected;
  else if (base == "population") c.clone_base = CloneBase::population;
  else throw ConfigError("clone_base must be selected or population");
  const auto timing = p.text("timing", "per_antigen");
  if (timing == "per_antigen") c.replacement_timing = ReplacementTiming::per_antigen;
  else if (timing == "per_generation") c.replacement_timing = ReplacementTiming::per_generation;
  else throw ConfigError("timing must be per_antigen or per_generation");
  const auto order = p.text("loop_order", "antigen_major");
  if (order == "antigen_major") c.improved_loop_order = LoopOrder::antigen_major;
  else if (order == "generation_major") c.improved_loop_order = LoopOrder::generation_major;
  else throw ConfigError("loop_order must be antigen_major or generation_major");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

/// opt-CLONALG defaults: N = 20, n = 10, clonal factor 2, rho = 2, two
/// random replacements per generation.
inline ClonalParams opt_defaults() {
  ClonalParams c;
  c.population = 20;
  c.selected = 10;
  c.beta = 2.0;
  c.rho = 2.0;
  c.random_replacements = 2;
  return c;
}

/// Improved CLONALG replaces the k = 3 worst remainder cells unless told otherwise.
inline ClonalParams improved_defaults() {
  ClonalParams c;
  c.k_replace = 3;
  return c;
}

/// UCSC defaults: N = 10 and 20 generations, clonal factor 50, no random
/// replacement.
inline UcscParams bind_ucsc(const ParamMap& p, std::size_t default_k) {
  UcscParams u;
  u.population = p.count("N", 10);
  u.beta = p.real("beta", 50.0);
  u.random_replacements = p.count("d", 0);
  u.generations = p.count("gen", 20);
  u.clusters = p.count("K", default_k);
  try {
    u.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return u;
}

inline AiNetParams bind_ainet(const ParamMap& p) {
  AiNetParams a;
  a.selected = p.count("n", a.selected);
  a.beta = p.real("beta", a.beta);
  a.zeta = p.real("zeta", a.zeta);
  a.sigma_d = p.real("sigma_d", a.sigma_d);
  a.sigma_s = p.real("sigma_s", a.sigma_s);
  a.generations = p.count("gen", a.generations);
  a.replace_pct = p.real("replace_pct", a.replace_pct);
  a.initial_cells = p.count("initial_cells", a.initial_cells);
  const auto scale = p.text("scale", "minmax");
  if (scale == "minmax") a.scale_input = true;
  else if (scale == "raw") a.scale_input = false;
  else throw ConfigError("scale must be minmax or raw");
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return a;
}

// ---------------------------------------------------------------------------
// Single runs

namespace detail {

inline void score_labels(RunRecord& rec, const LabeledDataset& ds, std::size_t k) {
  if (ds.labels.empty()) return;
  const std::size_t classes = std::max(k, ds.num_classes());
  const auto report = align_accuracy(rec.labels, ds.labels, classes);
  rec.accuracy = report.overall;
  rec.per_class = report.per_class;
  rec.per_class.resize(ds.num_classes());
}

}  // namespace detail

inline RunRecord run_once(const ExperimentConfig& cfg, const Workload& w, std::uint64_t seed) {
  RunRecord rec;
  rec.seed = seed;
  SeededRng rng(seed);
  const auto& p = cfg.params;
  const auto t0 = std::chrono::steady_clock::now();

  switch (cfg.algorithm) {
    case Algorithm::ucsc: {
      const auto& ds = *w.points;
      const auto u = bind_ucsc(p, ds.num_classes());
      auto r = ucsc_cluster(ds.points, u, rng);
      rec.best_score = r.best.D;
      rec.generations_used = u.generations;
      for (double a : r.best_affinity_trace) rec.trace.push_back(a > 0.0 ? 1.0 / a : 0.0);
      rec.labels = r.best.labels;
      detail::score_labels(rec, ds, u.clusters);
      break;
    }
    case Algorithm::kmeans: {
      const auto& ds = *w.points;
      const std::size_t k = p.count("K", ds.num_classes());
      auto r = kmeans(ds.points, k, rng, p.count("max_iter", 300));
      rec.best_score = r.D;
      rec.generations_used = r.iterations;
      rec.trace = r.sse_trace;
      rec.labels = r.labels;
      detail::score_labels(rec, ds, k);
      break;
    }
    case Algorithm::clonalg:
    case Algorithm::improved_clonalg: {
      const auto c = cfg.algorithm == Algorithm::improved_clonalg ? bind_clonal(p, 500, improved_defaults())
                                                                  : bind_clonal(p);
      const auto antigens = glyph_bits(w.glyphs);
      auto r = cfg.algorithm == Algorithm::clonalg ? clonalg_train(antigens, c, rng)
                                                   : improved_clonalg_train(antigens, c, rng);
      rec.best_score = detail::mean_of(r.memory_affinity);
      rec.generations_used = r.generations_used;
      rec.trace = r.mean_affinity_trace;
      break;
    }
    case Algorithm::clonclas: {
      const auto c = bind_clonal(p);
      const std::size_t variants = p.count("variants", 3);
      const double noise = p.real("noise_rate", 0.05);
      std::vector<LabeledPatterns> classes;
      for (const auto& g : w.glyphs) {
        LabeledPatterns lp{g.name, {g.bits}};
        for (std::size_t v = 1; v < variants; ++v) lp.exemplars.push_back(multipoint_mutate(g.bits, noise, rng));
        classes.push_back(std::move(lp));
      }
      auto r = clonclas_train(classes, c, rng);
      rec.best_score = detail::mean_of(r.memory_affinity);
      rec.generations_used = r.generations_used;
      rec.trace = r.mean_affinity_trace;
      std::size_t correct = 0, total = 0;
      for (std::size_t cls = 0; cls < classes.size(); ++cls)
        for (const auto& e : classes[cls].exemplars) {
          ++total;
          const auto got = classify(e, r.memory, 0.0);
          correct += got.label && *got.label == cls;
        }
      rec.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
      break;
    }
    case Algorithm::negsel: {
      const std::size_t window = p.count("window", 3);
      const std::size_t stride = p.count("stride", 3);
      const std::size_t train_len =
          p.count("train_len", w.series_change_at ? w.series_change_at : w.series.size() / 2);
      if (train_len < window || train_len > w.series.size())
        throw ConfigError("train_len must lie in [window, series length]");
      const auto self_windows =
          window_encode(std::span(w.series).first(train_len), window, stride);
      const auto all_windows = window_encode(w.series, window, stride);
      AffinityConfig metric;
      auto det = generate_detectors(SelfSet<RealVector>{self_windows}, p.count("detectors", 500),
                                    p.real("threshold", 0.3), metric, rng, p.count("max_attempts", 200000));
      const auto counts = monitor(det, all_windows);
      rec.generations_used = det.attempts_used;
      std::size_t flagged = 0;
      for (auto c : counts) {
        rec.trace.push_back(static_cast<double>(c));
        flagged += c > 0;
      }
      rec.best_score = static_cast<double>(flagged);
      break;
    }
    case Algorithm::ainet: {
      const auto& ds = *w.points;
      const auto a = bind_ainet(p);
      auto r = ainet_train(ds.points, a, rng);
      rec.best_score = r.compression();
      rec.generations_used = a.generations;
      for (auto s : r.size_trace) rec.trace.push_back(static_cast<double>(s));
      if (!ds.labels.empty()) {
        const std::size_t k = std::min(p.count("K", ds.num_classes()), r.network.size());
        const auto mst = mst_clusters(r.network, MstMode::fixed, k);
        for (const auto& x : ds.points) {
          const auto xw = r.network.scaling.to_working(x);
          const auto near = detail::nearest(std::span<const double>(xw),
                                    [&](std::size_t c) { return std::span<const double>(r.network.cells[c]); },
                                    r.network.size());
          rec.labels.push_back(mst.labels[near]);
        }
        detail::score_labels(rec, ds, k);
      }
      break;
    }
    case Algorithm::opt_clonalg: {
      auto c = bind_clonal(p, 100, opt_defaults());
      OptProblem prob = *w.problem;
      prob.bits_per_dim = p.count("bits", 16);
      auto r = opt_clonalg(prob, c, rng);
      rec.best_score = r.best_score;
      rec.generations_used = c.generations;
      rec.trace = r.best_trace;
      break;
    }
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// ---------------------------------------------------------------------------
// Experiments

inline Summary summarize(const std::vector<RunRecord>& records, bool lower_better) {
  Summary s;
  if (records.empty()) return s;
  std::size_t best_i = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const bool better = lower_better ? records[i].best_score < records[best_i].best_score
                                     : records[i].best_score > records[best_i].best_score;
    if (better) best_i = i;
  }
  s.best = records[best_i].best_score;
  s.best_seed = records[best_i].seed;
  double sum = 0.0, gens = 0.0;
  for (const auto& r : records) {
    sum += r.best_score;
    gens += static_cast<double>(r.generations_used);
  }
  const double n = static_cast<double>(records.size());
  s.mean = sum / n;
  s.mean_generations = gens / n;
  double var = 0.0;
  for (const auto& r : records) var += (r.best_score - s.mean) * (r.best_score - s.mean);
  s.std = std::sqrt(var / n);
  const double band = 0.005 * std::abs(s.best);
  std::size_t hits = 0;
  for (const auto& r : records)
    hits += lower_better ? r.best_score <= s.best + band : r.best_score >= s.best - band;
  s.repeat_rate = static_cast<double>(hits) / n;
  return s;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  cfg.params.require_known(allowed_params(cfg.algorithm), to_string(cfg.algorithm));
  const Workload w = resolve_workload(cfg);
  // Bind once up front so bad values fail before any run.
  switch (cfg.algorithm) {
    case Algorithm::ucsc: bind_ucsc(cfg.params, w.points->num_classes()); break;
    case Algorithm::ainet: bind_ainet(cfg.params); break;
    case Algorithm::clonalg:
    case Algorithm::improved_clonalg:
    case Algorithm::clonclas: bind_clonal(cfg.params); break;
    case Algorithm::opt_clonalg: bind_clonal(cfg.params, 100, opt_defaults()); break;
    default: break;
  }

  ExperimentResult res;
  res.config = cfg;
  if (w.points) res.class_names = w.points->class_names;
  res.records.resize(cfg.repeats);
  const std::size_t threads = std::min(cfg.threads, cfg.repeats);
  if (threads <= 1) {
    for (std::size_t i = 0; i < cfg.repeats; ++i) res.records[i] = run_once(cfg, w, cfg.base_seed + i);
  } else {
    std::vector<std::future<void>> workers;
    for (std::size_t t = 0; t < threads; ++t)
      workers.push_back(std::async(std::launch::async, [&, t] {
        for (std::size_t i = t; i < cfg.repeats; i += threads) res.records[i] = run_once(cfg, w, cfg.base_seed + i);
      }));
    for (auto& f : workers) f.get();
  }
  std::sort(res.records.begin(), res.records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
  res.summary = summarize(res.records, lower_is_better(cfg.algorithm));
  return res;
}

struct SweepRow {
  std::string value;
  double mean_metric = 0.0;
  double median_metric = 0.0;
};

/// Which per-run number a sweep aggregates.
enum class SweepMetric { generations, score };

inline SweepMetric default_sweep_metric(Algorithm a) {
  switch (a) {
    case Algorithm::clonalg:
    case Algorithm::improved_clonalg:
    case Algorithm::clonclas: return SweepMetric::generations;
    default: return SweepMetric::score;
  }
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::optional<SweepMetric> metric = {}) {
  if (!cfg.sweep) throw ConfigError("sweep requested without a --sweep key=v1,v2,... value list");
  cfg.validate();
  const SweepMetric m = metric.value_or(default_sweep_metric(cfg.algorithm));
  std::vector<SweepRow> rows;
  for (const auto& value : cfg.sweep->values) {
    ExperimentConfig one = cfg;
    one.sweep.reset();
    one.params.set(cfg.sweep->key, value);
    const auto r = run_experiment(one);
    std::vector<double> xs;
    for (const auto& rec : r.records)
      xs.push_back(m == SweepMetric::generations ? static_cast<double>(rec.generations_used) : rec.best_score);
    double sum = 0.0;
    for (double x : xs) sum += x;
    rows.push_back({value, sum / static_cast<double>(xs.size()), median(xs)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

inline std::string fmt(double v, int digits = 17) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

inline std::string fixed(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace detail

inline nlohmann::json summary_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["algorithm"] = to_string(r.config.algorithm);
  j["dataset"] = r.config.dataset;
  j["repeats"] = r.config.repeats;
  j["base_seed"] = r.config.base_seed;
  j["dataset_seed"] = r.config.dataset_seed;
  j["params"] = r.config.params.values();
  j["best"] = r.summary.best;
  j["best_seed"] = r.summary.best_seed;
  j["mean"] = r.summary.mean;
  j["std"] = r.summary.std;
  j["repeat_rate"] = r.summary.repeat_rate;
  j["mean_generations"] = r.summary.mean_generations;
  j["score_direction"] = lower_is_better(r.config.algorithm) ? "minimize" : "maximize";
  return j;
}

/// runs.csv, trace_<seed>.csv and summary.json.
inline void write_run_outputs(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_output(dir / "summary.json");
    out << summary_json(r).dump(2) << '\n';
  }
  {
    auto out = detail::open_output(dir / "runs.csv");
    out << "seed,generations_used,best_score,accuracy,wall_time\n";
    for (const auto& rec : r.records)
      out << rec.seed << ',' << rec.generations_used << ',' << detail::fmt(rec.best_score) << ','
          << (rec.accuracy ? detail::fmt(*rec.accuracy) : std::string()) << ',' << detail::fmt(rec.wall_time, 6) << '\n';
  }
  for (const auto& rec : r.records) {
    auto out = detail::open_output(dir / ("trace_" + std::to_string(rec.seed) + ".csv"));
    out << "step,value\n";
    for (std::size_t i = 0; i < rec.trace.size(); ++i) out << i + 1 << ',' << detail::fmt(rec.trace[i]) << '\n';
  }
}

struct AccuracyTable {
  std::vector<std::string> classes;
  std::vector<double> per_class;  // percent
  double overall = 0.0;
  double D = 0.0;  // criterion of the best run
  std::uint64_t seed = 0;
};

/// Accuracy of the best run (by score) against the ground truth.
inline AccuracyTable accuracy_table(const ExperimentResult& r, const LabeledDataset& truth) {
  if (truth.labels.empty()) throw ConfigError("accuracy tables need a labeled dataset");
  const auto it = std::find_if(r.records.begin(), r.records.end(),
                               [&](const RunRecord& rec) { return rec.seed == r.summary.best_seed; });
  if (it == r.records.end() || it->labels.size() != truth.labels.size())
    throw ConfigError("best run carries no predicted labels");
  const std::size_t k = std::max(truth.num_classes(), *std::max_element(it->labels.begin(), it->labels.end()) + 1);
  const auto rep = align_accuracy(it->labels, truth.labels, k);
  AccuracyTable t;
  t.classes = truth.class_names;
  if (t.classes.empty())
    for (std::size_t c = 0; c < truth.num_classes(); ++c) t.classes.push_back("Class " + std::to_string(c + 1));
  t.per_class.assign(rep.per_class.begin(), rep.per_class.begin() + static_cast<std::ptrdiff_t>(t.classes.size()));
  t.overall = rep.overall;
  t.D = it->best_score;
  t.seed = it->seed;
  return t;
}

/// Aligned text rendering: class column padded to the longest name,
/// accuracy right-aligned with two decimals.
inline std::string render_accuracy_text(const AccuracyTable& t) {
  std::size_t w = std::string("Overall accuracy").size();
  for (const auto& c : t.classes) w = std::max(w, c.size());
  std::ostringstream os;
  auto row = [&](const std::string& name, const std::string& value) {
    os << std::left << std::setw(static_cast<int>(w)) << name << "  " << std::right << std::setw(10) << value << '\n';
  };
  row("Class", "Accuracy %");
  for (std::size_t c = 0; c < t.classes.size(); ++c) row(t.classes[c], detail::fixed(t.per_class[c], 2));
  row("Overall accuracy", detail::fixed(t.overall, 2));
  row("D", detail::fixed(t.D, 3));
  return os.str();
}

/// table_accuracy.csv (+ .txt) and table_criterion.csv.
inline void emit_tables(const ExperimentResult& r, const LabeledDataset& truth, const std::filesystem::path& dir) {
  const auto t = accuracy_table(r, truth);
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_output(dir / "table_accuracy.csv");
    out << "class,accuracy_percent\n";
    for (std::size_t c = 0; c < t.classes.size(); ++c) out << t.classes[c] << ',' << detail::fixed(t.per_class[c], 4) << '\n';
    out << "Overall," << detail::fixed(t.overall, 4) << '\n';
  }
  {
    auto out = detail::open_output(dir / "table_accuracy.txt");
    out << render_accuracy_text(t);
  }
  {
    auto out = detail::open_output(dir / "table_criterion.csv");
    out << "algorithm,dataset,best_D,mean_D,std_D,repeat_rate,best_seed\n";
    out << to_string(r.config.algorithm) << ',' << r.config.dataset << ',' << detail::fixed(r.summary.best, 6) << ','
        << detail::fixed(r.summary.mean, 6) << ',' << detail::fixed(r.summary.std, 6) << ','
        << detail::fixed(r.summary.repeat_rate, 4) << ',' << r.summary.best_seed << '\n';
  }
}

inline void write_sweep(const std::vector<SweepRow>& rows, const std::string& key, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << key << ",mean,median\n";
  for (const auto& row : rows) out << row.value << ',' << detail::fmt(row.mean_metric) << ',' << detail::fmt(row.median_metric) << '\n';
}

}  // namespace ais
