#pragma once

// Synthetic generators, UCI loaders, CSV interchange, and binary digit
// glyphs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ais/partitional.hpp"
#include "ais/rng.hpp"
#include "ais/shape_space.hpp"

namespace ais {

/// Malformed input file; carries the 1-based line number (0 when the
/// problem is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct LabeledDataset {
  std::string name;
  Dataset points;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;  // indexed by label

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
  std::size_t num_classes() const {
    if (!class_names.empty()) return class_names.size();
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  }
  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> c(num_classes(), 0);
    for (auto l : labels) ++c[l];
    return c;
  }
};

// ---------------------------------------------------------------------------
// Gaussian mixtures

struct GaussianComponent {
  RealVector mean;
  RealVector scale;  // per-dimension standard deviation
  std::size_t count = 0;
};

struct GaussianMixtureSpec {
  std::vector<GaussianComponent> components;

  void validate() const {
    if (components.empty()) throw std::invalid_argument("GaussianMixtureSpec: no components");
    const std::size_t dim = components.front().mean.size();
    if (dim == 0) throw std::invalid_argument("GaussianMixtureSpec: zero-dimensional mean");
    for (const auto& c : components) {
      if (c.mean.size() != dim) throw DimensionMismatch(dim, c.mean.size());
      if (c.scale.size() != dim) throw DimensionMismatch(dim, c.scale.size());
      if (c.count == 0) throw std::invalid_argument("GaussianMixtureSpec: component count must be >= 1");
    }
  }
};

/// count_i points per component, each mean_i + scale_i (.) N(0, I).
inline LabeledDataset gen_gaussian_mixture(const GaussianMixtureSpec& spec, SeededRng& rng,
                                           std::string name = "mixture") {
  spec.validate();
  LabeledDataset out;
  out.name = std::move(name);
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    const auto& comp = spec.components[c];
    out.class_names.push_back("Class " + std::to_string(c + 1));
    for (std::size_t j = 0; j < comp.count; ++j) {
      RealVector x(comp.mean.size());
      for (std::size_t d = 0; d < x.size(); ++d) x[d] = comp.mean[d] + comp.scale[d] * rng.normal();
      out.points.push_back(std::move(x));
      out.labels.push_back(c);
    }
  }
  return out;
}

/// The three synthetic benchmark mixtures: "dataset1" (2 x 100, 2-D),
/// "dataset2" (9 x 25, 2-D grid), "dataset3" (3 x 50, 3-D).
inline GaussianMixtureSpec preset_mixture(std::string_view name) {
  GaussianMixtureSpec s;
  if (name == "dataset1") {
    s.components = {{{0.1, 0.1}, {0.11, 0.1}, 100}, {{0.35, 0.1}, {0.11, 0.1}, 100}};
  } else if (name == "dataset2") {
    for (double x : {0.1, 0.5, 0.9})
      for (double y : {0.1, 0.5, 0.9}) s.components.push_back({{x, y}, {0.08, 0.08}, 25});
  } else if (name == "dataset3") {
    s.components = {{{1.0, 1.0, 1.0}, {0.3, 0.3, 0.3}, 50},
                    {{2.0, 2.5, 2.5}, {0.3, 0.3, 0.3}, 50},
                    {{2.0, 3.0, 3.0}, {0.3, 0.3, 0.3}, 50}};
  } else {
    throw std::invalid_argument("unknown mixture preset '" + std::string(name) + "'");
  }
  return s;
}

inline LabeledDataset gen_preset_mixture(std::string_view name, SeededRng& rng) {
  return gen_gaussian_mixture(preset_mixture(name), rng, std::string(name));
}

// ---------------------------------------------------------------------------
// Shapes for the immune-network experiments

enum class ShapeKind { two_spirals, chainlink_rings, concentric_circles };

inline ShapeKind shape_from_string(std::string_view s) {
  if (s == "two_spirals") return ShapeKind::two_spirals;
  if (s == "chainlink_rings") return ShapeKind::chainlink_rings;
  if (s == "concentric_circles") return ShapeKind::concentric_circles;
  throw std::invalid_argument("unknown shape '" + std::string(s) + "'");
}

/// Default per-class sizes: 95+95 spirals, 250+250 rings, 210+420 circles.
inline std::vector<std::size_t> default_shape_counts(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::two_spirals: return {95, 95};
    case ShapeKind::chainlink_rings: return {250, 250};
    case ShapeKind::concentric_circles: return {210, 420};
  }
  return {};
}

inline constexpr double kInnerCircleRadius = 1.0;
inline constexpr double kOuterCircleRadius = 3.0;

/// Parametric curves sampled at evenly spaced parameters plus isotropic
/// Gaussian noise of standard deviation `noise`:
///  - two_spirals: interleaved Archimedean spirals, 1.5 turns each (2-D);
///  - chainlink_rings: two unit circles in orthogonal planes, each passing
///    through the other's center (3-D);
///  - concentric_circles: radii 1 and 3 around the origin (2-D).
inline LabeledDataset gen_shapes(ShapeKind kind, std::vector<std::size_t> counts, double noise,
                                 SeededRng& rng) {
  if (counts.empty()) counts = default_shape_counts(kind);
  if (counts.size() != 2) throw std::invalid_argument("gen_shapes: expected two class counts");
  for (auto c : counts)
    if (c == 0) throw std::invalid_argument("gen_shapes: counts must be >= 1");
  if (noise < 0.0) throw std::invalid_argument("gen_shapes: noise must be >= 0");

  constexpr double pi = std::numbers::pi;
  LabeledDataset out;
  auto emit = [&](RealVector x, std::size_t label) {
    for (auto& v : x) v += noise > 0.0 ? noise * rng.normal() : 0.0;
    out.points.push_back(std::move(x));
    out.labels.push_back(label);
  };

  switch (kind) {
    case ShapeKind::two_spirals:
      out.name = "two_spirals";
      for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t j = 0; j < counts[s]; ++j) {
          const double t = pi / 2.0 + 3.0 * pi * static_cast<double>(j) / static_cast<double>(counts[s]);
          const double r = t / pi;
          const double sign = s == 0 ? 1.0 : -1.0;
          emit({sign * r * std::cos(t), sign * r * std::sin(t)}, s);
        }
      }
      break;
    case ShapeKind::chainlink_rings:
      out.name = "chainlink_rings";
      for (std::size_t j = 0; j < counts[0]; ++j) {
        const double t = 2.0 * pi * static_cast<double>(j) / static_cast<double>(counts[0]);
        emit({std::cos(t), std::sin(t), 0.0}, 0);
      }
      for (std::size_t j = 0; j < counts[1]; ++j) {
        const double t = 2.0 * pi * static_cast<double>(j) / static_cast<double>(counts[1]);
        emit({1.0 + std::cos(t), 0.0, std::sin(t)}, 1);
      }
      break;
    case ShapeKind::concentric_circles:
      out.name = "concentric_circles";
      for (std::size_t s = 0; s < 2; ++s) {
        const double r = s == 0 ? kInnerCircleRadius : kOuterCircleRadius;
        for (std::size_t j = 0; j < counts[s]; ++j) {
          const double t = 2.0 * pi * static_cast<double>(j) / static_cast<double>(counts[s]);
          emit({r * std::cos(t), r * std::sin(t)}, s);
        }
      }
      break;
  }
  out.class_names = {"Class 1", "Class 2"};
  return out;
}

// ---------------------------------------------------------------------------
// CSV helpers

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return in;
}

}  // namespace detail

/// UCI iris.data: four measurements and the species name per row. Blank
/// lines are skipped. The file must hold 150 rows, 50 per species.
inline LabeledDataset load_iris(const std::string& path) {
  auto in = detail::open_input(path);
  LabeledDataset out;
  out.name = "iris";
  out.class_names = {"Setosa", "Versicolor", "Virginica"};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 5) throw ParseError(path, lineno, "expected 5 fields, got " + std::to_string(fields.size()));
    RealVector x(4);
    for (std::size_t d = 0; d < 4; ++d) {
      const auto v = detail::parse_double(fields[d]);
      if (!v) throw ParseError(path, lineno, "non-numeric value '" + fields[d] + "'");
      x[d] = *v;
    }
    std::string species = fields[4];
    if (species.rfind("Iris-", 0) == 0) species = species.substr(5);
    std::size_t label = 0;
    if (species == "setosa") label = 0;
    else if (species == "versicolor") label = 1;
    else if (species == "virginica") label = 2;
    else throw ParseError(path, lineno, "unknown species '" + fields[4] + "'");
    out.points.push_back(std::move(x));
    out.labels.push_back(label);
  }
  const auto counts = out.class_counts();
  if (out.size() != 150 || counts != std::vector<std::size_t>{50, 50, 50})
    throw ParseError(path, 0, "expected 150 rows with 50 per species, got " + std::to_string(out.size()) + " rows");
  return out;
}

enum class MissingPolicy { impute_mean, drop };

inline MissingPolicy missing_policy_from_string(std::string_view s) {
  if (s == "impute" || s == "impute_mean") return MissingPolicy::impute_mean;
  if (s == "drop") return MissingPolicy::drop;
  throw std::invalid_argument("unknown missing-value policy '" + std::string(s) + "'");
}

/// UCI breast-cancer-wisconsin.data: sample id, nine integer features
/// ('?' when missing), class 2 (benign) or 4 (malignant). Labels: benign 0,
/// malignant 1. impute_mean replaces '?' by the rounded mean of the
/// feature over the rows where it is present; drop discards such rows.
inline LabeledDataset load_breast_cancer(const std::string& path,
                                         MissingPolicy policy = MissingPolicy::impute_mean) {
  auto in = detail::open_input(path);
  struct Row {
    std::array<std::optional<double>, 9> f;
    std::size_t label;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 11) throw ParseError(path, lineno, "expected 11 fields, got " + std::to_string(fields.size()));
    Row r{};
    for (std::size_t d = 0; d < 9; ++d) {
      const auto& s = fields[d + 1];
      if (s == "?") continue;
      const auto v = detail::parse_double(s);
      if (!v) throw ParseError(path, lineno, "non-numeric value '" + s + "'");
      r.f[d] = *v;
    }
    if (fields[10] == "2") r.label = 0;
    else if (fields[10] == "4") r.label = 1;
    else throw ParseError(path, lineno, "unknown class '" + fields[10] + "'");
    rows.push_back(r);
  }

  std::array<double, 9> fill{};
  for (std::size_t d = 0; d < 9; ++d) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows)
      if (r.f[d]) {
        sum += *r.f[d];
        ++n;
      }
    fill[d] = n ? std::round(sum / static_cast<double>(n)) : 0.0;
  }

  LabeledDataset out;
  out.name = "breast_cancer";
  out.class_names = {"Benign", "Malignant"};
  for (const auto& r : rows) {
    const bool missing = std::any_of(r.f.begin(), r.f.end(), [](const auto& v) { return !v.has_value(); });
    if (missing && policy == MissingPolicy::drop) continue;
    RealVector x(9);
    for (std::size_t d = 0; d < 9; ++d) x[d] = r.f[d] ? *r.f[d] : fill[d];
    out.points.push_back(std::move(x));
    out.labels.push_back(r.label);
  }
  if (out.points.empty()) throw ParseError(path, 0, "no rows");
  return out;
}

/// Generic numeric CSV. A first line that does not parse as numbers is
/// taken as a header. With `label_last`, the final column holds integer
/// class labels.
inline LabeledDataset load_csv(const std::string& path, bool label_last = true) {
  auto in = detail::open_input(path);
  LabeledDataset out;
  out.name = path;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    std::vector<double> values;
    bool numeric = true;
    for (const auto& f : fields) {
      const auto v = detail::parse_double(f);
      if (!v) {
        numeric = false;
        break;
      }
      values.push_back(*v);
    }
    if (!numeric) {
      if (out.points.empty() && width == 0) {
        width = fields.size();  // header
        continue;
      }
      throw ParseError(path, lineno, "non-numeric row");
    }
    if (width == 0) width = values.size();
    if (values.size() != width)
      throw ParseError(path, lineno, "expected " + std::to_string(width) + " fields, got " + std::to_string(values.size()));
    if (label_last) {
      if (values.size() < 2) throw ParseError(path, lineno, "need at least one feature and a label");
      const double l = values.back();
      if (l < 0.0 || l != std::floor(l)) throw ParseError(path, lineno, "label must be a non-negative integer");
      out.labels.push_back(static_cast<std::size_t>(l));
      values.pop_back();
    }
    out.points.push_back(std::move(values));
  }
  if (out.points.empty()) throw ParseError(path, 0, "no data rows");
  return out;
}

/// One row per point, full round-trip precision, label last when present.
inline void write_csv(std::ostream& os, const LabeledDataset& ds) {
  const auto old_prec = os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t j = 0; j < ds.points.size(); ++j) {
    for (std::size_t d = 0; d < ds.points[j].size(); ++d) {
      if (d) os << ',';
      os << ds.points[j][d];
    }
    if (!ds.labels.empty()) os << ',' << ds.labels[j];
    os << '\n';
  }
  os.precision(old_prec);
}

inline void write_csv(const std::string& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, ds);
}

/// One value per line, or the first column of a CSV.
inline std::vector<double> load_series(const std::string& path) {
  auto in = detail::open_input(path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    const auto v = detail::parse_double(fields.front());
    if (!v) {
      if (out.empty() && lineno == 1) continue;  // header
      throw ParseError(path, lineno, "non-numeric value '" + fields.front() + "'");
    }
    out.push_back(*v);
  }
  return out;
}

/// Min-max scaling of every dimension to [0, 1]; flat dimensions map to 0.
inline Dataset minmax_scale(const Dataset& data) {
  if (data.empty()) return {};
  const auto b = search_bounds(data);
  Dataset out = data;
  for (auto& x : out)
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double span = b.upper[d] - b.lower[d];
      x[d] = span > 0.0 ? (x[d] - b.lower[d]) / span : 0.0;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Digit glyphs

inline constexpr std::size_t kGlyphRows = 12;
inline constexpr std::size_t kGlyphCols = 10;

struct Glyph {
  std::string name;
  BitVector bits;  // row-major, kGlyphRows * kGlyphCols
};

/// Glyph text format: ';' starts a comment line, '>' NAME opens a glyph,
/// followed by 12 rows of 10 characters ('#' = 1, '.' = 0).
inline std::vector<Glyph> parse_glyphs(std::string_view text, const std::string& source = "<glyphs>") {
  std::vector<Glyph> out;
  std::vector<std::size_t> rows;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  auto close = [&](std::size_t at) {
    if (!out.empty() && rows.back() != kGlyphRows)
      throw ParseError(source, at, "glyph '" + out.back().name + "' has " + std::to_string(rows.back()) +
                                       " rows, expected " + std::to_string(kGlyphRows));
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == ';') continue;
    if (t[0] == '>') {
      close(lineno);
      out.push_back(Glyph{detail::trim(t.substr(1)), {}});
      rows.push_back(0);
      continue;
    }
    if (out.empty()) throw ParseError(source, lineno, "pixel row before any '>' header");
    if (t.size() != kGlyphCols)
      throw ParseError(source, lineno, "row has " + std::to_string(t.size()) + " columns, expected " +
                                           std::to_string(kGlyphCols));
    if (rows.back() == kGlyphRows) throw ParseError(source, lineno, "too many rows in glyph '" + out.back().name + "'");
    for (char c : t) {
      if (c != '#' && c != '.') throw ParseError(source, lineno, std::string("bad pixel '") + c + "'");
      out.back().bits.push_back(c == '#' ? 1 : 0);
    }
    ++rows.back();
  }
  close(lineno);
  return out;
}

inline std::vector<Glyph> load_glyphs(const std::string& path) {
  auto in = detail::open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_glyphs(ss.str(), path);
}

inline constexpr std::string_view kBuiltinGlyphs = R"(
> 0
..######..
.##....##.
##......##
##.....###
##....####
##...##.##
##..##..##
##.##...##
####....##
###.....##
.##....##.
..######..
> 1
....##....
...###....
..####....
....##....
....##....
....##....
....##....
....##....
....##....
....##....
....##....
..######..
> 2
.#######..
##.....##.
.......##.
.......##.
......##..
.....##...
....##....
...##.....
..##......
.##.......
##........
##########
> 3
.#######..
##.....##.
.......##.
.......##.
.......##.
..######..
.......##.
.......##.
.......##.
.......##.
##.....##.
.#######..
> 4
......##..
.....###..
....####..
...##.##..
..##..##..
.##...##..
##....##..
##########
......##..
......##..
......##..
......##..
> 6
..######..
.##.......
##........
##........
##........
########..
##.....##.
##......##
##......##
##......##
.##....##.
..######..
> 7
##########
........##
.......##.
......##..
.....##...
....##....
....##....
...##.....
...##.....
..##......
..##......
..##......
> 9
..######..
.##....##.
##......##
##......##
##......##
.##.....##
..########
........##
........##
........##
.......##.
..######..
)";

inline constexpr std::size_t kMinGlyphSeparation = 20;

/// The eight built-in digit glyphs (0 1 2 3 4 6 7 9), pairwise Hamming
/// distance at least kMinGlyphSeparation.
inline std::vector<Glyph> builtin_digit_glyphs() {
  auto glyphs = parse_glyphs(kBuiltinGlyphs, "<builtin>");
  for (std::size_t i = 0; i < glyphs.size(); ++i)
    for (std::size_t j = i + 1; j < glyphs.size(); ++j)
      if (hamming_distance(glyphs[i].bits, glyphs[j].bits) < kMinGlyphSeparation)
        throw std::logic_error("built-in glyphs " + glyphs[i].name + " and " + glyphs[j].name + " too close");
  return glyphs;
}

inline std::vector<BitVector> glyph_bits(const std::vector<Glyph>& glyphs) {
  std::vector<BitVector> out;
  out.reserve(glyphs.size());
  for (const auto& g : glyphs) out.push_back(g.bits);
  return out;
}

}  // namespace ais
