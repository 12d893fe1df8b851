#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ais/bench.hpp"

using namespace ais;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ais_bench_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// runs.csv without its wall_time column.
std::string runs_without_time(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string out;
  for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

ExperimentConfig config(Algorithm a, std::string dataset, std::size_t repeats) {
  ExperimentConfig c;
  c.algorithm = a;
  c.dataset = std::move(dataset);
  c.repeats = repeats;
  c.threads = 4;
  return c;
}

}  // namespace

TEST(ParamMap, ParsesAndValidates) {
  ParamMap p;
  p.set_assignment("beta=2.5");
  p.set_assignment("N=10");
  EXPECT_DOUBLE_EQ(p.real("beta", 0.0), 2.5);
  EXPECT_EQ(p.count("N", 0), 10u);
  EXPECT_EQ(p.count("gen", 7), 7u);
  EXPECT_THROW(p.set_assignment("novalue"), ConfigError);
  EXPECT_THROW(p.count("beta", 0), ConfigError);
  p.set("rho", "abc");
  EXPECT_THROW(p.real("rho", 0.0), ConfigError);
  EXPECT_THROW(p.require_known({"beta", "N"}, "ucsc"), ConfigError);
}

TEST(RunExperiment, SingleRepeatSummary) {
  const auto r = run_experiment(config(Algorithm::kmeans, "iris", 1));
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.summary.best, r.records[0].best_score);
  EXPECT_EQ(r.summary.repeat_rate, 1.0);
  EXPECT_EQ(r.summary.std, 0.0);
}

TEST(RunExperiment, RecordsAreSeededAndSorted) {
  auto c = config(Algorithm::ucsc, "dataset3", 9);
  c.base_seed = 40;
  const auto r = run_experiment(c);
  for (std::size_t i = 0; i < r.records.size(); ++i) EXPECT_EQ(r.records[i].seed, 40 + i);
  c.threads = 1;
  const auto serial = run_experiment(c);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(r.records[i].best_score, serial.records[i].best_score);
    EXPECT_EQ(r.records[i].trace, serial.records[i].trace);
  }
}

TEST(RunExperiment, KMeansOnDataset2RarelyRepeats) {
  const auto r = run_experiment(config(Algorithm::kmeans, "dataset2", 100));
  EXPECT_LT(r.summary.repeat_rate, 0.8);
}

TEST(RunExperiment, UnknownNamesFailBeforeRunning) {
  EXPECT_THROW(algorithm_from_string("simulated_annealing"), ConfigError);
  EXPECT_THROW(run_experiment(config(Algorithm::ucsc, "no_such_dataset", 1)), std::exception);
  auto c = config(Algorithm::ucsc, "iris", 1);
  c.params.set("bogus", "1");
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = config(Algorithm::ucsc, "iris", 0);
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Summarize, RepeatRateBand) {
  std::vector<RunRecord> recs(4);
  const double scores[] = {100.0, 100.4, 100.6, 130.0};
  for (std::size_t i = 0; i < 4; ++i) {
    recs[i].seed = i;
    recs[i].best_score = scores[i];
  }
  const auto lo = summarize(recs, true);
  EXPECT_EQ(lo.best, 100.0);
  EXPECT_DOUBLE_EQ(lo.repeat_rate, 0.5);
  const auto hi = summarize(recs, false);
  EXPECT_EQ(hi.best, 130.0);
  EXPECT_EQ(hi.best_seed, 3u);
  EXPECT_DOUBLE_EQ(hi.repeat_rate, 0.25);
}

TEST(RunSweep, BetaOnDigitsNonIncreasing) {
  auto c = config(Algorithm::clonalg, "digits", 10);
  c.params.set("N", "10");
  c.params.set("n", "3");
  c.params.set("d", "0");
  c.params.set("rho", "4.8");
  c.params.set("epsilon", "1");
  c.sweep = SweepSpec{"beta", {"1", "5", "10", "15", "20"}};
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].mean_metric, rows[i - 1].mean_metric) << rows[i].value;
}

TEST(RunSweep, SingleValueEqualsExperimentMean) {
  auto c = config(Algorithm::ucsc, "dataset3", 5);
  c.sweep = SweepSpec{"beta", {"20"}};
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 1u);
  auto plain = c;
  plain.sweep.reset();
  plain.params.set("beta", "20");
  EXPECT_DOUBLE_EQ(rows[0].mean_metric, run_experiment(plain).summary.mean);
}

TEST(RunSweep, RhoHasInteriorPeak) {
  auto c = config(Algorithm::clonalg, "digits", 10);
  c.params.set("gen", "50");
  c.params.set("N", "10");
  c.params.set("n", "3");
  c.params.set("beta", "10");
  c.params.set("d", "0");
  c.sweep = SweepSpec{"rho", {"2", "4", "4.8", "6", "8"}};
  const auto rows = run_sweep(c, SweepMetric::score);
  ASSERT_EQ(rows.size(), 5u);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].mean_metric > rows[peak].mean_metric) peak = i;
  EXPECT_GT(peak, 0u);
  EXPECT_LT(peak, rows.size() - 1);
}

TEST(RunSweep, MissingSweepIsAnError) {
  EXPECT_THROW(run_sweep(config(Algorithm::ucsc, "iris", 1)), ConfigError);
}

TEST(Tables, PerfectClustering) {
  GaussianMixtureSpec spec{{{{0.0, 0.0}, {0.01, 0.01}, 20}, {{10.0, 10.0}, {0.01, 0.01}, 20}}};
  SeededRng rng(1);
  const auto truth = gen_gaussian_mixture(spec, rng, "blobs");
  const auto dir = scratch("perfect");
  write_csv((dir / "blobs.csv").string(), truth);
  auto c = config(Algorithm::ucsc, (dir / "blobs.csv").string(), 3);
  const auto r = run_experiment(c);
  const auto t = accuracy_table(r, truth);
  for (double pc : t.per_class) EXPECT_DOUBLE_EQ(pc, 100.0);
  EXPECT_DOUBLE_EQ(t.overall, 100.0);
}

TEST(Tables, GoldenTextLayout) {
  AccuracyTable t;
  t.classes = {"Setosa", "Versicolor", "Virginica"};
  t.per_class = {100.0, 96.0, 74.0};
  t.overall = 90.0;
  t.D = 97.2219;
  const std::string expected =
      "Class             Accuracy %\n"
      "Setosa                100.00\n"
      "Versicolor             96.00\n"
      "Virginica              74.00\n"
      "Overall accuracy       90.00\n"
      "D                     97.222\n";
  EXPECT_EQ(render_accuracy_text(t), expected);
}

TEST(Tables, MissingLabelsIsAnError) {
  const auto r = run_experiment(config(Algorithm::kmeans, "iris", 1));
  LabeledDataset unlabeled;
  unlabeled.points = {{1.0}};
  EXPECT_THROW(accuracy_table(r, unlabeled), ConfigError);
}

TEST(Outputs, ByteIdenticalAcrossReruns) {
  auto c = config(Algorithm::ucsc, "iris", 4);
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  const auto ra = run_experiment(c), rb = run_experiment(c);
  write_run_outputs(ra, a);
  write_run_outputs(rb, b);
  const auto truth = resolve_points(c);
  emit_tables(ra, truth, a);
  emit_tables(rb, truth, b);
  EXPECT_EQ(runs_without_time(a / "runs.csv"), runs_without_time(b / "runs.csv"));
  for (const char* f : {"summary.json", "trace_0.csv", "trace_3.csv", "table_accuracy.csv", "table_accuracy.txt",
                        "table_criterion.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Outputs, SummaryRecomputableFromRunsCsv) {
  auto c = config(Algorithm::kmeans, "dataset3", 12);
  const auto dir = scratch("recompute");
  const auto r = run_experiment(c);
  write_run_outputs(r, dir);
  std::istringstream in(slurp(dir / "runs.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "seed,generations_used,best_score,accuracy,wall_time");
  std::vector<double> scores;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    for (int i = 0; i < 3; ++i) std::getline(ss, field, ',');
    scores.push_back(std::stod(field));
  }
  ASSERT_EQ(scores.size(), 12u);
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= 12.0;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_NEAR(j["mean"].get<double>(), mean, 1e-9 * std::abs(mean));
  EXPECT_NEAR(j["std"].get<double>(), std::sqrt(var / 12.0), 1e-9 * std::abs(mean));
  EXPECT_DOUBLE_EQ(j["best"].get<double>(), *std::min_element(scores.begin(), scores.end()));
}
