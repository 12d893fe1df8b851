#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ais/datasets.hpp"
#include "ais/partitional.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ais;

namespace {

LabeledDataset dataset2(std::uint64_t seed = 1) {
  SeededRng rng(seed);
  return gen_preset_mixture("dataset2", rng);
}

}  // namespace

TEST(CentroidAntibody, DecodesRowMajor) {
  const CentroidAntibody ab(RealVector{0.1, 2.0, 0.5, 3.0}, 2);
  ASSERT_EQ(ab.dim(), 2u);
  EXPECT_EQ(ab.centers(), (std::vector<RealVector>{{0.1, 2.0}, {0.5, 3.0}}));
}

TEST(CentroidAntibody, RejectsBadShape) {
  EXPECT_THROW(CentroidAntibody(RealVector{1, 2, 3}, 2), std::invalid_argument);
  EXPECT_THROW(CentroidAntibody(RealVector{1, 2}, 0), std::invalid_argument);
}

TEST(CriterionD, ZeroWhenPointsSitOnCenters) {
  const Dataset data{{0, 0}, {1, 1}, {0, 0}};
  EXPECT_EQ(criterion_D({{0, 0}, {1, 1}}, data), 0.0);
}

TEST(CriterionD, UnitSquareAroundOrigin) {
  const Dataset data{{-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}};
  EXPECT_NEAR(criterion_D({{0, 0}}, data), 4.0 * std::sqrt(2.0) / 2.0, 1e-12);
  EXPECT_NEAR(criterion_D({{0, 0}}, data), 2.8284, 1e-4);
}

TEST(UcscAffinity, SingleClusterUsesDataMean) {
  SeededRng rng(1);
  const auto data = ais::testing::gen_cloud(rng, 40, 3);
  const auto sol = ucsc_affinity(CentroidAntibody(RealVector{100, 100, 100}, 1), data);
  const auto oracle = ais::testing::two_pass_oracle({{100, 100, 100}}, data);
  EXPECT_FALSE(sol.rejected);
  EXPECT_GT(sol.affinity, 0.0);
  EXPECT_NEAR(sol.D, oracle.D, 1e-9);
  EXPECT_NEAR(sol.affinity, 1.0 / oracle.D, 1e-12);
}

TEST(UcscAffinity, EmptyClusterIsRejected) {
  const Dataset data{{0, 0}, {1, 0}, {0, 1}};
  const auto sol = ucsc_affinity(CentroidAntibody(RealVector{0.3, 0.3, 50, 50}, 2), data);
  EXPECT_TRUE(sol.rejected);
  EXPECT_EQ(sol.affinity, 0.0);
}

TEST(UcscAffinity, AntibodyIsNotOverwritten) {
  const auto ds = dataset2();
  const CentroidAntibody ab(RealVector{0.2, 0.2, 0.8, 0.8}, 2);
  const auto sol = ucsc_affinity(ab, ds.points);
  EXPECT_EQ(sol.antibody.flat(), ab.flat());
  EXPECT_NE(sol.refined_centroids, ab.centers());
}

TEST(UcscAffinity, MatchesTwoPassOracleOnDataset2) {
  const auto ds = dataset2();
  const auto b = search_bounds(ds.points);
  SeededRng rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto ab = random_antibody(b.upper, b.lower, 9, rng);
    const auto sol = ucsc_affinity(ab, ds.points);
    const auto oracle = ais::testing::two_pass_oracle(ab.centers(), ds.points);
    EXPECT_EQ(sol.rejected, oracle.empty);
    EXPECT_NEAR(sol.D, oracle.D, 1e-9);
  }
}

TEST(UcscAffinity, AffinityOrderReversesDOrder) {
  const auto ds = dataset2();
  const auto b = search_bounds(ds.points);
  SeededRng rng(3);
  std::vector<ClusterSolution> sols;
  while (sols.size() < 40) {
    auto s = ucsc_affinity(random_antibody(b.upper, b.lower, 3, rng), ds.points);
    if (!s.rejected) sols.push_back(std::move(s));
  }
  for (const auto& a : sols)
    for (const auto& c : sols) EXPECT_EQ(a.affinity > c.affinity, a.D < c.D);
}

TEST(SearchBounds, Examples) {
  const Dataset unit{{0, 1}, {1, 0}, {0.5, 0.5}};
  EXPECT_NEAR(search_bounds(unit).rho, 0.1, 1e-15);
  const auto single = search_bounds(Dataset{{2.0}});
  EXPECT_EQ(single.upper, single.lower);
  EXPECT_EQ(single.rho, 0.0);
  // rho spans the global attribute range, so one point with unequal
  // coordinates still has a positive step.
  const auto spread = search_bounds(Dataset{{2.0, -3.0}});
  EXPECT_EQ(spread.upper, spread.lower);
  EXPECT_DOUBLE_EQ(spread.rho, 0.5);

  SeededRng rng(4);
  const auto ds3 = gen_preset_mixture("dataset3", rng);
  double hi = -1e300, lo = 1e300;
  for (const auto& x : ds3.points)
    for (double v : x) {
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
  EXPECT_DOUBLE_EQ(search_bounds(ds3.points).rho, (hi - lo) / 10.0);
}

TEST(UcscMutate, ZeroRhoIsIdentity) {
  SeededRng rng(5);
  const CentroidAntibody ab(RealVector{1, 2, 3, 4}, 2);
  EXPECT_EQ(ucsc_mutate(ab, 0.3, 0.0, rng).flat(), ab.flat());
}

TEST(UcscMutate, DisplacementMoments) {
  // aff_norm = 0 gives step exactly rho; aff_norm = 1 shrinks it by e.
  for (double aff : {0.0, 1.0}) {
    const double rho = 0.7, alpha = rho * std::exp(-aff);
    SeededRng rng(6);
    const CentroidAntibody ab(RealVector{0.0, 0.0}, 1);
    const int n = 10000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = ucsc_mutate(ab, aff, rho, rng).flat()[0];
      s += x;
      s2 += x * x;
    }
    const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
    EXPECT_LE(std::abs(mean), 3.0 * alpha / std::sqrt(double(n)));
    EXPECT_NEAR(sd, alpha, 0.05 * alpha);
  }
}

TEST(RandomAntibody, DegenerateBoxGivesThePoint) {
  SeededRng rng(7);
  const RealVector p{1.5, -2.0};
  const auto ab = random_antibody(p, p, 3, rng);
  for (const auto& c : ab.centers()) EXPECT_EQ(c, p);
}

TEST(RandomAntibody, UnitBoxMomentsAndBounds) {
  SeededRng rng(8);
  const RealVector hi{1, 1, 1}, lo{0, 0, 0};
  RealVector sum(3, 0.0);
  for (int i = 0; i < 10000; ++i) {
    const auto ab = random_antibody(hi, lo, 1, rng);
    for (std::size_t d = 0; d < 3; ++d) {
      const double v = ab.flat()[d];
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      sum[d] += v;
    }
  }
  for (double s : sum) {
    EXPECT_GE(s / 10000, 0.48);
    EXPECT_LE(s / 10000, 0.52);
  }
}

TEST(RandomAntibody, RejectsInvertedBox) {
  SeededRng rng(9);
  EXPECT_THROW(random_antibody(RealVector{0.0}, RealVector{1.0}, 1, rng), std::invalid_argument);
}

TEST(UcscCluster, SingleClusterReachesGridOptimum) {
  SeededRng gen(10);
  const auto data = ais::testing::gen_cloud(gen, 60, 2);
  // The refined centroid for K=1 is the data mean regardless of the encoded
  // point, so the grid oracle bounds D from below over candidate centers.
  double grid_best = 1e300;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) grid_best = std::min(grid_best, criterion_D({{i / 200.0, j / 200.0}}, data));
  UcscParams p;
  p.clusters = 1;
  SeededRng rng(11);
  const auto res = ucsc_cluster(data, p, rng);
  EXPECT_LE(res.best.D, grid_best * 1.01);
}

TEST(UcscCluster, TraceIsNonDecreasing) {
  const auto ds = dataset2();
  UcscParams p;
  p.clusters = 9;
  p.generations = 30;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SeededRng rng(seed);
    const auto res = ucsc_cluster(ds.points, p, rng);
    ASSERT_EQ(res.best_affinity_trace.size(), 30u);
    for (std::size_t g = 1; g < res.best_affinity_trace.size(); ++g)
      EXPECT_GE(res.best_affinity_trace[g], res.best_affinity_trace[g - 1]);
    EXPECT_DOUBLE_EQ(res.best.affinity, res.best_affinity_trace.back());
  }
}

TEST(UcscCluster, Dataset2RepeatRateAtUnitBetaTwoReplacements) {
  const auto ds = dataset2();
  UcscParams p;
  p.population = 10;
  p.generations = 20;
  p.beta = 1.0;
  p.random_replacements = 2;
  p.clusters = 9;
  std::vector<double> D;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SeededRng rng(seed);
    D.push_back(ucsc_cluster(ds.points, p, rng).best.D);
  }
  const double best = *std::min_element(D.begin(), D.end());
  const auto hits = std::count_if(D.begin(), D.end(), [&](double d) { return d <= best * 1.005; });
  EXPECT_EQ(hits, 100);
}

TEST(UcscCluster, TooManyClusters) {
  UcscParams p;
  p.clusters = 4;
  SeededRng rng(12);
  EXPECT_THROW(ucsc_cluster(Dataset{{0.0}, {1.0}, {2.0}}, p, rng), std::invalid_argument);
}

TEST(KMeans, ConvergesImmediatelyOnDistinctPoints) {
  const Dataset data{{0, 0}, {5, 5}, {9, 1}};
  const auto r = kmeans(data, data, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.sse, 0.0);
  EXPECT_EQ(r.D, 0.0);
}

TEST(KMeans, SquaredErrorNeverIncreases) {
  const auto ds = dataset2();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SeededRng rng(seed);
    const auto r = kmeans(ds.points, 9, rng);
    for (std::size_t i = 1; i < r.sse_trace.size(); ++i) EXPECT_LE(r.sse_trace[i], r.sse_trace[i - 1] + 1e-12);
  }
}

TEST(KMeans, TooManyClusters) {
  SeededRng rng(13);
  EXPECT_THROW(kmeans(Dataset{{0.0}, {1.0}}, 3, rng), std::invalid_argument);
}

TEST(AlignAccuracy, IdentityAndPermutation) {
  const std::vector<std::size_t> truth{0, 0, 1, 1, 2, 2, 2};
  EXPECT_DOUBLE_EQ(align_accuracy(truth, truth, 3).overall, 100.0);
  std::vector<std::size_t> perm(truth.size());
  std::transform(truth.begin(), truth.end(), perm.begin(), [](std::size_t l) { return (l + 2) % 3; });
  const auto rep = align_accuracy(perm, truth, 3);
  EXPECT_DOUBLE_EQ(rep.overall, 100.0);
  for (double pc : rep.per_class) EXPECT_DOUBLE_EQ(pc, 100.0);
}

TEST(AlignAccuracy, OneMislabeledOfTen) {
  const std::vector<std::size_t> truth{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const std::vector<std::size_t> pred{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(align_accuracy(pred, truth, 2).overall, 90.0);
}

TEST(AlignAccuracy, InvariantUnderRandomRelabeling) {
  SeededRng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = ais::testing::gen_size(rng, 1, 6), n = ais::testing::gen_size(rng, 1, 60);
    std::vector<std::size_t> pred(n), truth(n), relabel(k);
    for (auto& v : pred) v = rng.below(k);
    for (auto& v : truth) v = rng.below(k);
    std::iota(relabel.begin(), relabel.end(), std::size_t{0});
    shuffle(relabel, rng);
    std::vector<std::size_t> moved(n);
    for (std::size_t j = 0; j < n; ++j) moved[j] = relabel[pred[j]];
    EXPECT_DOUBLE_EQ(align_accuracy(pred, truth, k).overall, align_accuracy(moved, truth, k).overall);
  }
}

TEST(AlignAccuracy, LengthMismatch) {
  const std::vector<std::size_t> a{0, 1}, b{0};
  EXPECT_THROW(align_accuracy(a, b, 2), std::invalid_argument);
}

TEST(Iris, UcscBeatsOrMatchesKMeansOnD) {
  const auto iris = load_iris(std::string(AIS_DATA_DIR) + "/iris.data");
  UcscParams p;
  p.clusters = 3;
  p.beta = 50.0;
  p.random_replacements = 0;
  double ucsc_best = 1e300, km_best = 1e300;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SeededRng a(seed), b(seed);
    ucsc_best = std::min(ucsc_best, ucsc_cluster(iris.points, p, a).best.D);
    km_best = std::min(km_best, kmeans(iris.points, 3, b).D);
  }
  EXPECT_LE(ucsc_best, km_best + 1e-9);
  EXPECT_NEAR(ucsc_best, 97.101, 0.3);
}
