#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace stochloc;

namespace {

// max over entries of |empirical - exact| / standard error.
double worst_z_mean(const std::vector<Vec>& xs, const Moments& m) {
  const auto s = moment_summary(xs);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.mean.size(); ++i) {
    if (s.mean_se[i] == 0.0) {
      if (std::abs(s.mean[i] - m.mean[i]) > 1e-12) return 1e9;
      continue;
    }
    worst = std::max(worst, std::abs(s.mean[i] - m.mean[i]) / s.mean_se[i]);
  }
  return worst;
}

double worst_z_cov(const std::vector<Vec>& xs, const Moments& m) {
  const auto s = moment_summary(xs);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.cov.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cov.cols(); ++j) {
      const double d = std::abs(s.cov(i, j) - m.cov(i, j));
      if (s.cov_se(i, j) == 0.0) {
        if (d > 1e-12) return 1e9;
        continue;
      }
      worst = std::max(worst, d / s.cov_se(i, j));
    }
  return worst;
}

std::vector<Vec> draw(const TargetDistribution& t, std::size_t N, std::uint64_t seed) {
  return run_chains(N, seed, [&](std::size_t, Rng& rng) { return sample_exact(t, rng); }, 1);
}

}  // namespace

TEST(Targets, DegenerateWeightAlwaysReturnsTheAtom) {
  const DiscreteTarget t({Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)}, {1.0, 0.0});
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_exact(t, rng)[0], 0.0);
}

TEST(Targets, MixtureWithZeroSeparationIsStandardNormal) {
  const TwoGaussianMixture mix(Vec::Zero(1), 0.5);
  const auto xs = draw(mix, 100000, 7);
  const auto s = moment_summary(xs);
  EXPECT_LT(std::abs(s.mean[0]) / s.mean_se[0], 4.0);
  EXPECT_LT(std::abs(s.cov(0, 0) - 1.0) / s.cov_se(0, 0), 4.0);
}

TEST(Targets, CirculantRankOneTotalVariance) {
  const int n = 64;
  const double alpha = 0.25;
  const auto c = CirculantGaussian::rank_one(n, alpha);
  Rng rng(11);
  const std::size_t N = 100000;
  std::vector<double> v(N);
  for (auto& s : v) {
    const Vec x = sample_exact(c, rng);
    const double sum = x.sum();
    s = sum * sum / n;
  }
  double mean = 0.0, ss = 0.0;
  for (double s : v) mean += s;
  mean /= N;
  for (double s : v) ss += (s - mean) * (s - mean);
  const double se = std::sqrt(ss / (N - 1) / N);
  EXPECT_LT(std::abs(mean - (alpha * n + 1.0)), 3.0 * se);
}

TEST(Targets, ExactMoments) {
  Rng rng(5);
  const TwoGaussianMixture mix(standard_normal(5, rng), 0.3);
  EXPECT_LT(moments(mix).mean.norm(), 1e-15);

  const auto circ = CirculantGaussian::rank_one(6, 0.4);
  const Mat expected = Mat::Identity(6, 6) + 0.4 * Mat::Ones(6, 6);
  EXPECT_LT((moments(circ).cov - expected).cwiseAbs().maxCoeff(), 1e-14);

  const HypercubeTarget uni(3, std::vector<double>(8, 0.125));
  const auto m = moments(uni);
  EXPECT_LT(m.mean.norm(), 1e-15);
  EXPECT_LT((m.cov - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Targets, SampleMomentsMatchExactForEveryVariant) {
  Rng rng(21);
  std::vector<std::pair<std::string, TargetDistribution>> variants;
  variants.emplace_back("discrete", DiscreteTarget({Vec::Constant(2, 1.0), Vec::Constant(2, -0.5), Vec::Unit(2, 0)},
                                                   {0.2, 0.5, 0.3}));
  variants.emplace_back("hypercube", HypercubeTarget(3, random_table(8, rng)));
  variants.emplace_back("qary", QaryTarget(2, 3, random_table(9, rng)));
  variants.emplace_back("mixture", TwoGaussianMixture(Vec::Constant(3, 1.5), 0.7));
  variants.emplace_back("circulant", CirculantGaussian::rank_one(8, 0.5));
  variants.emplace_back("gaussian", GaussianTarget(Vec::Constant(3, 0.5), random_spd(3, 0.5, 2.0, rng)));
  variants.emplace_back("nonnegative",
                        NonnegativeTarget(DiscreteTarget({Vec::Constant(2, 1.0), Vec::Constant(2, 3.0)}, {0.4, 0.6})));
  std::uint64_t seed = 100;
  for (const auto& [name, t] : variants) {
    const auto xs = draw(t, 100000, seed++);
    const auto m = moments(t);
    EXPECT_LT(worst_z_mean(xs, m), 4.0) << name;
    EXPECT_LT(worst_z_cov(xs, m), 4.5) << name;
  }
}

TEST(Targets, IndexRoundTrip) {
  Rng rng(1);
  const HypercubeTarget h(5, random_table(32, rng));
  for (std::size_t j = 0; j < h.size(); ++j) EXPECT_EQ(h.index(h.config(j)), j);
  EXPECT_EQ(h.config(0), std::vector<int>(5, 1));
  EXPECT_EQ(h.config(1), (std::vector<int>{1, 1, 1, 1, -1}));
  EXPECT_EQ(h.config(16), (std::vector<int>{-1, 1, 1, 1, 1}));

  const QaryTarget q(3, 4, random_table(64, rng));
  for (std::size_t j = 0; j < q.size(); ++j) EXPECT_EQ(q.index(q.config(j)), j);
  EXPECT_EQ(q.config(1), (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(q.config(16), (std::vector<int>{1, 0, 0}));
}

TEST(Targets, Validation) {
  EXPECT_THROW(HypercubeTarget(2, {0.5, 0.5, 0.1, 0.0}), ValidationError);
  EXPECT_THROW(HypercubeTarget(2, {0.5, 0.5, 0.0}), ValidationError);
  EXPECT_THROW(HypercubeTarget(2, {1.0 + 1e-9, 0.0, 0.0, 0.0}), ValidationError);
  EXPECT_NO_THROW(HypercubeTarget(2, {1.0 + 1e-13, 0.0, 0.0, 0.0}));
  EXPECT_THROW(DiscreteTarget({Vec::Ones(2), Vec::Ones(3)}, {0.5, 0.5}), ValidationError);
  EXPECT_THROW(QaryTarget(2, 1, {1.0}), ValidationError);
  EXPECT_THROW(TwoGaussianMixture(Vec::Ones(2), 1.5), ValidationError);
  EXPECT_THROW(NonnegativeTarget(DiscreteTarget({Vec::Constant(1, -1.0)}, {1.0})), ValidationError);
  EXPECT_THROW(CirculantGaussian::from_correlation({1.0, 2.0, 2.0}), ValidationError);
  EXPECT_THROW(CirculantGaussian::from_correlation({1.0, 0.5, 0.2}), ValidationError);
  Mat bad = Mat::Identity(2, 2);
  bad(0, 0) = -1.0;
  EXPECT_THROW(GaussianTarget{bad}, ValidationError);
}

TEST(Targets, GaussianFromCovarianceOnly) {
  const Mat S = 2.0 * Mat::Identity(3, 3);
  const GaussianTarget g(S);
  EXPECT_EQ(g.dim(), 3);
  EXPECT_EQ(g.mean(), Vec::Zero(3));
  EXPECT_LT((g.factor() * g.factor().transpose() - S).norm(), 1e-12);
}

TEST(Targets, CirculantSpectrumRoundTrip) {
  Rng rng(4);
  const auto c = oracle::random_circulant(10, rng);
  const auto a = CirculantGaussian::from_correlation(c);
  const auto b = CirculantGaussian::from_spectrum(a.spectrum());
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(a.c()[k], b.c()[k], 1e-12);
  EXPECT_LT((a.factor() * a.factor().transpose() - a.covariance()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Targets, RandomSpdHasRequestedSpectrum) {
  Rng rng(9);
  const Mat S = random_spd(8, 0.5, 2.0, rng);
  EXPECT_LT((S - S.transpose()).norm(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.5 - 1e-12);
  EXPECT_LE(es.eigenvalues().maxCoeff(), 2.0 + 1e-12);
}

TEST(Targets, SamplingIsReproducible) {
  Rng a(77), b(77);
  const auto t = CirculantGaussian::rank_one(16, 0.3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_exact(t, a), sample_exact(t, b));
}
