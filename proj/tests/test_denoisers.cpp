#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace stochloc;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

DiscreteTarget two_point() { return DiscreteTarget({vec({-1.0}), vec({1.0})}, {0.5, 0.5}); }

}  // namespace

TEST(Bruteforce, NoInformationGivesPriorMean) {
  const DiscreteTarget t({vec({1, 0}), vec({0, 2}), vec({-1, -1})}, {0.2, 0.3, 0.5});
  const Vec m = bruteforce_posterior_mean_gaussian(t, Vec::Zero(2), 0.0);
  EXPECT_LT((m - moments(t).mean).norm(), 1e-15);
}

TEST(Bruteforce, SingleAtom) {
  const DiscreteTarget t({vec({0.3, -2.0})}, {1.0});
  for (double s : {0.0, 1.0, 100.0})
    EXPECT_EQ(bruteforce_posterior_mean_gaussian(t, vec({5.0, -7.0}), s), vec({0.3, -2.0}));
}

TEST(Bruteforce, TwoPointTilt) {
  EXPECT_NEAR(bruteforce_posterior_mean_gaussian(two_point(), vec({2.0}), 1.0)[0], std::tanh(2.0), 1e-15);
  EXPECT_NEAR(bruteforce_posterior_mean_gaussian(two_point(), vec({2.0}), 1.0)[0], 0.9640275800758169, 1e-12);
}

TEST(Bruteforce, RejectsBadInput) {
  EXPECT_THROW(bruteforce_posterior_mean_gaussian(two_point(), vec({std::nan("")}), 1.0), ValidationError);
  EXPECT_THROW(bruteforce_posterior_mean_gaussian(two_point(), vec({1.0, 2.0}), 1.0), ValidationError);
  EXPECT_THROW(bruteforce_posterior_mean_gaussian(two_point(), vec({1.0}), -1.0), DomainError);
}

TEST(Bruteforce, LargeTiltsStayFinite) {
  const DiscreteTarget t({vec({-30.0}), vec({30.0})}, {0.5, 0.5});
  EXPECT_NEAR(bruteforce_posterior_mean_gaussian(t, vec({1e4}), 1e3)[0], 30.0, 1e-12);
}

TEST(Bruteforce, OutputsInConvexHull) {
  // Triangle: barycentric coordinates of the posterior mean are nonnegative.
  const std::vector<Vec> atoms = {vec({0, 0}), vec({3, 0}), vec({0, 2})};
  const DiscreteTarget t(atoms, {0.2, 0.5, 0.3});
  Mat B(3, 3);
  for (int j = 0; j < 3; ++j) B.col(j) << atoms[j], 1.0;
  const auto lu = B.partialPivLu();
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double s = 10.0 * uniform01(rng);
    const Vec y = 5.0 * standard_normal(2, rng);
    Vec rhs(3);
    rhs << bruteforce_posterior_mean_gaussian(t, y, s), 1.0;
    EXPECT_GE(lu.solve(rhs).minCoeff(), -1e-12);
  }
}

TEST(Bruteforce, MartingaleProperty) {
  // E[m(Y_t2; t2) | Y_t1] = m(Y_t1; t1) by nested simulation from the posterior at t1.
  const DiscreteTarget t({vec({1, 0}), vec({-1, 1}), vec({0, -2}), vec({2, 2})}, {0.1, 0.4, 0.3, 0.2});
  const double t1 = 0.7, t2 = 2.5;
  Rng rng(12);
  const Vec y1 = t1 * t.atoms()[1] + std::sqrt(t1) * standard_normal(2, rng);
  std::vector<double> w(4);
  for (int j = 0; j < 4; ++j)
    w[j] = t.weights()[j] * std::exp(t.atoms()[j].dot(y1) - 0.5 * t1 * t.atoms()[j].squaredNorm());
  const std::size_t N = 100000;
  std::vector<Vec> ms(N);
  for (auto& m : ms) {
    const Vec& x = t.atoms()[sample_categorical(w, rng)];
    const Vec y2 = y1 + (t2 - t1) * x + std::sqrt(t2 - t1) * standard_normal(2, rng);
    m = bruteforce_posterior_mean_gaussian(t, y2, t2);
  }
  const auto s = moment_summary(ms);
  const Vec m1 = bruteforce_posterior_mean_gaussian(t, y1, t1);
  for (int i = 0; i < 2; ++i) EXPECT_LT(std::abs(s.mean[i] - m1[i]), 4.0 * s.mean_se[i]) << i;
}

TEST(Mixture, CenteringAndDegenerateCases) {
  const TwoGaussianMixture mix(vec({1.0, -2.0, 0.5}), 0.3);
  EXPECT_LT(mixture_posterior_mean(mix, Vec::Zero(3), 0.0).norm(), 1e-15);
  const TwoGaussianMixture one(vec({1.0, 1.0}), 1.0);
  const Vec y = vec({0.4, -1.2});
  EXPECT_EQ(mixture_posterior_mean(one, y, 2.0), y / 3.0);
  const TwoGaussianMixture flat(Vec::Zero(2), 0.4);
  EXPECT_EQ(mixture_posterior_mean(flat, y, 2.0), y / 3.0);
}

TEST(Mixture, MatchesGaussHermiteOracle) {
  const TwoGaussianMixture mix(vec({1.0, 1.0}), 0.3);
  const Vec y = vec({1.0, 0.0});
  const Vec ref = oracle::mixture_mean_2d(mix.mean_plus(), mix.mean_minus(), mix.p(), y, 1.0);
  EXPECT_LT((mixture_posterior_mean(mix, y, 1.0) - ref).cwiseAbs().maxCoeff(), 1e-6);
  // Frozen from the oracle.
  EXPECT_NEAR(ref[0], 0.533245776480555, 1e-10);
}

TEST(Mixture, StableForLargeSeparation) {
  const TwoGaussianMixture mix(Vec::Constant(10000, 1.0), 0.7);
  Rng rng(2);
  for (double t : {0.0, 1e-3, 1.0, 1e3}) {
    const Vec y = t * mix.mean_minus() + std::sqrt(t) * standard_normal(10000, rng);
    EXPECT_TRUE(mixture_posterior_mean(mix, y, t).allFinite());
    EXPECT_TRUE(mixture_posterior_mean(mix, Vec::Constant(10000, 50.0), t).allFinite());
  }
}

TEST(Mixture, AsymptoticsAwayFromWindow) {
  // Symmetric mixture: the window sits at <a,y> = 0.
  const TwoGaussianMixture half(Vec::Ones(4), 0.5);
  EXPECT_EQ(mixture_threshold(half, 3.0), 0.0);

  const int n = 128;
  const TwoGaussianMixture mix(Vec::Ones(n), 0.7);
  const double t = 1.0;
  const Vec y = Vec::Constant(n, 0.5);  // s = 0.5, threshold = -0.2
  const Vec lim = mixture_denoiser_asymptotics(mix, y, t, 0.2);
  EXPECT_LT((lim - mixture_posterior_mean(mix, y, t)).norm(), 10.0 / n);
  EXPECT_THROW(mixture_denoiser_asymptotics(mix, Vec::Constant(n, -0.2), t, 0.2), DomainError);
}

TEST(Mixture, AsymptoticBoundHoldsOnRandomQueries) {
  const int n = 512;
  const double p = 0.7, delta = 0.2;
  const TwoGaussianMixture mix(Vec::Ones(n), p);
  Rng rng(31);
  const Vec u = Vec::Ones(n) / std::sqrt(double(n));
  for (double t : {0.5, 2.0, 10.0}) {
    const double thr = mixture_threshold(mix, t);
    const double bound = mixture_asymptotic_bound(mix, t, delta);
    for (int side : {1, -1})
      for (int i = 0; i < 100; ++i) {
        Vec g = standard_normal(n, rng);
        g -= g.dot(u) * u;
        const double s = thr + side * (delta + 2.0 * uniform01(rng));
        const Vec y = s * Vec::Ones(n) + g;
        const Vec diff = mixture_denoiser_asymptotics(mix, y, t, delta) - mixture_posterior_mean(mix, y, t);
        EXPECT_LE(diff.norm(), bound * (1.0 + 1e-9) + 1e-12) << "t=" << t << " side=" << side;
      }
  }
}

TEST(GaussianPosterior, ScalarAndDiagonal) {
  EXPECT_LT((gaussian_posterior_mean(Mat::Identity(2, 2), vec({2, -2}), 1.0) - vec({1, -1})).norm(), 1e-15);
  const Vec lam = vec({0.5, 2.0, 3.0});
  const Vec y = vec({1.0, -1.0, 4.0});
  const Vec m = gaussian_posterior_mean(lam.asDiagonal(), y, 2.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(m[i], lam[i] * y[i] / (1.0 + 2.0 * lam[i]), 1e-15);
  EXPECT_LT((LinearGaussianDenoiser(lam.asDiagonal())(y, 2.0) - m).norm(), 1e-14);
}

TEST(GaussianPosterior, MatchesRegressionOracle) {
  // E[x | y] = B y; B estimated by least squares over 20 batches of 5e4 draws.
  Rng rng(17);
  const Mat S = random_spd(3, 0.5, 2.0, rng);
  const GaussianTarget g(S);
  const double t = 2.0;
  const int batches = 20, per = 50000;
  std::vector<Mat> Bs;
  for (int b = 0; b < batches; ++b) {
    Mat Sxy = Mat::Zero(3, 3), Syy = Mat::Zero(3, 3);
    for (int i = 0; i < per; ++i) {
      const Vec x = sample_exact(g, rng);
      const Vec y = t * x + std::sqrt(t) * standard_normal(3, rng);
      Sxy += x * y.transpose();
      Syy += y * y.transpose();
    }
    Bs.push_back(Sxy * Syy.inverse());
  }
  Mat mean = Mat::Zero(3, 3), sq = Mat::Zero(3, 3);
  for (const auto& B : Bs) mean += B / batches;
  for (const auto& B : Bs) sq += (B - mean).cwiseProduct(B - mean) / (batches - 1);
  const Mat se = (sq / batches).cwiseSqrt();
  Mat B = Mat::Zero(3, 3);
  for (int j = 0; j < 3; ++j) B.col(j) = gaussian_posterior_mean(S, Vec::Unit(3, j), t);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_LT(std::abs(B(i, j) - mean(i, j)), 4.0 * se(i, j)) << i << "," << j;
}

TEST(Anisotropic, IsotropicSpecialization) {
  const DiscreteTarget t({vec({1, 0}), vec({-1, 1}), vec({0, -2})}, {0.2, 0.5, 0.3});
  const Vec y = vec({0.3, 1.7});
  const Vec iso = bruteforce_posterior_mean_gaussian(t, y, 1.5);
  EXPECT_LT((anisotropic_posterior_mean(t, y, ChannelPrecision::matrix(1.5 * Mat::Identity(2, 2))) - iso).norm(), 1e-13);
  EXPECT_EQ(anisotropic_posterior_mean(t, y, ChannelPrecision::scalar(1.5)), iso);
  EXPECT_LT((anisotropic_posterior_mean(t, Vec::Zero(2), ChannelPrecision::matrix(Mat::Zero(2, 2))) -
             moments(t).mean).norm(), 1e-15);
}

TEST(Anisotropic, SingularPrecisionConditionsOnTheObservedCoordinate) {
  // Atoms differ in both coordinates; only coordinate 1 is observed.
  const std::vector<Vec> atoms = {vec({1, 5}), vec({-1, -3}), vec({1, 2})};
  const std::vector<double> w = {0.2, 0.5, 0.3};
  const DiscreteTarget t(atoms, w);
  const double s = 2.0, y1 = 0.8;
  Mat omega = Mat::Zero(2, 2);
  omega(0, 0) = s;
  std::vector<double> lik;
  for (const auto& a : atoms) lik.push_back(std::exp(a[0] * y1 - 0.5 * s * a[0] * a[0]));
  const Vec ref = oracle::bayes_mean(atoms, w, lik);
  EXPECT_LT((anisotropic_posterior_mean(t, vec({y1, 0.0}), ChannelPrecision::matrix(omega)) - ref).norm(), 1e-14);
  EXPECT_THROW(anisotropic_posterior_mean(t, vec({y1, 0.5}), ChannelPrecision::matrix(omega)), InconsistentObservation);
}

TEST(Anisotropic, GaussianTargetMatchesJointConditioning) {
  Rng rng(41);
  const Mat S = random_spd(4, 0.5, 2.0, rng);
  const Vec mu = standard_normal(4, rng);
  const GaussianTarget g(mu, S);
  const Mat R = random_spd(4, 0.1, 3.0, rng);
  const Vec y = standard_normal(4, rng);
  const Vec ref = oracle::gaussian_conditional_mean(mu, S, R, y);
  EXPECT_LT((anisotropic_posterior_mean(g, y, ChannelPrecision::matrix(R)) - ref).norm(), 1e-10);
  const Vec iso = oracle::gaussian_conditional_mean(mu, S, 0.7 * Mat::Identity(4, 4), y);
  EXPECT_LT((exact_denoiser(g)(y, 0.7) - iso).norm(), 1e-10);
}

TEST(Windowed, ScalarWindow) {
  const double alpha = 0.3, t = 2.0;
  const auto c = CirculantGaussian::rank_one(9, alpha).c();
  const auto k = windowed_denoiser_solve(c, 0, t);
  EXPECT_NEAR(k.coeffs[0], (1 + alpha) / (1 + (1 + alpha) * t), 1e-15);
}

TEST(Windowed, ZeroTimeReproducesCorrelation) {
  Rng rng(3);
  const auto c = oracle::random_circulant(20, rng);
  const auto k = windowed_denoiser_solve(c, 4, 0.0);
  const auto kc = windowed_denoiser_closed_form(window_spectrum(c, 4), 4, 0.0);
  for (int u = 0; u <= 4; ++u) {
    EXPECT_NEAR(k.coeffs[u], c[u], 1e-12);
    EXPECT_NEAR(kc.coeffs[u], c[u], 1e-12);
  }
}

TEST(Windowed, RankOneExplicitValues) {
  const int n = 40;
  for (double alpha : {0.1, 0.25, 2.0})
    for (int r : {0, 1, 3, 8})
      for (double t : {0.1, 1.0, 10.0}) {
        const auto c = CirculantGaussian::rank_one(n, alpha).c();
        const double b = 1.0 + (2 * r + 1) * alpha;
        const double off = alpha / ((1 + t) * (1 + b * t));
        const auto k = windowed_denoiser_solve(c, r, t);
        EXPECT_NEAR(k.coeffs[0], 1.0 / (1 + t) + off, 1e-12);
        for (int j = 1; j <= r; ++j) EXPECT_NEAR(k.coeffs[j], off, 1e-12);
      }
}

TEST(Windowed, ClosedFormAgreesWithSolveAndResidualIsSmall) {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 17 + trial;
    const auto c = oracle::random_circulant(n, rng);
    const int r = trial % 9;
    const auto ws = window_spectrum(c, r);
    for (double t : {0.1, 1.0, 10.0}) {
      const auto a = windowed_denoiser_solve(c, r, t);
      const auto b = windowed_denoiser_closed_form(ws, r, t);
      EXPECT_LE(oracle::window_residual(c, a.coeffs, r, t), 1e-10);
      EXPECT_LE(windowed_residual(c, a, t), 1e-10);
      for (int u = 0; u <= r; ++u) EXPECT_NEAR(a.coeffs[u], b.coeffs[u], 1e-10);
    }
  }
}

TEST(Windowed, DecaysForLargeTime) {
  Rng rng(5);
  const auto c = oracle::random_circulant(12, rng);
  const auto k = windowed_denoiser_closed_form(window_spectrum(c, 3), 3, 1e9);
  for (double v : k.coeffs) EXPECT_LT(std::abs(v), 1e-8);
}

TEST(Windowed, ApplyIsCircularConvolution) {
  ConvKernel k{1, 5, {0.5, 0.25}};
  const Vec y = vec({1, 0, 0, 0, 2});
  const Vec out = k.apply(y);
  // out_i = 0.5 y_i + 0.25 (y_{i-1} + y_{i+1})
  EXPECT_LT((out - vec({0.5 + 0.5, 0.25, 0, 0.5, 1.0 + 0.25})).norm(), 1e-15);
  EXPECT_LT((k.as_matrix() * y - out).norm(), 1e-15);
}

TEST(Windowed, RejectsOversizedWindow) {
  EXPECT_THROW(windowed_denoiser_solve(std::vector<double>(5, 0.1), 3, 1.0), ValidationError);
}

TEST(FitLinear, ConvergesToPopulationSolution) {
  const int n = 64, r = 3;
  const auto target = CirculantGaussian::rank_one(n, 0.25);
  Rng rng(6);
  std::vector<Vec> xs(10000);
  for (auto& x : xs) x = sample_exact(target, rng);
  for (double t : {0.5, 5.0}) {
    const auto fit = fit_linear_denoiser(xs, r, t);
    const auto pop = windowed_denoiser_solve(target.c(), r, t);
    for (int u = 0; u <= r; ++u) EXPECT_LT(std::abs(fit.coeffs[u] - pop.coeffs[u]), 0.05);
  }
}

TEST(FitLinear, ZeroDataGivesZeroKernel) {
  const std::vector<Vec> xs(10, Vec::Zero(8));
  const auto k = fit_linear_denoiser(xs, 2, 1.0);
  for (double v : k.coeffs) EXPECT_EQ(v, 0.0);
}

TEST(FitLinear, SingleFrequencyIsScalarShrinkage) {
  // x_i = a cos(q i): empirical c(k) = sigma cos(q k) with sigma = mean(a^2)/2, so l(u) = beta cos(q u) with
  // beta = sigma/(1 + t sigma S), S = sum_{|v|<=r} cos(q v)^2, and l * x = (sigma S/(1 + t sigma S)) x.
  const int n = 32, r = 3, j = 3;
  const double q = 2.0 * std::numbers::pi * j / n, t = 1.5;
  Rng rng(4);
  std::vector<Vec> xs(50);
  double a2 = 0.0;
  for (auto& x : xs) {
    const double a = 1.0 + uniform01(rng);
    a2 += a * a / xs.size();
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = a * std::cos(q * i);
  }
  const double sigma = a2 / 2.0;
  double S = 0.0;
  for (int v = -r; v <= r; ++v) S += std::cos(q * v) * std::cos(q * v);
  const auto k = fit_linear_denoiser(xs, r, t);
  const double shrink = sigma * S / (1.0 + t * sigma * S);
  EXPECT_LT((k.apply(xs[0]) - shrink * xs[0]).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Binary, UniformTargetGivesScaledObservation) {
  const HypercubeTarget h(4, std::vector<double>(16, 1.0 / 16));
  const std::vector<int> y = {1, -1, -1, 1};
  const Vec m = binary_posterior_magnetization(h, y, 0.6);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(m[i], 0.6 * y[i], 1e-15);
}

TEST(Binary, PriorAndPointMass) {
  Rng rng(1);
  const HypercubeTarget h(3, random_table(8, rng));
  const std::vector<int> y = {1, 1, -1};
  EXPECT_LT((binary_posterior_magnetization(h, y, 0.0) - moments(h).mean).norm(), 1e-15);
  std::vector<double> pm(8, 0.0);
  pm[5] = 1.0;
  const HypercubeTarget d(3, pm);
  for (double t : {0.0, 0.5, 0.99}) EXPECT_EQ(binary_posterior_magnetization(d, y, t), d.point(5));
  EXPECT_THROW(binary_posterior_magnetization(d, y, 1.0), InconsistentObservation);
}

TEST(Binary, MatchesEnumerationOracle) {
  Rng rng(2);
  const HypercubeTarget h(4, random_table(16, rng));
  for (double t : {0.05, 0.4, 0.9, 0.999})
    for (std::size_t j = 0; j < 16; ++j) {
      const auto y = h.config(j);
      EXPECT_LT((binary_posterior_magnetization(h, y, t) - oracle::binary_magnetization(h.table(), 4, y, t))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-13);
    }
}

TEST(Qary, MatchesEnumerationOracleAndRowsSumToOne) {
  Rng rng(3);
  const QaryTarget q(2, 3, random_table(9, rng));
  for (double t : {0.0, 0.3, 0.95})
    for (std::size_t j = 0; j < 9; ++j) {
      const auto y = q.config(j);
      const Mat b = qary_posterior_belief(q, y, t);
      EXPECT_LT((b - oracle::qary_beliefs(q.table(), 2, 3, y, t)).cwiseAbs().maxCoeff(), 1e-12);
      for (int i = 0; i < 2; ++i) EXPECT_NEAR(b.row(i).sum(), 1.0, 1e-10);
    }
}

TEST(Qary, PriorMarginalsAtZeroTime) {
  Rng rng(4);
  const QaryTarget q(2, 3, random_table(9, rng));
  const Mat b = qary_posterior_belief(q, std::vector<int>{2, 0}, 0.0);
  Mat marg = Mat::Zero(2, 3);
  for (std::size_t j = 0; j < 9; ++j) {
    const auto d = q.config(j);
    for (int i = 0; i < 2; ++i) marg(i, d[i]) += q.table()[j];
  }
  EXPECT_LT((b - marg).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Qary, BinaryAlphabetMatchesMagnetization) {
  Rng rng(5);
  const auto table = random_table(8, rng);
  const HypercubeTarget h(3, table);
  const QaryTarget q(3, 2, table);  // symbol 0 <-> +1, symbol 1 <-> -1
  const std::vector<int> spins = {1, -1, -1};
  const std::vector<int> syms = {0, 1, 1};
  for (double t : {0.2, 0.7}) {
    const Mat b = qary_posterior_belief(q, syms, t);
    const Vec m = binary_posterior_magnetization(h, spins, t);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(b(i, 0) - b(i, 1), m[i], 1e-14);
  }
}

TEST(Poisson, PriorSingleAtomAndHandBayes) {
  const NonnegativeTarget two(DiscreteTarget({vec({1.0}), vec({2.0})}, {0.5, 0.5}));
  EXPECT_NEAR(poisson_posterior_mean(two, std::vector<int>{0}, 0.0)[0], 1.5, 1e-15);
  // Weights 1^2 e^-1 and 2^2 e^-2.
  const double w1 = std::exp(-1.0), w2 = 4.0 * std::exp(-2.0);
  EXPECT_NEAR(poisson_posterior_mean(two, std::vector<int>{2}, 1.0)[0], (w1 + 2.0 * w2) / (w1 + w2), 1e-14);
  const NonnegativeTarget one(DiscreteTarget({vec({0.7, 3.0})}, {1.0}));
  EXPECT_EQ(poisson_posterior_mean(one, std::vector<int>{4, 1}, 2.0), vec({0.7, 3.0}));
}

TEST(Poisson, ZeroRateAtomsAndInconsistentCounts) {
  const NonnegativeTarget t(DiscreteTarget({vec({0.0}), vec({2.0})}, {0.9, 0.1}));
  EXPECT_EQ(poisson_posterior_mean(t, std::vector<int>{1}, 1.0)[0], 2.0);
  const NonnegativeTarget z(DiscreteTarget({vec({0.0})}, {1.0}));
  EXPECT_THROW(poisson_posterior_mean(z, std::vector<int>{1}, 1.0), InconsistentObservation);
  EXPECT_EQ(poisson_posterior_mean(z, std::vector<int>{0}, 1.0)[0], 0.0);
}

TEST(LinearObservation, Reductions) {
  const DiscreteTarget t({vec({1, 0}), vec({-1, 1}), vec({0, -2})}, {0.2, 0.5, 0.3});
  const Vec y = vec({0.3, -0.4});
  EXPECT_LT((linear_obs_bruteforce_mean(t, Mat::Identity(2, 2), y, 1.2) - bruteforce_posterior_mean_gaussian(t, y, 1.2))
                .norm(),
            1e-15);
  EXPECT_LT(linear_obs_bruteforce_mean(t, Mat::Zero(3, 2), Vec::Ones(3), 1.2).norm(), 1e-15);
}

TEST(LinearObservation, RowVectorDependsOnTheScalarObservation) {
  const std::vector<Vec> atoms = {vec({1, 2}), vec({-1, 0.5})};
  const DiscreteTarget t(atoms, {0.4, 0.6});
  Mat A(1, 2);
  A << 1.0, 1.0;
  const double s = 0.8, y = 1.3;
  // 1-D problem in z = x1 + x2 with atoms 3 and -0.5.
  const double l1 = 0.4 * std::exp(3.0 * y - 0.5 * s * 9.0), l2 = 0.6 * std::exp(-0.5 * y - 0.5 * s * 0.25);
  EXPECT_NEAR(linear_obs_bruteforce_mean(t, A, vec({y}), s)[0], (3.0 * l1 - 0.5 * l2) / (l1 + l2), 1e-14);
}

TEST(GuessDrift, TrivialCases) {
  EXPECT_EQ(linear_obs_guess_drift(0.0, Vec::Zero(4), 0.0, 0.2, 2.0), Vec::Zero(5));
  const Vec ys = vec({1, -2, 3});
  const Vec m = linear_obs_guess_drift(0.7, ys, 2.0, 0.0, 2.0);
  EXPECT_EQ(m[0], 0.0);
  EXPECT_LT((m.tail(3) - ys / 3.0).norm(), 1e-15);
}

TEST(GuessDrift, CloseToExactPosteriorAtLargeTime) {
  // For y drawn from the model, the shared-component guess is close to joint-Gaussian conditioning.
  const int n = 32;
  const double alpha = 0.2, b = 2.0, t = 50.0;
  const Mat L = mean_augmented_operator(n, b);
  const Mat S = Mat::Identity(n, n) + alpha * Mat::Ones(n, n);
  const GaussianTarget g(S);
  const Mat Czy = t * L * S * L.transpose();
  const auto solve = (t * t * L * S * L.transpose() + t * Mat::Identity(n + 1, n + 1)).ldlt();
  Rng rng(71);
  double ss = 0.0, worst0 = 0.0;
  const int reps = 200;
  const double v = b * b * (alpha + 1.0 / n);  // Var z0
  for (int i = 0; i < reps; ++i) {
    const Vec x = sample_exact(g, rng);
    const Vec y = t * L * x + std::sqrt(t) * standard_normal(n + 1, rng);
    const Vec exact = Czy * solve.solve(y);
    const Vec guess = linear_obs_guess_drift(y[0], y.tail(n), t, alpha, b);
    ss += (guess - exact).tail(n).squaredNorm() / n;
    // m0 is the Bayes estimate of z0 from y0 alone, up to the 1/n term in Var z0.
    worst0 = std::max(worst0, std::abs(guess[0] - v * y[0] / (1.0 + v * t)) / (1.0 + std::abs(y[0]) / t));
  }
  EXPECT_LT(std::sqrt(ss / reps), 0.02);
  EXPECT_LT(worst0, 1.0 / n);
}

TEST(Operators, Shapes) {
  const Mat L = mean_augmented_operator(8, 2.0);
  EXPECT_EQ(L.rows(), 9);
  EXPECT_NEAR(L.row(0).sum(), 2.0, 1e-15);
  const Mat C = channel_average_operator(3, 4, 2.0);
  EXPECT_EQ(C.rows(), 15);
  EXPECT_EQ(C.cols(), 12);
  EXPECT_NEAR(C.row(12).segment(0, 4).sum(), 2.0, 1e-15);
  EXPECT_EQ(C.row(12).segment(4, 8).norm(), 0.0);
}
