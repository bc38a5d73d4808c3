#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace stochloc;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Law of Y_t under binary symmetric noising of mu: each coordinate kept with prob (1+t)/2.
std::vector<double> binary_noised_law(const HypercubeTarget& h, double t) {
  std::vector<double> law(h.size(), 0.0);
  for (std::size_t y = 0; y < h.size(); ++y)
    for (std::size_t x = 0; x < h.size(); ++x) {
      double p = h.table()[x];
      for (int i = 0; i < h.n(); ++i) p *= 0.5 * (1.0 + t * h.spin(x, i) * h.spin(y, i));
      law[y] += p;
    }
  return law;
}

std::size_t nearest_atom(const std::vector<Vec>& atoms, const Vec& x) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < atoms.size(); ++j)
    if ((atoms[j] - x).squaredNorm() < (atoms[best] - x).squaredNorm()) best = j;
  return best;
}

}  // namespace

TEST(Erasure, SingleCoordinateIsACategoricalDraw) {
  const DiscreteTarget t({vec({0.0}), vec({1.0}), vec({5.0})}, {0.2, 0.5, 0.3});
  std::vector<std::size_t> idx;
  Rng rng(1);
  for (int i = 0; i < 50000; ++i) idx.push_back(simulate_erasure_index(t, RevealOrder::uniform_random_times(), rng));
  EXPECT_LT(oracle::tv(oracle::frequencies(idx, 3), t.weights()), 0.01);
}

TEST(Erasure, ExactForAnyOrder) {
  Rng rng(2);
  const HypercubeTarget h(3, random_table(8, rng));
  for (const auto& order : {RevealOrder::fixed({0, 1, 2}), RevealOrder::fixed({2, 0, 1}),
                            RevealOrder::uniform_random_times()}) {
    std::vector<std::size_t> idx;
    for (int i = 0; i < 100000; ++i) idx.push_back(simulate_erasure_index(h, order, rng));
    EXPECT_LE(oracle::tv(oracle::frequencies(idx, 8), h.table()), 0.01);
  }
}

TEST(Erasure, ProductMeasureAndZeroWeights) {
  // Independent fair bits: every coordinate is a fair coin whatever the order.
  const HypercubeTarget h(3, std::vector<double>(8, 0.125));
  Rng rng(3);
  std::vector<double> plus(3, 0.0);
  const int N = 40000;
  for (int i = 0; i < N; ++i) {
    const Vec x = simulate_erasure(h, RevealOrder::fixed({1, 2, 0}), rng);
    for (int c = 0; c < 3; ++c) plus[c] += (x[c] > 0) / double(N);
  }
  for (double p : plus) EXPECT_NEAR(p, 0.5, 4.0 * 0.5 / std::sqrt(N));

  // atoms of zero weight are never produced
  const QaryTarget q(2, 3, {0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0});
  for (int i = 0; i < 1000; ++i) {
    const auto j = simulate_erasure_index(q, RevealOrder::uniform_random_times(), rng);
    EXPECT_TRUE(j == 1 || j == 6);
  }
}

TEST(Erasure, RejectsBadOrder) {
  EXPECT_THROW(RevealOrder::fixed({0, 0, 1}), ValidationError);
  const HypercubeTarget h(3, std::vector<double>(8, 0.125));
  Rng rng(1);
  EXPECT_THROW(simulate_erasure_index(h, RevealOrder::fixed({0, 1}), rng), ValidationError);
}

TEST(SymmetricNoise, EndpointsAndCorrelation) {
  const std::vector<int> x = {1, -1, 1, 1};
  Rng rng(4);
  const int N = 100000;
  double corr_half = 0.0, corr_small = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto path = forward_binary_noise(x, rng);
    EXPECT_EQ(path.at(1.0), x);
    const auto y = path.at(0.5);
    corr_half += y[0] * x[0];
    corr_small += path.at(1e-4)[1] * x[1];
  }
  corr_half /= N;
  corr_small /= N;
  EXPECT_LT(std::abs(corr_half - 0.5) / std::sqrt((1 - 0.25) / N), 4.0);
  EXPECT_LT(std::abs(corr_small - 1e-4) / std::sqrt(1.0 / N), 4.0);
}

TEST(SymmetricNoise, QaryKeepsSymbolWithTheRightProbability) {
  const std::vector<int> x = {2, 0};
  const int q = 3, N = 100000;
  Rng rng(5);
  for (double t : {0.2, 0.7}) {
    double same = 0.0;
    for (int i = 0; i < N; ++i) same += forward_qary_noise(x, q, rng).at(t)[0] == 2;
    same /= N;
    const double p = t + (1 - t) / q;
    EXPECT_LT(std::abs(same - p) / std::sqrt(p * (1 - p) / N), 4.0) << t;
  }
  EXPECT_THROW(forward_qary_noise(std::vector<int>{3}, q, rng), ValidationError);
  EXPECT_THROW(forward_binary_noise(std::vector<int>{0}, rng), ValidationError);
}

TEST(BinarySymmetric, UniformTargetRates) {
  const HypercubeTarget uni(3, std::vector<double>(8, 0.125));
  const auto den = exact_magnetization_denoiser(uni);
  for (double t : {0.05, 0.3, 0.9})
    for (std::size_t j = 0; j < 8; ++j) {
      std::vector<int> y(3);
      for (int i = 0; i < 3; ++i) y[i] = uni.spin(j, i);
      const Vec p = binary_rates(y, den(y, t), t);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], 1.0 / (2.0 * t), 1e-12);
    }
}

TEST(BinarySymmetric, NegativeRatesAreRejected) {
  const std::vector<int> y = {1};
  EXPECT_THROW(binary_rates(y, vec({1.5}), 0.5), InternalConsistencyError);
  // |m| <= 1 keeps every rate nonnegative
  for (double t : {0.01, 0.5, 0.99}) EXPECT_GE(binary_rates(y, vec({1.0}), t)[0], 0.0);
}

TEST(BinarySymmetric, PointMassIsReached) {
  std::vector<double> table(16, 0.0);
  table[5] = 1.0;
  const HypercubeTarget h(4, table);
  const auto den = exact_magnetization_denoiser(h);
  const auto grid = TimeGrid::arcsin(300, 1e-3, 0.999);
  Rng rng(6);
  int agree = 0, total = 0;
  for (int c = 0; c < 200; ++c) {
    const auto r = simulate_binary_symmetric(den, 4, grid, rng);
    for (int i = 0; i < 4; ++i) {
      agree += r.y_final[i] == h.spin(5, i);
      ++total;
      EXPECT_EQ(r.output[i], h.spin(5, i));
    }
  }
  EXPECT_GE(double(agree) / total, 0.99);
}

TEST(BinarySymmetric, ReproducesTheTarget) {
  Rng rng(7);
  const HypercubeTarget h(3, random_table(8, rng));
  const auto den = exact_magnetization_denoiser(h);
  const auto grid = TimeGrid::arcsin(300, 1e-3, 0.999);
  const std::size_t N = 20000;
  const std::vector<double> at = {0.5};
  const auto runs = run_chains(
      N, 70, [&](std::size_t, Rng& r) { return simulate_binary_symmetric(den, 3, grid, r, {}, at); }, 1);
  std::vector<std::size_t> out, mid;
  double t_mid = 0.0;
  for (const auto& r : runs) {
    std::vector<int> o(r.output.begin(), r.output.end());
    out.push_back(h.index(o));
    mid.push_back(h.index(r.snapshots.at(0).second));
    t_mid = r.snapshots.at(0).first;
  }
  EXPECT_LE(oracle::tv(oracle::frequencies(out, 8), h.table()), 3.0 * std::sqrt(8.0 / N));
  // forward/backward consistency at an interior time
  EXPECT_LE(oracle::tv(oracle::frequencies(mid, 8), binary_noised_law(h, t_mid)), 0.02);
}

TEST(BinarySymmetric, ForwardNoiseMatchesNoisedLaw) {
  Rng rng(8);
  const HypercubeTarget h(3, random_table(8, rng));
  std::vector<std::size_t> idx;
  for (int i = 0; i < 100000; ++i) {
    const auto j = sample_index(h, rng);
    std::vector<int> x(3);
    for (int c = 0; c < 3; ++c) x[c] = h.spin(j, c);
    idx.push_back(h.index(forward_binary_noise(x, rng).at(0.4)));
  }
  EXPECT_LE(oracle::tv(oracle::frequencies(idx, 8), binary_noised_law(h, 0.4)), 0.01);
}

TEST(Qary, UniformTargetRatesAreFlat) {
  const int q = 4;
  const QaryTarget uni(2, q, std::vector<double>(16, 1.0 / 16));
  const auto den = exact_belief_denoiser(uni);
  for (double t : {0.1, 0.6}) {
    const std::vector<int> y = {3, 1};
    const Mat p = qary_rates(y, den(y, t), t);
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(p(i, y[i]), 0.0);
      EXPECT_NEAR(p.row(i).sum(), (q - 1) / (q * t), 1e-12);
      for (int z = 0; z < q; ++z)
        if (z != y[i]) EXPECT_NEAR(p(i, z), 1.0 / (q * t), 1e-12);
    }
  }
}

TEST(Qary, ReproducesTheTarget) {
  Rng rng(9);
  const QaryTarget target(2, 3, random_table(9, rng));
  const auto den = exact_belief_denoiser(target);
  const auto grid = TimeGrid::arcsin(300, 1e-3, 0.999);
  const std::size_t N = 20000;
  const auto idx = run_chains(
      N, 90,
      [&](std::size_t, Rng& r) {
        const auto res = simulate_qary_symmetric(den, 3, 2, grid, r);
        return target.index(res.output);
      },
      1);
  EXPECT_LE(oracle::tv(oracle::frequencies(idx, 9), target.table()), 3.0 * std::sqrt(9.0 / N));
}

TEST(Qary, TwoSymbolsMatchBinaryChain) {
  Rng rng(10);
  const auto table = random_table(4, rng);
  const QaryTarget q2(2, 2, table);
  const HypercubeTarget h(2, table);  // symbol 0 <-> +1, 1 <-> -1 under the shared lexicographic layout
  const auto grid = TimeGrid::arcsin(200, 1e-3, 0.999);
  const std::size_t N = 20000;
  const auto a = run_chains(
      N, 1, [&](std::size_t, Rng& r) { return q2.index(simulate_qary_symmetric(exact_belief_denoiser(q2), 2, 2, grid, r).output); }, 1);
  const auto b = run_chains(
      N, 2,
      [&](std::size_t, Rng& r) {
        return h.index(simulate_binary_symmetric(exact_magnetization_denoiser(h), 2, grid, r).output);
      },
      1);
  EXPECT_LE(oracle::tv(oracle::frequencies(a, 4), oracle::frequencies(b, 4)), 0.03);
}

TEST(Poisson, PointMassGivesPoissonCounts) {
  const Vec x0 = vec({0.5, 2.0, 0.0});
  const NonnegativeTarget t(DiscreteTarget({x0}, {1.0}));
  const auto den = exact_poisson_denoiser(t);
  const double T = 6.0;
  const auto grid = TimeGrid::uniform(60, T);
  const std::size_t N = 20000;
  const auto runs =
      run_chains(N, 3, [&](std::size_t, Rng& r) { return simulate_poisson_observation(den, 3, grid, r); }, 1);
  for (int k = 0; k < 3; ++k) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r.y_final[k] / double(N);
    const double lam = T * x0[k];
    if (lam == 0.0)
      EXPECT_EQ(mean, 0.0);
    else
      EXPECT_LT(std::abs(mean - lam) / std::sqrt(lam / N), 4.0) << k;
  }
  EXPECT_EQ(runs.front().x_decoded, x0);
}

TEST(Poisson, TwoAtomDecodeMatchesEnumeration) {
  const double T = 20.0, w1 = 0.35, w2 = 0.65;
  const NonnegativeTarget t(DiscreteTarget({vec({1.0}), vec({2.0})}, {w1, w2}));
  const auto den = exact_poisson_denoiser(t);
  // Decoding is the posterior mean, so x > 1.5 exactly when the counts favour the upper atom.
  auto pmf = [](int k, double lam) { return std::exp(k * std::log(lam) - lam - std::lgamma(k + 1.0)); };
  double expect = 0.0;
  for (int y = 0; y < 300; ++y) {
    const double a = w1 * pmf(y, T), b = w2 * pmf(y, 2.0 * T);
    if (b > a) expect += a + b;
  }
  const auto grid = TimeGrid::uniform(200, T);
  const std::size_t N = 20000;
  const auto xs = run_chains(
      N, 4, [&](std::size_t, Rng& r) { return simulate_poisson_observation(den, 1, grid, r, 0.01).x_decoded[0]; }, 1);
  double high = 0.0;
  for (double x : xs) high += (x > 1.5) / double(N);
  EXPECT_LT(std::abs(high - expect), 4.0 * std::sqrt(expect * (1 - expect) / N));
}

TEST(Poisson, RequiresGridFromZero) {
  const NonnegativeTarget t(DiscreteTarget({vec({1.0})}, {1.0}));
  Rng rng(1);
  EXPECT_THROW(simulate_poisson_observation(exact_poisson_denoiser(t), 1, TimeGrid::arcsin(10, 0.1, 0.9), rng),
               ValidationError);
}

TEST(Percolation, SingleCellHasNoDifferences) {
  const QaryTarget t(1, 3, {0.2, 0.3, 0.5});
  Rng rng(1);
  const auto r = simulate_information_percolation(t, EdgeSchedule::grid(1, 1), rng);
  EXPECT_TRUE(r.differences.empty());
  EXPECT_EQ(r.anchored, std::vector<int>{2});
}

TEST(Percolation, TwoByOneUniform) {
  const QaryTarget t(2, 2, std::vector<double>(4, 0.25));
  const auto sched = EdgeSchedule::grid(2, 1);
  ASSERT_EQ(sched.size(), 1u);
  const auto law = percolation_difference_law(t, sched);
  ASSERT_EQ(law.size(), 3u);
  EXPECT_EQ(law[0].first, std::vector<int>{-1});
  EXPECT_DOUBLE_EQ(law[0].second, 0.25);
  EXPECT_DOUBLE_EQ(law[1].second, 0.5);
  EXPECT_DOUBLE_EQ(law[2].second, 0.25);
  Rng rng(2);
  std::map<int, double> freq;
  const int N = 100000;
  for (int i = 0; i < N; ++i) freq[simulate_information_percolation(t, sched, rng).differences[0]] += 1.0 / N;
  EXPECT_NEAR(freq[-1], 0.25, 4.0 * std::sqrt(0.25 * 0.75 / N));
  EXPECT_NEAR(freq[0], 0.5, 4.0 * std::sqrt(0.25 / N));
}

TEST(Percolation, TwoByTwoJointLaw) {
  Rng rng(3);
  const QaryTarget t(4, 3, random_table(81, rng));
  const auto sched = EdgeSchedule::grid(2, 2);
  ASSERT_EQ(sched.size(), 4u);
  const auto law = percolation_difference_law(t, sched);
  std::map<std::vector<int>, double> freq;
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    const auto r = simulate_information_percolation(t, sched, rng);
    freq[r.differences] += 1.0 / N;
    // the anchored configuration reproduces the sampled differences
    int e = 0;
    for (const auto& ed : sched.edges())
      ASSERT_EQ(r.anchored[sched.cell(ed.t_row, ed.t_col)] - r.anchored[sched.cell(ed.o_row, ed.o_col)],
                r.differences[e++]);
  }
  double tv = 0.0;
  for (const auto& [d, p] : law) tv += 0.5 * std::abs(p - freq[d]);
  EXPECT_LE(tv, 0.03);
}

TEST(Percolation, ScheduleValidation) {
  EXPECT_THROW(EdgeSchedule::from_edges(2, 2, {{0, 0, 1, 1}}), ValidationError);
  EXPECT_THROW(EdgeSchedule::from_edges(2, 2, {{0, 0, 0, 1}, {0, 1, 0, 0}}), ValidationError);
  const auto s = EdgeSchedule::from_edges(2, 2, {{1, 1, 0, 1}});
  EXPECT_EQ(s.cell(1, 1), 3);
}

TEST(Split, SymmetricSignedBasisVectors) {
  const std::vector<Vec> xs = {vec({1, 0, 0}), vec({-1, 0, 0}), vec({1, 0, 0}), vec({-1, 0, 0})};
  const auto s = estimate_split(xs);
  EXPECT_NEAR(std::abs(s.v[0]), 1.0, 1e-12);
  EXPECT_GE(s.qhat, 0.5);
  EXPECT_GT(s.v[0], 0.0);  // tie: first nonzero coordinate positive
}

TEST(Split, SingleDirection) {
  const Vec x = vec({3.0, -4.0});
  const auto s = estimate_split({x, 2.0 * x});
  EXPECT_LT((s.v - x / 5.0).norm(), 1e-12);
  EXPECT_EQ(s.qhat, 1.0);
  EXPECT_THROW(estimate_split({Vec::Zero(2), Vec::Zero(2)}), ValidationError);
  EXPECT_THROW(estimate_split({x}), ValidationError);
}

TEST(Split, MixtureSamplesRecoverWeightAndDirection) {
  const int n = 128;
  const TwoGaussianMixture mix(Vec::Ones(n), 0.7);
  Rng rng(11);
  std::vector<Vec> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(sample_exact(mix, rng));
  const auto s = estimate_split(xs);
  EXPECT_NEAR(s.qhat, 0.7, 0.015);
  EXPECT_GT(std::pow(s.v.sum() / std::sqrt(double(n)), 2), 0.95);
}

TEST(Halfspace, FullWeightIsThePlainSampler) {
  const DiscreteTarget plus_t({vec({1, 1}), vec({2, 0})}, {0.5, 0.5});
  const DiscreteTarget minus_t({vec({-1, -1})}, {1.0});
  const auto grid = TimeGrid::alpha_uniform(50, 30.0);
  for (std::uint64_t seed : {1u, 2u}) {
    Rng a(seed), b(seed);
    const auto h = simulate_halfspace_mixture(1.0, exact_denoiser(plus_t), exact_denoiser(minus_t), grid, a);
    uniform01(b);  // the component draw
    const auto p = simulate_isotropic(exact_denoiser(plus_t), grid, b);
    EXPECT_EQ(h.S, 1);
    EXPECT_EQ(h.chain.y_final, p.y_final);
  }
  Rng rng(1);
  EXPECT_THROW(simulate_halfspace_mixture(1.5, exact_denoiser(plus_t), exact_denoiser(minus_t), grid, rng),
               ValidationError);
}

TEST(Combined, PosteriorMatchesEnumeration) {
  const std::vector<Vec> atoms = {vec({1, 0, 2}), vec({1, 1, -1}), vec({0, 1, 2}), vec({0, 0, 0})};
  const std::vector<double> w = {0.1, 0.4, 0.3, 0.2};
  const DiscreteTarget target(atoms, w);
  const Vec y = vec({0.3, -0.4, 1.1});
  const double t = 0.8;
  Revealed rev(3);
  rev[0] = 1.0;
  std::vector<double> lik;
  for (const auto& a : atoms) lik.push_back(a[0] == 1.0 ? std::exp(a.dot(y) - 0.5 * t * a.squaredNorm()) : 0.0);
  EXPECT_LT((combined_posterior_mean(target, y, t, rev) - oracle::bayes_mean(atoms, w, lik)).norm(), 1e-13);

  const auto law = combined_coordinate_law(target, y, t, rev, 2);
  const double l0 = w[0] * lik[0], l1 = w[1] * lik[1];
  ASSERT_EQ(law.size(), 2u);
  for (const auto& [v, p] : law) EXPECT_NEAR(p, (v == 2.0 ? l0 : l1) / (l0 + l1), 1e-13);

  rev[1] = 0.0;
  rev[2] = -1.0;
  EXPECT_THROW(combined_posterior_mean(target, y, t, rev), InconsistentObservation);
}

TEST(Combined, EmptyScheduleIsTheIsotropicSampler) {
  const DiscreteTarget target({vec({1, 0}), vec({0, 1}), vec({-1, -1})}, {0.3, 0.3, 0.4});
  const auto grid = TimeGrid::alpha_uniform(60, 40.0);
  Rng a(5), b(5);
  const auto c = simulate_gaussian_erasure(target, RevealSchedule(), grid, a);
  const auto i = simulate_isotropic(exact_denoiser(target), grid, b);
  EXPECT_LT((c.chain.y_final - i.y_final).norm(), 1e-10);
  EXPECT_LT((c.chain.x_final - i.x_final).norm(), 1e-10);
  for (const auto& r : c.revealed) EXPECT_FALSE(r.has_value());
}

TEST(Combined, ReproducesTheTarget) {
  const std::vector<Vec> atoms = {vec({1, 0, 2}), vec({1, 1, -1}), vec({0, 1, 2}), vec({0, 0, 0})};
  const std::vector<double> w = {0.1, 0.4, 0.3, 0.2};
  const DiscreteTarget target(atoms, w);
  const auto sched = RevealSchedule::at_times({2, 0}, {0.5, 3.0});
  const auto grid = TimeGrid::alpha_uniform(100, 50.0);
  const std::size_t N = 20000;
  const auto idx = run_chains(
      N, 6,
      [&](std::size_t, Rng& r) {
        const auto res = simulate_gaussian_erasure(target, sched, grid, r);
        const auto j = nearest_atom(atoms, res.chain.x_final);
        // revealed values agree with the final atom
        if (*res.revealed[2] != atoms[j][2] || *res.revealed[0] != atoms[j][0]) return std::size_t(99);
        return j;
      },
      1);
  for (auto j : idx) ASSERT_LT(j, 4u);
  EXPECT_LE(oracle::tv(oracle::frequencies(idx, 4), w), 0.02);
}

TEST(Combined, MergingDisjointOrders) {
  const auto a = RevealSchedule::at_times({0, 2}, {1.0, 3.0});
  const auto b = RevealSchedule::at_times({1}, {2.0});
  const auto c = combine(a, b);
  ASSERT_EQ(c.events().size(), 3u);
  EXPECT_EQ(c.events()[0].second, 0);
  EXPECT_EQ(c.events()[1].second, 1);
  EXPECT_EQ(c.events()[2].second, 2);
  EXPECT_THROW(combine(a, a), ValidationError);
}
