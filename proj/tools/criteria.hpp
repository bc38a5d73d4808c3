#ifndef STOCHLOC_TOOLS_CRITERIA_HPP
#define STOCHLOC_TOOLS_CRITERIA_HPP

// Acceptance criteria AC1-AC11. Shared by the acceptance test binary and `stochloc selftest`.

#include "experiment.hpp"

#include <chrono>
#include <sstream>

namespace stochloc::acceptance {

struct Options {
  std::uint64_t seed = 20240917;
  bool perturb_window = false;         // fault injection: corrupts the closed-form window kernel
  std::filesystem::path scratch = std::filesystem::temp_directory_path() / "stochloc-acceptance";
  unsigned workers = 0;                // 0 = hardware concurrency
};

struct Result {
  std::string id;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  std::string id;
  bool fast;  // part of the selftest subset
  double budget_seconds;
  std::function<Result(const Options&)> run;
};

namespace detail {

inline std::string fmt(double x, int prec = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    s_ << v;
    return *this;
  }
  Detail& num(double x, int prec = 6) {
    s_ << fmt(x, prec);
    return *this;
  }
  std::string str() const { return s_.str(); }

 private:
  std::ostringstream s_;
};

inline Vec ones(Eigen::Index n) { return Vec::Ones(n); }

}  // namespace detail

// AC1: binary symmetric sampler on a random n=4 hypercube law.
inline Result ac1(const Options& o) {
  Rng trng = chain_rng(o.seed, 101);
  const HypercubeTarget h(4, random_table(16, trng));
  const auto den = exact_magnetization_denoiser(h);
  const auto grid = TimeGrid::arcsin(300, 1e-3, 0.999);
  const auto idx = run_chains(
      100000, hash64(o.seed, 1),
      [&](std::size_t, Rng& rng) { return h.index(simulate_binary_symmetric(den, 4, grid, rng).output); }, o.workers);
  const double tv = empirical_tv(idx, h.table()).value;
  Result r{"AC1", tv <= 0.02, ""};
  r.detail = (detail::Detail() << "TV=" ).num(tv, 4).str() + " (<= 0.02, 1e5 chains)";
  return r;
}

// AC2: isotropic Gaussian covariance law at t = 10.
inline Result ac2(const Options& o) {
  const int n = 8;
  const double T = 10.0;
  Rng srng = chain_rng(o.seed, 201);
  const Mat sigma = random_spd(n, 0.5, 2.0, srng);
  const auto den = LinearGaussianDenoiser(sigma).as_denoiser();
  const auto grid = TimeGrid::alpha_uniform(400, T);
  const auto xs = run_chains(
      20000, hash64(o.seed, 2), [&](std::size_t, Rng& rng) { return simulate_isotropic(den, grid, rng).x_final; },
      o.workers);
  const Mat I = Mat::Identity(n, n);
  const Mat expected = (I + T * sigma).ldlt().solve(T * sigma * sigma);
  const Mat est = moment_summary(xs).cov;
  const double rel = (est - expected).norm() / expected.norm();
  Result r{"AC2", rel <= 0.05, ""};
  r.detail = (detail::Detail() << "relative Frobenius error=").num(rel, 4).str() + " (<= 0.05, 2e4 chains)";
  return r;
}

// AC3: windowed denoiser linear solve, closed form and rank-one explicit values.
inline Result ac3(const Options& o) {
  Rng rng = chain_rng(o.seed, 301);
  double worst_res = 0.0, worst_gap = 0.0, worst_explicit = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = std::uniform_int_distribution<int>(17, 48)(rng);
    const int r = std::uniform_int_distribution<int>(0, 8)(rng);
    std::vector<double> lam(n);
    for (int j = 0; j <= n / 2; ++j) lam[j] = lam[(n - j) % n] = 2.0 * uniform01(rng);
    const auto c = CirculantGaussian::from_spectrum(lam).c();
    const auto ws = window_spectrum(c, r);
    for (double t : {0.1, 1.0, 10.0}) {
      const auto ks = windowed_denoiser_solve(c, r, t);
      auto kc = windowed_denoiser_closed_form(ws, r, t);
      if (o.perturb_window) kc.coeffs[0] *= 1.0 + 1e-6;
      worst_res = std::max({worst_res, windowed_residual(c, ks, t), windowed_residual(c, kc, t)});
      for (int u = 0; u <= r; ++u) worst_gap = std::max(worst_gap, std::abs(ks.coeffs[u] - kc.coeffs[u]));
    }
  }
  for (double alpha : {0.1, 0.25, 1.0})
    for (int r : {1, 3, 8})
      for (double t : {0.1, 1.0, 10.0}) {
        const auto c = CirculantGaussian::rank_one(64, alpha).c();
        auto k = windowed_denoiser_closed_form(window_spectrum(c, r), r, t);
        if (o.perturb_window) k.coeffs[0] *= 1.0 + 1e-6;
        const double b = 1.0 + (2 * r + 1) * alpha;
        const double lj = alpha / ((1.0 + t) * (1.0 + b * t));
        worst_explicit = std::max(worst_explicit, std::abs(k.coeffs[0] - (1.0 / (1.0 + t) + lj)));
        for (int j = 1; j <= r; ++j) worst_explicit = std::max(worst_explicit, std::abs(k.coeffs[j] - lj));
      }
  Result res{"AC3", worst_res <= 1e-10 && worst_gap <= 1e-10 && worst_explicit <= 1e-12, ""};
  res.detail = (detail::Detail() << "residual=").num(worst_res, 3).str() + " closed-form gap=" +
               detail::fmt(worst_gap, 3) + " explicit gap=" + detail::fmt(worst_explicit, 3) +
               " (<= 1e-10, 1e-10, 1e-12)";
  return res;
}

// AC4: generated spectrum total, separation bound, projection W2 gap.
inline Result ac4(const Options& o) {
  const int n = 64, r = 3;
  const double alpha = 0.25;
  const auto spec = generated_spectrum(n, r, alpha);
  const double total = (1.0 + (2 * r + 1) * alpha) * n;
  const double total_err = std::abs(spec.one_sigma_one - total) / total;
  const auto w2 = w2_separation(n, alpha, r);
  const bool bound_ok = w2.preconditions && w2.holds && std::abs(w2.bound - 2.465) < 5e-4;

  std::vector<double> lam(n);
  for (std::size_t i = 0; i < spec.q.size(); ++i) {
    const long k = std::lround(spec.q[i] * n / (2.0 * std::numbers::pi));
    lam[static_cast<std::size_t>((k + n) % n)] = spec.sigma_gen[i];
  }
  const auto gen = CirculantGaussian::from_spectrum(lam);
  const auto target = CirculantGaussian::rank_one(n, alpha);
  const std::size_t N = 10000;
  auto proj = [&](const CirculantGaussian& g, std::uint64_t stream) {
    return run_chains(N, hash64(o.seed, stream),
                      [&](std::size_t, Rng& rng) { return sample_exact(g, rng).sum() / std::sqrt(double(n)); },
                      o.workers);
  };
  const double gap = empirical_w2_1d(proj(target, 41), proj(gen, 42)).value;
  const double gap_err = std::abs(gap - w2.bound) / w2.bound;
  Result res{"AC4", total_err <= 1e-10 && bound_ok && gap_err <= 0.10, ""};
  res.detail = (detail::Detail() << "<1,S1> rel err=").num(total_err, 3).str() + " bound=" + detail::fmt(w2.bound, 6) +
               " >= " + detail::fmt(w2.threshold, 4) + " W2 gap=" + detail::fmt(gap, 5) + " (rel err " +
               detail::fmt(gap_err, 3) + " <= 0.10)";
  return res;
}

// AC5: mean-augmented linear observation with the guess drifts.
inline Result ac5(const Options& o) {
  const int n = 32;
  const double alpha = 0.2, b = 2.0;
  const LinearObservationModel model(mean_augmented_operator(n, b));
  const auto den = linear_obs_guess_denoiser(n, alpha, b);
  const auto grid = TimeGrid::alpha_uniform(500, 1000.0);
  const auto decode = [n](const Vec& m) { return Vec(m.tail(n)); };
  const auto xs = run_chains(
      20000, hash64(o.seed, 5),
      [&](std::size_t, Rng& rng) { return simulate_linear_observation(den, model, grid, rng, decode).x_denoised; },
      o.workers);
  const Mat target = Mat::Identity(n, n) + alpha * Mat::Ones(n, n);
  const Mat cov = moment_summary(xs).cov;
  const double worst = (cov - target).cwiseAbs().maxCoeff();
  const double diag = cov.diagonal().mean();
  const double off = (cov.sum() - cov.trace()) / double(n * (n - 1));
  Result r{"AC5", worst <= 0.05, ""};
  r.detail = (detail::Detail() << "max entrywise error=").num(worst, 4).str() + " mean diagonal=" + detail::fmt(diag, 4) +
             " (target " + detail::fmt(1.0 + alpha, 4) + ") mean off-diagonal=" + detail::fmt(off, 4) + " (target " +
             detail::fmt(alpha, 4) + ") (<= 0.05, 2e4 chains)";
  return r;
}

// AC6: two-component mixture, half-space sampler and plain sampler with the exact denoiser.
inline Result ac6(const Options& o) {
  const int n = 128;
  const double p = 0.7;
  const TwoGaussianMixture mix(detail::ones(n), p);
  const auto grid = TimeGrid::alpha_uniform(200, 1000.0);
  const double mid = mixture_projection_midpoint(p);
  const double var_target = 1.0 / n;

  std::vector<Vec> split_samples(50000);
  Rng srng = chain_rng(o.seed, 601);
  for (auto& x : split_samples) x = sample_exact(mix, srng);
  const Split split = estimate_split(split_samples);
  split_samples.clear();
  split_samples.shrink_to_fit();
  const bool plus_up = mix.mean_plus().dot(split.v) >= 0.0;
  const auto up = component_denoiser(plus_up ? mix.mean_plus() : mix.mean_minus());
  const auto lo = component_denoiser(plus_up ? mix.mean_minus() : mix.mean_plus());

  const auto half = run_chains(
      5000, hash64(o.seed, 61),
      [&](std::size_t, Rng& rng) { return simulate_halfspace_mixture(split.qhat, up, lo, grid, rng).chain.x_final; },
      o.workers);
  const auto exact_den = exact_denoiser(mix);
  const auto plain = run_chains(
      5000, hash64(o.seed, 62), [&](std::size_t, Rng& rng) { return simulate_isotropic(exact_den, grid, rng).x_final; },
      o.workers);

  auto check = [&](const std::vector<Vec>& xs, std::string& out) {
    const auto ps = projection_stats(xs, mix.a(), mid);
    const bool w_ok = std::abs(ps.weight_upper - p) <= 0.015;
    const bool v_ok = std::abs(ps.var_upper / var_target - 1.0) <= 0.3 && std::abs(ps.var_lower / var_target - 1.0) <= 0.3;
    out = "weight=" + detail::fmt(ps.weight_upper, 4) + " var+=" + detail::fmt(ps.var_upper * n, 4) + "/n var-=" +
          detail::fmt(ps.var_lower * n, 4) + "/n";
    return w_ok && v_ok;
  };
  std::string dh, dp;
  const bool ok_h = check(half, dh), ok_p = check(plain, dp);
  Result r{"AC6", ok_h && ok_p, ""};
  r.detail = "half-space: " + dh + " (qhat=" + detail::fmt(split.qhat, 4) + "); plain exact: " + dp +
             " (weight 0.7 +- 0.015, var 1/n +- 30%)";
  return r;
}

// AC7: KL suite.
inline Result ac7(const Options& o) {
  detail::Detail d;
  bool ok = true;

  // Matched Girsanov drifts give exactly zero.
  {
    Rng rng = chain_rng(o.seed, 701);
    const GaussianTarget g(random_spd(3, 0.5, 2.0, rng));
    const auto m = exact_denoiser(g);
    const auto rep = kl_gaussian_drift(m, m, g, TimeGrid::uniform(50, 5.0), 200, hash64(o.seed, 71), 1);
    const bool z = rep.estimate == 0.0 && rep.std_error == 0.0;
    ok &= z;
    d << "matched=" << (z ? "0" : detail::fmt(rep.estimate)) << "; ";
  }
  // Scalar shrinkage mismatch: (1/2)(1-c)^2 (T - log(1+T)).
  {
    const double c = 0.5, T = 10.0;
    const GaussianTarget g(Mat::Identity(1, 1));
    const GaussianDenoiser m{1, [](const Vec& y, double t) { return Vec(y / (1.0 + t)); }};
    const GaussianDenoiser mh{1, [c](const Vec& y, double t) { return Vec(c * y / (1.0 + t)); }};
    const auto rep = kl_gaussian_drift(m, mh, g, TimeGrid::uniform(1000, T), 4000, hash64(o.seed, 72), o.workers);
    const double hand = 0.5 * (1.0 - c) * (1.0 - c) * (T - std::log1p(T));
    const bool z = std::abs(rep.estimate - hand) <= 4.0 * rep.std_error;
    ok &= z;
    d << "shrinkage=" << detail::fmt(rep.estimate, 5) << " vs " << detail::fmt(hand, 5) << " (se "
      << detail::fmt(rep.std_error, 2) << "); ";
  }
  // Poisson divergence.
  {
    const double v = poisson_divergence(1.0, 2.0), e = 1.0 - std::log(2.0);
    const bool z = std::abs(v - e) <= 1e-12;
    ok &= z;
    d << "Delta(1||2) err=" << detail::fmt(std::abs(v - e), 2) << "; ";
  }
  // Two-state CTMC from stationarity: rate formula along grid vs path log-likelihood ratio.
  {
    const double ra = 1.0, rb = 3.0, ha = 2.0, hb = 2.0, T = 2.0;
    const double pi0 = rb / (ra + rb);
    const auto grid = TimeGrid::uniform(10, T);
    const std::size_t N = 100000;
    std::vector<std::vector<std::vector<int>>> states(N);
    std::vector<double> llr(N);
    for (std::size_t p = 0; p < N; ++p) {
      Rng rng = chain_rng(hash64(o.seed, 73), p);
      const int y0 = uniform01(rng) < pi0 ? 0 : 1;
      int y = y0;
      double t = 0.0, acc = 0.0;
      std::vector<double> jumps;
      while (true) {
        const double rate = y == 0 ? ra : rb, hrate = y == 0 ? ha : hb;
        const double hold = std::exponential_distribution<double>(rate)(rng);
        if (t + hold >= T) {
          acc -= (rate - hrate) * (T - t);
          break;
        }
        acc += std::log(rate / hrate) - (rate - hrate) * hold;
        t += hold;
        jumps.push_back(t);
        y = 1 - y;
      }
      llr[p] = acc;
      for (double g : grid.nodes()) {
        const auto flips = std::upper_bound(jumps.begin(), jumps.end(), g) - jumps.begin();
        states[p].push_back({flips % 2 ? 1 - y0 : y0});
      }
    }
    const RateFn rf = [=](double, std::span<const int> y) { return std::vector<Jump>{{0, 1 - y[0], y[0] ? rb : ra}}; };
    const RateFn rh = [=](double, std::span<const int> y) { return std::vector<Jump>{{0, 1 - y[0], y[0] ? hb : ha}}; };
    const auto rep = kl_ctmc(rf, rh, states, grid);
    double mean = 0.0, ss = 0.0;
    for (double v : llr) mean += v / double(N);
    for (double v : llr) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / double(N - 1) / double(N));
    const double closed = T * (pi0 * poisson_divergence(ra, ha) + (1.0 - pi0) * poisson_divergence(rb, hb));
    const bool z = std::abs(rep.estimate - mean) <= 3.0 * std::hypot(se, rep.std_error);
    ok &= z;
    d << "ctmc formula=" << detail::fmt(rep.estimate, 5) << " path LLR=" << detail::fmt(mean, 5) << " (se "
      << detail::fmt(se, 2) << ", closed form " << detail::fmt(closed, 5) << "); ";
  }
  // 2-bit erasure against product of marginals: KL = I(x1;x2), and D(mu||muhat) <= D(P||Phat).
  {
    Rng rng = chain_rng(o.seed, 702);
    const HypercubeTarget mu(2, random_table(4, rng));
    const auto& p = mu.table();
    // Index bits: coordinate 1 most significant, bit 1 <-> spin -1.
    const double p1[2] = {p[0] + p[1], p[2] + p[3]}, p2[2] = {p[0] + p[2], p[1] + p[3]};
    std::vector<double> prod(4);
    double mi = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        prod[2 * a + b] = p1[a] * p2[b];
        mi += p[2 * a + b] * std::log(p[2 * a + b] / (p1[a] * p2[b]));
      }
    const HypercubeTarget muhat(2, prod);
    const auto rep = kl_erasure_exact(mu, muhat, {0, 1});
    const double final_kl = kl_tables(mu.table(), muhat.table());
    const bool z = std::abs(rep.estimate - mi) <= 1e-12 && final_kl <= rep.estimate + 1e-12;
    ok &= z;
    d << "erasure KL=" << detail::fmt(rep.estimate, 8) << " MI=" << detail::fmt(mi, 8)
      << " DPI " << (final_kl <= rep.estimate + 1e-12 ? "holds" : "violated");
  }
  return {"AC7", ok, d.str()};
}

// AC8: reverse-OU change of variables with the exact mixture denoiser.
inline Result ac8(const Options& o) {
  Rng rng = chain_rng(o.seed, 801);
  const int n = 6;
  const TwoGaussianMixture mix(standard_normal(n, rng), 0.35);
  const auto den = exact_denoiser(mix);
  double worst = 0.0, worst_g = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = std::pow(10.0, -3.0 + 6.0 * uniform01(rng));
    const Vec x = sample_exact(mix, rng);
    const Vec y = t * x + std::sqrt(t) * standard_normal(n, rng);
    worst = std::max(worst, reverse_equivalence_check(den, t, y));
    const double g = 1.0 / (t * (1.0 + t));
    worst_g = std::max(worst_g, std::abs(reverse_ou_diffusion(t) - g) / g);
  }
  Result r{"AC8", worst <= 1e-12 && worst_g <= 1e-15, ""};
  r.detail = (detail::Detail() << "identity residual=").num(worst, 3).str() + " diffusion rel err=" +
             detail::fmt(worst_g, 3) + " (<= 1e-12)";
  return r;
}

// AC9: spectrum analytics.
inline Result ac9(const Options&) {
  detail::Detail d;
  double worst_f = 0.0;
  for (double c : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    worst_f = std::max(worst_f, std::abs(F(0.0, c) - 1.0));
    worst_f = std::max(worst_f, std::abs(F(1.0, c) - 1.0 / c) * c);
  }
  const bool f_ok = worst_f <= 1e-10;
  d << "F(0),F(1) err=" << detail::fmt(worst_f, 3) << "; ";

  int fp_viol = 0;
  std::string first;
  for (int i = 1; i <= 9; ++i) {
    const double c = 0.1 * i;
    const auto rep = Fprime1(c);
    if (!rep.lower_holds || !rep.upper_holds) {
      if (!fp_viol) first = "c=" + detail::fmt(c, 2) + ": F'=" + detail::fmt(rep.value, 4) + " < 2/c=" + detail::fmt(rep.lower, 4);
      ++fp_viol;
    }
  }
  d << "F'(1;c) outside printed bounds for " << fp_viol << "/9 c" << (fp_viol ? " (" + first + ")" : "") << "; ";

  double worst_q = 0.0;
  const int n = 1024;
  for (auto [r, alpha] : {std::pair{1, 0.25}, std::pair{3, 0.25}, std::pair{8, 1.0}}) {
    const double c0 = 1.0 / (1.0 + (2 * r + 1) * alpha);
    const double q1 = 2.0 * std::numbers::pi / n, q2 = 2.0 * q1;
    const double s1 = F(window_nu(q1, r), c0), s2 = F(window_nu(q2, r), c0);
    const double fit = (s2 - s1) / (q2 * q2 - q1 * q1);
    const double predicted = -Fprime1(c0).value * r * (r + 1) / 6.0;
    worst_q = std::max(worst_q, std::abs(fit / predicted - 1.0));
  }
  const bool q_ok = worst_q <= 0.01;
  d << "quadratic coefficient rel err=" << detail::fmt(worst_q, 3) << "; ";

  int xi_viol = 0, xi_total = 0;
  for (int r = 1; r <= 8; ++r)
    for (double alpha : {0.1, 0.25, 1.0, 4.0}) {
      const auto L = correlation_length(r, alpha);
      ++xi_total;
      xi_viol += !(L.lower_holds && L.upper_holds);
    }
  d << "xi2 outside bounds at " << xi_viol << "/" << xi_total << " (r,alpha)";
  return {"AC9", f_ok && fp_viol == 0 && q_ok && xi_viol == 0, d.str()};
}

// AC10: discrete process battery.
inline Result ac10(const Options& o) {
  const std::size_t N = 100000;
  detail::Detail d;
  bool ok = true;
  auto record = [&](const char* name, double tv) {
    ok &= tv <= 0.03;
    d << name << " TV=" << detail::fmt(tv, 4) << "; ";
  };
  {
    Rng rng = chain_rng(o.seed, 1001);
    const HypercubeTarget h(3, random_table(8, rng));
    const auto order = RevealOrder::uniform_random_times();
    const auto idx = run_chains(N, hash64(o.seed, 101),
                                [&](std::size_t, Rng& r) { return simulate_erasure_index(h, order, r); }, o.workers);
    record("erasure", empirical_tv(idx, h.table()).value);
  }
  {
    Rng rng = chain_rng(o.seed, 1002);
    const QaryTarget q(2, 3, random_table(9, rng));
    const auto den = exact_belief_denoiser(q);
    const auto grid = TimeGrid::arcsin(300, 1e-3, 0.999);
    const auto idx = run_chains(
        N, hash64(o.seed, 102),
        [&](std::size_t, Rng& r) { return q.index(simulate_qary_symmetric(den, 3, 2, grid, r).output); }, o.workers);
    record("q-ary", empirical_tv(idx, q.table()).value);
  }
  {
    std::vector<Vec> atoms{(Vec(2) << 1.0, 3.0).finished(), (Vec(2) << 3.0, 1.0).finished()};
    const NonnegativeTarget nn(DiscreteTarget(atoms, {0.35, 0.65}));
    const auto den = exact_poisson_denoiser(nn);
    const auto grid = TimeGrid::uniform(100, 10.0);
    const auto idx = run_chains(
        N, hash64(o.seed, 103),
        [&](std::size_t, Rng& r) {
          return cli::nearest_atom(atoms, simulate_poisson_observation(den, 2, grid, r, 0.1).x_decoded);
        },
        o.workers);
    record("poisson", empirical_tv(idx, nn.base().weights()).value);
  }
  {
    Rng rng = chain_rng(o.seed, 1004);
    const QaryTarget q(4, 3, random_table(81, rng));
    const auto sched = EdgeSchedule::grid(2, 2);
    std::map<std::vector<int>, double> law;
    for (const auto& [k, p] : percolation_difference_law(q, sched)) law[k] = p;
    const auto keys = run_chains(
        N, hash64(o.seed, 104),
        [&](std::size_t, Rng& r) { return simulate_information_percolation(q, sched, r).differences; }, o.workers);
    record("percolation", empirical_tv(keys, law).value);
  }
  return {"AC10", ok, d.str() + "(<= 0.03, 1e5 runs each)"};
}

// AC11: repeated CLI runs with the same seed produce identical files.
namespace detail {

inline std::map<std::string, std::string> read_dir(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::ifstream f(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

}  // namespace detail

inline Result ac11(const Options& o) {
  struct Job {
    const char* name;
    const char* kind;
    const char* yaml;
  };
  const Job jobs[] = {
      {"hypercube", "sample",
       "process: binary-symmetric\ntarget: {type: hypercube, n: 4, table: random, table_seed: 3}\n"
       "grid: {rule: arcsin, K: 100, lo: 0.001, hi: 0.999}\nchains: 2000\ndiagnostics: [tv]\n"
       "output: {snapshots: [0.5]}\n"},
      {"mixture", "sample",
       "process: halfspace-mixture\ntarget: {type: mixture, n: 16, a: 1.0, p: 0.7}\n"
       "grid: {rule: alpha-uniform, K: 50, t_max: 100}\nchains: 300\nparams: {split_samples: 2000}\n"
       "diagnostics: [projection, moments]\n"},
      {"isotropic", "sample",
       "process: isotropic\ntarget: {type: circulant, n: 16, alpha: 0.25}\ndenoiser: {type: windowed, r: 2}\n"
       "grid: {rule: alpha-uniform, K: 50, t_max: 100}\nchains: 300\ndiagnostics: [moments, w2]\n"
       "output: {snapshots: [1, 10]}\n"},
      {"kl", "kl",
       "target: {type: gaussian, cov: [[1]]}\ngrid: {rule: uniform, K: 100, t_max: 5}\nchains: 300\n"
       "kl: {channel: gaussian, true: {type: exact}, hat: {type: scaled, c: 0.5, base: {type: exact}}}\n"},
      {"analyze", "analyze", "params: {n: 32, r: 2, alpha: 0.5, r_max: 3}\n"},
  };
  bool ok = true;
  std::string bad;
  for (const auto& job : jobs) {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 3; ++rep) {
      const auto dir = o.scratch / "ac11" / (std::string(job.name) + "-" + std::to_string(rep));
      std::filesystem::remove_all(dir);
      auto cfg = parse_config(job.yaml);
      cli::RunOptions ro;
      ro.seed = hash64(o.seed, 11);
      ro.out_dir = dir.string();
      ro.workers = rep == 2 ? 3u : 1u;  // third run fans chains over three workers
      ro.quiet = true;
      const std::string kind = job.kind;
      if (kind == "sample")
        cli::cmd_sample(cfg, ro);
      else if (kind == "kl")
        cli::cmd_kl(cfg, ro);
      else
        cli::cmd_analyze(cfg, ro);
      auto files = detail::read_dir(dir);
      if (rep == 0) {
        first = std::move(files);
      } else if (files != first) {
        ok = false;
        bad += std::string(bad.empty() ? "" : ", ") + job.name;
      }
    }
  }
  {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      const auto dir = o.scratch / "ac11" / ("images-" + std::to_string(rep));
      std::filesystem::remove_all(dir);
      cli::cmd_synth_images(8, 6, 50, hash64(o.seed, 12), dir, cli::Format::Csv);
      auto files = detail::read_dir(dir);
      if (rep == 0)
        first = std::move(files);
      else if (files != first) {
        ok = false;
        bad += std::string(bad.empty() ? "" : ", ") + "images";
      }
    }
  }
  return {"AC11", ok, ok ? "sample/kl/analyze/synth-images outputs bit-identical across reruns and worker counts"
                         : "differing outputs: " + bad};
}

inline std::vector<Criterion> all_criteria() {
  return {
      {"AC1", false, 120.0, ac1},  {"AC2", false, 120.0, ac2}, {"AC3", true, 5.0, ac3},
      {"AC4", true, 60.0, ac4},    {"AC5", false, 180.0, ac5}, {"AC6", false, 120.0, ac6},
      {"AC7", true, 120.0, ac7},   {"AC8", true, 1.0, ac8},    {"AC9", true, 10.0, ac9},
      {"AC10", false, 300.0, ac10}, {"AC11", true, 600.0, ac11},
  };
}

/// Runs one criterion, timing it and folding the runtime budget into the verdict. Exceptions count as failure.
inline Result run(const Criterion& c, const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  Result r;
  try {
    r = c.run(o);
  } catch (const std::exception& e) {
    r = {c.id, false, std::string("exception: ") + e.what()};
  }
  r.id = c.id;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.seconds > c.budget_seconds) {
    r.pass = false;
    r.detail += "; runtime " + detail::fmt(r.seconds, 3) + " s exceeds " + detail::fmt(c.budget_seconds, 3) + " s";
  }
  return r;
}

inline std::string format_line(const Result& r) {
  return r.id + " " + (r.pass ? "PASS" : "FAIL") + " [" + detail::fmt(r.seconds, 3) + " s] " + r.detail;
}

}  // namespace stochloc::acceptance

#endif  // STOCHLOC_TOOLS_CRITERIA_HPP
