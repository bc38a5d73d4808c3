#ifndef STOCHLOC_LOSSES_HPP
#define STOCHLOC_LOSSES_HPP

#include "stochloc/discrete_processes.hpp"

#include <map>

namespace stochloc {

/// Monte Carlo KL estimate in nats. `infinite` is set (with a flag) when P-hat gives zero mass
/// or zero rate to something P visits; the estimate is then +inf.
struct KLReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::vector<std::string> flags;
  std::vector<double> per_time;  // optional, mean integrand per grid interval
  bool infinite = false;
  bool exact = false;
};

namespace detail {

inline KLReport summarize(const std::vector<double>& per_path) {
  KLReport r;
  r.n_paths = per_path.size();
  if (per_path.empty()) return r;
  double mean = 0.0;
  for (double v : per_path) mean += v;
  mean /= double(per_path.size());
  double ss = 0.0;
  for (double v : per_path) ss += (v - mean) * (v - mean);
  r.estimate = mean;
  r.std_error = per_path.size() > 1 ? std::sqrt(ss / double(per_path.size() - 1) / double(per_path.size())) : 0.0;
  return r;
}

}  // namespace detail

/// Girsanov KL for two Gaussian-channel drifts along given forward paths (Y at each grid node):
/// sum_k (1/2) |Q_k^{1/2}(m - mhat)(Y_k)|^2 delta_k, averaged over paths.
inline KLReport kl_gaussian_drift_on_paths(const AnisotropicDenoiser& m, const AnisotropicDenoiser& mhat,
                                           const PreparedQ& Q, const std::vector<std::vector<Vec>>& paths,
                                           const TimeGrid& grid) {
  std::vector<double> per_path(paths.size(), 0.0);
  std::vector<double> per_time(grid.steps(), 0.0);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    require(paths[p].size() == grid.size(), "kl_gaussian_drift: path length differs from the grid");
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const Vec d = m(paths[p][k], Q.omega[k]) - mhat(paths[p][k], Q.omega[k]);
      double q;
      switch (Q.kind) {
        case QSchedule::Kind::Identity: q = d.squaredNorm(); break;
        case QSchedule::Kind::Scaled: q = Q.scale * d.squaredNorm(); break;
        default: q = d.dot(Q.Q_at(k) * d); break;
      }
      const double term = 0.5 * q * grid.delta(k);
      per_path[p] += term;
      per_time[k] += term / double(paths.size());
    }
  }
  auto r = detail::summarize(per_path);
  r.per_time = std::move(per_time);
  return r;
}

inline KLReport kl_gaussian_drift_on_paths(const GaussianDenoiser& m, const GaussianDenoiser& mhat,
                                           const std::vector<std::vector<Vec>>& paths, const TimeGrid& grid) {
  PreparedQ Q = PreparedQ::prepare(QSchedule::identity(), grid, m.dim);
  return kl_gaussian_drift_on_paths(detail::as_scalar_channel(m), detail::as_scalar_channel(mhat), Q, paths, grid);
}

/// Forward path of dY = Q x dt + Q^{1/2} dB from Y = 0 at grid nodes (exact for piecewise-constant Q).
inline std::vector<Vec> forward_anisotropic_path(const Vec& x, const PreparedQ& Q, const TimeGrid& grid, Rng& rng) {
  require(grid.front() == 0.0, "forward path: grid must start at t = 0");
  std::vector<Vec> path{Vec::Zero(x.size())};
  Vec y = path.back();
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double d = grid.delta(k);
    const Vec g = standard_normal(x.size(), rng);
    switch (Q.kind) {
      case QSchedule::Kind::Identity: y += d * x + std::sqrt(d) * g; break;
      case QSchedule::Kind::Scaled: y += (d * Q.scale) * x + std::sqrt(d * Q.scale) * g; break;
      default: y += d * (Q.Q_at(k) * x) + std::sqrt(d) * (Q.Qhalf_at(k) * g); break;
    }
    path.push_back(y);
  }
  return path;
}

/// Girsanov KL between true and approximate drifts, with forward paths from exact target samples.
inline KLReport kl_gaussian_drift(const AnisotropicDenoiser& m, const AnisotropicDenoiser& mhat, const QSchedule& Qs,
                                  const TargetDistribution& target, const TimeGrid& grid, std::size_t n_paths,
                                  std::uint64_t seed, unsigned workers = 1) {
  const PreparedQ Q = PreparedQ::prepare(Qs, grid, m.dim);
  auto per_path = run_chains(
      n_paths, seed,
      [&](std::size_t, Rng& rng) {
        const Vec x = sample_exact(target, rng);
        const auto path = forward_anisotropic_path(x, Q, grid, rng);
        return kl_gaussian_drift_on_paths(m, mhat, Q, {path}, grid).estimate;
      },
      workers);
  return detail::summarize(per_path);
}

inline KLReport kl_gaussian_drift(const GaussianDenoiser& m, const GaussianDenoiser& mhat,
                                  const TargetDistribution& target, const TimeGrid& grid, std::size_t n_paths,
                                  std::uint64_t seed, unsigned workers = 1) {
  return kl_gaussian_drift(detail::as_scalar_channel(m), detail::as_scalar_channel(mhat), QSchedule::identity(), target,
                           grid, n_paths, seed, workers);
}

// ---- discrete-time chains ----

/// Step-l transition probability P_l(value | history of the first l values).
struct DiscreteKernel {
  std::function<double(std::size_t step, std::span<const int> history, int value)> prob;
};

/// -sum_l E log(dPhat_l/dP_l) over paths drawn from P.
inline KLReport kl_discrete_chain(const DiscreteKernel& P, const DiscreteKernel& Phat,
                                  const std::function<std::vector<int>(Rng&)>& forward_path, std::size_t n_paths,
                                  std::uint64_t seed) {
  std::vector<double> per_path(n_paths, 0.0);
  std::vector<std::string> flags;
  for (std::size_t i = 0; i < n_paths; ++i) {
    Rng rng = chain_rng(seed, i);
    const auto path = forward_path(rng);
    for (std::size_t l = 0; l < path.size(); ++l) {
      const std::span<const int> hist(path.data(), l);
      const double p = P.prob(l, hist, path[l]);
      const double ph = Phat.prob(l, hist, path[l]);
      if (ph <= 0.0) {
        if (flags.size() < 8)
          flags.push_back("zero approximate probability at step " + std::to_string(l) + " on path " + std::to_string(i));
        per_path[i] = std::numeric_limits<double>::infinity();
        break;
      }
      per_path[i] += std::log(p) - std::log(ph);
    }
  }
  auto r = detail::summarize(per_path);
  if (!flags.empty() || !std::isfinite(r.estimate)) {
    r.infinite = true;
    r.estimate = std::numeric_limits<double>::infinity();
    r.std_error = 0.0;
    r.flags = std::move(flags);
  }
  return r;
}

namespace detail {

template <class ValueFn>
double table_conditional(const std::vector<double>& table, ValueFn&& value, const std::vector<int>& order,
                         std::size_t step, std::span<const int> history, int v) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < table.size(); ++j) {
    bool ok = true;
    for (std::size_t l = 0; l < step && ok; ++l) ok = value(j, order[l]) == history[l];
    if (!ok) continue;
    den += table[j];
    if (value(j, order[step]) == v) num += table[j];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace detail

/// Erasure kernel of a hypercube law: values are spins (+1/-1), revealed in `order`.
inline DiscreteKernel erasure_kernel(const HypercubeTarget& target, const std::vector<int>& order) {
  auto tg = std::make_shared<const HypercubeTarget>(target);
  return {[tg, order](std::size_t step, std::span<const int> hist, int v) {
    return detail::table_conditional(tg->table(), [&](std::size_t j, int i) { return tg->spin(j, i); }, order, step,
                                     hist, v);
  }};
}

/// Forward erasure path: x ~ mu, then its coordinates in reveal order.
inline std::function<std::vector<int>(Rng&)> erasure_forward_path(const HypercubeTarget& target,
                                                                  const std::vector<int>& order) {
  auto tg = std::make_shared<const HypercubeTarget>(target);
  return [tg, order](Rng& rng) {
    const auto x = tg->config(sample_index(*tg, rng));
    std::vector<int> path;
    for (int i : order) path.push_back(x[i]);
    return path;
  };
}

/// Exact D(P||Phat) for two erasure chains by enumeration over configurations.
inline KLReport kl_erasure_exact(const HypercubeTarget& mu, const HypercubeTarget& muhat, const std::vector<int>& order) {
  require(mu.n() == muhat.n(), "kl_erasure_exact: dimension mismatch");
  const auto P = erasure_kernel(mu, order), Ph = erasure_kernel(muhat, order);
  KLReport r;
  r.exact = true;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu.table()[j] == 0.0) continue;
    const auto x = mu.config(j);
    std::vector<int> path;
    for (int i : order) path.push_back(x[i]);
    double acc = 0.0;
    for (std::size_t l = 0; l < path.size(); ++l) {
      const std::span<const int> h(path.data(), l);
      const double ph = Ph.prob(l, h, path[l]);
      if (ph <= 0.0) {
        r.infinite = true;
        r.flags.push_back("zero approximate probability for configuration " + std::to_string(j));
        r.estimate = std::numeric_limits<double>::infinity();
        return r;
      }
      acc += std::log(P.prob(l, h, path[l])) - std::log(ph);
    }
    r.estimate += mu.table()[j] * acc;
  }
  return r;
}

/// D(mu || muhat) for two tables.
inline double kl_tables(const std::vector<double>& p, const std::vector<double>& q) {
  require(p.size() == q.size(), "kl_tables: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    acc += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return acc;
}

// ---- continuous-time chains ----

/// Delta(r || rhat) = r log(r/rhat) - r + rhat: KL between Poisson(r) and Poisson(rhat).
inline double poisson_divergence(double r, double rhat) {
  if (r < 0.0 || rhat < 0.0) throw DomainError("poisson_divergence: negative rate");
  if (r == 0.0) return rhat;
  if (rhat == 0.0) return std::numeric_limits<double>::infinity();
  return r * (std::log(r) - std::log(rhat)) - r + rhat;
}

/// One possible transition out of the current state: coordinate `coord` moves to `value`.
struct Jump {
  int coord = 0;
  int value = 0;
  double rate = 0.0;
};

using RateFn = std::function<std::vector<Jump>(double t, std::span<const int> y)>;

/// sum_k delta_k E sum_{y'} Delta(r_k(Y_k, y') || rhat_k(Y_k, y')) with rates frozen at the left node.
/// `paths[p][k]` is the state at grid node k.
inline KLReport kl_ctmc(const RateFn& r, const RateFn& rhat, const std::vector<std::vector<std::vector<int>>>& paths,
                        const TimeGrid& grid) {
  std::vector<double> per_path(paths.size(), 0.0);
  std::vector<double> per_time(grid.steps(), 0.0);
  std::vector<std::string> flags;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    require(paths[p].size() >= grid.steps(), "kl_ctmc: path shorter than the grid");
    for (std::size_t k = 0; k < grid.steps() && std::isfinite(per_path[p]); ++k) {
      std::map<std::pair<int, int>, std::pair<double, double>> rates;
      for (const auto& j : r(grid[k], paths[p][k])) rates[{j.coord, j.value}].first += j.rate;
      for (const auto& j : rhat(grid[k], paths[p][k])) rates[{j.coord, j.value}].second += j.rate;
      double acc = 0.0;
      for (const auto& [key, rr] : rates) {
        const double d = poisson_divergence(rr.first, rr.second);
        if (!std::isfinite(d)) {
          if (flags.size() < 8)
            flags.push_back("zero approximate rate for coordinate " + std::to_string(key.first) + " at t = " +
                            format_double(grid[k]));
          acc = std::numeric_limits<double>::infinity();
          break;
        }
        acc += d;
      }
      per_path[p] += acc * grid.delta(k);
      per_time[k] += acc * grid.delta(k) / double(paths.size());
    }
  }
  auto rep = detail::summarize(per_path);
  rep.per_time = std::move(per_time);
  if (!flags.empty()) {
    rep.infinite = true;
    rep.estimate = std::numeric_limits<double>::infinity();
    rep.std_error = 0.0;
    rep.flags = std::move(flags);
  }
  return rep;
}

/// Flip rates p_i(y;t) of the binary symmetric chain.
inline RateFn binary_rate_fn(const MagnetizationDenoiser& den) {
  return [den](double t, std::span<const int> y) {
    const Vec p = binary_rates(y, den(y, t), t);
    std::vector<Jump> out;
    for (std::size_t i = 0; i < y.size(); ++i) out.push_back({static_cast<int>(i), -y[i], p[i]});
    return out;
  };
}

/// Rates p_i(y,z;t) of the q-ary symmetric chain.
inline RateFn qary_rate_fn(const BeliefDenoiser& den) {
  return [den](double t, std::span<const int> y) {
    const Mat p = qary_rates(y, den(y, t), t);
    std::vector<Jump> out;
    for (int i = 0; i < p.rows(); ++i)
      for (int z = 0; z < p.cols(); ++z)
        if (z != y[i]) out.push_back({i, z, p(i, z)});
    return out;
  };
}

/// Increment rates m_k(t;y) of the Poisson observation chain.
inline RateFn poisson_rate_fn(const PoissonDenoiser& den) {
  return [den](double t, std::span<const int> y) {
    const Vec m = den(y, t);
    std::vector<Jump> out;
    for (Eigen::Index k = 0; k < m.size(); ++k) out.push_back({static_cast<int>(k), y[k] + 1, m[k]});
    return out;
  };
}

/// Forward binary-noise states at the grid nodes for exact samples of a hypercube law.
inline std::vector<std::vector<std::vector<int>>> binary_forward_states(const HypercubeTarget& target,
                                                                        const TimeGrid& grid, std::size_t n_paths,
                                                                        std::uint64_t seed) {
  std::vector<std::vector<std::vector<int>>> paths(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    Rng rng = chain_rng(seed, p);
    const auto x = target.config(sample_index(target, rng));
    const auto noise = forward_binary_noise(x, rng, std::min(1e-6, 0.5 * grid.front()));
    for (double t : grid.nodes()) paths[p].push_back(noise.at(t));
  }
  return paths;
}

/// Forward Poisson counts at the grid nodes for exact samples of a nonnegative law.
inline std::vector<std::vector<std::vector<int>>> poisson_forward_states(const NonnegativeTarget& target,
                                                                         const TimeGrid& grid, std::size_t n_paths,
                                                                         std::uint64_t seed) {
  std::vector<std::vector<std::vector<int>>> paths(n_paths);
  const Eigen::Index n = target.dim();
  for (std::size_t p = 0; p < n_paths; ++p) {
    Rng rng = chain_rng(seed, p);
    const Vec x = sample_exact(target, rng);
    std::vector<int> y(n, 0);
    paths[p].push_back(y);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      for (Eigen::Index i = 0; i < n; ++i)
        if (x[i] * grid.delta(k) > 0.0) y[i] += std::poisson_distribution<int>(x[i] * grid.delta(k))(rng);
      paths[p].push_back(y);
    }
  }
  return paths;
}

}  // namespace stochloc

#endif  // STOCHLOC_LOSSES_HPP
