#ifndef STOCHLOC_DISCRETE_PROCESSES_HPP
#define STOCHLOC_DISCRETE_PROCESSES_HPP

#include "stochloc/gaussian_processes.hpp"

#include <numeric>

namespace stochloc {

// ---- erasure ----

/// Order in which coordinates are revealed: a fixed permutation, or i.i.d. uniform reveal times.
class RevealOrder {
 public:
  enum class Tag { UniformRandomTimes, FixedOrder };

  static RevealOrder fixed(std::vector<int> perm) {
    std::vector<int> check = perm;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < check.size(); ++i)
      require(check[i] == static_cast<int>(i), "RevealOrder: fixed order must be a permutation of 0..n-1");
    return RevealOrder(Tag::FixedOrder, std::move(perm));
  }
  static RevealOrder uniform_random_times() { return RevealOrder(Tag::UniformRandomTimes, {}); }

  Tag tag() const { return tag_; }
  const std::vector<int>& permutation() const { return perm_; }

  /// Concrete sequence of coordinates for one run.
  std::vector<int> realize(int n, Rng& rng) const {
    if (tag_ == Tag::FixedOrder) {
      require(static_cast<int>(perm_.size()) == n, "RevealOrder: permutation length differs from n");
      return perm_;
    }
    std::vector<std::pair<double, int>> times(n);
    for (int i = 0; i < n; ++i) times[i] = {uniform01(rng), i};
    std::sort(times.begin(), times.end());
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) out[i] = times[i].second;
    return out;
  }

 private:
  RevealOrder(Tag tag, std::vector<int> perm) : tag_(tag), perm_(std::move(perm)) {}
  Tag tag_;
  std::vector<int> perm_;
};

namespace detail {

/// Sequential sampling over a finite table: each revealed coordinate is drawn from its exact conditional
/// given the coordinates revealed so far. Returns the index of the resulting configuration.
template <class ValueFn>
std::size_t erasure_on_table(const std::vector<double>& weights, int n, ValueFn&& value,
                             const std::vector<int>& order, Rng& rng) {
  std::vector<std::size_t> alive;
  alive.reserve(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j)
    if (weights[j] > 0.0) alive.push_back(j);
  std::vector<double> w;
  for (int step = 0; step < n; ++step) {
    const int i = order[step];
    w.resize(alive.size());
    for (std::size_t a = 0; a < alive.size(); ++a) w[a] = weights[alive[a]];
    // Drawing a consistent configuration and reading coordinate i is a draw from the conditional of x_i.
    const auto v = value(alive[sample_categorical(w, rng)], i);
    std::erase_if(alive, [&](std::size_t j) { return value(j, i) != v; });
    if (alive.empty()) throw InternalConsistencyError("simulate_erasure: conditioning event of zero mass");
  }
  return alive.front();
}

}  // namespace detail

inline std::size_t simulate_erasure_index(const HypercubeTarget& target, const RevealOrder& order, Rng& rng) {
  const auto seq = order.realize(target.n(), rng);
  return detail::erasure_on_table(target.table(), target.n(),
                                  [&](std::size_t j, int i) { return target.bit(j, i); }, seq, rng);
}

inline std::size_t simulate_erasure_index(const QaryTarget& target, const RevealOrder& order, Rng& rng) {
  const auto seq = order.realize(target.n(), rng);
  const int n = target.n(), q = target.q();
  std::vector<std::size_t> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * q;
  return detail::erasure_on_table(target.table(), n,
                                  [&](std::size_t j, int i) { return (j / stride[i]) % q; }, seq, rng);
}

inline std::size_t simulate_erasure_index(const DiscreteTarget& target, const RevealOrder& order, Rng& rng) {
  const int n = static_cast<int>(target.dim());
  const auto seq = order.realize(n, rng);
  return detail::erasure_on_table(target.weights(), n,
                                  [&](std::size_t j, int i) { return target.atoms()[j][i]; }, seq, rng);
}

template <class Target>
Vec simulate_erasure(const Target& target, const RevealOrder& order, Rng& rng) {
  const std::size_t j = simulate_erasure_index(target, order, rng);
  if constexpr (std::is_same_v<Target, DiscreteTarget>)
    return target.atoms()[j];
  else
    return target.point(j);
}

// ---- symmetric noising channels ----

/// Backward-resampling construction: per coordinate, arrival times 1 > T_1 > T_2 > ... of a Poisson process
/// with intensity dt/t (T_1 = U_1, T_{l+1} = T_l U_{l+1}); value at the arrival T_l is R_l ~ Unif.
/// Y_t = x_i if T_1 < t, and R_l if T_{l+1} < t <= T_l.
struct SymmetricNoisePath {
  std::vector<int> x;
  std::vector<std::vector<std::pair<double, int>>> arrivals;  // per coordinate, decreasing times
  double floor = 0.0;

  std::vector<int> at(double t) const {
    std::vector<int> y = x;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (const auto& [T, R] : arrivals[i]) {
        if (T < t) break;
        y[i] = R;
      }
    return y;
  }
};

namespace detail {

template <class Draw>
SymmetricNoisePath symmetric_noise(std::span<const int> x, Rng& rng, double floor, Draw&& draw) {
  require(floor > 0.0 && floor < 1.0, "forward noise: floor must lie in (0,1)");
  SymmetricNoisePath p{std::vector<int>(x.begin(), x.end()), {}, floor};
  p.arrivals.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double T = 1.0;
    while (true) {
      T *= uniform01(rng);
      if (T < floor) break;
      p.arrivals[i].push_back({T, draw(rng)});
    }
  }
  return p;
}

}  // namespace detail

/// Forward binary noise, resolved down to time `floor`.
inline SymmetricNoisePath forward_binary_noise(std::span<const int> x, Rng& rng, double floor = 1e-6) {
  for (int v : x) require(v == 1 || v == -1, "forward_binary_noise: entries must be +1 or -1");
  return detail::symmetric_noise(x, rng, floor, [](Rng& r) { return uniform01(r) < 0.5 ? 1 : -1; });
}

/// Forward q-ary noise with resampling uniform on {0..q-1}.
inline SymmetricNoisePath forward_qary_noise(std::span<const int> x, int q, Rng& rng, double floor = 1e-6) {
  require(q >= 2, "forward_qary_noise: q must be >= 2");
  for (int v : x) require(v >= 0 && v < q, "forward_qary_noise: symbol out of range");
  return detail::symmetric_noise(x, rng, floor, [q](Rng& r) {
    return static_cast<int>(std::uniform_int_distribution<int>(0, q - 1)(r));
  });
}

/// Thinning controls for the rate-driven samplers.
struct ThinningOptions {
  double cap = 0.02;              // max per-step jump probability rate * delta
  double rate_tolerance = 1e-9;   // negative rates within this are clamped to 0
};

struct DiscreteChainResult {
  std::vector<int> y_final;  // state of the chain at the last grid node
  std::vector<int> output;   // decoded sample
  std::size_t steps = 0;
  std::vector<std::pair<double, std::vector<int>>> snapshots;
};

namespace detail {

inline double checked_rate(double p, double tol, const char* what) {
  if (p < 0.0) {
    if (p < -tol) throw InternalConsistencyError(std::string(what) + ": negative transition rate " + format_double(p));
    return 0.0;
  }
  if (!std::isfinite(p)) throw InternalConsistencyError(std::string(what) + ": non-finite transition rate");
  return p;
}

}  // namespace detail

/// Binary symmetric rates p_i = (1+t^2)/(2t(1-t^2)) - y_i m_i/(1-t^2).
inline Vec binary_rates(std::span<const int> y, const Vec& m, double t, double tol = 1e-9) {
  Vec p(static_cast<Eigen::Index>(y.size()));
  const double base = (1.0 + t * t) / (2.0 * t * (1.0 - t * t));
  for (std::size_t i = 0; i < y.size(); ++i)
    p[i] = detail::checked_rate(base - y[i] * m[i] / (1.0 - t * t), tol, "binary_rates");
  return p;
}

/// Generative binary symmetric chain from Y ~ Unif at grid.front() to grid.back(), thinned with an
/// adaptive sub-step so that every flip probability stays <= cap. Output: sign(m) at the last node, ties to y_i.
inline DiscreteChainResult simulate_binary_symmetric(const MagnetizationDenoiser& den, int n, const TimeGrid& grid,
                                                     Rng& rng, const ThinningOptions& opt = {},
                                                     std::span<const double> snapshot_times = {}) {
  require(den.n == n, "simulate_binary_symmetric: denoiser dimension mismatch");
  require(grid.front() > 0.0 && grid.back() < 1.0, "simulate_binary_symmetric: grid must lie inside (0,1)");
  const auto snaps = detail::snapshot_nodes(grid, snapshot_times);
  auto next_snap = snaps.begin();
  DiscreteChainResult out;
  std::vector<int> y(n);
  for (int& v : y) v = uniform01(rng) < 0.5 ? 1 : -1;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    if (next_snap != snaps.end() && *next_snap == k) {
      out.snapshots.push_back({grid[k], y});
      ++next_snap;
    }
    double t = grid[k];
    const double t_end = grid[k + 1];
    while (t < t_end) {
      const Vec m = den(y, t);
      if (!m.allFinite()) throw ChainFailure("non-finite magnetization", out.steps);
      const Vec p = binary_rates(y, m, t, opt.rate_tolerance);
      const double pmax = p.maxCoeff();
      double d = t_end - t;
      bool last = true;
      if (pmax * d > opt.cap) {
        d = opt.cap / pmax;
        last = false;
      }
      for (int i = 0; i < n; ++i)
        if (uniform01(rng) < p[i] * d) y[i] = -y[i];
      t = last ? t_end : t + d;
      ++out.steps;
    }
  }
  const Vec m = den(y, grid.back());
  out.output = y;
  for (int i = 0; i < n; ++i)
    if (m[i] != 0.0) out.output[i] = m[i] > 0.0 ? 1 : -1;
  if (next_snap != snaps.end() && *next_snap == grid.steps()) out.snapshots.push_back({grid.back(), y});
  out.y_final = std::move(y);
  return out;
}

/// q-ary rates p_i(y,z;t) = 1/(qt) + b_i(z)/(1-t) - b_i(y_i)/(1+(q-1)t) for z != y_i (0 on the diagonal).
inline Mat qary_rates(std::span<const int> y, const Mat& b, double t, double tol = 1e-9) {
  const int n = static_cast<int>(b.rows()), q = static_cast<int>(b.cols());
  Mat p = Mat::Zero(n, q);
  for (int i = 0; i < n; ++i) {
    const double stay = b(i, y[i]) / (1.0 + (q - 1) * t);
    for (int z = 0; z < q; ++z)
      if (z != y[i]) p(i, z) = detail::checked_rate(1.0 / (q * t) + b(i, z) / (1.0 - t) - stay, tol, "qary_rates");
  }
  return p;
}

/// Generative q-ary symmetric chain; output is the per-coordinate argmax belief at the last node (ties to y_i).
inline DiscreteChainResult simulate_qary_symmetric(const BeliefDenoiser& den, int q, int n, const TimeGrid& grid,
                                                   Rng& rng, const ThinningOptions& opt = {}) {
  require(den.n == n && den.q == q, "simulate_qary_symmetric: denoiser shape mismatch");
  require(grid.front() > 0.0 && grid.back() < 1.0, "simulate_qary_symmetric: grid must lie inside (0,1)");
  DiscreteChainResult out;
  std::vector<int> y(n);
  std::uniform_int_distribution<int> sym(0, q - 1);
  for (int& v : y) v = sym(rng);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    double t = grid[k];
    const double t_end = grid[k + 1];
    while (t < t_end) {
      const Mat b = den(y, t);
      if (!b.allFinite()) throw ChainFailure("non-finite belief", out.steps);
      const Mat p = qary_rates(y, b, t, opt.rate_tolerance);
      const double pmax = p.rowwise().sum().maxCoeff();
      double d = t_end - t;
      bool last = true;
      if (pmax * d > opt.cap) {
        d = opt.cap / pmax;
        last = false;
      }
      for (int i = 0; i < n; ++i) {
        double u = uniform01(rng);
        for (int z = 0; z < q; ++z) {
          if (z == y[i]) continue;
          u -= p(i, z) * d;
          if (u < 0.0) {
            y[i] = z;
            break;
          }
        }
      }
      t = last ? t_end : t + d;
      ++out.steps;
    }
  }
  const Mat b = den(y, grid.back());
  out.output = y;
  for (int i = 0; i < n; ++i) {
    int best = y[i];
    for (int z = 0; z < q; ++z)
      if (b(i, z) > b(i, best)) best = z;
    out.output[i] = best;
  }
  out.y_final = std::move(y);
  return out;
}

// ---- Poisson observation ----

struct PoissonChainResult {
  std::vector<int> y_final;
  Vec x_decoded;  // m(T; Y_T)
  std::size_t steps = 0;
  std::vector<std::pair<double, std::vector<int>>> snapshots;
};

/// Counts start at 0 and increase by one with probability m_k(t;Y) delta per sub-step (adaptive delta
/// keeps m_k delta <= cap). Decode x = m(T; Y_T).
inline PoissonChainResult simulate_poisson_observation(const PoissonDenoiser& den, int n, const TimeGrid& grid,
                                                       Rng& rng, double cap = 0.1,
                                                       std::span<const double> snapshot_times = {}) {
  require(den.n == n, "simulate_poisson_observation: denoiser dimension mismatch");
  require(grid.front() == 0.0, "simulate_poisson_observation: grid must start at t = 0");
  const auto snaps = detail::snapshot_nodes(grid, snapshot_times);
  auto next_snap = snaps.begin();
  PoissonChainResult out;
  std::vector<int> y(n, 0);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    if (next_snap != snaps.end() && *next_snap == k) {
      out.snapshots.push_back({grid[k], y});
      ++next_snap;
    }
    double t = grid[k];
    const double t_end = grid[k + 1];
    while (t < t_end) {
      const Vec m = den(y, t);
      if (!m.allFinite()) throw ChainFailure("non-finite intensity", out.steps);
      if (m.minCoeff() < 0.0) throw DomainError("simulate_poisson_observation: negative intensity m_k");
      const double mmax = m.maxCoeff();
      double d = t_end - t;
      bool last = true;
      if (mmax * d > cap) {
        d = cap / mmax;
        last = false;
      }
      for (int i = 0; i < n; ++i)
        if (uniform01(rng) < m[i] * d) ++y[i];
      t = last ? t_end : t + d;
      ++out.steps;
    }
  }
  out.x_decoded = den(y, grid.back());
  if (next_snap != snaps.end() && *next_snap == grid.steps()) out.snapshots.push_back({grid.back(), y});
  out.y_final = std::move(y);
  return out;
}

// ---- information percolation ----

struct GridEdge {
  int o_row, o_col, t_row, t_col;
};

/// Ordered, oriented edges of a rows x cols pixel grid. Cells are visited in row-major order; each emits
/// its right edge then its down edge. Origin is the left/top pixel.
class EdgeSchedule {
 public:
  static EdgeSchedule grid(int rows, int cols) {
    require(rows >= 1 && cols >= 1, "EdgeSchedule: grid must be at least 1x1");
    EdgeSchedule s;
    s.rows_ = rows;
    s.cols_ = cols;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        if (c + 1 < cols) s.edges_.push_back({r, c, r, c + 1});
        if (r + 1 < rows) s.edges_.push_back({r, c, r + 1, c});
      }
    return s;
  }

  static EdgeSchedule from_edges(int rows, int cols, std::vector<GridEdge> edges) {
    EdgeSchedule s;
    s.rows_ = rows;
    s.cols_ = cols;
    for (const auto& e : edges) {
      require(e.o_row >= 0 && e.o_row < rows && e.t_row >= 0 && e.t_row < rows && e.o_col >= 0 &&
                  e.o_col < cols && e.t_col >= 0 && e.t_col < cols,
              "EdgeSchedule: edge endpoint outside the grid");
      require(std::abs(e.o_row - e.t_row) + std::abs(e.o_col - e.t_col) == 1, "EdgeSchedule: not a grid edge");
    }
    for (std::size_t a = 0; a < edges.size(); ++a)
      for (std::size_t b = a + 1; b < edges.size(); ++b) {
        const auto &x = edges[a], &y = edges[b];
        const bool same = (x.o_row == y.o_row && x.o_col == y.o_col && x.t_row == y.t_row && x.t_col == y.t_col) ||
                          (x.o_row == y.t_row && x.o_col == y.t_col && x.t_row == y.o_row && x.t_col == y.o_col);
        require(!same, "EdgeSchedule: duplicate edge");
      }
    s.edges_ = std::move(edges);
    return s;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<GridEdge>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  int cell(int r, int c) const { return r * cols_ + c; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<GridEdge> edges_;
};

struct PercolationResult {
  std::vector<int> differences;  // x_t - x_o along each edge, in schedule order
  std::vector<int> anchored;     // x with cell (0,0) fixed to its posterior-MAP value
};

/// Reveals x_t - x_o edge by edge, each drawn from its exact conditional given the differences so far.
/// The target is a q-ary table over the rows*cols cells in row-major order.
inline PercolationResult simulate_information_percolation(const QaryTarget& target, const EdgeSchedule& schedule,
                                                          Rng& rng) {
  require(target.n() == schedule.rows() * schedule.cols(),
          "simulate_information_percolation: target dimension differs from the grid size");
  const int n = target.n(), q = target.q();
  std::vector<std::size_t> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * q;
  auto value = [&](std::size_t j, int cell) { return static_cast<int>((j / stride[cell]) % q); };
  std::vector<std::size_t> alive;
  for (std::size_t j = 0; j < target.size(); ++j)
    if (target.table()[j] > 0.0) alive.push_back(j);
  PercolationResult out;
  std::vector<double> w;
  for (const auto& e : schedule.edges()) {
    const int o = schedule.cell(e.o_row, e.o_col), t = schedule.cell(e.t_row, e.t_col);
    w.resize(alive.size());
    for (std::size_t a = 0; a < alive.size(); ++a) w[a] = target.table()[alive[a]];
    const std::size_t pick = alive[sample_categorical(w, rng)];
    const int d = value(pick, t) - value(pick, o);
    out.differences.push_back(d);
    std::erase_if(alive, [&](std::size_t j) { return value(j, t) - value(j, o) != d; });
    if (alive.empty()) throw InternalConsistencyError("simulate_information_percolation: inconsistent differences");
  }
  // Anchor: MAP value of x_(0,0) given every revealed difference, then the consistent configuration.
  std::vector<double> marg(q, 0.0);
  for (std::size_t j : alive) marg[value(j, 0)] += target.table()[j];
  const int x00 = static_cast<int>(std::max_element(marg.begin(), marg.end()) - marg.begin());
  for (std::size_t j : alive)
    if (value(j, 0) == x00) {
      out.anchored = target.config(j);
      break;
    }
  return out;
}

/// Exact law of the difference vector under the target, keyed by the difference vector.
inline std::vector<std::pair<std::vector<int>, double>> percolation_difference_law(const QaryTarget& target,
                                                                                 const EdgeSchedule& schedule) {
  std::vector<std::pair<std::vector<int>, double>> law;
  for (std::size_t j = 0; j < target.size(); ++j) {
    const auto x = target.config(j);
    std::vector<int> d;
    for (const auto& e : schedule.edges())
      d.push_back(x[schedule.cell(e.t_row, e.t_col)] - x[schedule.cell(e.o_row, e.o_col)]);
    auto it = std::find_if(law.begin(), law.end(), [&](const auto& p) { return p.first == d; });
    if (it == law.end())
      law.push_back({d, target.table()[j]});
    else
      it->second += target.table()[j];
  }
  std::sort(law.begin(), law.end());
  return law;
}

// ---- half-space fix for two-mode targets ----

struct Split {
  Vec v;
  double qhat = 0.0;
};

/// Top eigenvector of sum x x^T / N with q = #{<x,v> >= 0}/N; the sign of v makes q >= 1/2,
/// ties broken by making the first nonzero coordinate of v positive.
inline Split estimate_split(const std::vector<Vec>& samples) {
  require(samples.size() >= 2, "estimate_split: need at least two samples");
  const Eigen::Index n = samples.front().size();
  Mat X(static_cast<Eigen::Index>(samples.size()), n);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require(samples[i].size() == n, "estimate_split: samples of unequal dimension");
    X.row(static_cast<Eigen::Index>(i)) = samples[i].transpose();
  }
  if (X.squaredNorm() == 0.0) throw ValidationError("estimate_split: all samples are zero");
  const Mat S = (X.transpose() * X) / double(samples.size());
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  Vec v = es.eigenvectors().col(n - 1);
  const Vec proj = X * v;
  const double N = double(samples.size());
  const double q_pos = double((proj.array() >= 0.0).count()) / N;
  const double q_neg = double((proj.array() <= 0.0).count()) / N;
  bool flip = q_neg > q_pos;
  if (q_neg == q_pos) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (v[i] != 0.0) {
        flip = v[i] < 0.0;
        break;
      }
  }
  if (flip) v = -v;
  return {v, flip ? q_neg : q_pos};
}

struct HalfspaceResult {
  ChainResult chain;
  int S = 0;
};

/// Draws S with P(S=+1) = qhat, then runs the isotropic sampler with m_S.
inline HalfspaceResult simulate_halfspace_mixture(double qhat, const GaussianDenoiser& plus,
                                                  const GaussianDenoiser& minus, const TimeGrid& grid, Rng& rng) {
  require(qhat >= 0.0 && qhat <= 1.0, "simulate_halfspace_mixture: qhat must lie in [0,1]");
  require(plus.dim == minus.dim, "simulate_halfspace_mixture: denoiser dimensions differ");
  HalfspaceResult r;
  r.S = uniform01(rng) < qhat ? 1 : -1;
  r.chain = simulate_isotropic(r.S == 1 ? plus : minus, grid, rng);
  return r;
}

// ---- combined processes ----

/// Reveal events (time, coordinate) of an erasure process running on the Gaussian clock.
class RevealSchedule {
 public:
  RevealSchedule() = default;
  explicit RevealSchedule(std::vector<std::pair<double, int>> events) : events_(std::move(events)) {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < events_.size(); ++i)
      for (std::size_t j = i + 1; j < events_.size(); ++j)
        require(events_[i].second != events_[j].second, "RevealSchedule: coordinate revealed twice");
  }

  /// Fixed order revealed at the given times.
  static RevealSchedule at_times(const std::vector<int>& order, const std::vector<double>& times) {
    require(order.size() == times.size(), "RevealSchedule: order and times differ in length");
    std::vector<std::pair<double, int>> ev;
    for (std::size_t i = 0; i < order.size(); ++i) ev.push_back({times[i], order[i]});
    return RevealSchedule(std::move(ev));
  }

  const std::vector<std::pair<double, int>>& events() const { return events_; }
  bool empty() const { return events_.empty(); }

  /// Joint history of two erasure processes: events merged by time (stable on ties).
  friend RevealSchedule combine(const RevealSchedule& a, const RevealSchedule& b) {
    std::vector<std::pair<double, int>> ev = a.events_;
    ev.insert(ev.end(), b.events_.begin(), b.events_.end());
    return RevealSchedule(std::move(ev));
  }

 private:
  std::vector<std::pair<double, int>> events_;
};

/// Partial observation of coordinates: revealed[i] holds x_i once revealed.
using Revealed = std::vector<std::optional<double>>;

/// E[x | Y_t = y, revealed coordinates] for a discrete target: Gaussian tilt restricted to consistent atoms.
inline Vec combined_posterior_mean(const DiscreteTarget& target, const Vec& y, double t, const Revealed& revealed) {
  detail::check_obs(y, target.dim(), "combined_posterior_mean");
  require(static_cast<Eigen::Index>(revealed.size()) == target.dim(),
          "combined_posterior_mean: revealed vector has wrong length");
  const auto& atoms = target.atoms();
  std::vector<double> logw(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    bool ok = true;
    for (std::size_t i = 0; i < revealed.size() && ok; ++i)
      if (revealed[i] && atoms[j][static_cast<Eigen::Index>(i)] != *revealed[i]) ok = false;
    logw[j] = ok ? target.log_weights()[j] + atoms[j].dot(y) - 0.5 * t * atoms[j].squaredNorm()
                 : -std::numeric_limits<double>::infinity();
  }
  return detail::weighted_atoms(logw, atoms, target.dim(), "combined_posterior_mean");
}

/// Posterior law of coordinate i given (Y_t, revealed): distinct values with probabilities.
inline std::vector<std::pair<double, double>> combined_coordinate_law(const DiscreteTarget& target, const Vec& y,
                                                                      double t, const Revealed& revealed, int i) {
  const auto& atoms = target.atoms();
  std::vector<double> logw(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    bool ok = true;
    for (std::size_t c = 0; c < revealed.size() && ok; ++c)
      if (revealed[c] && atoms[j][static_cast<Eigen::Index>(c)] != *revealed[c]) ok = false;
    logw[j] = ok ? target.log_weights()[j] + atoms[j].dot(y) - 0.5 * t * atoms[j].squaredNorm()
                 : -std::numeric_limits<double>::infinity();
  }
  if (!softmax_inplace(logw)) throw InconsistentObservation("combined_coordinate_law: zero posterior mass");
  std::vector<std::pair<double, double>> law;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (logw[j] == 0.0) continue;
    const double v = atoms[j][i];
    auto it = std::find_if(law.begin(), law.end(), [&](const auto& p) { return p.first == v; });
    if (it == law.end())
      law.push_back({v, logw[j]});
    else
      it->second += logw[j];
  }
  return law;
}

struct CombinedResult {
  ChainResult chain;
  Revealed revealed;
};

/// Isotropic Gaussian channel combined with an erasure process. At each grid node the coordinates whose
/// reveal time has passed are drawn from their exact conditional given (Y, revealed so far); the drift is the
/// joint posterior mean. With an empty schedule the run coincides with simulate_isotropic draw for draw.
inline CombinedResult simulate_gaussian_erasure(const DiscreteTarget& target, const RevealSchedule& schedule,
                                                const TimeGrid& grid, Rng& rng) {
  require(grid.front() == 0.0, "simulate_gaussian_erasure: grid must start at t = 0");
  const Eigen::Index n = target.dim();
  for (const auto& [time, c] : schedule.events())
    require(c >= 0 && c < n, "simulate_gaussian_erasure: reveal coordinate out of range");
  CombinedResult out;
  out.revealed.assign(static_cast<std::size_t>(n), std::nullopt);
  auto next = schedule.events().begin();
  Vec y = Vec::Zero(n);
  auto reveal_until = [&](double t) {
    while (next != schedule.events().end() && next->first <= t) {
      const auto law = combined_coordinate_law(target, y, t, out.revealed, next->second);
      std::vector<double> p;
      for (const auto& pr : law) p.push_back(pr.second);
      out.revealed[static_cast<std::size_t>(next->second)] = law[sample_categorical(p, rng)].first;
      ++next;
    }
  };
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double d = grid.delta(k);
    reveal_until(grid[k]);
    Vec m = combined_posterior_mean(target, y, grid[k], out.revealed);
    if (!m.allFinite()) throw ChainFailure("non-finite drift", k);
    Vec g = standard_normal(n, rng);
    y += d * m + std::sqrt(d) * g;
    ++out.chain.steps;
  }
  reveal_until(grid.back());
  out.chain.x_final = combined_posterior_mean(target, y, grid.back(), out.revealed);
  out.chain.y_final = std::move(y);
  return out;
}

}  // namespace stochloc

#endif  // STOCHLOC_DISCRETE_PROCESSES_HPP
