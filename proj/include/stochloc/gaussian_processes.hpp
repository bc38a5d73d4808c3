#ifndef STOCHLOC_GAUSSIAN_PROCESSES_HPP
#define STOCHLOC_GAUSSIAN_PROCESSES_HPP

#include "stochloc/denoisers.hpp"
#include "stochloc/time_grid.hpp"

namespace stochloc {

struct Snapshot {
  double t = 0.0;
  Vec y;
  Vec x;
};

/// One generative run.
struct ChainResult {
  Vec y_final;
  Vec x_final;
  std::vector<Snapshot> snapshots;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
};

/// Y at every grid node for Y_t = t x + W_t (Y = t0 x + sqrt(t0) G at the first node).
inline std::vector<Vec> forward_observation_path(const Vec& x, const TimeGrid& grid, Rng& rng) {
  std::vector<Vec> path;
  path.reserve(grid.size());
  Vec y = grid.front() * x + std::sqrt(grid.front()) * standard_normal(x.size(), rng);
  path.push_back(y);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double d = grid.delta(k);
    y += d * x + std::sqrt(d) * standard_normal(x.size(), rng);
    path.push_back(y);
  }
  return path;
}

/// Q(t) for the anisotropic channel.
class QSchedule {
 public:
  enum class Kind { Identity, Scaled, Constant, Varying };

  static QSchedule identity() { return QSchedule(Kind::Identity); }
  static QSchedule scaled(double s) {
    require(s >= 0.0 && std::isfinite(s), "QSchedule: scale must be >= 0");
    QSchedule q(Kind::Scaled);
    q.scale_ = s;
    return q;
  }
  static QSchedule constant(Mat Q) {
    QSchedule q(Kind::Constant);
    q.Q_ = std::move(Q);
    return q;
  }
  static QSchedule varying(std::function<Mat(double)> fn) {
    QSchedule q(Kind::Varying);
    q.fn_ = std::move(fn);
    return q;
  }

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }

  Mat at(double t, Eigen::Index n) const {
    switch (kind_) {
      case Kind::Identity: return Mat::Identity(n, n);
      case Kind::Scaled: return scale_ * Mat::Identity(n, n);
      case Kind::Constant: return Q_;
      case Kind::Varying: return fn_(t);
    }
    return {};
  }

 private:
  explicit QSchedule(Kind k) : kind_(k) {}
  Kind kind_;
  double scale_ = 1.0;
  Mat Q_;
  std::function<Mat(double)> fn_;
};

/// Q, Q^{1/2} and Omega evaluated on a grid, validated once and shared by all chains.
struct PreparedQ {
  QSchedule::Kind kind = QSchedule::Kind::Identity;
  Eigen::Index n = 0;
  double scale = 1.0;
  std::vector<Mat> Q, Qhalf;          // per node (a single entry when constant)
  std::vector<ChannelPrecision> omega;  // per node

  static PreparedQ prepare(const QSchedule& sched, const TimeGrid& grid, Eigen::Index n) {
    PreparedQ p;
    p.kind = sched.kind();
    p.n = n;
    p.scale = sched.scale();
    const auto& t = grid.nodes();
    p.omega.reserve(t.size());
    switch (sched.kind()) {
      case QSchedule::Kind::Identity:
        for (double tk : t) p.omega.push_back(ChannelPrecision::scalar(tk));
        break;
      case QSchedule::Kind::Scaled:
        for (double tk : t) p.omega.push_back(ChannelPrecision::scalar(p.scale * tk));
        break;
      case QSchedule::Kind::Constant: {
        Mat Q = sched.at(0.0, n);
        require(Q.rows() == n && Q.cols() == n, "QSchedule: Q has wrong shape");
        if (!is_psd(Q)) throw DomainError("QSchedule: Q is not positive semidefinite");
        p.Qhalf.push_back(psd_sqrt(Q));
        for (double tk : t) p.omega.push_back(ChannelPrecision::matrix(tk * Q));
        p.Q.push_back(std::move(Q));
        break;
      }
      case QSchedule::Kind::Varying: {
        Mat omega = grid.front() == 0.0 ? Mat::Zero(n, n) : Mat(sched.at(0.0, n) * grid.front());
        for (std::size_t k = 0; k < t.size(); ++k) {
          Mat Q = sched.at(t[k], n);
          require(Q.rows() == n && Q.cols() == n, "QSchedule: Q has wrong shape");
          if (!is_psd(Q))
            throw DomainError("QSchedule: Q(t) is not positive semidefinite at t = " + format_double(t[k]));
          p.omega.push_back(ChannelPrecision::matrix(omega));
          if (k + 1 < t.size()) omega += Q * grid.delta(k);
          p.Qhalf.push_back(psd_sqrt(Q));
          p.Q.push_back(std::move(Q));
        }
        break;
      }
    }
    return p;
  }

  const Mat& Q_at(std::size_t k) const { return Q.size() == 1 ? Q[0] : Q[k]; }
  const Mat& Qhalf_at(std::size_t k) const { return Qhalf.size() == 1 ? Qhalf[0] : Qhalf[k]; }
};

namespace detail {

inline std::vector<std::size_t> snapshot_nodes(const TimeGrid& grid, std::span<const double> times) {
  std::vector<std::size_t> nodes;
  for (double s : times) {
    const auto& t = grid.nodes();
    auto it = std::lower_bound(t.begin(), t.end(), s);
    if (it == t.end()) continue;
    nodes.push_back(static_cast<std::size_t>(it - t.begin()));
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

}  // namespace detail

/// Euler scheme Y_{k+1} = Y_k + Q_k m(Y_k; Omega_k) d_k + Q_k^{1/2} G_k sqrt(d_k), Y_0 = 0.
/// Returns X_T = m(Y_m; Omega_m).
inline ChainResult simulate_anisotropic(const AnisotropicDenoiser& den, const PreparedQ& Q, const TimeGrid& grid,
                                        Rng& rng, std::span<const double> snapshot_times = {}) {
  const Eigen::Index n = den.dim;
  require(Q.n == n, "simulate_anisotropic: schedule dimension mismatch");
  require(Q.omega.size() == grid.size(), "simulate_anisotropic: schedule prepared on a different grid");
  require(grid.front() == 0.0, "simulate_anisotropic: grid must start at t = 0");
  const auto snaps = detail::snapshot_nodes(grid, snapshot_times);
  auto next_snap = snaps.begin();
  ChainResult out;
  Vec y = Vec::Zero(n);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double d = grid.delta(k);
    Vec m = den(y, Q.omega[k]);
    if (m.size() != n || !m.allFinite()) throw ChainFailure("non-finite drift", k);
    if (next_snap != snaps.end() && *next_snap == k) {
      out.snapshots.push_back({grid[k], y, m});
      ++next_snap;
    }
    Vec g = standard_normal(n, rng);
    switch (Q.kind) {
      case QSchedule::Kind::Identity: y += d * m + std::sqrt(d) * g; break;
      case QSchedule::Kind::Scaled: y += (d * Q.scale) * m + std::sqrt(d * Q.scale) * g; break;
      default: y += d * (Q.Q_at(k) * m) + std::sqrt(d) * (Q.Qhalf_at(k) * g); break;
    }
    if (!y.allFinite()) throw ChainFailure("non-finite state", k);
    ++out.steps;
  }
  out.x_final = den(y, Q.omega.back());
  if (!out.x_final.allFinite()) throw ChainFailure("non-finite final denoiser output", grid.steps());
  if (next_snap != snaps.end() && *next_snap == grid.steps())
    out.snapshots.push_back({grid.back(), y, out.x_final});
  out.y_final = std::move(y);
  return out;
}

inline ChainResult simulate_anisotropic(const AnisotropicDenoiser& den, const QSchedule& Q, const TimeGrid& grid,
                                        Rng& rng, std::span<const double> snapshot_times = {}) {
  return simulate_anisotropic(den, PreparedQ::prepare(Q, grid, den.dim), grid, rng, snapshot_times);
}

namespace detail {

inline AnisotropicDenoiser as_scalar_channel(const GaussianDenoiser& den) {
  return {den.dim, [&den](const Vec& y, const ChannelPrecision& w) { return den(y, w.t); }};
}

}  // namespace detail

/// Explicit Euler discretization of dY = m(Y;t) dt + dB from Y_0 = 0.
inline ChainResult simulate_isotropic(const GaussianDenoiser& den, const TimeGrid& grid, Rng& rng,
                                      std::span<const double> snapshot_times = {}) {
  require(den.channel == Channel::IsotropicGaussian || den.channel == Channel::LinearObservation,
          std::string("simulate_isotropic: denoiser serves the ") + channel_name(den.channel) + " channel");
  PreparedQ Q;
  Q.n = den.dim;
  Q.omega.reserve(grid.size());
  for (double t : grid.nodes()) Q.omega.push_back(ChannelPrecision::scalar(t));
  return simulate_anisotropic(detail::as_scalar_channel(den), Q, grid, rng, snapshot_times);
}

/// Observation operator with its pseudoinverse, prepared once.
class LinearObservationModel {
 public:
  explicit LinearObservationModel(Mat A) : A_(std::move(A)) {
    require(A_.rows() >= 1 && A_.cols() >= 1, "LinearObservationModel: empty operator");
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(A_);
    rank_ = cod.rank();
    pinv_ = cod.pseudoInverse();
  }
  const Mat& A() const { return A_; }
  const Mat& pinv() const { return pinv_; }
  bool full_column_rank() const { return rank_ == A_.cols(); }

 private:
  Mat A_;
  Mat pinv_;
  Eigen::Index rank_ = 0;
};

struct LinearObsResult {
  ChainResult chain;   // chain.x_final = m_A(Y_T; T) in observation space
  Vec x_pinv;          // A^+ Y_T / T
  Vec x_denoised;      // decode(m_A(Y_T; T)); A^+ m_A by default
};

/// dY = m_A(Y;t) dt + dB with Y in R^m. `decode` maps the final m_A to x-space (default: A^+ m_A).
inline LinearObsResult simulate_linear_observation(const GaussianDenoiser& den, const LinearObservationModel& model,
                                                   const TimeGrid& grid, Rng& rng,
                                                   const std::function<Vec(const Vec&)>& decode = {},
                                                   std::span<const double> snapshot_times = {}) {
  require(den.dim == model.A().rows(), "simulate_linear_observation: denoiser dimension differs from rows of A");
  if (!decode && !model.full_column_rank())
    throw ValidationError("simulate_linear_observation: pseudoinverse decode needs A of full column rank");
  LinearObsResult r;
  r.chain = simulate_isotropic(den, grid, rng, snapshot_times);
  if (model.full_column_rank()) r.x_pinv = model.pinv() * r.chain.y_final / grid.back();
  r.x_denoised = decode ? decode(r.chain.x_final) : Vec(model.pinv() * r.chain.x_final);
  return r;
}

/// Reverse-OU coefficients in the t clock: Ybar_t = Y_t / sqrt(t(1+t)).
inline double reverse_ou_linear_coefficient(double t) { return -(1.0 + 2.0 * t) / (2.0 * t * (1.0 + t)); }
inline double reverse_ou_diffusion(double t) { return 1.0 / (t * (1.0 + t)); }

/// Drift Fbar(ybar; t) = -(1+2t)/(2t(1+t)) ybar + m(s ybar; t)/s with s = sqrt(t(1+t)).
inline Vec reverse_ou_drift(const GaussianDenoiser& den, const Vec& ybar, double t) {
  const double s = std::sqrt(t * (1.0 + t));
  return reverse_ou_linear_coefficient(t) * ybar + den(s * ybar, t) / s;
}

/// Euler steps of dYbar = Fbar dt + sqrt(gbar) dB starting from Ybar ~ N(0, I) at the first node.
/// y_final is reported on the observation scale, Y_T = sqrt(T(1+T)) Ybar_T; x_final = m(Y_T; T).
inline ChainResult simulate_reverse_ou(const GaussianDenoiser& den, const TimeGrid& grid, Rng& rng,
                                       std::span<const double> snapshot_times = {}) {
  require(den.channel == Channel::IsotropicGaussian, "simulate_reverse_ou: needs an isotropic-gaussian denoiser");
  if (grid.front() <= 0.0) throw DomainError("reverse OU undefined at t=0");
  const Eigen::Index n = den.dim;
  const auto snaps = detail::snapshot_nodes(grid, snapshot_times);
  auto next_snap = snaps.begin();
  ChainResult out;
  Vec yb = standard_normal(n, rng);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid[k], d = grid.delta(k);
    const double s = std::sqrt(t * (1.0 + t));
    Vec m = den(s * yb, t);
    if (!m.allFinite()) throw ChainFailure("non-finite drift", k);
    if (next_snap != snaps.end() && *next_snap == k) {
      out.snapshots.push_back({t, s * yb, m});
      ++next_snap;
    }
    Vec g = standard_normal(n, rng);
    yb += d * (reverse_ou_linear_coefficient(t) * yb + m / s) + std::sqrt(reverse_ou_diffusion(t) * d) * g;
    if (!yb.allFinite()) throw ChainFailure("non-finite state", k);
    ++out.steps;
  }
  const double T = grid.back();
  out.y_final = std::sqrt(T * (1.0 + T)) * yb;
  out.x_final = den(out.y_final, T);
  if (next_snap != snaps.end() && *next_snap == grid.steps())
    out.snapshots.push_back({T, out.y_final, out.x_final});
  return out;
}

}  // namespace stochloc

#endif  // STOCHLOC_GAUSSIAN_PROCESSES_HPP
