#ifndef STOCHLOC_TARGETS_HPP
#define STOCHLOC_TARGETS_HPP

#include "stochloc/common.hpp"

#include <numbers>
#include <optional>
#include <utility>
#include <variant>

namespace stochloc {

namespace detail {

inline void check_table(const std::vector<double>& table, std::size_t expected, const char* what) {
  if (table.size() != expected)
    throw ValidationError(std::string(what) + ": table has " + std::to_string(table.size()) +
                          " entries, expected " + std::to_string(expected));
  double sum = 0.0;
  for (double p : table) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError(std::string(what) + ": negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance)
    throw ValidationError(std::string(what) + ": probabilities sum to " + format_double(sum));
}

inline std::vector<double> safe_log(const std::vector<double>& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    out[i] = p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace detail

/// Finite mixture of point masses in R^n.
class DiscreteTarget {
 public:
  DiscreteTarget(std::vector<Vec> atoms, std::vector<double> weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    require(!atoms_.empty(), "DiscreteTarget: no atoms");
    detail::check_table(weights_, atoms_.size(), "DiscreteTarget");
    dim_ = atoms_.front().size();
    require(dim_ >= 1, "DiscreteTarget: atoms must have dimension >= 1");
    for (const auto& a : atoms_) {
      require(a.size() == dim_, "DiscreteTarget: atoms of unequal dimension");
      require(a.allFinite(), "DiscreteTarget: non-finite atom");
    }
    log_weights_ = detail::safe_log(weights_);
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Vec>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& log_weights() const { return log_weights_; }

 private:
  std::vector<Vec> atoms_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  Eigen::Index dim_ = 0;
};

/// Law on {+1,-1}^n stored as 2^n probabilities.
///
/// Index convention: coordinate 1 is the most significant bit, bit value 0 is +1
/// and bit value 1 is -1. So index 0 is (+1,...,+1) and index 2^n-1 is (-1,...,-1).
class HypercubeTarget {
 public:
  static constexpr int kMaxDim = 20;

  HypercubeTarget(int n, std::vector<double> table) : n_(n), table_(std::move(table)) {
    require(n >= 1 && n <= kMaxDim, "HypercubeTarget: n must be in [1,20]");
    detail::check_table(table_, std::size_t{1} << n, "HypercubeTarget");
    log_table_ = detail::safe_log(table_);
  }

  int n() const { return n_; }
  std::size_t size() const { return table_.size(); }
  const std::vector<double>& table() const { return table_; }
  const std::vector<double>& log_table() const { return log_table_; }

  /// Bit of coordinate i (0-based) inside an index.
  std::uint32_t bit(std::size_t index, int i) const {
    return static_cast<std::uint32_t>((index >> (n_ - 1 - i)) & 1u);
  }
  int spin(std::size_t index, int i) const { return bit(index, i) ? -1 : 1; }

  std::vector<int> config(std::size_t index) const {
    std::vector<int> s(n_);
    for (int i = 0; i < n_; ++i) s[i] = spin(index, i);
    return s;
  }

  std::size_t index(std::span<const int> spins) const {
    require(static_cast<int>(spins.size()) == n_, "HypercubeTarget: wrong configuration length");
    std::size_t idx = 0;
    for (int i = 0; i < n_; ++i) {
      require(spins[i] == 1 || spins[i] == -1, "HypercubeTarget: entries must be +1 or -1");
      idx = (idx << 1) | (spins[i] == -1 ? 1u : 0u);
    }
    return idx;
  }

  Vec point(std::size_t index) const {
    Vec v(n_);
    for (int i = 0; i < n_; ++i) v[i] = spin(index, i);
    return v;
  }

 private:
  int n_;
  std::vector<double> table_;
  std::vector<double> log_table_;
};

/// Law on {0,...,q-1}^n stored as q^n probabilities, lexicographic with coordinate 1 most significant.
class QaryTarget {
 public:
  static constexpr std::size_t kMaxStates = std::size_t{1} << 24;

  QaryTarget(int n, int q, std::vector<double> table) : n_(n), q_(q), table_(std::move(table)) {
    require(n >= 1, "QaryTarget: n must be >= 1");
    require(q >= 2, "QaryTarget: q must be >= 2");
    std::size_t states = 1;
    for (int i = 0; i < n; ++i) {
      states *= static_cast<std::size_t>(q);
      require(states <= kMaxStates, "QaryTarget: q^n exceeds the enumeration bound");
    }
    detail::check_table(table_, states, "QaryTarget");
    log_table_ = detail::safe_log(table_);
  }

  int n() const { return n_; }
  int q() const { return q_; }
  std::size_t size() const { return table_.size(); }
  const std::vector<double>& table() const { return table_; }
  const std::vector<double>& log_table() const { return log_table_; }

  std::vector<int> config(std::size_t index) const {
    std::vector<int> d(n_);
    for (int i = n_ - 1; i >= 0; --i) {
      d[i] = static_cast<int>(index % q_);
      index /= q_;
    }
    return d;
  }

  std::size_t index(std::span<const int> digits) const {
    require(static_cast<int>(digits.size()) == n_, "QaryTarget: wrong configuration length");
    std::size_t idx = 0;
    for (int i = 0; i < n_; ++i) {
      require(digits[i] >= 0 && digits[i] < q_, "QaryTarget: symbol out of range");
      idx = idx * q_ + static_cast<std::size_t>(digits[i]);
    }
    return idx;
  }

  Vec point(std::size_t index) const {
    auto d = config(index);
    Vec v(n_);
    for (int i = 0; i < n_; ++i) v[i] = d[i];
    return v;
  }

 private:
  int n_;
  int q_;
  std::vector<double> table_;
  std::vector<double> log_table_;
};

/// p N((1-p)a, I) + (1-p) N(-p a, I). Zero mean by construction.
/// p = 0 or 1 is accepted as the degenerate single-Gaussian case.
class TwoGaussianMixture {
 public:
  TwoGaussianMixture(Vec a, double p) : a_(std::move(a)), p_(p) {
    require(a_.size() >= 1, "TwoGaussianMixture: empty a");
    require(a_.allFinite(), "TwoGaussianMixture: non-finite a");
    require(p >= 0.0 && p <= 1.0, "TwoGaussianMixture: p must lie in [0,1]");
  }

  Eigen::Index dim() const { return a_.size(); }
  const Vec& a() const { return a_; }
  double p() const { return p_; }
  Vec mean_plus() const { return (1.0 - p_) * a_; }
  Vec mean_minus() const { return -p_ * a_; }

 private:
  Vec a_;
  double p_;
};

namespace detail {

/// Orthonormal real Fourier basis of R^n; column j pairs with frequency index freq[j].
inline std::pair<Mat, std::vector<int>> real_fourier_basis(int n) {
  Mat F(n, n);
  std::vector<int> freq(n);
  const double pi = std::numbers::pi;
  int col = 0;
  auto put = [&](int j, auto&& f) {
    for (int k = 0; k < n; ++k) F(k, col) = f(k);
    freq[col++] = j;
  };
  put(0, [&](int) { return 1.0 / std::sqrt(double(n)); });
  for (int j = 1; 2 * j < n; ++j) {
    const double s = std::sqrt(2.0 / n);
    put(j, [&](int k) { return s * std::cos(2.0 * pi * j * k / n); });
    put(j, [&](int k) { return s * std::sin(2.0 * pi * j * k / n); });
  }
  if (n % 2 == 0) put(n / 2, [&](int k) { return (k % 2 ? -1.0 : 1.0) / std::sqrt(double(n)); });
  return {F, freq};
}

}  // namespace detail

/// Zero-mean Gaussian with circulant covariance Sigma_ij = c(i-j mod n).
class CirculantGaussian {
 public:
  static CirculantGaussian from_correlation(std::vector<double> c) {
    return CirculantGaussian(std::move(c), std::nullopt);
  }

  /// Sigma = I + alpha 11^T.
  static CirculantGaussian rank_one(int n, double alpha) {
    require(n >= 1, "CirculantGaussian: n must be >= 1");
    std::vector<double> c(n, alpha);
    c[0] = 1.0 + alpha;
    return CirculantGaussian(std::move(c), alpha);
  }

  /// From Fourier eigenvalues lambda_j, j = 0..n-1, with lambda_j = lambda_{n-j}.
  static CirculantGaussian from_spectrum(const std::vector<double>& lambda) {
    const int n = static_cast<int>(lambda.size());
    require(n >= 1, "CirculantGaussian: empty spectrum");
    for (int j = 1; j < n; ++j)
      require(std::abs(lambda[j] - lambda[n - j]) <= 1e-12 * (1.0 + std::abs(lambda[j])),
              "CirculantGaussian: spectrum must satisfy lambda_j = lambda_{n-j}");
    std::vector<double> c(n, 0.0);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += lambda[j] * std::cos(2.0 * std::numbers::pi * j * k / n);
      c[k] = acc / n;
    }
    for (int k = 1; k < n; ++k) c[k] = c[n - k] = 0.5 * (c[k] + c[n - k]);
    return CirculantGaussian(std::move(c), std::nullopt);
  }

  int n() const { return static_cast<int>(c_.size()); }
  const std::vector<double>& c() const { return c_; }
  double c_at(long k) const {
    const long n = static_cast<long>(c_.size());
    return c_[static_cast<std::size_t>(((k % n) + n) % n)];
  }
  std::optional<double> alpha() const { return alpha_; }
  /// Fourier eigenvalues lambda_j = sum_k c(k) cos(2 pi j k / n).
  const std::vector<double>& spectrum() const { return spectrum_; }
  const Mat& covariance() const { return cov_; }
  /// F diag(sqrt(lambda)) with F the real Fourier basis; x = factor() * g.
  const Mat& factor() const { return factor_; }

 private:
  CirculantGaussian(std::vector<double> c, std::optional<double> alpha)
      : c_(std::move(c)), alpha_(alpha) {
    const int n = static_cast<int>(c_.size());
    require(n >= 1, "CirculantGaussian: empty correlation");
    for (int k = 1; k < n; ++k)
      require(std::abs(c_[k] - c_[n - k]) <= 1e-12 * (1.0 + std::abs(c_[k])),
              "CirculantGaussian: correlation must satisfy c(k) = c(n-k)");
    spectrum_.assign(n, 0.0);
    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += c_[k] * std::cos(2.0 * std::numbers::pi * j * k / n);
      spectrum_[j] = acc;
      scale = std::max(scale, std::abs(acc));
    }
    for (double& l : spectrum_) {
      if (l < -1e-10 * std::max(1.0, scale))
        throw ValidationError("CirculantGaussian: covariance is not positive semidefinite");
      l = std::max(l, 0.0);
    }
    cov_.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cov_(i, j) = c_at(i - j);
    auto [F, freq] = detail::real_fourier_basis(n);
    factor_ = F;
    for (int col = 0; col < n; ++col) factor_.col(col) *= std::sqrt(spectrum_[freq[col]]);
  }

  std::vector<double> c_;
  std::optional<double> alpha_;
  std::vector<double> spectrum_;
  Mat cov_;
  Mat factor_;
};

/// General N(mean, cov).
class GaussianTarget {
 public:
  GaussianTarget(Vec mean, Mat cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    require(cov_.rows() == cov_.cols() && cov_.rows() == mean_.size(),
            "GaussianTarget: dimension mismatch");
    require(mean_.size() >= 1, "GaussianTarget: empty");
    require(is_psd(cov_), "GaussianTarget: covariance is not positive semidefinite");
    factor_ = psd_sqrt(cov_);
  }

  explicit GaussianTarget(const Mat& cov) : GaussianTarget(Vec::Zero(cov.rows()), cov) {}

  Eigen::Index dim() const { return mean_.size(); }
  const Vec& mean() const { return mean_; }
  const Mat& covariance() const { return cov_; }
  const Mat& factor() const { return factor_; }

 private:
  Vec mean_;
  Mat cov_;
  Mat factor_;
};

/// Discrete law on the nonnegative orthant (Poisson channel).
class NonnegativeTarget {
 public:
  explicit NonnegativeTarget(DiscreteTarget base) : base_(std::move(base)) {
    for (const auto& a : base_.atoms())
      require((a.array() >= 0.0).all(), "NonnegativeTarget: atom with a negative coordinate");
  }

  const DiscreteTarget& base() const { return base_; }
  Eigen::Index dim() const { return base_.dim(); }

 private:
  DiscreteTarget base_;
};

using TargetDistribution = std::variant<DiscreteTarget, HypercubeTarget, QaryTarget,
                                        TwoGaussianMixture, CirculantGaussian, GaussianTarget,
                                        NonnegativeTarget>;

inline Eigen::Index target_dim(const TargetDistribution& t) {
  return std::visit(
      [](const auto& x) -> Eigen::Index {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, HypercubeTarget> || std::is_same_v<T, QaryTarget> ||
                      std::is_same_v<T, CirculantGaussian>)
          return x.n();
        else
          return x.dim();
      },
      t);
}

inline std::size_t sample_index(const DiscreteTarget& t, Rng& rng) {
  return sample_categorical(t.weights(), rng);
}
inline std::size_t sample_index(const HypercubeTarget& t, Rng& rng) {
  return sample_categorical(t.table(), rng);
}
inline std::size_t sample_index(const QaryTarget& t, Rng& rng) {
  return sample_categorical(t.table(), rng);
}

inline Vec sample_exact(const DiscreteTarget& t, Rng& rng) { return t.atoms()[sample_index(t, rng)]; }
inline Vec sample_exact(const HypercubeTarget& t, Rng& rng) { return t.point(sample_index(t, rng)); }
inline Vec sample_exact(const QaryTarget& t, Rng& rng) { return t.point(sample_index(t, rng)); }
inline Vec sample_exact(const NonnegativeTarget& t, Rng& rng) { return sample_exact(t.base(), rng); }

inline Vec sample_exact(const TwoGaussianMixture& t, Rng& rng) {
  const bool plus = uniform01(rng) < t.p();
  Vec g = standard_normal(t.dim(), rng);
  return g + (plus ? t.mean_plus() : t.mean_minus());
}

inline Vec sample_exact(const CirculantGaussian& t, Rng& rng) {
  return t.factor() * standard_normal(t.n(), rng);
}

inline Vec sample_exact(const GaussianTarget& t, Rng& rng) {
  return t.mean() + t.factor() * standard_normal(t.dim(), rng);
}

inline Vec sample_exact(const TargetDistribution& t, Rng& rng) {
  return std::visit([&](const auto& x) { return sample_exact(x, rng); }, t);
}

struct Moments {
  Vec mean;
  Mat cov;
};

namespace detail {

template <class PointFn>
Moments enumerate_moments(const std::vector<double>& w, Eigen::Index n, PointFn&& point) {
  Moments m{Vec::Zero(n), Mat::Zero(n, n)};
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Vec x = point(i);
    m.mean += w[i] * x;
    m.cov += w[i] * x * x.transpose();
  }
  m.cov -= m.mean * m.mean.transpose();
  return m;
}

}  // namespace detail

inline Moments moments(const DiscreteTarget& t) {
  return detail::enumerate_moments(t.weights(), t.dim(), [&](std::size_t i) { return t.atoms()[i]; });
}
inline Moments moments(const HypercubeTarget& t) {
  return detail::enumerate_moments(t.table(), t.n(), [&](std::size_t i) { return t.point(i); });
}
inline Moments moments(const QaryTarget& t) {
  return detail::enumerate_moments(t.table(), t.n(), [&](std::size_t i) { return t.point(i); });
}
inline Moments moments(const NonnegativeTarget& t) { return moments(t.base()); }
inline Moments moments(const TwoGaussianMixture& t) {
  const Eigen::Index n = t.dim();
  return {Vec::Zero(n), Mat::Identity(n, n) + t.p() * (1.0 - t.p()) * t.a() * t.a().transpose()};
}
inline Moments moments(const CirculantGaussian& t) { return {Vec::Zero(t.n()), t.covariance()}; }
inline Moments moments(const GaussianTarget& t) { return {t.mean(), t.covariance()}; }

inline Moments moments(const TargetDistribution& t) {
  return std::visit([](const auto& x) { return moments(x); }, t);
}

/// Explicit atom list of a table target (for the generic brute-force denoisers).
inline DiscreteTarget to_atoms(const HypercubeTarget& t) {
  std::vector<Vec> atoms(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) atoms[i] = t.point(i);
  return DiscreteTarget(std::move(atoms), t.table());
}
inline DiscreteTarget to_atoms(const QaryTarget& t) {
  std::vector<Vec> atoms(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) atoms[i] = t.point(i);
  return DiscreteTarget(std::move(atoms), t.table());
}

/// Dirichlet(1,...,1) probability table of the given size.
inline std::vector<double> random_table(std::size_t size, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(size);
  double sum = 0.0;
  for (double& x : w) sum += (x = e(rng));
  for (double& x : w) x /= sum;
  return w;
}

/// V diag(lambda) V^T with V Haar-orthogonal (QR of a Gaussian matrix, signs fixed) and lambda ~ Unif[lo,hi].
inline Mat random_spd(int n, double lo, double hi, Rng& rng) {
  require(n >= 1 && lo > 0.0 && hi >= lo, "random_spd: need n >= 1 and 0 < lo <= hi");
  Mat G(n, n);
  for (int j = 0; j < n; ++j) G.col(j) = standard_normal(n, rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat V = qr.householderQ();
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0.0) V.col(j) = -V.col(j);
  std::uniform_real_distribution<double> u(lo, hi);
  Vec lam(n);
  for (int i = 0; i < n; ++i) lam[i] = u(rng);
  Mat S = V * lam.asDiagonal() * V.transpose();
  return 0.5 * (S + S.transpose());
}

}  // namespace stochloc

#endif  // STOCHLOC_TARGETS_HPP
