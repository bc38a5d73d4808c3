#ifndef STOCHLOC_DENOISERS_HPP
#define STOCHLOC_DENOISERS_HPP

#include "stochloc/targets.hpp"

#include <bit>
#include <functional>
#include <memory>
#include <optional>

namespace stochloc {

enum class Channel { IsotropicGaussian, AnisotropicGaussian, LinearObservation, BinarySymmetric, Qary, Poisson };

inline const char* channel_name(Channel c) {
  switch (c) {
    case Channel::IsotropicGaussian: return "isotropic-gaussian";
    case Channel::AnisotropicGaussian: return "anisotropic-gaussian";
    case Channel::LinearObservation: return "linear-observation";
    case Channel::BinarySymmetric: return "binary-symmetric";
    case Channel::Qary: return "q-ary";
    case Channel::Poisson: return "poisson";
  }
  return "unknown";
}

/// m(y; t) for Y = t x + W_t (or, with the LinearObservation tag, E[Ax | Y = y] for Y = tAx + W_t).
struct GaussianDenoiser {
  Eigen::Index dim = 0;  // dimension of y and of the output
  std::function<Vec(const Vec&, double)> fn;
  Channel channel = Channel::IsotropicGaussian;

  Vec operator()(const Vec& y, double t) const { return fn(y, t); }
};

/// Accumulated precision of the anisotropic channel. `omega` empty means Omega = t I.
struct ChannelPrecision {
  double t = 0.0;
  std::optional<Mat> omega;

  static ChannelPrecision scalar(double t) { return {t, std::nullopt}; }
  static ChannelPrecision matrix(Mat m) { return {0.0, std::move(m)}; }
  bool isotropic() const { return !omega.has_value(); }
  Mat as_matrix(Eigen::Index n) const { return omega ? *omega : Mat(t * Mat::Identity(n, n)); }
};

/// m(y; Omega) for Y = Omega x + Omega^{1/2} G.
struct AnisotropicDenoiser {
  Eigen::Index dim = 0;
  std::function<Vec(const Vec&, const ChannelPrecision&)> fn;
  static constexpr Channel channel = Channel::AnisotropicGaussian;

  Vec operator()(const Vec& y, const ChannelPrecision& w) const { return fn(y, w); }
};

/// Posterior magnetization m_i(t; y) for the binary symmetric channel.
struct MagnetizationDenoiser {
  int n = 0;
  std::function<Vec(std::span<const int>, double)> fn;
  static constexpr Channel channel = Channel::BinarySymmetric;

  Vec operator()(std::span<const int> y, double t) const { return fn(y, t); }
};

/// Posterior beliefs b_i(y, z; t), returned as an n x q row-stochastic matrix.
struct BeliefDenoiser {
  int n = 0;
  int q = 0;
  std::function<Mat(std::span<const int>, double)> fn;
  static constexpr Channel channel = Channel::Qary;

  Mat operator()(std::span<const int> y, double t) const { return fn(y, t); }
};

/// m_k(t; y) for the Poisson observation channel.
struct PoissonDenoiser {
  Eigen::Index n = 0;
  std::function<Vec(std::span<const int>, double)> fn;
  static constexpr Channel channel = Channel::Poisson;

  Vec operator()(std::span<const int> y, double t) const { return fn(y, t); }
};

namespace detail {

inline void check_obs(const Vec& y, Eigen::Index n, const char* what) {
  if (y.size() != n)
    throw ValidationError(std::string(what) + ": observation has dimension " + std::to_string(y.size()) +
                          ", expected " + std::to_string(n));
  if (!y.allFinite()) throw ValidationError(std::string(what) + ": non-finite observation");
}

inline void check_time(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError(std::string(what) + ": time must be finite and >= 0");
}

/// sum_j p_j x_j with p = softmax(logw); throws if every weight vanishes.
inline Vec weighted_atoms(std::vector<double>& logw, const std::vector<Vec>& atoms, Eigen::Index n,
                          const char* what) {
  if (!softmax_inplace(logw)) throw InconsistentObservation(std::string(what) + ": zero posterior mass");
  Vec m = Vec::Zero(n);
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (logw[j] > 0.0) m += logw[j] * atoms[j];
  return m;
}

}  // namespace detail

/// Posterior mean under the tilt w_j exp(<y,x_j> - t|x_j|^2/2).
inline Vec bruteforce_posterior_mean_gaussian(const DiscreteTarget& target, const Vec& y, double t) {
  detail::check_obs(y, target.dim(), "bruteforce_posterior_mean_gaussian");
  detail::check_time(t, "bruteforce_posterior_mean_gaussian");
  const auto& atoms = target.atoms();
  std::vector<double> logw(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j)
    logw[j] = target.log_weights()[j] + atoms[j].dot(y) - 0.5 * t * atoms[j].squaredNorm();
  return detail::weighted_atoms(logw, atoms, target.dim(), "bruteforce_posterior_mean_gaussian");
}

/// Posterior probability of the first component N((1-p)a, I).
inline double mixture_component_weight(const TwoGaussianMixture& mix, const Vec& y, double t) {
  const double p = mix.p();
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double a2 = mix.a().squaredNorm();
  // log-odds = logit(p) + (<a,y> - t (1-2p)|a|^2/2) / (1+t)
  const double L = std::log(p) - std::log1p(-p) + (mix.a().dot(y) - 0.5 * t * (1.0 - 2.0 * p) * a2) / (1.0 + t);
  return L >= 0.0 ? 1.0 / (1.0 + std::exp(-L)) : std::exp(L) / (1.0 + std::exp(L));
}

/// phi(s; t): the coefficient of a in m(y;t) = y/(1+t) + a phi, with s = <a,y>/|a|^2.
inline double mixture_phi(const TwoGaussianMixture& mix, const Vec& y, double t) {
  return (mixture_component_weight(mix, y, t) - mix.p()) / (1.0 + t);
}

inline Vec mixture_posterior_mean(const TwoGaussianMixture& mix, const Vec& y, double t) {
  detail::check_obs(y, mix.dim(), "mixture_posterior_mean");
  detail::check_time(t, "mixture_posterior_mean");
  if (mix.a().squaredNorm() == 0.0) return y / (1.0 + t);
  return y / (1.0 + t) + mix.a() * mixture_phi(mix, y, t);
}

/// Location of the matching window in s = <a,y>/|a|^2.
inline double mixture_threshold(const TwoGaussianMixture& mix, double t) {
  return 0.5 * (1.0 - 2.0 * mix.p()) * t;
}

/// Piecewise limit of the mixture denoiser away from the matching window.
inline Vec mixture_denoiser_asymptotics(const TwoGaussianMixture& mix, const Vec& y, double t, double delta) {
  detail::check_obs(y, mix.dim(), "mixture_denoiser_asymptotics");
  const double a2 = mix.a().squaredNorm();
  require(a2 > 0.0, "mixture_denoiser_asymptotics: a = 0");
  const double s = mix.a().dot(y) / a2;
  const double thr = mixture_threshold(mix, t);
  if (s >= thr + delta) return (y + (1.0 - mix.p()) * mix.a()) / (1.0 + t);
  if (s <= thr - delta) return (y - mix.p() * mix.a()) / (1.0 + t);
  throw DomainError("mixture_denoiser_asymptotics: inside matching window");
}

/// Bound on |exact - limit| at distance >= delta from the window:
/// |a| max(p,1-p)/min(p,1-p) e^{-delta |a|^2/(1+t)} / (1+t).
inline double mixture_asymptotic_bound(const TwoGaussianMixture& mix, double t, double delta) {
  const double p = mix.p(), a2 = mix.a().squaredNorm();
  const double odds = std::max(p, 1.0 - p) / std::min(p, 1.0 - p);
  return std::sqrt(a2) * odds * std::exp(-delta * a2 / (1.0 + t)) / (1.0 + t);
}

/// (I + t Sigma)^{-1} Sigma y, by a symmetric solve.
inline Vec gaussian_posterior_mean(const Mat& sigma, const Vec& y, double t) {
  detail::check_obs(y, sigma.rows(), "gaussian_posterior_mean");
  detail::check_time(t, "gaussian_posterior_mean");
  const Eigen::Index n = sigma.rows();
  const Mat A = Mat::Identity(n, n) + t * sigma;
  Eigen::LDLT<Mat> ldlt(A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw DomainError("gaussian_posterior_mean: I + t Sigma is not positive definite");
  return ldlt.solve(sigma * y);
}

/// Exact linear denoiser for N(0, Sigma), diagonalized once.
class LinearGaussianDenoiser {
 public:
  explicit LinearGaussianDenoiser(const Mat& sigma) {
    require(is_psd(sigma), "LinearGaussianDenoiser: Sigma is not positive semidefinite");
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
    V_ = es.eigenvectors();
    lambda_ = es.eigenvalues().cwiseMax(0.0);
  }

  Vec operator()(const Vec& y, double t) const {
    Vec z = V_.transpose() * y;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] *= lambda_[i] / (1.0 + t * lambda_[i]);
    return V_ * z;
  }

  GaussianDenoiser as_denoiser() const {
    auto self = std::make_shared<LinearGaussianDenoiser>(*this);
    return {V_.rows(), [self](const Vec& y, double t) { return (*self)(y, t); }};
  }

 private:
  Mat V_;
  Vec lambda_;
};

/// Discrete target under Y = Omega x + Omega^{1/2} G; likelihood exp(<x,y> - x'Omega x/2) on range(Omega).
inline Vec anisotropic_posterior_mean(const DiscreteTarget& target, const Vec& y, const ChannelPrecision& w) {
  if (w.isotropic()) return bruteforce_posterior_mean_gaussian(target, y, w.t);
  const Mat& omega = *w.omega;
  const Eigen::Index n = target.dim();
  detail::check_obs(y, n, "anisotropic_posterior_mean");
  require(omega.rows() == n && omega.cols() == n, "anisotropic_posterior_mean: Omega has wrong shape");
  Eigen::SelfAdjointEigenSolver<Mat> es(omega);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    throw DomainError("anisotropic_posterior_mean: Omega is not positive semidefinite");
  // Component of y in the null space of Omega must vanish.
  Vec yr = y;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (es.eigenvalues()[k] > 1e-12 * scale) continue;
    const Vec u = es.eigenvectors().col(k);
    const double c = u.dot(y);
    if (std::abs(c) > 1e-8 * (1.0 + y.norm()))
      throw InconsistentObservation("anisotropic_posterior_mean: observation outside the range of Omega");
    yr -= c * u;
  }
  const auto& atoms = target.atoms();
  std::vector<double> logw(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j)
    logw[j] = target.log_weights()[j] + atoms[j].dot(yr) - 0.5 * atoms[j].dot(omega * atoms[j]);
  return detail::weighted_atoms(logw, atoms, n, "anisotropic_posterior_mean");
}

/// N(mu, Sigma) under the anisotropic channel:
/// mu + S (I + S Omega S)^{-1} S (y - Omega mu), S = Sigma^{1/2}.
inline Vec anisotropic_posterior_mean(const GaussianTarget& target, const Vec& y, const ChannelPrecision& w) {
  const Eigen::Index n = target.dim();
  detail::check_obs(y, n, "anisotropic_posterior_mean");
  const Mat omega = w.as_matrix(n);
  const Mat& S = target.factor();
  const Mat K = Mat::Identity(n, n) + S * omega * S;
  Eigen::LDLT<Mat> ldlt(K);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw DomainError("anisotropic_posterior_mean: Omega is not positive semidefinite");
  return target.mean() + S * ldlt.solve(S * (y - omega * target.mean()));
}

/// Symmetric convolution kernel l(-r..r) on Z_n; coeffs holds l(0..r).
struct ConvKernel {
  int r = 0;
  int n = 0;
  std::vector<double> coeffs;

  double at(int u) const { return coeffs[static_cast<std::size_t>(std::abs(u))]; }

  /// (l * y)_i = sum_{|u|<=r} l(u) y_{i-u}.
  Vec apply(const Vec& y) const {
    require(y.size() == n, "ConvKernel::apply: dimension mismatch");
    Vec out = coeffs[0] * y;
    for (int u = 1; u <= r; ++u)
      for (int i = 0; i < n; ++i) out[i] += coeffs[u] * (y[(i - u + n) % n] + y[(i + u) % n]);
    return out;
  }

  Mat as_matrix() const {
    Mat A = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int u = -r; u <= r; ++u) A(i, ((i - u) % n + n) % n) += at(u);
    return A;
  }
};

namespace detail {

inline double circ(const std::vector<double>& c, long k) {
  const long n = static_cast<long>(c.size());
  return c[static_cast<std::size_t>(((k % n) + n) % n)];
}

inline void check_window(const std::vector<double>& c, int r) {
  require(r >= 0, "windowed denoiser: r must be >= 0");
  require(!c.empty() && 2 * r + 1 <= static_cast<int>(c.size()), "windowed denoiser: need 2r+1 <= n");
}

}  // namespace detail

/// Solves l(u) + t sum_{|v|<=r} c(u-v) l(v) = c(u), |u| <= r, as a dense (2r+1) symmetric system.
inline ConvKernel windowed_denoiser_solve(const std::vector<double>& c, int r, double t) {
  detail::check_window(c, r);
  detail::check_time(t, "windowed_denoiser_solve");
  const int w = 2 * r + 1;
  Mat M(w, w);
  Vec rhs(w);
  for (int a = 0; a < w; ++a) {
    rhs[a] = detail::circ(c, a - r);
    for (int b = 0; b < w; ++b) M(a, b) = (a == b ? 1.0 : 0.0) + t * detail::circ(c, a - b);
  }
  Eigen::LDLT<Mat> ldlt(M);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw InternalConsistencyError("windowed_denoiser_solve: singular system (c not PSD?)");
  const Vec l = ldlt.solve(rhs);
  ConvKernel k{r, static_cast<int>(c.size()), std::vector<double>(r + 1)};
  k.coeffs[0] = l[r];
  for (int u = 1; u <= r; ++u) k.coeffs[u] = 0.5 * (l[r + u] + l[r - u]);
  return k;
}

/// max_{|u|<=r} |l(u) + t sum_v c(u-v) l(v) - c(u)|.
inline double windowed_residual(const std::vector<double>& c, const ConvKernel& k, double t) {
  double worst = 0.0;
  for (int u = -k.r; u <= k.r; ++u) {
    double acc = k.at(u) - detail::circ(c, u);
    for (int v = -k.r; v <= k.r; ++v) acc += t * detail::circ(c, u - v) * k.at(v);
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

/// Spectrum of the window covariance restricted to symmetric kernels.
///
/// In the basis e_0, (e_u + e_-u)/sqrt2 the window covariance is M with M00 = c0,
/// M0u = sqrt2 c(u), Muv = c(u-v) + c(u+v). With eigenpairs (lambda_k, v_k):
///   chat_k = lambda_k / (2r+1),  mode_k(u) = (2r+1) v_k[0] v_k[u] (u = 0) or /sqrt2 (u > 0).
struct WindowSpectrum {
  int r = 0;
  int n = 0;
  std::vector<double> chat;  // k = 0..r
  Mat modes;                 // modes(k, u), u = 0..r
};

inline WindowSpectrum window_spectrum(const std::vector<double>& c, int r) {
  detail::check_window(c, r);
  const int m = r + 1;
  Mat M(m, m);
  const double s2 = std::sqrt(2.0);
  M(0, 0) = detail::circ(c, 0);
  for (int u = 1; u <= r; ++u) M(0, u) = M(u, 0) = s2 * detail::circ(c, u);
  for (int u = 1; u <= r; ++u)
    for (int v = 1; v <= r; ++v) M(u, v) = detail::circ(c, u - v) + detail::circ(c, u + v);
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  WindowSpectrum ws{r, static_cast<int>(c.size()), std::vector<double>(m), Mat(m, m)};
  const double w = 2.0 * r + 1.0;
  for (int k = 0; k < m; ++k) {
    ws.chat[k] = std::max(es.eigenvalues()[k], 0.0) / w;
    const auto v = es.eigenvectors().col(k);
    for (int u = 0; u <= r; ++u) ws.modes(k, u) = w * v[0] * v[u] * (u == 0 ? 1.0 : 1.0 / s2);
  }
  return ws;
}

/// l_t(u) = sum_k chat_k / (1 + t (2r+1) chat_k) mode_k(u).
inline ConvKernel windowed_denoiser_closed_form(const WindowSpectrum& ws, int r, double t) {
  require(r == ws.r && static_cast<int>(ws.chat.size()) == r + 1, "windowed_denoiser_closed_form: shape mismatch");
  detail::check_time(t, "windowed_denoiser_closed_form");
  const double w = 2.0 * r + 1.0;
  ConvKernel k{r, ws.n, std::vector<double>(r + 1, 0.0)};
  for (int j = 0; j <= r; ++j) {
    const double g = ws.chat[j] / (1.0 + t * w * ws.chat[j]);
    for (int u = 0; u <= r; ++u) k.coeffs[u] += g * ws.modes(j, u);
  }
  return k;
}

/// Circular autocorrelation chat(k) = (1/(N n)) sum_samples sum_i x_i x_{i+k}.
inline std::vector<double> empirical_autocorrelation(const std::vector<Vec>& samples) {
  require(!samples.empty(), "empirical_autocorrelation: no samples");
  const Eigen::Index n = samples.front().size();
  std::vector<double> c(n, 0.0);
  for (const auto& x : samples) {
    require(x.size() == n, "empirical_autocorrelation: samples of unequal dimension");
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < n; ++i) c[k] += x[i] * x[(i + k) % n];
  }
  const double norm = double(samples.size()) * double(n);
  for (auto& v : c) v /= norm;
  for (Eigen::Index k = 1; k < n; ++k) c[k] = c[n - k] = 0.5 * (c[k] + c[n - k]);
  return c;
}

inline constexpr double kRidgeEpsilon = 1e-8;

/// Least-squares window-r convolution for E|x - A(tx + sqrt(t) g)|^2 with the noise term integrated
/// analytically: the normal equations are the windowed equation with c replaced by the empirical
/// autocorrelation. A rank-deficient empirical window Gram matrix gets a ridge eps = 1e-8.
inline ConvKernel fit_linear_denoiser(const std::vector<Vec>& samples, int r, double t) {
  require(r >= 0, "fit_linear_denoiser: r must be >= 0");
  require(samples.size() >= static_cast<std::size_t>(2 * r + 2), "fit_linear_denoiser: need at least 2r+2 samples");
  std::vector<double> c = empirical_autocorrelation(samples);
  detail::check_window(c, r);
  const int w = 2 * r + 1;
  Mat G(w, w);
  for (int a = 0; a < w; ++a)
    for (int b = 0; b < w; ++b) G(a, b) = detail::circ(c, a - b);
  Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
  const double top = std::max(std::abs(es.eigenvalues().maxCoeff()), 1.0);
  if (es.eigenvalues().minCoeff() <= 1e-12 * top) {
    Mat M = Mat::Identity(w, w) + t * (G + kRidgeEpsilon * Mat::Identity(w, w));
    Vec rhs(w);
    for (int a = 0; a < w; ++a) rhs[a] = detail::circ(c, a - r);
    const Vec l = M.ldlt().solve(rhs);
    ConvKernel k{r, static_cast<int>(c.size()), std::vector<double>(r + 1)};
    k.coeffs[0] = l[r];
    for (int u = 1; u <= r; ++u) k.coeffs[u] = 0.5 * (l[r + u] + l[r - u]);
    return k;
  }
  return windowed_denoiser_solve(c, r, t);
}

/// Window-r linear denoiser m(y;t) = l_t * y for a circulant correlation c.
inline GaussianDenoiser windowed_denoiser(const std::vector<double>& c, int r) {
  auto ws = std::make_shared<const WindowSpectrum>(window_spectrum(c, r));
  return {static_cast<Eigen::Index>(c.size()), [ws, r](const Vec& y, double t) {
            return windowed_denoiser_closed_form(*ws, r, t).apply(y);
          }};
}

inline GaussianDenoiser exact_denoiser(const DiscreteTarget& target) {
  auto tg = std::make_shared<const DiscreteTarget>(target);
  return {target.dim(), [tg](const Vec& y, double t) { return bruteforce_posterior_mean_gaussian(*tg, y, t); }};
}

inline GaussianDenoiser exact_denoiser(const HypercubeTarget& target) { return exact_denoiser(to_atoms(target)); }

inline GaussianDenoiser exact_denoiser(const TwoGaussianMixture& mix) {
  return {mix.dim(), [mix](const Vec& y, double t) { return mixture_posterior_mean(mix, y, t); }};
}

inline GaussianDenoiser exact_denoiser(const GaussianTarget& target) {
  const Vec mu = target.mean();
  auto lin = std::make_shared<const LinearGaussianDenoiser>(target.covariance());
  return {target.dim(), [mu, lin](const Vec& y, double t) -> Vec { return mu + (*lin)(y - t * mu, t); }};
}

inline GaussianDenoiser exact_denoiser(const CirculantGaussian& target) {
  return LinearGaussianDenoiser(target.covariance()).as_denoiser();
}

/// Exact denoiser of a single N(mean, I) component: (y + mean)/(1+t).
inline GaussianDenoiser component_denoiser(const Vec& mean) {
  return {mean.size(), [mean](const Vec& y, double t) -> Vec { return (y + mean) / (1.0 + t); }};
}

inline AnisotropicDenoiser exact_anisotropic_denoiser(const DiscreteTarget& target) {
  auto tg = std::make_shared<const DiscreteTarget>(target);
  return {target.dim(), [tg](const Vec& y, const ChannelPrecision& w) { return anisotropic_posterior_mean(*tg, y, w); }};
}

inline AnisotropicDenoiser exact_anisotropic_denoiser(const GaussianTarget& target) {
  return {target.dim(), [target](const Vec& y, const ChannelPrecision& w) {
            return anisotropic_posterior_mean(target, y, w);
          }};
}

// ---- binary symmetric channel ----

namespace detail {

inline std::size_t spin_mask(const HypercubeTarget& target, std::span<const int> y) {
  return target.index(y);
}

}  // namespace detail

/// Exact magnetization by enumeration. The channel likelihood is
/// ((1+t)/2)^{#agree} ((1-t)/2)^{#disagree}, i.e. proportional to ((1-t)/(1+t))^{popcount(x ^ y)}.
inline Vec binary_posterior_magnetization(const HypercubeTarget& target, std::span<const int> y, double t) {
  const int n = target.n();
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("binary_posterior_magnetization: t must lie in [0,1]");
  const std::size_t ymask = detail::spin_mask(target, y);
  std::vector<double> powk(n + 1);
  const double lr = t < 1.0 ? std::log1p(-t) - std::log1p(t) : -std::numeric_limits<double>::infinity();
  powk[0] = 1.0;
  for (int k = 1; k <= n; ++k) powk[k] = std::exp(k * lr);
  const auto& table = target.table();
  std::vector<double> w(table.size());
  double total = 0.0;
  for (std::size_t x = 0; x < table.size(); ++x)
    total += (w[x] = table[x] * powk[std::popcount(x ^ ymask)]);
  if (!(total > 0.0) || !std::isfinite(total) || total < 1e-280) {
    // Fully logarithmic fallback; throws when the observation has zero mass.
    std::vector<double> lw(table.size());
    for (std::size_t x = 0; x < table.size(); ++x) {
      const int k = std::popcount(x ^ ymask);
      lw[x] = target.log_table()[x] + (k == 0 ? 0.0 : k * lr);
    }
    if (!softmax_inplace(lw)) throw InconsistentObservation("binary_posterior_magnetization: zero posterior mass");
    w = std::move(lw);
    total = 1.0;
  }
  Vec m = Vec::Zero(n);
  for (std::size_t x = 0; x < table.size(); ++x) {
    if (w[x] == 0.0) continue;
    for (int i = 0; i < n; ++i) m[i] += target.bit(x, i) ? -w[x] : w[x];
  }
  return m / total;
}

inline MagnetizationDenoiser exact_magnetization_denoiser(const HypercubeTarget& target) {
  auto tg = std::make_shared<const HypercubeTarget>(target);
  return {target.n(), [tg](std::span<const int> y, double t) { return binary_posterior_magnetization(*tg, y, t); }};
}

// ---- q-ary symmetric channel ----

/// Exact beliefs b_i(y, z; t) by enumeration; likelihood per coordinate (1+(q-1)t)/q on agreement, (1-t)/q otherwise.
inline Mat qary_posterior_belief(const QaryTarget& target, std::span<const int> y, double t) {
  const int n = target.n(), q = target.q();
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("qary_posterior_belief: t must lie in [0,1]");
  require(static_cast<int>(y.size()) == n, "qary_posterior_belief: wrong observation length");
  for (int v : y) require(v >= 0 && v < q, "qary_posterior_belief: symbol out of range");
  const double l_same = std::log1p((q - 1) * t) - std::log(double(q));
  const double l_diff = t < 1.0 ? std::log1p(-t) - std::log(double(q)) : -std::numeric_limits<double>::infinity();
  std::vector<double> lw(target.size());
  std::vector<int> d(n);
  for (std::size_t x = 0; x < target.size(); ++x) {
    std::size_t rest = x;
    int diff = 0;
    for (int i = n - 1; i >= 0; --i) {
      d[i] = static_cast<int>(rest % q);
      rest /= q;
      diff += d[i] != y[i];
    }
    lw[x] = target.log_table()[x] + (n - diff) * l_same + (diff == 0 ? 0.0 : diff * l_diff);
  }
  if (!softmax_inplace(lw)) throw InconsistentObservation("qary_posterior_belief: zero posterior mass");
  Mat b = Mat::Zero(n, q);
  for (std::size_t x = 0; x < target.size(); ++x) {
    if (lw[x] == 0.0) continue;
    std::size_t rest = x;
    for (int i = n - 1; i >= 0; --i) {
      b(i, static_cast<int>(rest % q)) += lw[x];
      rest /= q;
    }
  }
  for (int i = 0; i < n; ++i) b.row(i) /= b.row(i).sum();
  return b;
}

inline BeliefDenoiser exact_belief_denoiser(const QaryTarget& target) {
  auto tg = std::make_shared<const QaryTarget>(target);
  return {target.n(), target.q(), [tg](std::span<const int> y, double t) { return qary_posterior_belief(*tg, y, t); }};
}

// ---- Poisson channel ----

/// Enumeration with likelihood prod_k (t x_k)^{y_k} e^{-t x_k}, 0^0 = 1.
inline Vec poisson_posterior_mean(const NonnegativeTarget& target, std::span<const int> y, double t) {
  const auto& base = target.base();
  const Eigen::Index n = base.dim();
  require(static_cast<Eigen::Index>(y.size()) == n, "poisson_posterior_mean: wrong observation length");
  detail::check_time(t, "poisson_posterior_mean");
  for (int v : y) require(v >= 0, "poisson_posterior_mean: negative count");
  const auto& atoms = base.atoms();
  std::vector<double> lw(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    double acc = base.log_weights()[j];
    for (Eigen::Index k = 0; k < n && std::isfinite(acc); ++k) {
      const double rate = t * atoms[j][k];
      if (y[k] > 0) acc += rate > 0.0 ? y[k] * std::log(rate) : -std::numeric_limits<double>::infinity();
      acc -= rate;
    }
    lw[j] = acc;
  }
  return detail::weighted_atoms(lw, atoms, n, "poisson_posterior_mean");
}

inline PoissonDenoiser exact_poisson_denoiser(const NonnegativeTarget& target) {
  auto tg = std::make_shared<const NonnegativeTarget>(target);
  return {target.dim(), [tg](std::span<const int> y, double t) { return poisson_posterior_mean(*tg, y, t); }};
}

// ---- linear observation channel ----

/// E[Ax | tAx + W_t = y] by atom enumeration.
inline Vec linear_obs_bruteforce_mean(const DiscreteTarget& target, const Mat& A, const Vec& y, double t) {
  require(A.cols() == target.dim(), "linear_obs_bruteforce_mean: A has wrong number of columns");
  detail::check_obs(y, A.rows(), "linear_obs_bruteforce_mean");
  detail::check_time(t, "linear_obs_bruteforce_mean");
  const auto& atoms = target.atoms();
  std::vector<Vec> images(atoms.size());
  std::vector<double> lw(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    images[j] = A * atoms[j];
    lw[j] = target.log_weights()[j] + images[j].dot(y) - 0.5 * t * images[j].squaredNorm();
  }
  return detail::weighted_atoms(lw, images, A.rows(), "linear_obs_bruteforce_mean");
}

inline GaussianDenoiser linear_obs_exact_denoiser(const DiscreteTarget& target, const Mat& A) {
  auto tg = std::make_shared<const DiscreteTarget>(target);
  return {A.rows(), [tg, A](const Vec& y, double t) { return linear_obs_bruteforce_mean(*tg, A, y, t); },
          Channel::LinearObservation};
}

/// L = [b/n ... b/n ; I_n], the mean-augmented observation operator.
inline Mat mean_augmented_operator(int n, double b) {
  require(n >= 1, "mean_augmented_operator: n must be >= 1");
  Mat L = Mat::Zero(n + 1, n);
  L.row(0).setConstant(b / n);
  L.bottomRows(n).setIdentity();
  return L;
}

/// [I ; b x^av]: appends b times the average of each channel (channel-major layout, `channels` blocks).
inline Mat channel_average_operator(int channels, int pixels, double b) {
  require(channels >= 1 && pixels >= 1, "channel_average_operator: empty shape");
  const int n = channels * pixels;
  Mat L = Mat::Zero(n + channels, n);
  L.topRows(n).setIdentity();
  for (int c = 0; c < channels; ++c) L.row(n + c).segment(c * pixels, pixels).setConstant(b / pixels);
  return L;
}

/// Guess drifts for Sigma = I + alpha 11^T observed through L = [b/n 1^T ; I]:
///   m0 = alpha b^2 y0 / (1 + alpha b^2 t)
///   m* = (y* - t k y0 1)/(1+t) + k y0 1,  k = alpha b / (1 + alpha b^2 t).
/// k y0 estimates the shared component z0/b; given it, y_i - t z0/b is the residual observation of
/// x_i - z0/b ~ N(0,1), hence the factor t. Returned as (m0, m*) stacked in R^{n+1}.
inline Vec linear_obs_guess_drift(double y0, const Vec& ystar, double t, double alpha, double b) {
  detail::check_time(t, "linear_obs_guess_drift");
  const double beta = alpha * b * b;
  const double k = alpha * b / (1.0 + beta * t);
  Vec out(ystar.size() + 1);
  out[0] = beta * y0 / (1.0 + beta * t);
  out.tail(ystar.size()) = ((ystar.array() - t * k * y0) / (1.0 + t) + k * y0).matrix();
  return out;
}

inline GaussianDenoiser linear_obs_guess_denoiser(int n, double alpha, double b) {
  return {n + 1,
          [alpha, b](const Vec& y, double t) { return linear_obs_guess_drift(y[0], y.tail(y.size() - 1), t, alpha, b); },
          Channel::LinearObservation};
}

}  // namespace stochloc

#endif  // STOCHLOC_DENOISERS_HPP
