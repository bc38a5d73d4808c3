#ifndef STOCHLOC_ANALYSIS_HPP
#define STOCHLOC_ANALYSIS_HPP

#include "stochloc/gaussian_processes.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <numbers>

namespace stochloc {

inline constexpr double kQuadratureTolerance = 1e-10;

namespace detail {

/// int_0^inf f(s) ds with s = u/(1-u), adaptive Gauss-Kronrod on (0,1).
template <class F>
double half_line_integral(F&& f) {
  auto g = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double w = 1.0 - u;
    return f(u / w) / (w * w);
  };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, 20, kQuadratureTolerance, &err);
  return v;
}

inline void check_c(double c, const char* what) {
  if (!(c > 0.0 && c <= 1.0)) throw DomainError(std::string(what) + ": c must lie in (0,1]");
}

}  // namespace detail

/// F(nu; c) = int_0^inf (1+s)^{-2(1-nu)} (c+s)^{-2nu} ds. Accepts nu in [-1,1] (nu(q) can be negative).
inline double F(double nu, double c) {
  detail::check_c(c, "F");
  if (!(nu >= -1.0 && nu <= 1.0)) throw DomainError("F: nu must lie in [-1,1]");
  return detail::half_line_integral(
      [&](double s) { return std::pow(1.0 + s, -2.0 * (1.0 - nu)) * std::pow(c + s, -2.0 * nu); });
}

struct FprimeReport {
  double value = 0.0;
  double lower = 0.0;  // printed lower bound 2/c
  double upper = 0.0;  // (2/c) log(1/c)
  bool lower_holds = false;
  bool upper_holds = false;
};

/// dF/dnu at nu = 1: int_0^inf 2 (c+s)^{-2} log((1+s)/(c+s)) ds, with both printed bounds evaluated.
/// The upper bound follows from log((1+s)/(c+s)) <= log(1/c); a violation of it throws.
/// The printed lower bound 2/c is reported through lower_holds (it fails for c >= ~0.25).
inline FprimeReport Fprime1(double c) {
  detail::check_c(c, "Fprime1");
  FprimeReport r;
  r.value = detail::half_line_integral(
      [&](double s) { return 2.0 * std::log((1.0 + s) / (c + s)) / ((c + s) * (c + s)); });
  r.lower = 2.0 / c;
  r.upper = 2.0 / c * std::log(1.0 / c);
  const double slack = 1e-8 * std::max(1.0, r.upper);
  r.lower_holds = r.value >= r.lower - slack;
  r.upper_holds = r.value <= r.upper + slack;
  if (!r.upper_holds)
    throw InternalConsistencyError("Fprime1: value " + format_double(r.value) + " exceeds (2/c) log(1/c)");
  return r;
}

/// nu(q) = sin(q(r+1/2)) / ((2r+1) sin(q/2)), nu(0) = 1.
inline double window_nu(double q, int r) {
  const double h = std::sin(0.5 * q);
  if (std::abs(h) < 1e-300 || std::abs(q) < 1e-12) return 1.0;
  return std::sin(q * (r + 0.5)) / ((2.0 * r + 1.0) * h);
}

/// B_n = {2 pi k / n : -n/2 + 1 <= k <= n/2}.
inline std::vector<double> frequency_set(int n) {
  require(n >= 1, "frequency_set: n must be >= 1");
  std::vector<double> q;
  for (int k = -(n / 2) + ((n % 2 == 0) ? 1 : 0); k <= n / 2; ++k) q.push_back(2.0 * std::numbers::pi * k / n);
  return q;
}

struct SpectrumReport {
  int n = 0, r = 0;
  double alpha = 0.0;
  double c0 = 0.0;
  std::vector<double> q, nu, sigma_gen, sigma_target;
  double one_sigma_one = 0.0;  // <1, Sigma^gen 1> = n sigma^gen(0)
};

/// Long-time spectrum of samples generated with the window-r denoiser for Sigma = I + alpha 11^T:
/// sigma^X(q) = F(nu(q); c0), c0 = 1/(1+(2r+1)alpha).
inline SpectrumReport generated_spectrum(int n, int r, double alpha) {
  require(r >= 0 && 2 * r + 1 <= n, "generated_spectrum: need 2r+1 <= n");
  require(alpha >= 0.0 && std::isfinite(alpha), "generated_spectrum: alpha must be >= 0");
  SpectrumReport s;
  s.n = n;
  s.r = r;
  s.alpha = alpha;
  s.c0 = 1.0 / (1.0 + (2.0 * r + 1.0) * alpha);
  s.q = frequency_set(n);
  for (double q : s.q) {
    const double nu = window_nu(q, r);
    s.nu.push_back(nu);
    s.sigma_gen.push_back(q == 0.0 ? F(1.0, s.c0) : F(nu, s.c0));
    s.sigma_target.push_back(q == 0.0 ? 1.0 + n * alpha : 1.0);
    if (q == 0.0) s.one_sigma_one = n * s.sigma_gen.back();
  }
  return s;
}

struct CorrelationLength {
  double xi2 = 0.0;            // sqrt(r(r+1) F'(1;c0) / (6 F(1;c0))), as printed
  double lower = 0.0;          // sqrt(r(r+1)/3)
  double upper = 0.0;          // sqrt(r(r+1) log(1+(2r+1)alpha) / 3)
  bool lower_holds = false;
  bool upper_holds = false;
  double second_moment = 0.0;  // sqrt(-sigma''(0)/sigma(0)) = sqrt(r(r+1) F'/(3F))
};

inline CorrelationLength correlation_length(int r, double alpha) {
  require(r >= 1, "correlation_length: r must be >= 1");
  require(alpha > 0.0 && std::isfinite(alpha), "correlation_length: alpha must be > 0");
  const double c0 = 1.0 / (1.0 + (2.0 * r + 1.0) * alpha);
  const double Fv = F(1.0, c0);
  const double Fp = Fprime1(c0).value;
  const double rr = double(r) * (r + 1);
  CorrelationLength L;
  L.xi2 = std::sqrt(rr * Fp / (6.0 * Fv));
  L.second_moment = std::sqrt(rr * Fp / (3.0 * Fv));
  L.lower = std::sqrt(rr / 3.0);
  L.upper = std::sqrt(rr * std::log1p((2.0 * r + 1.0) * alpha) / 3.0);
  const double slack = 1e-9 * std::max(1.0, L.upper);
  L.lower_holds = L.xi2 >= L.lower - slack;
  L.upper_holds = L.xi2 <= L.upper + slack;
  return L;
}

struct W2Separation {
  double bound = 0.0;      // sqrt(n alpha + 1) - sqrt((2r+1) alpha + 1)
  double threshold = 0.0;  // sqrt(n alpha) / 2
  bool preconditions = false;  // (2r+1) <= n/8 and n alpha >= 4
  bool holds = false;          // preconditions => bound >= threshold
};

inline W2Separation w2_separation(int n, double alpha, int r) {
  W2Separation w;
  w.bound = std::sqrt(n * alpha + 1.0) - std::sqrt((2.0 * r + 1.0) * alpha + 1.0);
  w.threshold = 0.5 * std::sqrt(n * alpha);
  w.preconditions = (2.0 * r + 1.0) <= n / 8.0 && n * alpha >= 4.0;
  w.holds = !w.preconditions || w.bound >= w.threshold;
  return w;
}

struct SigmaT {
  Mat cov;                   // (I + t Sigma)^{-1} t Sigma^2
  double w2_sq = 0.0;        // exact W2^2(N(0,Sigma), N(0,Sigma_t)) = sum lambda (1 - sqrt(x/(1+x)))^2, x = lambda t
  double w2_sq_footnote = 0.0;  // sum lambda f(lambda t), f(x) = (1 - x/sqrt(1+x^2))^2
};

inline SigmaT sigma_t_covariance(const Mat& sigma, double t) {
  require(is_psd(sigma), "sigma_t_covariance: Sigma is not positive semidefinite");
  require(t >= 0.0, "sigma_t_covariance: t must be >= 0");
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  const Vec lam = es.eigenvalues().cwiseMax(0.0);
  Vec g(lam.size());
  SigmaT out;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double l = lam[i], x = l * t;
    g[i] = t * l * l / (1.0 + x);
    const double a = 1.0 - std::sqrt(x / (1.0 + x));
    const double f = 1.0 - x / std::sqrt(1.0 + x * x);
    out.w2_sq += l * a * a;
    out.w2_sq_footnote += l * f * f;
  }
  out.cov = es.eigenvectors() * g.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

/// Residual of the change of variables Y_t = s(t) Ybar_t, s = sqrt(t(1+t)), between the reverse-OU
/// SDE and dY = m(Y;t) dt + dB: max(|s' ybar + s Fbar(ybar) - m(y;t)|_inf, |s sqrt(gbar) - 1|).
inline double reverse_equivalence_check(const GaussianDenoiser& den, double t, const Vec& y) {
  require(t > 0.0, "reverse_equivalence_check: t must be > 0");
  const double s = std::sqrt(t * (1.0 + t));
  const double sdot = (1.0 + 2.0 * t) / (2.0 * s);
  const Vec ybar = y / s;
  const Vec drift = sdot * ybar + s * reverse_ou_drift(den, ybar, t);
  const Vec m = den(y, t);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double r1 = (drift - m).cwiseAbs().maxCoeff() / scale;
  const double r2 = std::abs(s * std::sqrt(reverse_ou_diffusion(t)) - 1.0);
  return std::max(r1, r2);
}

/// Closed-form quantities of the mean-augmented linear observation run, beta = alpha b^2.
struct Prop2Limits {
  double kappa = 0.0;          // beta/(1+beta t): drift coefficient of Y0
  double kappa_t = 0.0;        // kappa t -> 1
  double var_y0 = 0.0;         // Var Y0_t = t(1+beta t)
  double kappa2_var_y0 = 0.0;  // Var(kappa Y0_t) -> beta
  double coupling = 0.0;       // alpha b / ((1+beta t)(1+t)): coefficient of Y0 in X_t and in the Y_i drift
  double noise_var_yi = 0.0;   // Var int_0^t (1+t)/(1+s) dB_s = t(1+t)
  double integral = 0.0;       // int_0^t (1+s)^{-2} ds = t/(1+t) -> 1
  double integral_limit = 1.0;
  double beta = 0.0;
};

inline Prop2Limits prop2_limits(double alpha, double b, double t) {
  require(t > 0.0, "prop2_limits: t must be > 0");
  Prop2Limits p;
  p.beta = alpha * b * b;
  p.kappa = p.beta / (1.0 + p.beta * t);
  p.kappa_t = p.kappa * t;
  p.var_y0 = t * (1.0 + p.beta * t);
  p.kappa2_var_y0 = p.kappa * p.kappa * p.var_y0;
  p.coupling = alpha * b / ((1.0 + p.beta * t) * (1.0 + t));
  p.noise_var_yi = t * (1.0 + t);
  p.integral = t / (1.0 + t);
  // int_0^inf (1+s)^{-2} ds by quadrature, checked against its value 1.
  p.integral_limit = detail::half_line_integral([](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); });
  if (std::abs(p.integral_limit - 1.0) > 1e-9)
    throw InternalConsistencyError("prop2_limits: int (1+s)^-2 ds != 1");
  return p;
}

}  // namespace stochloc

#endif  // STOCHLOC_ANALYSIS_HPP
