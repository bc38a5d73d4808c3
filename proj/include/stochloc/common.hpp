#ifndef STOCHLOC_COMMON_HPP
#define STOCHLOC_COMMON_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace stochloc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: non-normalized tables, dimension mismatch, NaN observations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Observation with zero posterior mass under the target.
class InconsistentObservation : public Error {
 public:
  using Error::Error;
};

/// A proven identity or bound failed numerically.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A generative chain produced a non-finite state.
class ChainFailure : public Error {
 public:
  ChainFailure(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

inline constexpr double kProbabilityTolerance = 1e-12;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-chain stream seed: splitmix64(splitmix64(seed) ^ splitmix64(index ^ 0xd1b54a32d192ed03)).
constexpr std::uint64_t hash64(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index ^ 0xd1b54a32d192ed03ULL));
}

inline Rng chain_rng(std::uint64_t seed, std::uint64_t index) { return Rng(hash64(seed, index)); }

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Vec standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = normal(rng);
  return g;
}

/// log(sum(exp(v))); -inf when every entry is -inf.
inline double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

/// Normalizes log-weights in place into probabilities. Returns false if all are -inf.
inline bool softmax_inplace(std::vector<double>& logw) {
  const double lse = log_sum_exp(logw);
  if (!std::isfinite(lse)) return false;
  for (double& w : logw) w = std::exp(w - lse);
  return true;
}

/// Index of the category drawn from `probs` (need not be exactly normalized).
inline std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  double total = 0.0;
  for (double p : probs) total += p;
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    u -= probs[i];
    if (u < 0.0) return i;
  }
  // Rounding fallthrough: last category with positive mass.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

/// Symmetric positive semidefinite check by eigenvalues, relative tolerance.
inline bool is_psd(const Mat& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  if (!m.isApprox(m.transpose(), 1e-12) && (m - m.transpose()).norm() > 1e-12) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

/// Symmetric square root of a PSD matrix (negative rounding noise clipped to zero).
inline Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const Vec s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

/// Round-trip decimal formatting (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Runs `fn(index, rng)` for each chain with rng seeded by hash64(seed, index).
/// Results are stored by index, so output does not depend on `workers`.
template <class Fn>
auto run_chains(std::size_t count, std::uint64_t seed, Fn&& fn, unsigned workers = 0)
    -> std::vector<decltype(fn(std::size_t{}, std::declval<Rng&>()))> {
  using R = decltype(fn(std::size_t{}, std::declval<Rng&>()));
  std::vector<R> out(count);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  auto body = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = chain_rng(seed, i);
      out[i] = fn(i, rng);
    }
  };
  if (workers <= 1) {
    body(0, count);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk, e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, w, b, e] {
      try {
        body(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  // Lowest chunk first, matching what a serial run would have thrown.
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace stochloc

#endif  // STOCHLOC_COMMON_HPP
