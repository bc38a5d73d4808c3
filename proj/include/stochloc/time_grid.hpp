#ifndef STOCHLOC_TIME_GRID_HPP
#define STOCHLOC_TIME_GRID_HPP

#include "stochloc/common.hpp"

#include <numbers>

namespace stochloc {

/// Strictly increasing mesh of times.
class TimeGrid {
 public:
  enum class Rule { AlphaUniform, Explicit, Arcsin };

  /// t_k = tan(alpha_k)^-2 with K+1 equispaced alpha_k from pi/2 down to alpha_min = atan(1/sqrt(t_max)).
  /// The first node is exactly 0; with include_zero=false it is dropped (K nodes remain).
  static TimeGrid alpha_uniform(int K, double t_max, bool include_zero = true) {
    require(K >= 1, "TimeGrid: K must be >= 1");
    require(t_max > 0.0 && std::isfinite(t_max), "TimeGrid: t_max must be positive");
    const double a_hi = std::numbers::pi / 2.0;
    const double a_lo = std::atan(1.0 / std::sqrt(t_max));
    std::vector<double> t;
    t.reserve(K + 1);
    if (include_zero) t.push_back(0.0);
    for (int k = 1; k <= K; ++k) {
      const double a = a_hi + (a_lo - a_hi) * k / K;
      const double c = 1.0 / std::tan(a);
      t.push_back(c * c);
    }
    t.back() = t_max;
    return TimeGrid(std::move(t), Rule::AlphaUniform);
  }

  static TimeGrid explicit_nodes(std::vector<double> t) { return TimeGrid(std::move(t), Rule::Explicit); }

  /// Uniform K+1 nodes from 0 to t_max.
  static TimeGrid uniform(int K, double t_max) {
    require(K >= 1 && t_max > 0.0, "TimeGrid: invalid uniform grid");
    std::vector<double> t(K + 1);
    for (int k = 0; k <= K; ++k) t[k] = t_max * k / K;
    return TimeGrid(std::move(t), Rule::Explicit);
  }

  /// t = sin(phi)^2 with phi equispaced, K+1 nodes from lo to hi (default clock of the discrete samplers).
  static TimeGrid arcsin(int K = 300, double lo = 0.01, double hi = 0.99) {
    require(K >= 1, "TimeGrid: K must be >= 1");
    require(0.0 < lo && lo < hi && hi < 1.0, "TimeGrid: arcsin grid needs 0 < lo < hi < 1");
    const double p0 = std::asin(std::sqrt(lo)), p1 = std::asin(std::sqrt(hi));
    std::vector<double> t(K + 1);
    for (int k = 0; k <= K; ++k) {
      const double s = std::sin(p0 + (p1 - p0) * k / K);
      t[k] = s * s;
    }
    t.front() = lo;
    t.back() = hi;
    return TimeGrid(std::move(t), Rule::Arcsin);
  }

  const std::vector<double>& nodes() const { return t_; }
  std::size_t size() const { return t_.size(); }
  std::size_t steps() const { return t_.size() - 1; }
  double operator[](std::size_t k) const { return t_[k]; }
  double front() const { return t_.front(); }
  double back() const { return t_.back(); }
  double delta(std::size_t k) const { return t_[k + 1] - t_[k]; }
  Rule rule() const { return rule_; }

 private:
  TimeGrid(std::vector<double> t, Rule rule) : t_(std::move(t)), rule_(rule) {
    require(t_.size() >= 2, "TimeGrid: need at least two nodes");
    require(t_.front() >= 0.0, "TimeGrid: negative time");
    for (std::size_t k = 0; k + 1 < t_.size(); ++k)
      require(t_[k] < t_[k + 1] && std::isfinite(t_[k + 1]), "TimeGrid: nodes must be strictly increasing");
  }

  std::vector<double> t_;
  Rule rule_;
};

}  // namespace stochloc

#endif  // STOCHLOC_TIME_GRID_HPP
