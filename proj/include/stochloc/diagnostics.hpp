#ifndef STOCHLOC_DIAGNOSTICS_HPP
#define STOCHLOC_DIAGNOSTICS_HPP

#include "stochloc/targets.hpp"

#include <map>

namespace stochloc {

struct DiagnosticsReport {
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
  std::size_t n_samples = 0;
  std::size_t n_reference = 0;
  std::map<std::string, double> params;
  std::vector<std::string> flags;
};

/// TV between the empirical law of configuration indices and a probability table.
/// Samples outside the table (index out of range or zero probability) count toward TV and are flagged.
inline DiagnosticsReport empirical_tv(const std::vector<std::size_t>& samples, const std::vector<double>& table) {
  require(table.size() <= (std::size_t{1} << 24), "empirical_tv: state space too large to enumerate");
  DiagnosticsReport r;
  r.metric = "tv";
  r.exact = true;
  r.n_samples = samples.size();
  if (samples.empty()) {
    r.flags.push_back("no samples");
    return r;
  }
  std::vector<double> counts(table.size(), 0.0);
  double outside = 0.0;
  for (std::size_t s : samples) {
    if (s >= table.size() || table[s] == 0.0) {
      outside += 1.0;
      if (s < table.size()) counts[s] += 1.0;
      continue;
    }
    counts[s] += 1.0;
  }
  const double N = double(samples.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) tv += std::abs(counts[i] / N - table[i]);
  // Out-of-range samples carry mass the table does not have.
  std::size_t beyond = 0;
  for (std::size_t s : samples) beyond += s >= table.size();
  tv += double(beyond) / N;
  r.value = std::min(1.0, 0.5 * tv);
  if (outside > 0.0) r.flags.push_back(std::to_string(static_cast<long long>(outside)) + " samples outside the support");
  r.params["states"] = double(table.size());
  return r;
}

/// TV between the empirical law of keyed samples and an explicit law over keys.
template <class Key>
DiagnosticsReport empirical_tv(const std::vector<Key>& samples, const std::map<Key, double>& law) {
  DiagnosticsReport r;
  r.metric = "tv";
  r.exact = true;
  r.n_samples = samples.size();
  if (samples.empty()) {
    r.flags.push_back("no samples");
    return r;
  }
  std::map<Key, double> emp;
  for (const auto& s : samples) emp[s] += 1.0 / double(samples.size());
  double tv = 0.0;
  std::size_t outside = 0;
  for (const auto& [k, p] : law) {
    auto it = emp.find(k);
    tv += std::abs((it == emp.end() ? 0.0 : it->second) - p);
  }
  for (const auto& [k, p] : emp) {
    auto it = law.find(k);
    if (it == law.end()) {
      tv += p;
      outside += static_cast<std::size_t>(std::llround(p * double(samples.size())));
    } else if (it->second == 0.0) {
      outside += static_cast<std::size_t>(std::llround(p * double(samples.size())));
    }
  }
  r.value = std::min(1.0, 0.5 * tv);
  if (outside > 0) r.flags.push_back(std::to_string(outside) + " samples outside the support");
  return r;
}

/// TV between two empirical laws (symmetric in its arguments).
template <class Key>
DiagnosticsReport empirical_tv_two(const std::vector<Key>& a, const std::vector<Key>& b) {
  require(!a.empty() && !b.empty(), "empirical_tv_two: empty sample");
  std::map<Key, std::pair<double, double>> emp;
  for (const auto& s : a) emp[s].first += 1.0 / double(a.size());
  for (const auto& s : b) emp[s].second += 1.0 / double(b.size());
  double tv = 0.0;
  for (const auto& [k, p] : emp) tv += std::abs(p.first - p.second);
  DiagnosticsReport r;
  r.metric = "tv";
  r.value = std::min(1.0, 0.5 * tv);
  r.n_samples = a.size();
  r.n_reference = b.size();
  return r;
}

struct HistogramBin {
  double left = 0.0, right = 0.0;
  std::size_t count = 0;
};

/// Fixed-width histogram; bin width from the Freedman-Diaconis rule unless `width` > 0.
inline std::vector<HistogramBin> histogram(std::vector<double> values, double width = 0.0) {
  std::vector<HistogramBin> bins;
  if (values.empty()) return bins;
  std::sort(values.begin(), values.end());
  const double lo = values.front(), hi = values.back();
  if (width <= 0.0) {
    auto quant = [&](double p) {
      const double pos = p * double(values.size() - 1);
      const std::size_t i = static_cast<std::size_t>(pos);
      const double f = pos - double(i);
      return i + 1 < values.size() ? values[i] * (1.0 - f) + values[i + 1] * f : values[i];
    };
    const double iqr = quant(0.75) - quant(0.25);
    width = 2.0 * iqr / std::cbrt(double(values.size()));
  }
  if (!(width > 0.0) || hi == lo) return {{lo, hi, values.size()}};
  const std::size_t nb = std::min<std::size_t>(100000, static_cast<std::size_t>(std::ceil((hi - lo) / width)) + 1);
  bins.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) bins[b] = {lo + b * width, lo + (b + 1) * width, 0};
  for (double v : values) {
    std::size_t b = static_cast<std::size_t>((v - lo) / width);
    if (b >= nb) b = nb - 1;
    ++bins[b].count;
  }
  return bins;
}

struct ProjectionStats {
  std::vector<double> projections;  // s = <x,a>/|a|^2
  std::vector<HistogramBin> histogram;
  double midpoint = 0.0;
  double weight_upper = 0.0;  // #{s > midpoint}/N
  double weight_lower = 0.0;
  double weight_se = 0.0;
  double var_upper = 0.0;     // sample variance of s within each mode
  double var_lower = 0.0;
};

/// Midpoint between the projected centers (1-p) and -p of the two-component model.
inline double mixture_projection_midpoint(double p) { return 0.5 * (1.0 - 2.0 * p); }

inline ProjectionStats projection_stats(const std::vector<Vec>& samples, const Vec& a, double midpoint,
                                        double bin_width = 0.0) {
  const double a2 = a.squaredNorm();
  require(a2 > 0.0, "projection_stats: a = 0");
  ProjectionStats ps;
  ps.midpoint = midpoint;
  std::vector<double> up, lo;
  for (const auto& x : samples) {
    require(x.size() == a.size(), "projection_stats: dimension mismatch");
    const double s = x.dot(a) / a2;
    ps.projections.push_back(s);
    (s > midpoint ? up : lo).push_back(s);
  }
  const double N = double(samples.size());
  if (N > 0) {
    ps.weight_upper = double(up.size()) / N;
    ps.weight_lower = 1.0 - ps.weight_upper;
    ps.weight_se = std::sqrt(ps.weight_upper * ps.weight_lower / N);
  }
  auto var = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / double(v.size() - 1);
  };
  ps.var_upper = var(up);
  ps.var_lower = var(lo);
  ps.histogram = histogram(ps.projections, bin_width);
  return ps;
}

/// 1-D W2 by the monotone (sorted) coupling; unequal sizes use linearly interpolated quantiles on
/// max(|a|,|b|) midpoint levels.
inline DiagnosticsReport empirical_w2_1d(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "empirical_w2_1d: empty batch");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  DiagnosticsReport r;
  r.metric = "w2_1d";
  r.n_samples = a.size();
  r.n_reference = b.size();
  double ss = 0.0;
  if (a.size() == b.size()) {
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    r.value = std::sqrt(ss / double(a.size()));
    return r;
  }
  auto quantile = [](const std::vector<double>& v, double u) {
    const double pos = u * double(v.size()) - 0.5;
    if (pos <= 0.0) return v.front();
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double f = pos - double(i);
    return v[i] * (1.0 - f) + v[i + 1] * f;
  };
  const std::size_t M = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < M; ++i) {
    const double u = (double(i) + 0.5) / double(M);
    const double d = quantile(a, u) - quantile(b, u);
    ss += d * d;
  }
  r.value = std::sqrt(ss / double(M));
  return r;
}

struct MomentSummary {
  Vec mean;
  Mat cov;
  Vec mean_se;  // standard error of each mean entry
  Mat cov_se;   // standard error of each covariance entry
  std::size_t n = 0;
};

/// Sample mean and covariance (denominator N-1) with Monte Carlo standard errors.
inline MomentSummary moment_summary(const std::vector<Vec>& samples) {
  require(samples.size() >= 2, "moment_summary: need at least two samples");
  const Eigen::Index d = samples.front().size();
  MomentSummary m;
  m.n = samples.size();
  const double N = double(samples.size());
  m.mean = Vec::Zero(d);
  for (const auto& x : samples) m.mean += x;
  m.mean /= N;
  m.cov = Mat::Zero(d, d);
  Mat fourth = Mat::Zero(d, d);
  for (const auto& x : samples) {
    const Vec c = x - m.mean;
    m.cov.noalias() += c * c.transpose();
  }
  m.cov /= (N - 1.0);
  for (const auto& x : samples) {
    const Vec c = x - m.mean;
    const Mat outer = c * c.transpose() - m.cov;
    fourth += outer.cwiseProduct(outer);
  }
  m.mean_se = (m.cov.diagonal() / N).cwiseSqrt();
  m.cov_se = (fourth / (N * (N - 1.0))).cwiseSqrt();
  return m;
}

/// |A - B|_F / |B|_F.
inline double relative_frobenius(const Mat& A, const Mat& B) { return (A - B).norm() / B.norm(); }

}  // namespace stochloc

#endif  // STOCHLOC_DIAGNOSTICS_HPP
