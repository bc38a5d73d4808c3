#ifndef STOCHLOC_IO_HPP
#define STOCHLOC_IO_HPP

// Reports and tabular output. Uses the single-header nlohmann/json from vendor/.

#include "stochloc/analysis.hpp"
#include "stochloc/diagnostics.hpp"
#include "stochloc/losses.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace stochloc {

using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Provenance stamped on every output file.
struct OutputHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string command;
};

/// JSON numbers cannot hold inf/nan; those become strings.
inline Json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline Json json_vector(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v[i]));
  return a;
}

inline Json json_vector(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

inline Json json_matrix(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(json_vector(Vec(m.row(i).transpose())));
  return a;
}

inline Json to_json(const OutputHeader& h) {
  return {{"config_hash", hex64(h.config_hash)}, {"seed", h.seed}, {"command", h.command}};
}

inline Json to_json(const DiagnosticsReport& r) {
  Json j{{"metric", r.metric}, {"value", json_number(r.value)}, {"stderr", json_number(r.std_error)},
         {"exact", r.exact}, {"n_samples", r.n_samples}};
  if (r.n_reference) j["n_reference"] = r.n_reference;
  if (!r.params.empty()) {
    Json p = Json::object();
    for (const auto& [k, v] : r.params) p[k] = json_number(v);
    j["params"] = p;
  }
  j["flags"] = r.flags;
  return j;
}

inline Json to_json(const KLReport& r) {
  Json j{{"estimate", json_number(r.estimate)}, {"stderr", json_number(r.std_error)}, {"n_paths", r.n_paths},
         {"infinite", r.infinite}, {"exact", r.exact}, {"flags", r.flags}};
  if (!r.per_time.empty()) j["per_time"] = json_vector(r.per_time);
  return j;
}

inline Json to_json(const MomentSummary& m) {
  return {{"n", m.n}, {"mean", json_vector(m.mean)}, {"mean_stderr", json_vector(m.mean_se)},
          {"cov", json_matrix(m.cov)}, {"cov_stderr", json_matrix(m.cov_se)}};
}

inline Json to_json(const ProjectionStats& p) {
  return {{"midpoint", p.midpoint},         {"weight_upper", p.weight_upper}, {"weight_lower", p.weight_lower},
          {"weight_stderr", p.weight_se},   {"var_upper", p.var_upper},       {"var_lower", p.var_lower},
          {"bins", p.histogram.size()}};
}

inline Json to_json(const SpectrumReport& s) {
  return {{"n", s.n},
          {"r", s.r},
          {"alpha", s.alpha},
          {"c0", s.c0},
          {"one_sigma_one", s.one_sigma_one},
          {"q", json_vector(s.q)},
          {"nu", json_vector(s.nu)},
          {"sigma_gen", json_vector(s.sigma_gen)},
          {"sigma_target", json_vector(s.sigma_target)}};
}

inline Json to_json(const CorrelationLength& c) {
  return {{"xi2", c.xi2},         {"lower", c.lower},           {"upper", c.upper},
          {"lower_holds", c.lower_holds}, {"upper_holds", c.upper_holds}, {"second_moment", c.second_moment}};
}

inline Json to_json(const W2Separation& w) {
  return {{"bound", w.bound}, {"threshold", w.threshold}, {"preconditions", w.preconditions}, {"holds", w.holds}};
}

/// Writes `j` with the header embedded under "header".
inline void write_json(const std::filesystem::path& path, const OutputHeader& h, Json j) {
  Json out{{"header", to_json(h)}};
  for (auto& [k, v] : j.items()) out[k] = v;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << out.dump(2) << "\n";
}

/// CSV with a '#' comment header carrying the config hash and seed. Numbers use 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const OutputHeader& h, const std::vector<std::string>& columns)
      : f_(path, std::ios::binary) {
    if (!f_) throw Error("cannot open " + path.string() + " for writing");
    f_ << "# config_hash: " << hex64(h.config_hash) << "\n# seed: " << h.seed << "\n";
    if (!h.command.empty()) f_ << "# command: " << h.command << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) f_ << (i ? "," : "") << columns[i];
    f_ << "\n";
  }

  CsvWriter& cell(double x) {
    sep();
    f_ << format_double(x);
    return *this;
  }
  CsvWriter& cell(long long x) {
    sep();
    f_ << x;
    return *this;
  }
  CsvWriter& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(const std::string& s) {
    sep();
    f_ << s;
    return *this;
  }
  CsvWriter& cells(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) cell(v[i]);
    return *this;
  }
  CsvWriter& cells(const std::vector<int>& v) {
    for (int x : v) cell(x);
    return *this;
  }
  void end_row() {
    f_ << "\n";
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) f_ << ",";
    first_ = false;
  }
  std::ofstream f_;
  bool first_ = true;
};

inline void write_histogram_csv(const std::filesystem::path& path, const OutputHeader& h,
                                const std::vector<HistogramBin>& bins) {
  CsvWriter w(path, h, {"bin_left", "bin_right", "count"});
  for (const auto& b : bins) {
    w.cell(b.left).cell(b.right).cell(b.count);
    w.end_row();
  }
}

}  // namespace stochloc

#endif  // STOCHLOC_IO_HPP
