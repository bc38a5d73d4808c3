#ifndef STOCHLOC_CONFIG_HPP
#define STOCHLOC_CONFIG_HPP

// YAML experiment files: one file describes one experiment.

#include "stochloc/io.hpp"

#include <yaml-cpp/yaml.h>

#include <sstream>

namespace stochloc {

struct ExperimentConfig {
  std::string process;
  YAML::Node target, denoiser, grid, params, kl;
  std::size_t chains = 1000;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::vector<std::string> diagnostics;
  std::vector<double> snapshots;
  unsigned workers = 1;
  std::filesystem::path base_dir;
  std::string text;  // file contents plus any command-line overrides; hashed for provenance

  std::uint64_t hash() const { return fnv1a64(text); }
};

namespace detail {

inline YAML::Node required(const YAML::Node& n, const char* key, const std::string& where) {
  if (!n || !n.IsMap() || !n[key]) throw ValidationError(where + ": missing key '" + key + "'");
  return n[key];
}

template <class T>
T get(const YAML::Node& n, const char* key, const std::string& where) {
  try {
    return required(n, key, where).as<T>();
  } catch (const YAML::Exception& e) {
    throw ValidationError(where + ": bad value for '" + key + "': " + e.what());
  }
}

template <class T>
T get_or(const YAML::Node& n, const char* key, T fallback) {
  if (!n || !n.IsMap() || !n[key]) return fallback;
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline std::vector<double> read_numbers(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read table file " + path.string());
  std::vector<double> v;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x;
    while (ss >> x) v.push_back(x);
  }
  return v;
}

/// table: [..] | uniform | random (with table_seed) ; or table_file: path.
inline std::vector<double> parse_table(const YAML::Node& n, std::size_t size, const std::filesystem::path& base,
                                       const std::string& where, const char* key = "table") {
  if (n[std::string(key) + "_file"]) {
    auto p = std::filesystem::path(n[std::string(key) + "_file"].as<std::string>());
    return read_numbers(p.is_absolute() ? p : base / p);
  }
  const YAML::Node t = required(n, key, where);
  if (t.IsScalar()) {
    const auto kind = t.as<std::string>();
    if (kind == "uniform") return std::vector<double>(size, 1.0 / double(size));
    if (kind == "random") {
      Rng rng = chain_rng(get_or<std::uint64_t>(n, "table_seed", 0), 0);
      return random_table(size, rng);
    }
    throw ValidationError(where + ": unknown table '" + kind + "'");
  }
  return t.as<std::vector<double>>();
}

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size())); }

inline Mat parse_matrix(const YAML::Node& n, const std::string& where) {
  const auto rows = n.as<std::vector<std::vector<double>>>();
  if (rows.empty()) throw ValidationError(where + ": empty matrix");
  Mat m(Eigen::Index(rows.size()), Eigen::Index(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ValidationError(where + ": ragged matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  }
  return m;
}

inline DiscreteTarget parse_atoms(const YAML::Node& n, const std::filesystem::path& base, const std::string& where) {
  const auto raw = required(n, "atoms", where).as<std::vector<std::vector<double>>>();
  std::vector<Vec> atoms;
  for (const auto& a : raw) atoms.push_back(to_vec(a));
  return DiscreteTarget(std::move(atoms), parse_table(n, raw.size(), base, where, "weights"));
}

}  // namespace detail

/// Target section. `type` is one of discrete, hypercube, qary, mixture, circulant, gaussian, nonnegative.
inline TargetDistribution parse_target(const YAML::Node& n, const std::filesystem::path& base = {}) {
  const std::string where = "target";
  const auto type = detail::get<std::string>(n, "type", where);
  try {
    if (type == "hypercube") {
      const int dim = detail::get<int>(n, "n", where);
      require(dim >= 1 && dim <= HypercubeTarget::kMaxDim, "target: hypercube n out of range");
      return HypercubeTarget(dim, detail::parse_table(n, std::size_t{1} << dim, base, where));
    }
    if (type == "qary") {
      const int dim = detail::get<int>(n, "n", where), q = detail::get<int>(n, "q", where);
      require(dim >= 1 && q >= 2 && std::pow(double(q), dim) <= double(QaryTarget::kMaxStates),
              "target: qary shape out of range");
      std::size_t size = 1;
      for (int i = 0; i < dim; ++i) size *= static_cast<std::size_t>(q);
      return QaryTarget(dim, q, detail::parse_table(n, size, base, where));
    }
    if (type == "discrete") return detail::parse_atoms(n, base, where);
    if (type == "nonnegative") return NonnegativeTarget(detail::parse_atoms(n, base, where));
    if (type == "mixture") {
      const int dim = detail::get<int>(n, "n", where);
      const YAML::Node a = detail::required(n, "a", where);
      Vec av = a.IsSequence() ? detail::to_vec(a.as<std::vector<double>>()) : Vec(Vec::Constant(dim, a.as<double>()));
      require(av.size() == dim, "target: mixture a has wrong length");
      return TwoGaussianMixture(std::move(av), detail::get<double>(n, "p", where));
    }
    if (type == "circulant") {
      if (n["c"]) return CirculantGaussian::from_correlation(n["c"].as<std::vector<double>>());
      if (n["spectrum"]) return CirculantGaussian::from_spectrum(n["spectrum"].as<std::vector<double>>());
      return CirculantGaussian::rank_one(detail::get<int>(n, "n", where), detail::get<double>(n, "alpha", where));
    }
    if (type == "gaussian") {
      const YAML::Node c = detail::required(n, "cov", where);
      Mat cov;
      if (c.IsScalar() && c.as<std::string>() == "random") {
        Rng rng = chain_rng(detail::get_or<std::uint64_t>(n, "cov_seed", 0), 0);
        cov = random_spd(detail::get<int>(n, "n", where), detail::get_or<double>(n, "eig_lo", 0.5),
                         detail::get_or<double>(n, "eig_hi", 2.0), rng);
      } else {
        cov = detail::parse_matrix(c, where);
      }
      Vec mean = n["mean"] ? detail::to_vec(n["mean"].as<std::vector<double>>()) : Vec(Vec::Zero(cov.rows()));
      return GaussianTarget(std::move(mean), std::move(cov));
    }
  } catch (const YAML::Exception& e) {
    throw ValidationError(where + ": " + e.what());
  }
  throw ValidationError("target: unknown type '" + type + "'");
}

/// Grid section: rule alpha-uniform {K, t_max}, uniform {K, t_max}, arcsin {K, lo, hi}, explicit {nodes}.
inline TimeGrid parse_grid(const YAML::Node& n) {
  const std::string where = "grid";
  const auto rule = detail::get<std::string>(n, "rule", where);
  if (rule == "alpha-uniform")
    return TimeGrid::alpha_uniform(detail::get<int>(n, "K", where), detail::get<double>(n, "t_max", where),
                                   detail::get_or<bool>(n, "include_zero", true));
  if (rule == "uniform")
    return TimeGrid::uniform(detail::get<int>(n, "K", where), detail::get<double>(n, "t_max", where));
  if (rule == "arcsin")
    return TimeGrid::arcsin(detail::get_or<int>(n, "K", 300), detail::get_or<double>(n, "lo", 0.01),
                            detail::get_or<double>(n, "hi", 0.99));
  if (rule == "explicit") return TimeGrid::explicit_nodes(detail::get<std::vector<double>>(n, "nodes", where));
  throw ValidationError("grid: unknown rule '" + rule + "'");
}

inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!root.IsMap()) throw ValidationError("config: top level must be a mapping");
  ExperimentConfig c;
  c.text = text;
  c.base_dir = base_dir;
  c.process = detail::get_or<std::string>(root, "process", "");
  c.target = root["target"];
  c.denoiser = root["denoiser"];
  c.grid = root["grid"];
  c.params = root["params"];
  c.kl = root["kl"];
  const auto chains = detail::get_or<long long>(root, "chains", 1000);
  if (chains < 0) throw ValidationError("config: chains must be >= 0");
  c.chains = static_cast<std::size_t>(chains);
  c.seed = detail::get_or<std::uint64_t>(root, "seed", 0);
  c.workers = detail::get_or<unsigned>(root, "workers", 1);
  if (root["output"]) {
    c.out_dir = detail::get_or<std::string>(root["output"], "dir", c.out_dir);
    c.snapshots = detail::get_or<std::vector<double>>(root["output"], "snapshots", {});
  }
  c.diagnostics = detail::get_or<std::vector<std::string>>(root, "diagnostics", {});
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace stochloc

#endif  // STOCHLOC_CONFIG_HPP
