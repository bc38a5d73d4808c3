#ifndef STOCHLOC_TOOLS_EXPERIMENT_HPP
#define STOCHLOC_TOOLS_EXPERIMENT_HPP

// Config-driven runs behind the `stochloc` subcommands.

#include "stochloc/config.hpp"
#include "stochloc/stochloc.hpp"
#include "stochloc/synthetic.hpp"

#include <iostream>
#include <set>

namespace stochloc::cli {

enum class Format { Csv, Json };

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chains;
  std::optional<std::string> out_dir;
  std::optional<unsigned> workers;
  Format format = Format::Csv;
  bool quiet = false;
};

/// Applies command-line overrides; they are appended to the hashed text so the header reflects them.
inline void apply_overrides(ExperimentConfig& c, const RunOptions& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.chains) {
    c.chains = *o.chains;
    c.text += "\n# override chains=" + std::to_string(*o.chains);
  }
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.workers) c.workers = *o.workers;
}

// ---- denoiser resolution ----

inline GaussianDenoiser exact_gaussian_denoiser(const TargetDistribution& target) {
  return std::visit(
      [](const auto& t) -> GaussianDenoiser {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, QaryTarget>)
          return exact_denoiser(to_atoms(t));
        else if constexpr (std::is_same_v<T, NonnegativeTarget>)
          return exact_denoiser(t.base());
        else
          return exact_denoiser(t);
      },
      target);
}

/// denoiser: {type: exact | linear | windowed (r) | component (sign) | scaled (c, base) | guess (alpha, b)}.
inline GaussianDenoiser build_gaussian_denoiser(const YAML::Node& spec, const TargetDistribution& target) {
  const auto type = detail::get_or<std::string>(spec, "type", "exact");
  if (type == "exact") return exact_gaussian_denoiser(target);
  if (type == "linear") {
    const auto mo = moments(target);
    const LinearGaussianDenoiser lin(mo.cov);
    const Vec mu = mo.mean;
    return {mu.size(), [lin, mu](const Vec& y, double t) { return Vec(mu + lin(y - t * mu, t)); }};
  }
  if (type == "windowed") {
    const auto* c = std::get_if<CirculantGaussian>(&target);
    if (!c) throw ValidationError("denoiser: windowed needs a circulant target");
    return windowed_denoiser(c->c(), detail::get<int>(spec, "r", "denoiser"));
  }
  if (type == "component") {
    const auto* mix = std::get_if<TwoGaussianMixture>(&target);
    if (!mix) throw ValidationError("denoiser: component needs a mixture target");
    return component_denoiser(detail::get<int>(spec, "sign", "denoiser") > 0 ? mix->mean_plus() : mix->mean_minus());
  }
  if (type == "scaled") {
    const double c = detail::get<double>(spec, "c", "denoiser");
    const auto base = build_gaussian_denoiser(spec["base"], target);
    return {base.dim, [base, c](const Vec& y, double t) { return Vec(c * base(y, t)); }, base.channel};
  }
  if (type == "guess") {
    const int n = static_cast<int>(target_dim(target));
    return linear_obs_guess_denoiser(n, detail::get<double>(spec, "alpha", "denoiser"),
                                     detail::get<double>(spec, "b", "denoiser"));
  }
  throw ValidationError("denoiser: unknown type '" + type + "'");
}

// ---- per-chain records ----

struct ChainRecord {
  bool ok = true;
  std::string error;
  std::size_t fail_step = 0;
  std::vector<double> values;          // decoded sample
  std::optional<std::size_t> index;    // configuration index for enumerable targets
  std::vector<int> key;                // discrete key for keyed TV (percolation differences)
  int label = 0;                       // half-space side S
  std::vector<std::pair<double, std::vector<double>>> snapshots;
};

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }
inline std::vector<double> to_std(const std::vector<int>& v) { return {v.begin(), v.end()}; }

/// Atoms and weights of an enumerable target, if any.
inline std::optional<std::pair<std::vector<Vec>, std::vector<double>>> enumerable(const TargetDistribution& t) {
  if (auto* d = std::get_if<DiscreteTarget>(&t)) return std::pair{d->atoms(), d->weights()};
  if (auto* d = std::get_if<NonnegativeTarget>(&t)) return std::pair{d->base().atoms(), d->base().weights()};
  if (auto* h = std::get_if<HypercubeTarget>(&t)) {
    auto a = to_atoms(*h);
    return std::pair{a.atoms(), a.weights()};
  }
  if (auto* q = std::get_if<QaryTarget>(&t)) {
    auto a = to_atoms(*q);
    return std::pair{a.atoms(), a.weights()};
  }
  return std::nullopt;
}

inline std::size_t nearest_atom(const std::vector<Vec>& atoms, const Vec& x) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const double d = (atoms[j] - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return best;
}

template <class T>
const T& target_as(const TargetDistribution& t, const std::string& process) {
  const auto* p = std::get_if<T>(&t);
  if (!p) throw ValidationError("process '" + process + "' does not support this target type");
  return *p;
}

inline RevealOrder parse_order(const YAML::Node& params) {
  if (params && params["order"] && params["order"].IsSequence())
    return RevealOrder::fixed(params["order"].as<std::vector<int>>());
  return RevealOrder::uniform_random_times();
}

/// Builds the per-chain simulation for `c.process`; the returned function never throws ChainFailure.
inline std::function<ChainRecord(std::size_t, Rng&)> make_chain_fn(const ExperimentConfig& c,
                                                                   const TargetDistribution& target) {
  const std::string& proc = c.process;
  const auto snaps = std::make_shared<const std::vector<double>>(c.snapshots);
  const auto atoms = enumerable(target);
  std::function<ChainRecord(Rng&)> body;

  auto with_index = [atoms](ChainRecord& r) {
    if (atoms) r.index = nearest_atom(atoms->first, Eigen::Map<const Vec>(r.values.data(), Eigen::Index(r.values.size())));
  };
  auto copy_snaps = [](ChainRecord& r, const std::vector<Snapshot>& s) {
    for (const auto& sn : s) {
      auto v = to_std(sn.y);
      v.insert(v.end(), sn.x.data(), sn.x.data() + sn.x.size());
      r.snapshots.push_back({sn.t, std::move(v)});
    }
  };

  if (proc == "isotropic" || proc == "reverse-ou") {
    const auto den = build_gaussian_denoiser(c.denoiser, target);
    const auto grid = parse_grid(c.grid);
    const bool reverse = proc == "reverse-ou";
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = reverse ? simulate_reverse_ou(den, grid, rng, *snaps) : simulate_isotropic(den, grid, rng, *snaps);
      r.values = to_std(res.x_final);
      copy_snaps(r, res.snapshots);
      with_index(r);
      return r;
    };
  } else if (proc == "anisotropic") {
    const auto grid = parse_grid(c.grid);
    const Eigen::Index n = target_dim(target);
    QSchedule Q = QSchedule::identity();
    if (c.params && c.params["Q"]) {
      const auto q = c.params["Q"];
      Q = q.IsScalar() ? QSchedule::scaled(q.as<double>()) : QSchedule::constant(detail::parse_matrix(q, "params.Q"));
    }
    AnisotropicDenoiser den;
    if (auto* d = std::get_if<GaussianTarget>(&target))
      den = exact_anisotropic_denoiser(*d);
    else if (auto e = enumerable(target))
      den = exact_anisotropic_denoiser(DiscreteTarget(e->first, e->second));
    else
      throw ValidationError("process 'anisotropic' needs a gaussian or enumerable target");
    const auto prepared = std::make_shared<const PreparedQ>(PreparedQ::prepare(Q, grid, n));
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = simulate_anisotropic(den, *prepared, grid, rng, *snaps);
      r.values = to_std(res.x_final);
      copy_snaps(r, res.snapshots);
      with_index(r);
      return r;
    };
  } else if (proc == "linear-observation") {
    const auto grid = parse_grid(c.grid);
    const int n = static_cast<int>(target_dim(target));
    const YAML::Node op = c.params ? c.params["operator"] : YAML::Node();
    const auto kind = detail::get_or<std::string>(op, "type", "mean-augmented");
    Mat A;
    if (kind == "mean-augmented")
      A = mean_augmented_operator(n, detail::get_or<double>(op, "b", 1.0));
    else if (kind == "channel-average")
      A = channel_average_operator(detail::get<int>(op, "channels", "operator"), detail::get<int>(op, "pixels", "operator"),
                                   detail::get_or<double>(op, "b", 1.0));
    else if (kind == "matrix")
      A = detail::parse_matrix(detail::required(op, "A", "operator"), "operator.A");
    else
      throw ValidationError("operator: unknown type '" + kind + "'");
    GaussianDenoiser den;
    const auto dtype = detail::get_or<std::string>(c.denoiser, "type", "exact");
    if (dtype == "guess") {
      if (kind != "mean-augmented") throw ValidationError("denoiser: guess drifts need the mean-augmented operator");
      den = linear_obs_guess_denoiser(n, detail::get<double>(c.denoiser, "alpha", "denoiser"),
                                      detail::get_or<double>(op, "b", 1.0));
    } else if (auto e = enumerable(target)) {
      den = linear_obs_exact_denoiser(DiscreteTarget(e->first, e->second), A);
    } else {
      throw ValidationError("linear-observation: exact denoiser needs an enumerable target");
    }
    const auto model = std::make_shared<const LinearObservationModel>(A);
    std::function<Vec(const Vec&)> decode;
    if (detail::get_or<std::string>(c.params, "decode", dtype == "guess" ? "tail" : "pinv") == "tail")
      decode = [n](const Vec& m) { return Vec(m.tail(n)); };
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = simulate_linear_observation(den, *model, grid, rng, decode, *snaps);
      r.values = to_std(res.x_denoised);
      copy_snaps(r, res.chain.snapshots);
      with_index(r);
      return r;
    };
  } else if (proc == "halfspace-mixture") {
    const auto& mix = target_as<TwoGaussianMixture>(target, proc);
    const auto grid = parse_grid(c.grid);
    // Step 1: split direction and weight from exact samples on a dedicated stream.
    const auto n_split = detail::get_or<std::size_t>(c.params, "split_samples", 100000);
    std::vector<Vec> xs(n_split);
    Rng srng(hash64(c.seed, ~std::uint64_t{0}));
    for (auto& x : xs) x = sample_exact(mix, srng);
    const Split split = estimate_split(xs);
    const bool plus_is_upper = mix.mean_plus().dot(split.v) >= 0.0;
    const auto up = component_denoiser(plus_is_upper ? mix.mean_plus() : mix.mean_minus());
    const auto lo = component_denoiser(plus_is_upper ? mix.mean_minus() : mix.mean_plus());
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = simulate_halfspace_mixture(split.qhat, up, lo, grid, rng);
      r.values = to_std(res.chain.x_final);
      r.label = res.S;
      return r;
    };
  } else if (proc == "binary-symmetric") {
    const auto& h = target_as<HypercubeTarget>(target, proc);
    const auto den = exact_magnetization_denoiser(h);
    const auto grid = parse_grid(c.grid);
    ThinningOptions opt;
    opt.cap = detail::get_or<double>(c.params, "cap", opt.cap);
    const int n = h.n();
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = simulate_binary_symmetric(den, n, grid, rng, opt, *snaps);
      r.values = to_std(res.output);
      r.index = h.index(res.output);
      for (const auto& [t, y] : res.snapshots) r.snapshots.push_back({t, to_std(y)});
      return r;
    };
  } else if (proc == "qary-symmetric") {
    const auto& q = target_as<QaryTarget>(target, proc);
    const auto den = exact_belief_denoiser(q);
    const auto grid = parse_grid(c.grid);
    ThinningOptions opt;
    opt.cap = detail::get_or<double>(c.params, "cap", opt.cap);
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = simulate_qary_symmetric(den, q.q(), q.n(), grid, rng, opt);
      r.values = to_std(res.output);
      r.index = q.index(res.output);
      return r;
    };
  } else if (proc == "erasure") {
    const auto order = parse_order(c.params);
    body = [=](Rng& rng) {
      ChainRecord r;
      std::visit(
          [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, HypercubeTarget> || std::is_same_v<T, QaryTarget> ||
                          std::is_same_v<T, DiscreteTarget>) {
              const std::size_t j = simulate_erasure_index(t, order, rng);
              r.index = j;
              if constexpr (std::is_same_v<T, DiscreteTarget>)
                r.values = to_std(t.atoms()[j]);
              else
                r.values = to_std(t.point(j));
            } else {
              throw ValidationError("process 'erasure' needs a hypercube, qary or discrete target");
            }
          },
          target);
      return r;
    };
  } else if (proc == "poisson") {
    const auto& nn = target_as<NonnegativeTarget>(target, proc);
    const auto den = exact_poisson_denoiser(nn);
    const auto grid = parse_grid(c.grid);
    const double cap = detail::get_or<double>(c.params, "cap", 0.1);
    const int n = static_cast<int>(nn.dim());
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = simulate_poisson_observation(den, n, grid, rng, cap, *snaps);
      r.values = to_std(res.x_decoded);
      for (const auto& [t, y] : res.snapshots) r.snapshots.push_back({t, to_std(y)});
      with_index(r);
      return r;
    };
  } else if (proc == "percolation") {
    const auto& q = target_as<QaryTarget>(target, proc);
    const auto sched = EdgeSchedule::grid(detail::get<int>(c.params, "rows", "params"),
                                          detail::get<int>(c.params, "cols", "params"));
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = simulate_information_percolation(q, sched, rng);
      r.key = res.differences;
      r.values = to_std(res.anchored);
      return r;
    };
  } else if (proc == "gaussian-erasure") {
    const auto e = enumerable(target);
    if (!e) throw ValidationError("process 'gaussian-erasure' needs an enumerable target");
    const DiscreteTarget dt(e->first, e->second);
    const auto grid = parse_grid(c.grid);
    std::vector<std::pair<double, int>> ev;
    if (c.params && c.params["reveal"])
      for (const auto& p : c.params["reveal"]) ev.push_back({p[0].as<double>(), p[1].as<int>()});
    const RevealSchedule sched(std::move(ev));
    body = [=](Rng& rng) {
      ChainRecord r;
      const auto res = simulate_gaussian_erasure(dt, sched, grid, rng);
      r.values = to_std(res.chain.x_final);
      with_index(r);
      return r;
    };
  } else {
    throw ValidationError("config: unknown process '" + proc + "'");
  }

  return [body](std::size_t, Rng& rng) {
    try {
      return body(rng);
    } catch (const ChainFailure& e) {
      ChainRecord r;
      r.ok = false;
      r.error = e.what();
      r.fail_step = e.step();
      return r;
    } catch (const InconsistentObservation& e) {
      ChainRecord r;
      r.ok = false;
      r.error = e.what();
      return r;
    }
  };
}

// ---- diagnostics over a finished run ----

inline Json run_diagnostics(const ExperimentConfig& c, const TargetDistribution& target,
                            const std::vector<ChainRecord>& recs, const OutputHeader& header,
                            const std::filesystem::path& out) {
  Json d = Json::object();
  std::vector<Vec> xs;
  std::vector<std::size_t> idx;
  std::vector<std::vector<int>> keys;
  std::size_t failed = 0;
  for (const auto& r : recs) {
    if (!r.ok) {
      ++failed;
      continue;
    }
    xs.push_back(detail::to_vec(r.values));
    if (r.index) idx.push_back(*r.index);
    if (!r.key.empty()) keys.push_back(r.key);
  }
  d["chains"] = recs.size();
  d["failed_chains"] = failed;
  std::set<std::string> wanted(c.diagnostics.begin(), c.diagnostics.end());
  if (wanted.count("tv")) {
    if (c.process == "percolation") {
      const auto& q = std::get<QaryTarget>(target);
      const auto sched = EdgeSchedule::grid(c.params["rows"].as<int>(), c.params["cols"].as<int>());
      std::map<std::vector<int>, double> law;
      for (const auto& [k, p] : percolation_difference_law(q, sched)) law[k] = p;
      d["tv"] = to_json(empirical_tv(keys, law));
    } else if (auto e = enumerable(target)) {
      d["tv"] = to_json(empirical_tv(idx, e->second));
    } else {
      d["tv"] = {{"error", "tv needs an enumerable target"}};
    }
  }
  if (wanted.count("moments") && xs.size() >= 2) {
    const auto ms = moment_summary(xs);
    Json j = to_json(ms);
    const auto mo = moments(target);
    j["target_mean"] = json_vector(mo.mean);
    j["target_cov"] = json_matrix(mo.cov);
    j["cov_relative_frobenius"] = json_number(relative_frobenius(ms.cov, mo.cov));
    j["cov_max_abs_error"] = json_number((ms.cov - mo.cov).cwiseAbs().maxCoeff());
    d["moments"] = j;
  }
  if (wanted.count("projection")) {
    if (const auto* mix = std::get_if<TwoGaussianMixture>(&target); mix && !xs.empty()) {
      const auto ps = projection_stats(xs, mix->a(), mixture_projection_midpoint(mix->p()),
                                       detail::get_or<double>(c.params, "bin_width", 0.0));
      d["projection"] = to_json(ps);
      write_histogram_csv(out / "projection_histogram.csv", header, ps.histogram);
    } else {
      d["projection"] = {{"error", "projection needs a mixture target"}};
    }
  }
  if (wanted.count("w2") && !xs.empty()) {
    // Projection on 1/sqrt(n) against the same number of exact samples from a dedicated stream.
    const Eigen::Index n = xs.front().size();
    std::vector<double> a, b;
    Rng rng(hash64(c.seed, ~std::uint64_t{1}));
    for (const auto& x : xs) {
      a.push_back(x.sum() / std::sqrt(double(n)));
      b.push_back(sample_exact(target, rng).sum() / std::sqrt(double(n)));
    }
    d["w2_projection"] = to_json(empirical_w2_1d(a, b));
  }
  return d;
}

inline void write_samples(const std::filesystem::path& out, const OutputHeader& h, const std::vector<ChainRecord>& recs,
                          Format fmt) {
  std::size_t width = 0;
  for (const auto& r : recs) width = std::max(width, r.values.size());
  if (fmt == Format::Json) {
    Json arr = Json::array();
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& r = recs[i];
      Json j{{"chain", i}, {"status", r.ok ? "ok" : "failed"}};
      if (!r.ok) j["error"] = r.error;
      j["x"] = json_vector(r.values);
      if (r.index) j["index"] = *r.index;
      if (!r.key.empty()) j["differences"] = r.key;
      if (r.label) j["side"] = r.label;
      arr.push_back(j);
    }
    write_json(out / "samples.json", h, {{"samples", arr}});
    return;
  }
  std::vector<std::string> cols{"chain", "status"};
  for (std::size_t i = 0; i < width; ++i) cols.push_back("x" + std::to_string(i));
  const bool has_index = std::any_of(recs.begin(), recs.end(), [](const auto& r) { return r.index.has_value(); });
  const bool has_label = std::any_of(recs.begin(), recs.end(), [](const auto& r) { return r.label != 0; });
  std::size_t key_width = 0;
  for (const auto& r : recs) key_width = std::max(key_width, r.key.size());
  if (has_index) cols.push_back("index");
  if (has_label) cols.push_back("side");
  for (std::size_t i = 0; i < key_width; ++i) cols.push_back("d" + std::to_string(i));
  CsvWriter w(out / "samples.csv", h, cols);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    w.cell(i).cell(r.ok ? std::string("ok") : "failed@" + std::to_string(r.fail_step));
    for (std::size_t k = 0; k < width; ++k) k < r.values.size() ? (void)w.cell(r.values[k]) : (void)w.cell(std::string());
    if (has_index) r.index ? (void)w.cell(*r.index) : (void)w.cell(std::string());
    if (has_label) w.cell(r.label);
    for (std::size_t k = 0; k < key_width; ++k) k < r.key.size() ? (void)w.cell(r.key[k]) : (void)w.cell(std::string());
    w.end_row();
  }
}

inline void write_snapshots(const std::filesystem::path& out, const OutputHeader& h,
                            const std::vector<ChainRecord>& recs) {
  std::size_t width = 0;
  for (const auto& r : recs)
    for (const auto& s : r.snapshots) width = std::max(width, s.second.size());
  std::vector<std::string> cols{"chain", "t"};
  for (std::size_t i = 0; i < width; ++i) cols.push_back("v" + std::to_string(i));
  CsvWriter w(out / "snapshots.csv", h, cols);
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (const auto& [t, v] : recs[i].snapshots) {
      w.cell(i).cell(t);
      for (double x : v) w.cell(x);
      w.end_row();
    }
}

/// Runs the configured sampler; returns the diagnostics object that was written.
inline Json cmd_sample(ExperimentConfig c, const RunOptions& opt) {
  apply_overrides(c, opt);
  if (c.process.empty()) throw ValidationError("config: missing 'process'");
  const auto target = parse_target(c.target, c.base_dir);
  const auto fn = make_chain_fn(c, target);
  const std::filesystem::path out(c.out_dir);
  std::filesystem::create_directories(out);
  const OutputHeader header{c.hash(), c.seed, "sample " + c.process};
  const auto recs = run_chains(c.chains, c.seed, fn, c.workers);
  write_samples(out, header, recs, opt.format);
  if (!c.snapshots.empty()) write_snapshots(out, header, recs);
  Json diag = run_diagnostics(c, target, recs, header, out);
  write_json(out / "diagnostics.json", header, {{"process", c.process}, {"diagnostics", diag}});
  return diag;
}

// ---- analyze ----

/// params: n, r, alpha for the spectrum; r_max and alphas for the correlation-length table.
inline Json cmd_analyze(ExperimentConfig c, const RunOptions& opt) {
  apply_overrides(c, opt);
  const YAML::Node p = c.params;
  const int n = detail::get_or<int>(p, "n", 64), r = detail::get_or<int>(p, "r", 3);
  const double alpha = detail::get_or<double>(p, "alpha", 0.25);
  const std::filesystem::path out(c.out_dir);
  std::filesystem::create_directories(out);
  const OutputHeader header{c.hash(), c.seed, "analyze"};

  const auto spec = generated_spectrum(n, r, alpha);
  const auto w2 = w2_separation(n, alpha, r);
  Json corr = Json::array();
  const int r_max = detail::get_or<int>(p, "r_max", 8);
  const auto alphas = detail::get_or<std::vector<double>>(p, "alphas", {0.1, 0.25, 1.0, 4.0});
  std::vector<std::pair<std::pair<int, double>, CorrelationLength>> rows;
  for (int rr = 1; rr <= r_max; ++rr)
    for (double a : alphas) {
      const auto L = correlation_length(rr, a);
      rows.push_back({{rr, a}, L});
      Json j = to_json(L);
      j["r"] = rr;
      j["alpha"] = a;
      corr.push_back(j);
    }
  Json result{{"spectrum", to_json(spec)}, {"w2_separation", to_json(w2)}, {"correlation_length", corr}};
  if (opt.format == Format::Json) {
    write_json(out / "analysis.json", header, result);
  } else {
    CsvWriter s(out / "spectrum.csv", header, {"q", "nu", "sigma_gen", "sigma_target"});
    for (std::size_t i = 0; i < spec.q.size(); ++i) {
      s.cell(spec.q[i]).cell(spec.nu[i]).cell(spec.sigma_gen[i]).cell(spec.sigma_target[i]);
      s.end_row();
    }
    CsvWriter L(out / "correlation_length.csv", header,
                {"r", "alpha", "xi2", "lower", "upper", "lower_holds", "upper_holds", "second_moment"});
    for (const auto& [key, v] : rows) {
      L.cell(key.first).cell(key.second).cell(v.xi2).cell(v.lower).cell(v.upper);
      L.cell(int(v.lower_holds)).cell(int(v.upper_holds)).cell(v.second_moment);
      L.end_row();
    }
    CsvWriter W(out / "w2_separation.csv", header, {"n", "r", "alpha", "bound", "threshold", "preconditions", "holds"});
    W.cell(n).cell(r).cell(alpha).cell(w2.bound).cell(w2.threshold).cell(int(w2.preconditions)).cell(int(w2.holds));
    W.end_row();
  }
  return result;
}

// ---- kl ----

/// kl: {channel: gaussian | erasure | binary | poisson, hat: denoiser spec or hat_target, paths}.
inline Json cmd_kl(ExperimentConfig c, const RunOptions& opt) {
  apply_overrides(c, opt);
  if (!c.kl) throw ValidationError("config: missing 'kl' section");
  const auto channel = detail::get<std::string>(c.kl, "channel", "kl");
  const auto target = parse_target(c.target, c.base_dir);
  const std::size_t paths = c.chains;
  const std::filesystem::path out(c.out_dir);
  std::filesystem::create_directories(out);
  const OutputHeader header{c.hash(), c.seed, "kl " + channel};
  Json result{{"channel", channel}};
  if (channel == "gaussian") {
    const auto m = build_gaussian_denoiser(c.kl["true"], target);
    const auto mh = build_gaussian_denoiser(c.kl["hat"], target);
    const auto grid = parse_grid(c.grid);
    result["kl"] = to_json(kl_gaussian_drift(m, mh, target, grid, paths, c.seed, c.workers));
  } else if (channel == "erasure") {
    const auto& mu = target_as<HypercubeTarget>(target, "kl erasure");
    const auto muhat_t = parse_target(detail::required(c.kl, "hat_target", "kl"), c.base_dir);
    const auto& muhat = target_as<HypercubeTarget>(muhat_t, "kl erasure");
    std::vector<int> order(mu.n());
    std::iota(order.begin(), order.end(), 0);
    if (c.kl["order"]) order = c.kl["order"].as<std::vector<int>>();
    result["kl"] = to_json(kl_discrete_chain(erasure_kernel(mu, order), erasure_kernel(muhat, order),
                                             erasure_forward_path(mu, order), paths, c.seed));
    result["kl_exact"] = to_json(kl_erasure_exact(mu, muhat, order));
    result["kl_final_law"] = json_number(kl_tables(mu.table(), muhat.table()));
  } else if (channel == "binary") {
    const auto& mu = target_as<HypercubeTarget>(target, "kl binary");
    const auto muhat_t = parse_target(detail::required(c.kl, "hat_target", "kl"), c.base_dir);
    const auto& muhat = target_as<HypercubeTarget>(muhat_t, "kl binary");
    const auto grid = parse_grid(c.grid);
    const auto states = binary_forward_states(mu, grid, paths, c.seed);
    result["kl"] = to_json(kl_ctmc(binary_rate_fn(exact_magnetization_denoiser(mu)),
                                   binary_rate_fn(exact_magnetization_denoiser(muhat)), states, grid));
  } else if (channel == "poisson") {
    const auto& mu = target_as<NonnegativeTarget>(target, "kl poisson");
    const auto muhat_t = parse_target(detail::required(c.kl, "hat_target", "kl"), c.base_dir);
    const auto& muhat = target_as<NonnegativeTarget>(muhat_t, "kl poisson");
    const auto grid = parse_grid(c.grid);
    const auto states = poisson_forward_states(mu, grid, paths, c.seed);
    result["kl"] = to_json(kl_ctmc(poisson_rate_fn(exact_poisson_denoiser(mu)),
                                   poisson_rate_fn(exact_poisson_denoiser(muhat)), states, grid));
  } else {
    throw ValidationError("kl: unknown channel '" + channel + "'");
  }
  write_json(out / "kl.json", header, result);
  return result;
}

// ---- synthetic images ----

inline Json cmd_synth_images(int w, int h, std::size_t count, std::uint64_t seed, const std::filesystem::path& out,
                             Format fmt) {
  require(w >= 1 && h >= 1, "synth-images: w and h must be >= 1");
  std::filesystem::create_directories(out);
  const std::string args = "synth-images w=" + std::to_string(w) + " h=" + std::to_string(h) +
                           " count=" + std::to_string(count);
  const OutputHeader header{fnv1a64(args), seed, args};
  const auto imgs = run_chains(count, seed, [&](std::size_t, Rng& rng) { return synth_image(w, h, rng); }, 1);
  std::size_t red = 0;
  for (const auto& im : imgs) red += im.cls == 0;
  if (fmt == Format::Json) {
    Json arr = Json::array();
    for (const auto& im : imgs) arr.push_back({{"class", im.cls}, {"pixels", json_vector(im.pixels)}});
    write_json(out / "images.json", header, {{"w", w}, {"h", h}, {"images", arr}});
  } else {
    std::vector<std::string> cols{"image", "class"};
    for (int ch = 0; ch < 3; ++ch)
      for (int i1 = 0; i1 < w; ++i1)
        for (int i2 = 0; i2 < h; ++i2)
          cols.push_back("c" + std::to_string(ch) + "_" + std::to_string(i1) + "_" + std::to_string(i2));
    CsvWriter csv(out / "images.csv", header, cols);
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      csv.cell(i).cell(imgs[i].cls).cells(imgs[i].pixels);
      csv.end_row();
    }
  }
  return {{"count", count}, {"red", red}, {"blue", count - red}};
}

}  // namespace stochloc::cli

#endif  // STOCHLOC_TOOLS_EXPERIMENT_HPP
