// stochloc: sampling, analysis and KL runs driven by YAML experiment files.
//
// Exit codes: 0 ok, 1 criterion or runtime failure, 2 usage or configuration error.

#include "criteria.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace stochloc;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chains;
  std::optional<unsigned> workers;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* sub, Common& c, bool needs_config) {
  auto* opt = sub->add_option("--config", c.config, "experiment file (YAML)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "override the seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--chains", c.chains, "override the chain / path count");
  sub->add_option("--workers", c.workers, "worker threads (results do not depend on it)");
  sub->add_option("--format", c.format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));
}

cli::RunOptions run_options(const Common& c) {
  cli::RunOptions o;
  o.seed = c.seed;
  o.chains = c.chains;
  o.workers = c.workers;
  if (!c.out.empty()) o.out_dir = c.out;
  o.format = c.format == "json" ? cli::Format::Json : cli::Format::Csv;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic localization samplers"};
  app.require_subcommand(1);

  Common sample_opts, analyze_opts, kl_opts;
  auto* sample = app.add_subcommand("sample", "run a configured sampler");
  add_common(sample, sample_opts, true);

  auto* analyze = app.add_subcommand("analyze", "generated spectrum, correlation length and W2 tables");
  add_common(analyze, analyze_opts, false);
  std::optional<int> an_n, an_r;
  std::optional<double> an_alpha;
  analyze->add_option("--n", an_n, "dimension");
  analyze->add_option("--r", an_r, "window half-width");
  analyze->add_option("--alpha", an_alpha, "rank-one strength");

  auto* kl = app.add_subcommand("kl", "KL divergence between true and approximate processes");
  add_common(kl, kl_opts, true);

  auto* synth = app.add_subcommand("synth-images", "draw toy RGB images");
  int w = 16, h = 16;
  std::size_t count = 100;
  std::uint64_t synth_seed = 0;
  std::string synth_out = "images", synth_format = "csv";
  synth->add_option("--width", w, "image width")->check(CLI::PositiveNumber);
  synth->add_option("--height", h, "image height")->check(CLI::PositiveNumber);
  synth->add_option("--count", count, "number of images");
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--format", synth_format, "output format")->check(CLI::IsMember({"csv", "json"}));

  auto* selftest = app.add_subcommand("selftest", "fast subset of the acceptance criteria");
  std::optional<std::uint64_t> st_seed;
  std::string st_out, fault;
  selftest->add_option("--seed", st_seed, "seed");
  selftest->add_option("--out", st_out, "scratch directory");
  selftest->add_option("--inject-fault", fault, "test hook")->check(CLI::IsMember({"window-kernel"}));
  bool all = false;
  selftest->add_flag("--all", all, "run every criterion, not just the fast subset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sample->parsed()) {
      const auto diag = cli::cmd_sample(load_config(sample_opts.config), run_options(sample_opts));
      const auto failed = diag.value("failed_chains", std::size_t{0});
      std::cout << diag.dump(2) << "\n";
      if (failed) std::cerr << failed << " chain(s) failed; see samples\n";
      return failed && failed == diag.value("chains", std::size_t{0}) ? 1 : 0;
    }
    if (analyze->parsed()) {
      ExperimentConfig cfg = analyze_opts.config.empty() ? parse_config("{}") : load_config(analyze_opts.config);
      if (!cfg.params) cfg.params = YAML::Node(YAML::NodeType::Map);
      if (an_n) cfg.params["n"] = *an_n;
      if (an_r) cfg.params["r"] = *an_r;
      if (an_alpha) cfg.params["alpha"] = *an_alpha;
      cfg.text += "\n# analyze " + YAML::Dump(cfg.params);
      const auto res = cli::cmd_analyze(cfg, run_options(analyze_opts));
      std::cout << res["spectrum"]["one_sigma_one"] << " = <1, Sigma_gen 1>\n";
      return 0;
    }
    if (kl->parsed()) {
      std::cout << cli::cmd_kl(load_config(kl_opts.config), run_options(kl_opts)).dump(2) << "\n";
      return 0;
    }
    if (synth->parsed()) {
      const auto res = cli::cmd_synth_images(w, h, count, synth_seed, synth_out,
                                             synth_format == "json" ? cli::Format::Json : cli::Format::Csv);
      std::cout << res.dump() << "\n";
      return 0;
    }
    if (selftest->parsed()) {
      acceptance::Options o;
      if (st_seed) o.seed = *st_seed;
      if (!st_out.empty()) o.scratch = st_out;
      o.perturb_window = fault == "window-kernel";
      bool ok = true;
      for (const auto& c : acceptance::all_criteria()) {
        if (!c.fast && !all) continue;
        const auto r = acceptance::run(c, o);
        std::cout << acceptance::format_line(r) << std::endl;
        ok &= r.pass;
      }
      return ok ? 0 : 1;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
