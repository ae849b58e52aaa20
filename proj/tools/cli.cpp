#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "pairclone/diagnostics.hpp"
#include "pairclone/estimate.hpp"
#include "pairclone/io.hpp"
#include "pairclone/likelihood.hpp"
#include "pairclone/mcmc.hpp"
#include "pairclone/simulate.hpp"

#ifndef PAIRCLONE_VERSION
#define PAIRCLONE_VERSION "0.0.0"
#endif

namespace pairclone::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Raised for problems with the command line itself.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string counts;
  std::string snv;
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> iters;
  std::optional<int> burnin;
  std::optional<int> thin;
  std::optional<int> cmin;
  std::optional<int> cmax;
  std::optional<double> train_frac;
  std::optional<double> test_target;
  bool purity = false;
  std::string preset;
  std::optional<long> depth;
  std::optional<long> cycles;
  bool broken_jacobian = false;
  bool quiet = false;
};

std::string hex64(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

// Config file first, then flags; a flag that overrides a file value warns.
RunConfig build_config(const Options& o, std::ostream& err) {
  RunConfig config;
  std::map<std::string, std::string> file;
  if (!o.config.empty()) {
    file = read_key_values(o.config);
    apply_settings(config, file);
  }
  auto flag = [&](const std::string& key, const std::string& value) {
    if (const auto it = file.find(key); it != file.end() && it->second != value) {
      err << "warning: --" << key << "=" << value << " overrides config value " << it->second << "\n";
    }
    apply_setting(config, key, value);
  };
  auto num = [](auto v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  if (o.seed) flag("seed", num(*o.seed));
  if (o.iters) flag(o.command == "geweke" ? "geweke_L" : "iters", num(*o.iters));
  if (o.cycles) flag("geweke_L", num(*o.cycles));
  if (o.burnin) flag("burnin", num(*o.burnin));
  if (o.thin) flag("thin", num(*o.thin));
  if (o.cmin) flag("c_min", num(*o.cmin));
  if (o.cmax) flag("c_max", num(*o.cmax));
  if (o.train_frac) flag("train_frac", num(*o.train_frac));
  if (o.test_target) {
    flag("test_target", num(*o.test_target));
    if (config.sampler.train_frac > 0.0) {
      err << "warning: --test-target clears the configured train_frac\n";
      config.sampler.train_frac = 0.0;
    }
  }
  if (o.purity) flag("variant", "purity");
  if (o.command == "fit-tree") {
    if (file.count("variant") && file.at("variant") != "tree") {
      err << "warning: fit-tree overrides config variant " << file.at("variant") << "\n";
    }
    config.model.variant = ModelVariant::tree;
  }
  if (!o.preset.empty()) flag("preset", o.preset);
  if (o.depth) flag("depth", num(*o.depth));
  if (o.broken_jacobian) flag("broken_jacobian", "true");

  config.model.hyper.c_min = config.sampler.c_min;
  config.model.hyper.c_max = config.sampler.c_max;
  try {
    config.model.hyper.validate();
    if (o.command == "fit" || o.command == "fit-tree") config.sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return config;
}

json manifest_base(const Options& o, const RunConfig& config, const std::vector<std::string>& args) {
  const std::string dump = dump_config(config);
  json m;
  m["tool"] = "pairclone";
  m["version"] = PAIRCLONE_VERSION;
  m["compiler"] = __VERSION__;
  m["subcommand"] = o.command;
  m["command_line"] = args;
  m["seed"] = config.sampler.seed;
  m["config_hash"] = "fnv1a64:" + hex64(fnv1a64(dump));
  m["config_file"] = "config.txt";
  m["variant"] = to_string(config.model.variant);
  return m;
}

void write_manifest(const fs::path& dir, const json& m) { write_text(dir / "manifest.json", m.dump(2) + "\n"); }

json input_entry(const fs::path& path) {
  return {{"path", path.string()}, {"fnv1a64", hex64(fnv1a64(read_text(path)))}};
}

CodeOrdering ordering_for(ModelVariant v) {
  return v == ModelVariant::tree ? CodeOrdering::pairclone_tree : CodeOrdering::pairclone;
}

void write_index(const fs::path& path, const CountsTable& table) {
  std::ostringstream s;
  s << "kind,id,position\n";
  for (std::size_t t = 0; t < table.samples.size(); ++t) s << "sample," << table.samples[t] << ',' << t + 1 << '\n';
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    s << (static_cast<int>(k) < table.pairs() ? "pair," : "snv,") << table.rows[k] << ',' << k + 1 << '\n';
  }
  write_text(path, s.str());
}

struct Estimate {
  PointEstimate point;
  CPosterior c_post;
  std::vector<TreePosteriorEntry> trees;
};

Estimate estimate_from(const PosteriorSamples& samples, const RunConfig& config) {
  Estimate e;
  e.c_post = posterior_of_C(samples);
  if (samples.variant == ModelVariant::tree) {
    e.trees = tree_posterior(samples);
    if (e.trees.empty()) throw std::runtime_error("no tree draws retained");
    e.point = map_estimate(samples, e.trees.front().tree);
    const CanonicalFit fit = canonical_fit(*e.point.tree, e.point.z, e.point.w);
    e.point.tree = fit.tree;
    e.point.z = fit.z;
    e.point.w = fit.w;
  } else {
    e.point = select_point_estimate(samples, e.c_post.mode, config.point_estimate_cap);
  }
  return e;
}

void print_tables(std::ostream& out, const Estimate& e) {
  out << "posterior of C\n";
  for (const auto& [c, p] : e.c_post.prob) out << "  C=" << c << "  " << std::fixed << std::setprecision(4) << p << "\n";
  out << "  mode " << e.c_post.mode << "\n";
  if (!e.trees.empty()) {
    out << "tree posterior (top 3)\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, e.trees.size()); ++i) {
      out << "  " << e.trees[i].tree.to_string() << "  " << std::setprecision(4) << e.trees[i].prob << "\n";
    }
  }
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

void write_estimates(const fs::path& dir, const Estimate& e, ModelVariant variant, const CountsTable& table) {
  write_z(dir / "z_hat.csv", e.point.z, ordering_for(variant), table.rows);
  write_weights(dir / "w_hat.csv", e.point.w, variant, table.samples);
  write_rho(dir / "rho_hat.csv", e.point.rho);
  write_c_posterior(dir / "c_posterior.csv", e.c_post);
  if (variant == ModelVariant::tree) {
    write_tree_posterior(dir / "tree_posterior.csv", e.trees);
    write_text(dir / "tree_hat.txt", e.point.tree->to_string() + "\n");
  }
}

int cmd_fit(const Options& o, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (o.counts.empty()) throw UsageError("--counts is required");
  const RunConfig config = build_config(o, err);
  CountsTable table = parse_counts(o.counts);
  if (!o.snv.empty()) parse_snv(o.snv, table);
  for (const auto& w : table.warnings) err << "warning: " << w << "\n";

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  write_text(dir / "config.txt", dump_config(config));
  write_index(dir / "row_index.csv", table);

  const int report_every = std::max(1, config.sampler.iters / 10);
  ProgressFn progress;
  if (!o.quiet) {
    progress = [&](int it, int C) {
      if (it % report_every == 0) err << "iteration " << it << "/" << config.sampler.iters << "  C=" << C << "\n";
    };
  }
  const auto t0 = std::chrono::steady_clock::now();
  FitResult fit = run_fit(table.counts, config.model, config.sampler, progress);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (fit.samples.draws.empty()) throw std::runtime_error("no draws retained after burn-in and thinning");

  const Estimate e = estimate_from(fit.samples, config);
  write_estimates(dir, e, config.model.variant, table);
  write_telemetry(dir / "telemetry.csv", fit.telemetry);
  write_trace(dir / "trace.csv", fit.telemetry);
  const ReadCounts resid = residuals(table.counts, e.point.z, e.point.w, e.point.rho);
  write_residuals(dir / "residuals.csv", resid, table);
  write_draws(dir / "draws.tsv", fit.samples);

  json m = manifest_base(o, config, args);
  m["code_ordering"] = to_string(ordering_for(config.model.variant));
  m["inputs"]["counts"] = input_entry(o.counts);
  if (!o.snv.empty()) m["inputs"]["snv"] = input_entry(o.snv);
  m["training_fraction"] = fit.b;
  m["retained_draws"] = fit.samples.draws.size();
  m["candidates_created"] = fit.telemetry.candidates_created;
  m["seconds"] = seconds;
  m["residual_mean_abs"] = mean_abs_residual(resid);
  write_manifest(dir, m);

  print_tables(out, e);
  out << "residual mean |p_hat - p_bar| " << mean_abs_residual(resid) << "\n";
  out << "outputs in " << dir.string() << "\n";
  return kOk;
}

void write_truth(const fs::path& dir, const SimData& data, const SimSpec& spec, const CountsTable& table) {
  const CodeOrdering ordering = ordering_for(spec.variant);
  write_z(dir / "z_true.csv", data.truth.z, ordering, table.rows);
  write_weights(dir / "w_true.csv", data.truth.w, spec.variant, table.samples);
  write_rho(dir / "rho_true.csv", data.truth.rho);
  if (data.truth.tree) write_text(dir / "tree_true.txt", data.truth.tree->to_string() + "\n");
}

int cmd_simulate(const Options& o, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const RunConfig config = build_config(o, err);
  SimSpec spec;
  try {
    spec = preset(config.preset);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (config.depth) spec.n_override = *config.depth;
  const SimData data = generate(spec, config.sampler.seed);
  const CountsTable table = table_from_simulation(data);

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  write_counts(dir / "counts.tsv", table);
  if (table.snvs > 0) write_snv(dir / "snv.tsv", table);
  write_truth(dir, data, spec, table);
  write_text(dir / "config.txt", dump_config(config));

  json m = manifest_base(o, config, args);
  m["preset"] = spec.name;
  m["code_ordering"] = to_string(ordering_for(spec.variant));
  m["variant"] = to_string(spec.variant);
  write_manifest(dir, m);
  out << "simulated " << spec.name << ": T=" << spec.T << " K=" << spec.K << " SNVs=" << spec.snvs
      << " C=" << spec.C << " -> " << dir.string() << "\n";
  return kOk;
}

int cmd_geweke(const Options& o, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const RunConfig config = build_config(o, err);
  GewekeConfig g;
  g.spec = config.model;
  g.T = config.geweke_T;
  g.K = config.geweke_K;
  g.C = config.geweke_C;
  g.L = config.geweke_L;
  g.depth = config.geweke_depth;
  g.sweeps = static_cast<int>(config.geweke_sweeps);
  g.seed = config.sampler.seed;
  g.prior_draws = config.geweke_prior_draws;
  if (g.L < 4) throw ConfigError("geweke_L must be at least 4");

  GewekeProgress progress;
  const long every = std::max(1L, g.L / 10);
  if (!o.quiet) {
    progress = [&](long cycle) {
      if (cycle % every == 0) err << "cycle " << cycle << "/" << g.L << "\n";
    };
  }
  const GewekeReport report = geweke_joint(g, progress);

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  write_text(dir / "config.txt", dump_config(config));
  write_geweke(dir / "geweke.csv", report);
  for (const auto& r : report.results) export_trace(dir, r.statistic.name(), r.trace);

  std::ostringstream summary;
  summary << "joint distribution test, L=" << report.L << ", Bartlett bandwidth " << report.bandwidth << ", "
          << (report.analytic_means ? "analytic" : "Monte Carlo") << " prior means\n";
  bool all_pass = true;
  for (const auto& r : report.results) {
    summary << "  " << std::left << std::setw(12) << r.statistic.name() << std::right;
    if (r.test.skipped) {
      summary << "  skipped (" << r.test.note << ")\n";
      continue;
    }
    all_pass = all_pass && r.test.p > 0.01;
    summary << "  mean " << std::setw(10) << r.mean << "  prior " << std::setw(10) << r.prior_mean << "  z "
            << std::setw(8) << r.test.z << "  p " << r.test.p << "\n";
  }
  summary << (all_pass ? "no statistic rejects at the 0.01 level\n" : "some statistic rejects at the 0.01 level\n");
  write_text(dir / "geweke_summary.txt", summary.str());

  json m = manifest_base(o, config, args);
  m["spectral_estimator"] = "bartlett";
  m["bandwidth"] = report.bandwidth;
  m["cycles"] = report.L;
  m["analytic_prior_means"] = report.analytic_means;
  write_manifest(dir, m);
  out << summary.str();
  return kOk;
}

int cmd_summarize(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path dir = o.out_dir;
  if (!fs::exists(dir / "draws.tsv")) throw DataError(dir.string() + " holds no draws.tsv; run fit first");
  RunConfig config;
  if (fs::exists(dir / "config.txt")) apply_settings(config, read_key_values(dir / "config.txt"));
  if (!o.config.empty()) {
    err << "warning: --config is ignored by summarize; the run's config.txt is used\n";
  }
  const PosteriorSamples samples = read_draws(dir / "draws.tsv");
  if (samples.draws.empty()) throw DataError("draws.tsv holds no draws");
  const Estimate e = estimate_from(samples, config);
  print_tables(out, e);
  out << "point estimate: draw " << e.point.draw << " (iteration " << samples.draws[e.point.draw].iteration
      << "), C=" << e.point.z.subclones();
  if (e.point.tree) out << ", tree " << e.point.tree->to_string();
  out << "\n  w(sample 1):";
  for (int j = 0; j < e.point.w.cols(); ++j) out << " " << e.point.w(0, j);
  out << "\n";
  return kOk;
}

void add_run_flags(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--out-dir", o.out_dir, "output directory");
  app->add_option("--seed", o.seed, "random seed");
  app->add_flag("--quiet", o.quiet, "no progress messages");
}

void add_sampler_flags(CLI::App* app, Options& o) {
  app->add_option("--counts", o.counts, "pair count table (TSV)");
  app->add_option("--snv", o.snv, "single-SNV count table (TSV)");
  app->add_option("--iters", o.iters, "MCMC iterations");
  app->add_option("--burnin", o.burnin, "burn-in iterations");
  app->add_option("--thin", o.thin, "keep every n-th draw");
  app->add_option("--cmin", o.cmin, "smallest number of subclones");
  app->add_option("--cmax", o.cmax, "largest number of subclones");
  auto* tf = app->add_option("--train-frac", o.train_frac, "training fraction b");
  auto* tt = app->add_option("--test-target", o.test_target, "reads per sample held out for testing");
  tf->excludes(tt);
  tt->excludes(tf);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subclone reconstruction from mutation-pair read counts", "pairclone"};
  app.set_version_flag("--version", PAIRCLONE_VERSION);
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "fit the flat model (C unknown)");
  add_run_flags(fit, o);
  add_sampler_flags(fit, o);
  fit->add_flag("--purity", o.purity, "add a normal clone to every sample");

  auto* fit_tree = app.add_subcommand("fit-tree", "fit the tree-structured model");
  add_run_flags(fit_tree, o);
  add_sampler_flags(fit_tree, o);

  auto* sim = app.add_subcommand("simulate", "write a simulated data set and its truth");
  add_run_flags(sim, o);
  sim->add_option("--preset", o.preset, "simulation design")->check(CLI::IsMember(preset_names()));
  sim->add_option("--depth", o.depth, "fixed read depth per sample and pair");

  auto* gw = app.add_subcommand("geweke", "joint-distribution test of the within-model sampler");
  add_run_flags(gw, o);
  gw->add_option("--iters,--cycles", o.cycles, "number of simulation cycles L");
  gw->add_flag("--broken-jacobian", o.broken_jacobian, "drop the weight Jacobian (must fail)");

  auto* summ = app.add_subcommand("summarize", "reprint the tables of a finished fit");
  summ->add_option("--out-dir", o.out_dir, "run directory")->required();
  summ->add_option("--config", o.config, "ignored");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    if (o.command == "fit" || o.command == "fit-tree") return cmd_fit(o, args, out, err);
    if (o.command == "simulate") return cmd_simulate(o, args, out, err);
    if (o.command == "geweke") return cmd_geweke(o, args, out, err);
    return cmd_summarize(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace pairclone::cli
