// sphar: command-line front end for simulating and estimating SPHAR(1) panels.
//
// Exit codes: 0 ok, 2 invalid arguments or parameters, 3 I/O failure,
// 4 estimation flagged as unidentified, 5 series truncation cap exceeded,
// 6 Monte Carlo aborted (more than half the replications failed).

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sphar/errors.hpp"
#include "sphar/estimator.hpp"
#include "sphar/harmonics.hpp"
#include "sphar/model.hpp"
#include "sphar/montecarlo.hpp"
#include "sphar/panel_io.hpp"
#include "sphar/simulate.hpp"
#include "sphar/spectra.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum Exit : int {
  kOk = 0,
  kBadArgs = 2,
  kIoFailure = 3,
  kFlagged = 4,
  kSeriesCap = 5,
  kMcAbort = 6,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ModelFlags {
  double g = 0, alpha = 0, h = 0, gamma = 0;

  void add_to(CLI::App& app) {
    app.add_option("--g", g, "autoregressive scale G, 0 < |G| < 1")->required();
    app.add_option("--alpha", alpha, "autoregressive smoothness alpha > 1")->required();
    app.add_option("--h", h, "noise scale H > 0")->required();
    app.add_option("--gamma", gamma, "noise smoothness gamma > 2")->required();
  }
  sphar::ModelParams params() const { return {g, alpha, h, gamma}; }
};

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const fs::path& path) const {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json j = {{"tool", "sphar"},
                    {"tool_version", kToolVersion},
                    {"command", command},
                    {"argv", argv},
                    {"cwd", fs::current_path().string()},
                    {"config", config},
                    {"inputs", inputs},
                    {"outputs", outputs},
                    {"wall_clock_seconds", elapsed}};
    std::ofstream out(path);
    if (!out) throw sphar::IoError("cannot write manifest '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) throw sphar::IoError("cannot write manifest '" + path.string() + "'");
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sphar::IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw sphar::IoError("failed writing '" + path.string() + "'");
}

fs::path manifest_path_for(const std::string& override_path, const fs::path& output) {
  if (!override_path.empty()) return override_path;
  return fs::path(output.string() + ".manifest.json");
}

int dispatch(const std::vector<std::string>& args);

// --------------------------------------------------------------------------
// simulate

int run_simulate(const ModelFlags& model, int n, int l, const std::string& schedule,
                 std::uint64_t seed, const std::string& init, const std::string& out_path,
                 const std::string& manifest_override, Manifest manifest) {
  const sphar::ModelParams params = model.params();
  sphar::SimConfig config;
  config.N = n;
  config.seed = seed;
  if (!schedule.empty()) {
    config.L = sphar::truncation_schedule(n, sphar::TruncationRule::parse(schedule));
  } else if (l > 0) {
    config.L = l;
  } else {
    throw UsageError("one of --l or --schedule is required");
  }
  if (init == "stationary") {
    config.init = sphar::InitMode::Stationary;
  } else if (init.starts_with("burnin:")) {
    config.init = sphar::InitMode::ZeroBurnin;
    try {
      config.burnin = std::stoi(init.substr(7));
    } catch (const std::exception&) {
      throw UsageError("--init: expected burnin:<B>");
    }
  } else {
    throw UsageError("--init: expected 'stationary' or 'burnin:<B>'");
  }

  const sphar::CoefficientPanel panel = sphar::simulate_panel(params, config);
  sphar::write_panel(panel, out_path);

  double sum = 0.0, sumsq = 0.0, max_abs = 0.0;
  for (double v : panel.values()) {
    sum += v;
    sumsq += v * v;
    max_abs = std::max(max_abs, std::abs(v));
  }
  const double count = static_cast<double>(panel.values().size());
  std::cout << "L=" << panel.L() << " N=" << panel.N() << " tracks=" << panel.track_count()
            << " rows=" << panel.values().size() << " seed=" << seed << "\n";
  std::cout << "mean=" << g17(sum / count) << " mean_square=" << g17(sumsq / count)
            << " max_abs=" << g17(max_abs) << "\n";
  std::cout << "wrote " << out_path << "\n";

  manifest.config = {{"params", sphar::to_json(params)},
                     {"N", config.N},
                     {"L", config.L},
                     {"seed", seed},
                     {"init", init},
                     {"schedule", schedule.empty() ? json(nullptr) : json(schedule)}};
  manifest.outputs = {out_path};
  manifest.write(manifest_path_for(manifest_override, out_path));
  return kOk;
}

// --------------------------------------------------------------------------
// estimate

int run_estimate(const std::string& in_path, double a1, double a2, int grid, double tol,
                 std::optional<double> h, std::optional<double> gamma,
                 const std::string& curve_path, const std::string& out_path,
                 const std::string& manifest_override, Manifest manifest) {
  if (h.has_value() != gamma.has_value()) {
    throw UsageError("--h and --gamma must be given together");
  }
  if (grid < 33) throw UsageError("--grid must be at least 33");
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  const sphar::ParamSpace space(a1, a2);

  const sphar::CoefficientPanel panel = sphar::read_panel(in_path);
  sphar::EstimateOptions opts;
  opts.grid_points = grid;
  opts.refine_tol = tol;
  opts.keep_curve = !curve_path.empty();
  sphar::EstimationResult result = sphar::estimate(panel, space, opts);

  if (h && !result.has_flag(sphar::flags::kIdentifiability)) {
    try {
      result.std_error_alpha = sphar::std_error_alpha(panel.N(), result, h, gamma);
    } catch (const sphar::DomainError& e) {
      result.flags.emplace_back("std_error_unavailable");
      std::cerr << "warning: " << e.what() << "\n";
    }
  }

  const std::string text = sphar::to_json(result).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
    std::cout << "alpha_hat=" << g17(result.alpha_hat) << " g_hat=" << g17(result.g_hat);
    if (result.std_error_alpha) std::cout << " std_error_alpha=" << g17(*result.std_error_alpha);
    std::cout << "\n";
  }
  if (!curve_path.empty()) {
    std::ostringstream csv;
    csv << "alpha,reduced_objective\n";
    for (const auto& [a, v] : *result.reduced_curve) csv << g17(a) << "," << g17(v) << "\n";
    write_text(curve_path, csv.str());
  }

  manifest.config = {{"a1", a1},
                     {"a2", a2},
                     {"grid", grid},
                     {"tol", tol},
                     {"h", h ? json(*h) : json(nullptr)},
                     {"gamma", gamma ? json(*gamma) : json(nullptr)}};
  manifest.inputs = {in_path};
  if (!out_path.empty()) manifest.outputs.push_back(out_path);
  if (!curve_path.empty()) manifest.outputs.push_back(curve_path);
  if (!out_path.empty() || !manifest_override.empty()) {
    manifest.write(manifest_path_for(manifest_override, out_path));
  }

  if (result.has_flag(sphar::flags::kIdentifiability)) {
    std::cerr << "warning: reduced objective is flat over [a1, a2]; alpha is not identified\n";
    return kFlagged;
  }
  return kOk;
}

// --------------------------------------------------------------------------
// variance

int run_variance(const ModelFlags& model, double tol, long max_terms,
                 const std::string& manifest_override, Manifest manifest) {
  const sphar::ModelParams params = model.params();
  sphar::SeriesOptions opts;
  opts.rel_tol = tol;
  opts.max_terms = max_terms;
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  const sphar::VarianceResult v = sphar::asymptotic_variance(params, opts);
  std::cout << "sigma2 = " << g17(v.sigma2) << "\n";
  std::cout << "sigma = " << g17(std::sqrt(v.sigma2)) << "\n";
  std::cout << "truncation = " << v.terms << "\n";
  if (!manifest_override.empty()) {
    manifest.config = {{"params", sphar::to_json(params)}, {"tol", tol}, {"max_terms", max_terms}};
    manifest.write(manifest_override);
  }
  return kOk;
}

// --------------------------------------------------------------------------
// mc

std::vector<long> parse_n_list(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stol(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--n-list: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--n-list is empty");
  return out;
}

int run_mc(const ModelFlags& model, double a1, double a2, const std::string& n_list,
           int reps, const std::string& schedule, std::uint64_t seed, int workers,
           const std::string& outdir, int grid, double tol,
           const std::string& manifest_override, Manifest manifest) {
  const sphar::McConfig config{.params = model.params(),
                               .space = sphar::ParamSpace(a1, a2),
                               .n_list = parse_n_list(n_list),
                               .schedule = sphar::TruncationRule::parse(schedule),
                               .replications = reps,
                               .base_seed = seed,
                               .estimator = {.grid_points = grid, .refine_tol = tol},
                               .series = {},
                               .workers = workers};

  const sphar::McSummary summary = sphar::run_mc(config);

  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw sphar::IoError("cannot create '" + outdir + "': " + ec.message());
  const fs::path dir(outdir);
  std::ostringstream records, per_n;
  sphar::write_records_csv(summary, records);
  sphar::write_summary_csv(summary, per_n);
  write_text(dir / "replications.csv", records.str());
  write_text(dir / "summary.csv", per_n.str());
  write_text(dir / "summary.json", sphar::to_json(summary).dump(2) + "\n");

  std::cout << "sigma2_target=" << g17(summary.sigma2_target) << "\n";
  for (const auto& s : summary.per_n) {
    std::cout << "N=" << s.N << " L=" << s.L << " used=" << s.used << "/" << s.replications
              << " bias=" << g17(s.bias) << " var_scaled=" << g17(s.var_scaled)
              << " median_abs_err=" << g17(s.median_abs_err_alpha)
              << " coverage=" << g17(s.coverage) << "\n";
  }

  manifest.config = {{"params", sphar::to_json(config.params)},
                     {"a1", a1},
                     {"a2", a2},
                     {"n_list", config.n_list},
                     {"replications", reps},
                     {"schedule", config.schedule.to_string()},
                     {"seed", seed},
                     {"workers", workers},
                     {"grid", grid},
                     {"tol", tol}};
  manifest.outputs = {(dir / "replications.csv").string(), (dir / "summary.csv").string(),
                      (dir / "summary.json").string()};
  manifest.write(manifest_override.empty() ? dir / "manifest.json" : fs::path(manifest_override));
  return kOk;
}

// --------------------------------------------------------------------------
// field

int run_field(const std::string& in_path, int t, int nlat, int nlon, const std::string& out_path,
              const std::string& manifest_override, Manifest manifest) {
  if (nlat < 1 || nlon < 1) throw UsageError("--nlat and --nlon must be positive");
  const sphar::CoefficientPanel panel = sphar::read_panel(in_path);
  if (t < 0 || t > panel.N()) {
    throw UsageError("--t " + std::to_string(t) + " outside panel range [0, " +
                     std::to_string(panel.N()) + "]");
  }
  std::vector<sphar::SpherePoint> grid;
  grid.reserve(static_cast<std::size_t>(nlat) * nlon);
  for (int i = 0; i < nlat; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / nlat;
    for (int j = 0; j < nlon; ++j) {
      grid.emplace_back(theta, 2.0 * std::numbers::pi * j / nlon);
    }
  }
  const std::vector<double> values = sphar::synthesize_field(panel, t, grid);
  std::ostringstream csv;
  csv << "theta,phi,value\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    csv << g17(grid[k].colatitude()) << "," << g17(grid[k].longitude()) << "," << g17(values[k])
        << "\n";
  }
  write_text(out_path, csv.str());
  std::cout << "wrote " << grid.size() << " grid values to " << out_path << "\n";

  manifest.config = {{"t", t}, {"nlat", nlat}, {"nlon", nlon}};
  manifest.inputs = {in_path};
  manifest.outputs = {out_path};
  manifest.write(manifest_path_for(manifest_override, out_path));
  return kOk;
}

// --------------------------------------------------------------------------
// replay

int run_replay(const std::string& manifest_file) {
  std::ifstream in(manifest_file);
  if (!in) throw sphar::IoError("cannot open manifest '" + manifest_file + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw sphar::IoError(std::string("bad manifest: ") + e.what());
  }
  const auto argv = j.at("argv").get<std::vector<std::string>>();
  if (argv.empty() || argv.front() == "replay") throw UsageError("manifest has no replayable command");
  if (j.contains("cwd")) fs::current_path(j.at("cwd").get<std::string>());
  return dispatch(argv);
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Simulation and estimation for spherical autoregressive SPHAR(1) processes"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();
  std::string manifest_override;
  app.add_option("--manifest", manifest_override, "manifest output path (input path for replay)");
  app.set_version_flag("--version", kToolVersion);

  Manifest manifest;
  manifest.argv = args;
  std::function<int()> action;

  // simulate
  ModelFlags sim_model;
  int sim_n = 0, sim_l = 0;
  std::string sim_schedule, sim_out, sim_init = "stationary";
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "simulate a coefficient panel");
  sim_model.add_to(*sim);
  sim->add_option("--n", sim_n, "time horizon N")->required();
  sim->add_option("--l", sim_l, "truncation multipole L");
  sim->add_option("--schedule", sim_schedule, "truncation rule power:<p> or fixed:<L>");
  sim->add_option("--seed", sim_seed, "64-bit seed")->required();
  sim->add_option("--init", sim_init, "stationary or burnin:<B>");
  sim->add_option("--out", sim_out, "panel file (.csv or .bin)")->required();
  sim->callback([&] {
    action = [&] {
      return run_simulate(sim_model, sim_n, sim_l, sim_schedule, sim_seed, sim_init, sim_out,
                          manifest_override, manifest);
    };
  });

  // estimate
  std::string est_in, est_out, est_curve;
  double est_a1 = 0, est_a2 = 0, est_tol = 1e-8;
  int est_grid = 129;
  std::optional<double> est_h, est_gamma;
  auto* est = app.add_subcommand("estimate", "estimate (G, alpha) from a panel");
  est->add_option("--in", est_in, "panel file")->required();
  est->add_option("--a1", est_a1, "lower bound of alpha")->required();
  est->add_option("--a2", est_a2, "upper bound of alpha")->required();
  est->add_option("--grid", est_grid, "coarse grid points");
  est->add_option("--tol", est_tol, "golden-section bracket width");
  est->add_option("--h", est_h, "noise scale H for the plug-in standard error");
  est->add_option("--gamma", est_gamma, "noise smoothness gamma for the plug-in standard error");
  est->add_option("--curve", est_curve, "write the coarse reduced-objective curve as CSV");
  est->add_option("--out", est_out, "result JSON (default: stdout)");
  est->callback([&] {
    action = [&] {
      return run_estimate(est_in, est_a1, est_a2, est_grid, est_tol, est_h, est_gamma, est_curve,
                          est_out, manifest_override, manifest);
    };
  });

  // variance
  ModelFlags var_model;
  double var_tol = 1e-10;
  long var_cap = 10'000'000;
  auto* var = app.add_subcommand("variance", "asymptotic variance sigma^2(theta)");
  var_model.add_to(*var);
  var->add_option("--tol", var_tol, "relative tolerance of the series");
  var->add_option("--max-terms", var_cap, "hard cap on the truncation multipole");
  var->callback([&] {
    action = [&] { return run_variance(var_model, var_tol, var_cap, manifest_override, manifest); };
  });

  // mc
  ModelFlags mc_model;
  double mc_a1 = 1.1, mc_a2 = 3.0, mc_tol = 1e-8;
  std::string mc_nlist, mc_schedule = "power:0.2", mc_outdir;
  int mc_r = 0, mc_grid = 129;
  std::uint64_t mc_seed = 0;
  int mc_workers = 1;
  if (const char* env = std::getenv("SPHAR_WORKERS")) {
    try {
      mc_workers = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      mc_workers = 1;
    }
  }
  auto* mc = app.add_subcommand("mc", "Monte Carlo study of the estimator");
  mc_model.add_to(*mc);
  mc->add_option("--a1", mc_a1, "lower bound of alpha");
  mc->add_option("--a2", mc_a2, "upper bound of alpha");
  mc->add_option("--n-list", mc_nlist, "comma-separated increasing sample sizes")->required();
  mc->add_option("--r", mc_r, "replications per N")->required();
  mc->add_option("--schedule", mc_schedule, "truncation rule power:<p> or fixed:<L>");
  mc->add_option("--seed", mc_seed, "base seed")->required();
  mc->add_option("--workers", mc_workers, "worker threads (default $SPHAR_WORKERS or 1)");
  mc->add_option("--grid", mc_grid, "coarse grid points");
  mc->add_option("--tol", mc_tol, "golden-section bracket width");
  mc->add_option("--outdir", mc_outdir, "output directory")->required();
  mc->callback([&] {
    action = [&] {
      return run_mc(mc_model, mc_a1, mc_a2, mc_nlist, mc_r, mc_schedule, mc_seed, mc_workers,
                    mc_outdir, mc_grid, mc_tol, manifest_override, manifest);
    };
  });

  // field
  std::string field_in, field_out;
  int field_t = 0, field_nlat = 0, field_nlon = 0;
  auto* field = app.add_subcommand("field", "synthesise the truncated field on a grid");
  field->add_option("--in", field_in, "panel file")->required();
  field->add_option("--t", field_t, "time index")->required();
  field->add_option("--nlat", field_nlat, "colatitude rings")->required();
  field->add_option("--nlon", field_nlon, "longitudes per ring")->required();
  field->add_option("--out", field_out, "grid CSV")->required();
  field->callback([&] {
    action = [&] {
      return run_field(field_in, field_t, field_nlat, field_nlon, field_out, manifest_override,
                       manifest);
    };
  });

  // replay
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in --manifest");
  replay->callback([&] {
    action = [&] {
      if (manifest_override.empty()) throw UsageError("replay needs --manifest <file>");
      return run_replay(manifest_override);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  }
  for (const auto* sub : app.get_subcommands()) manifest.command = sub->get_name();

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  } catch (const sphar::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  } catch (const sphar::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const sphar::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSeriesCap;
  } catch (const sphar::McAbortError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMcAbort;
  } catch (const sphar::DegeneratePanelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFlagged;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args);
}
