#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "qou/error.hpp"
#include "qou/io.hpp"

using qou::cli::RunConfig;

namespace {

constexpr const char* kConfigHelp =
    "key=value file mirroring the long flags; global keys at the top, command keys in a "
    "[command] section. Flags given on the command line override it.";

RunConfig defaults_for(const std::string& cmd) {
  RunConfig c;
  c.command = cmd;
  if (cmd == "density") {
    c.kind = "tangent";
    c.grid = "0:10:0.05";
  } else if (cmd == "sample") {
    c.kind = "qou";
    c.grid = "0:10:0.01";
  } else if (cmd == "tangent") {
    c.T_list = {1.0, 4.0};
    c.grid_step = 1.0 / 256.0;
    c.n = 4000;
  } else if (cmd == "minproc") {
    c.n = 100000;
    c.grid = "0:1:0.01";
    c.w_max = 100.0;
  }
  return c;
}

void add_options(const std::string& cmd, CLI::App& sc, RunConfig& c) {
  if (cmd == "density") {
    sc.add_option("--kind", c.kind, "marginal, qou, transformed or tangent")->capture_default_str();
    sc.add_option("--x", c.x, "starting state")->capture_default_str();
    sc.add_option("--t", c.t, "time lag (delta for qou, tau otherwise)")->capture_default_str();
    sc.add_option("--eps", c.eps, "boundary scale for --kind transformed")->capture_default_str();
    sc.add_option("--grid", c.grid, "evaluation points a:b:step")->capture_default_str();
  } else if (cmd == "sample") {
    sc.add_option("--kind", c.kind, "qou (transformed coordinates) or tangent")->capture_default_str();
    sc.add_option("--x0", c.x0, "starting value; stationary start when omitted for qou");
    sc.add_option("--eps", c.eps, "boundary scale for --kind qou")->capture_default_str();
    sc.add_option("--grid", c.grid, "path times a:b:step")->capture_default_str();
    sc.add_flag("--binary", c.binary, "write path.bin instead of path.csv");
  } else if (cmd == "tangent") {
    sc.add_option("--w", c.w_list, "starting levels")->delimiter(',')->capture_default_str();
    sc.add_option("--T", c.T_list, "horizons")->delimiter(',')->capture_default_str();
    sc.add_option("--level", c.level, "crossing level")->capture_default_str();
    sc.add_option("--grid-step", c.grid_step, "path grid step")->capture_default_str();
    sc.add_option("--n", c.n, "paths per point")->check(CLI::PositiveNumber)->capture_default_str();
  } else if (cmd == "pickands") {
    sc.add_option("--T", c.T_list, "horizons")->delimiter(',')->capture_default_str();
    sc.add_option("--n", c.n, "paths per horizon")->check(CLI::PositiveNumber)->capture_default_str();
    sc.add_option("--grid-step", c.grid_step, "path grid step")->capture_default_str();
    sc.add_option("--method", c.method, "lastexit or importance")->capture_default_str();
    sc.add_option("--w-max", c.w_max, "starting-level cutoff for importance")->capture_default_str();
  } else if (cmd == "excursion") {
    sc.add_option("--L", c.L, "interval length")->capture_default_str();
    sc.add_option("--eps", c.eps_list, "boundary scales")->delimiter(',')->capture_default_str();
    sc.add_option("--n", c.n, "paths per scale")->check(CLI::PositiveNumber)->capture_default_str();
    sc.add_option("--grid-step", c.grid_step, "grid step in tangent time")->capture_default_str();
    sc.add_option("--method", c.method, "lastexit or direct")->capture_default_str();
    sc.add_option("--sandwich-T", c.sandwich_T, "block length for the double-sum sandwich; 0 skips")
        ->capture_default_str();
  } else if (cmd == "minproc") {
    sc.add_option("--n", c.n, "paths in the empirical minimum")->check(CLI::PositiveNumber)
        ->capture_default_str();
    sc.add_option("--grid", c.grid, "times a:b:step")->capture_default_str();
    sc.add_option("--reps", c.reps, "replicates")->check(CLI::PositiveNumber)->capture_default_str();
    sc.add_option("--w-max", c.w_max, "atom level cutoff for the reference")->capture_default_str();
    sc.add_option("--report-level", c.report_level, "reference values below this are exact")
        ->capture_default_str();
  } else if (cmd == "verify") {
    sc.add_option("--scale", c.scale, "multiplier on Monte Carlo sample sizes")->capture_default_str();
    sc.add_option("--only", c.only, "criterion ids to run")->delimiter(',');
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-Ornstein-Uhlenbeck boundary numerics"};
  app.set_version_flag("--version", std::string(qou::kVersion));
  app.set_config("--config", "", kConfigHelp);
  app.require_subcommand(1);

  RunConfig global;
  app.add_option("--q", global.q, "q parameter")->capture_default_str();
  app.add_flag("--allow-extreme-q", global.allow_extreme_q, "permit |q| > 0.95");
  app.add_option("--seed", global.seed, "master seed")->capture_default_str();
  app.add_option("--out", global.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", global.format, "csv or json")->capture_default_str();
  app.add_option("--threads", global.threads, "worker threads; default QOU_THREADS or all cores");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"density", "evaluate a transition or marginal density"},
      {"sample", "simulate one path skeleton"},
      {"tangent", "infimum probabilities of the tangent process against the escape bounds"},
      {"pickands", "estimate H(T) and the Pickands constant"},
      {"excursion", "estimate the excursion probability and the double-sum sandwich"},
      {"minproc", "empirical and limit minimum process on a grid"},
      {"verify", "run the acceptance suite"}};
  std::map<std::string, RunConfig> cfgs;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    cfgs[name] = defaults_for(name);
    CLI::App* sc = app.add_subcommand(name, help);
    sc->fallthrough();
    sc->configurable();
    add_options(name, *sc, cfgs[name]);
    subs[name] = sc;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  std::string chosen;
  for (const auto& [name, sc] : subs) {
    if (sc->parsed()) chosen = name;
  }
  RunConfig cfg = cfgs[chosen];
  cfg.q = global.q;
  cfg.allow_extreme_q = global.allow_extreme_q;
  cfg.seed = global.seed;
  cfg.out_dir = global.out_dir;
  cfg.format = global.format;
  cfg.threads = global.threads;

  try {
    return qou::cli::run(cfg);
  } catch (const qou::cli::ConfigError& e) {
    std::cerr << "qou: invalid configuration: " << e.what() << '\n';
    return 1;
  } catch (const qou::DomainError& e) {
    std::cerr << "qou: invalid input: " << e.what() << '\n';
    return 1;
  } catch (const qou::NonConvergence& e) {
    std::cerr << "qou: numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const qou::SamplerStall& e) {
    std::cerr << "qou: numerical failure: " << e.what() << '\n';
    return 2;
  }
}
