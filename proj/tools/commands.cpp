#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qou/acceptance.hpp"
#include "qou/densities.hpp"
#include "qou/error.hpp"
#include "qou/excursion.hpp"
#include "qou/io.hpp"
#include "qou/minproc.hpp"
#include "qou/rng.hpp"
#include "qou/samplers.hpp"
#include "qou/tangent.hpp"

namespace qou::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kMaxDefaultQ = 0.95;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

HMethod h_method(const std::string& m) {
  if (m == "lastexit") return HMethod::LastExit;
  if (m == "importance") return HMethod::Importance;
  throw ConfigError("--method must be lastexit or importance for pickands");
}

ExcursionMethod x_method(const std::string& m) {
  if (m == "lastexit") return ExcursionMethod::LastExit;
  if (m == "direct") return ExcursionMethod::Direct;
  throw ConfigError("--method must be lastexit or direct for excursion");
}

// Writes tables and remembers what was written; every file gets the same
// leading metadata so it can be matched with its manifest.
class Emitter {
 public:
  Emitter(const RunConfig& cfg, std::string hash) : cfg_(cfg), hash_(std::move(hash)) {}

  void table(const std::string& stem, CsvTable t) {
    Meta meta = {{"command", cfg_.command},
                 {"seed", std::to_string(cfg_.seed)},
                 {"config_hash", hash_},
                 {"version", kVersion}};
    meta.insert(meta.end(), t.meta.begin(), t.meta.end());
    t.meta = std::move(meta);
    if (cfg_.format == "json") {
      json j;
      j["meta"] = json::object();
      for (const auto& [k, v] : t.meta) j["meta"][k] = v;
      j["columns"] = t.columns;
      j["rows"] = t.rows;
      write_text(stem + ".json", j.dump(2) + "\n");
    } else {
      std::ostringstream os;
      write_csv(os, t);
      write_text(stem + ".csv", os.str());
    }
  }

  void path(const PathSkeleton& p, double eps) {
    const Meta extra = {{"command", cfg_.command}, {"config_hash", hash_}};
    if (cfg_.binary) {
      std::ostringstream os(std::ios::binary);
      write_path_binary(os, p, cfg_.q, eps, cfg_.seed, extra);
      write_text("path.bin", os.str());
    } else {
      std::ostringstream os;
      write_path_csv(os, p, cfg_.q, eps, cfg_.seed, extra);
      write_text("path.csv", os.str());
    }
  }

  void write_text(const std::string& name, const std::string& body) {
    const fs::path p = fs::path(cfg_.out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << body;
    files_.push_back(name);
  }

  [[nodiscard]] const std::vector<std::string>& files() const { return files_; }

 private:
  const RunConfig& cfg_;
  std::string hash_;
  std::vector<std::string> files_;
};

struct Outcome {
  json results = json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> flags;  // numerical failures, exit status 2
};

void note_warnings(Outcome& out, const std::vector<std::string>& ws) {
  out.warnings.insert(out.warnings.end(), ws.begin(), ws.end());
}

std::vector<double> local_times(const std::vector<double>& grid) {
  std::vector<double> t(grid);
  for (double& v : t) v -= grid.front();
  return t;
}

void cmd_density(const RunConfig& cfg, Emitter& em, Outcome& out) {
  const QParams params(cfg.q);
  const auto ys = parse_grid(cfg.grid);
  CsvTable t;
  const bool has_cdf = cfg.kind == "tangent" || cfg.kind == "transformed";
  t.columns = has_cdf ? std::vector<std::string>{"y", "pdf", "cdf"}
                      : std::vector<std::string>{"y", "pdf"};
  t.meta = {{"kind", cfg.kind}, {"q", format_double(cfg.q)}, {"x", format_double(cfg.x)},
            {"t", format_double(cfg.t)}};
  if (cfg.kind == "transformed") t.meta.emplace_back("eps", format_double(cfg.eps));
  for (double y : ys) {
    if (cfg.kind == "marginal") {
      t.rows.push_back({y, qou_marginal_pdf(y, params)});
    } else if (cfg.kind == "qou") {
      t.rows.push_back({y, qou_transition_pdf(cfg.x, y, cfg.t, params)});
    } else if (cfg.kind == "tangent") {
      t.rows.push_back({y, tangent_transition_pdf(cfg.x, y, cfg.t),
                        tangent_transition_cdf(cfg.x, y, cfg.t)});
    } else {
      const auto c = transformed_transition_cdf(cfg.x, y, cfg.t, cfg.eps, params);
      if (!c.converged) {
        out.flags.push_back("transformed_transition_cdf: quadrature not converged at y=" +
                            format_double(y));
      }
      t.rows.push_back(
          {y, transformed_transition_pdf(cfg.x, y, 0.0, cfg.t, cfg.eps, params), c.value});
    }
  }
  em.table("density", std::move(t));
  out.results["points"] = ys.size();
}

void cmd_sample(const RunConfig& cfg, Emitter& em, Outcome& out) {
  const auto grid = parse_grid(cfg.grid);
  Rng rng(cfg.seed);
  PathSkeleton p;
  double eps = 0.0;
  if (cfg.kind == "tangent") {
    if (std::isnan(cfg.x0)) throw ConfigError("sample --kind tangent needs --x0");
    p = simulate_tangent_path(cfg.x0, local_times(grid), rng);
  } else {
    const QouKernel kern(QParams(cfg.q));
    SamplerDiagnostics diag;
    eps = cfg.eps;
    p = simulate_qou_path(cfg.x0, local_times(grid), eps, kern, rng, &diag);
    out.results["acceptance_rate"] = diag.acceptance_rate();
  }
  p.times = grid;
  em.path(p, eps);
  out.results["points"] = grid.size();
  out.results["min_value"] = p.min_value();
}

void cmd_tangent(const RunConfig& cfg, Emitter& em, Outcome& out) {
  CsvTable t;
  t.columns = {"w", "T", "inf_prob", "stderr", "kx_bound", "tail_bound"};
  t.meta = {{"level", format_double(cfg.level)}, {"grid_step", format_double(cfg.grid_step)},
            {"n", std::to_string(cfg.n)}};
  std::size_t k = 0;
  for (double T : cfg.T_list) {
    const double C = infZ_tail_constant(T, cfg.level);
    for (double w : cfg.w_list) {
      const auto e = inf_prob(w, T, cfg.level, cfg.grid_step, cfg.n, sub_seed(cfg.seed, k++));
      note_warnings(out, e.warnings);
      t.rows.push_back({w, T, e.value, e.std_error, kx_escape_bound(w, 0.0, T, cfg.level),
                        C / (w * w)});
    }
  }
  em.table("tangent", std::move(t));
}

void cmd_pickands(const RunConfig& cfg, Emitter& em, Outcome& out) {
  HOptions opt;
  opt.method = h_method(cfg.method);
  opt.w_max = cfg.w_max;
  const auto run = estimate_pickands(cfg.T_list, cfg.n, cfg.grid_step, cfg.seed, opt);
  CsvTable t;
  t.columns = {"T", "H_T", "stderr"};
  t.meta = {{"H", format_double(run.extrapolated_H.value)},
            {"H_stderr", format_double(run.extrapolated_H.std_error)},
            {"grid_step", format_double(cfg.grid_step)}};
  for (std::size_t i = 0; i < run.T_grid.size(); ++i) {
    t.rows.push_back({run.T_grid[i], run.H_T[i].value, run.H_T[i].std_error});
  }
  em.table("pickands", std::move(t));
  out.results["H"] = to_json(run.extrapolated_H);
  out.results["H_1"] = to_json(run.H_1);
  out.results["slope"] = run.slope;
  out.results["bounds"] = {run.best_lower, run.best_upper};
  out.results["unit_bound_ok"] = run.unit_bound_ok;
  out.results["monotone"] = run.monotone;
  note_warnings(out, run.warnings);
}

void cmd_excursion(const RunConfig& cfg, Emitter& em, Outcome& out) {
  const QParams params(cfg.q);
  const auto method = x_method(cfg.method);
  CsvTable t;
  t.columns = {"eps", "u", "stderr", "scale", "ratio", "ratio_stderr"};
  t.meta = {{"q", format_double(cfg.q)}, {"L", format_double(cfg.L)},
            {"grid_step", format_double(cfg.grid_step)}, {"n", std::to_string(cfg.n)}};
  CsvTable s;
  s.columns = {"eps", "blocks", "lower", "lower_stderr", "u", "u_stderr", "upper", "upper_stderr"};
  s.meta = {{"q", format_double(cfg.q)}, {"L", format_double(cfg.L)},
            {"T", format_double(cfg.sandwich_T)}};
  std::size_t k = 0;
  for (double eps : cfg.eps_list) {
    const auto e = estimate_excursion_prob(cfg.L, eps, params, cfg.n, cfg.grid_step,
                                           sub_seed(cfg.seed, k++), method);
    note_warnings(out, e.warnings);
    const double sc = excursion_scale(eps, params);
    t.rows.push_back({eps, e.value, e.std_error, sc, e.value / sc, e.std_error / sc});
    if (cfg.sandwich_T > 0.0) {
      const auto r = doublesum_sandwich(cfg.L, eps, cfg.sandwich_T, params, cfg.n,
                                        cfg.grid_step, sub_seed(cfg.seed, k++));
      s.rows.push_back({eps, static_cast<double>(r.blocks), r.lower.value, r.lower.std_error,
                        r.u.value, r.u.std_error, r.upper.value, r.upper.std_error});
      if (!r.lower_ok || !r.upper_ok) {
        out.warnings.push_back("double-sum sandwich violated beyond 3 stderr at eps=" +
                               format_double(eps));
      }
    }
  }
  em.table("excursion", std::move(t));
  if (cfg.sandwich_T > 0.0) em.table("sandwich", std::move(s));
}

void cmd_minproc(const RunConfig& cfg, Emitter& em, Outcome& out) {
  const QParams params(cfg.q);
  const auto grid = parse_grid(cfg.grid);
  const auto local = local_times(grid);
  std::vector<MinProcessPath> emp(cfg.reps);
  std::vector<MinProcessPath> ref(cfg.reps);
  // two streams per replicate so the reference does not depend on n
  parallel_for(cfg.reps, [&](std::size_t r) {
    Rng a = Rng::stream(cfg.seed, 2 * r);
    emp[r] = empirical_min_process(cfg.n, local, params, a);
    Rng b = Rng::stream(cfg.seed, 2 * r + 1);
    const auto atoms = sample_poisson_atoms(cfg.w_max, local, b);
    ref[r] = build_eta_completed(atoms, cfg.report_level, b);
  });
  auto table = [&](const std::vector<MinProcessPath>& ps, Meta meta) {
    CsvTable t;
    t.columns = {"rep", "time", "value"};
    t.meta = std::move(meta);
    for (std::size_t r = 0; r < ps.size(); ++r) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        t.rows.push_back({static_cast<double>(r), grid[i], ps[r].values[i]});
      }
    }
    return t;
  };
  const double eps = eps_n(cfg.n, params);
  em.table("eta_empirical", table(emp, {{"q", format_double(cfg.q)},
                                        {"n", std::to_string(cfg.n)},
                                        {"eps_n", format_double(eps)}}));
  em.table("eta_reference",
           table(ref, {{"w_max", format_double(cfg.w_max)},
                       {"report_level", format_double(cfg.report_level)},
                       {"truncation_bound", format_double(ref.front().truncation_bound)}}));
  for (const auto& p : ref) note_warnings(out, p.warnings);
  out.results["eps_n"] = eps;
}

int cmd_verify(const RunConfig& cfg, Emitter& em, Outcome& out) {
  AcceptanceOptions opt;
  opt.scale = cfg.scale;
  opt.seed = cfg.seed;
  opt.only = cfg.only;
  json list = json::array();
  bool ok = true;
  const auto results = run_acceptance(opt, [](const CriterionResult& r) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << " (" << r.name
              << "): " << r.detail << '\n'
              << std::flush;
  });
  for (const auto& r : results) {
    ok = ok && r.pass;
    list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail},
                    {"seconds", r.seconds}});
  }
  em.write_text("verify.json", json{{"criteria", list}, {"pass", ok}}.dump(2) + "\n");
  out.results["pass"] = ok;
  return ok ? 0 : 1;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("grid must be a:b:step, got '" + text + "'");
  try {
    return uniform_grid(parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]));
  } catch (const DomainError& e) {
    throw ConfigError("grid '" + text + "': " + e.what());
  }
}

void validate(const RunConfig& c) {
  if (!(std::abs(c.q) < 1.0)) throw ConfigError("--q must lie in (-1, 1)");
  if (std::abs(c.q) > kMaxDefaultQ && !c.allow_extreme_q) {
    throw ConfigError("|q| > 0.95 needs --allow-extreme-q");
  }
  if (c.format != "csv" && c.format != "json") throw ConfigError("--format must be csv or json");
  if (c.n < 1 || c.reps < 1) throw ConfigError("counts must be at least 1");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  const std::string& cmd = c.command;
  if (cmd == "density") {
    if (c.kind != "marginal" && c.kind != "qou" && c.kind != "transformed" && c.kind != "tangent") {
      throw ConfigError("density --kind must be marginal, qou, transformed or tangent");
    }
    if (c.kind != "marginal") positive(c.t, "--t");
    if (c.kind == "transformed") positive(c.eps, "--eps");
    (void)parse_grid(c.grid);
  } else if (cmd == "sample") {
    if (c.kind != "qou" && c.kind != "tangent") throw ConfigError("sample --kind must be qou or tangent");
    if (c.kind == "qou") positive(c.eps, "--eps");
    if (parse_grid(c.grid).front() < 0.0) throw ConfigError("sample grid must start at 0 or later");
  } else if (cmd == "tangent" || cmd == "pickands") {
    positive(c.grid_step, "--grid-step");
    positive(c.level, "--level");
    if (c.T_list.empty()) throw ConfigError("--T needs at least one value");
    for (double T : c.T_list) positive(T, "--T");
    for (double w : c.w_list) positive(w, "--w");
    if (cmd == "pickands") (void)h_method(c.method);
  } else if (cmd == "excursion") {
    positive(c.L, "--L");
    positive(c.grid_step, "--grid-step");
    for (double e : c.eps_list) positive(e, "--eps");
    if (c.sandwich_T < 0.0) throw ConfigError("--sandwich-T must be nonnegative");
    (void)x_method(c.method);
  } else if (cmd == "minproc") {
    positive(c.w_max, "--w-max");
    positive(c.report_level, "--report-level");
    (void)parse_grid(c.grid);
  } else if (cmd == "verify") {
    positive(c.scale, "--scale");
    for (int id : c.only) {
      if (id < 1 || id > 10) throw ConfigError("--only ids must lie in 1..10");
    }
  } else {
    throw ConfigError("unknown command '" + cmd + "'");
  }
}

json canonical_config(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["format"] = c.format;
  const std::string& cmd = c.command;
  if (cmd != "tangent" && cmd != "pickands" && cmd != "verify") j["q"] = c.q;
  if (cmd == "density") {
    j["kind"] = c.kind;
    j["grid"] = c.grid;
    if (c.kind != "marginal") j["x"] = c.x;
    if (c.kind != "marginal") j["t"] = c.t;
    if (c.kind == "transformed") j["eps"] = c.eps;
  } else if (cmd == "sample") {
    j["kind"] = c.kind;
    j["grid"] = c.grid;
    j["x0"] = std::isnan(c.x0) ? json("stationary") : json(c.x0);
    j["binary"] = c.binary;
    if (c.kind == "qou") j["eps"] = c.eps;
  } else if (cmd == "tangent") {
    j["w"] = c.w_list;
    j["T"] = c.T_list;
    j["level"] = c.level;
    j["grid_step"] = c.grid_step;
    j["n"] = c.n;
  } else if (cmd == "pickands") {
    j["T"] = c.T_list;
    j["n"] = c.n;
    j["grid_step"] = c.grid_step;
    j["method"] = c.method;
    j["w_max"] = c.w_max;
  } else if (cmd == "excursion") {
    j["L"] = c.L;
    j["eps"] = c.eps_list;
    j["n"] = c.n;
    j["grid_step"] = c.grid_step;
    j["method"] = c.method;
    j["sandwich_T"] = c.sandwich_T;
  } else if (cmd == "minproc") {
    j["n"] = c.n;
    j["grid"] = c.grid;
    j["reps"] = c.reps;
    j["w_max"] = c.w_max;
    j["report_level"] = c.report_level;
  } else if (cmd == "verify") {
    j["scale"] = c.scale;
    j["only"] = c.only;
  }
  return j;
}

int run(const RunConfig& cfg) {
  validate(cfg);
  if (cfg.threads > 0) set_threads(cfg.threads);
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw ConfigError("cannot create " + cfg.out_dir + ": " + ec.message());

  const json config = canonical_config(cfg);
  const std::string hash = config_hash(config.dump());
  Emitter em(cfg, hash);
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  int status = 0;
  const std::string& cmd = cfg.command;
  if (cmd == "density") {
    cmd_density(cfg, em, out);
  } else if (cmd == "sample") {
    cmd_sample(cfg, em, out);
  } else if (cmd == "tangent") {
    cmd_tangent(cfg, em, out);
  } else if (cmd == "pickands") {
    cmd_pickands(cfg, em, out);
  } else if (cmd == "excursion") {
    cmd_excursion(cfg, em, out);
  } else if (cmd == "minproc") {
    cmd_minproc(cfg, em, out);
  } else {
    status = cmd_verify(cfg, em, out);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const auto& w : out.warnings) std::cerr << "qou: warning: " << w << '\n';
  for (const auto& f : out.flags) std::cerr << "qou: error: " << f << '\n';
  if (!out.flags.empty()) status = 2;

  json manifest;
  manifest["config"] = config;
  manifest["config_hash"] = hash;
  manifest["version"] = kVersion;
  manifest["wall_time_s"] = wall;
  manifest["threads"] = thread_count();
  manifest["outputs"] = em.files();
  manifest["results"] = out.results;
  manifest["warnings"] = out.warnings;
  manifest["flags"] = out.flags;
  manifest["exit_status"] = status;
  em.write_text("manifest.json", manifest.dump(2) + "\n");
  return status;
}

}  // namespace qou::cli
