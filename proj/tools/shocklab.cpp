// Command-line front end. Exit codes: 0 all checks pass, 2 a numerical check
// failed or a run diverged, 3 configuration error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "shocklab/harness.hpp"
#include "shocklab/parallel.hpp"

using namespace shocklab;
namespace fs = std::filesystem;

namespace {

constexpr int kNumericalFailure = 2;
constexpr int kConfigFailure = 3;

// Flags shared by all subcommands, plus the per-command extras. Everything
// funnels into the JSON config so validation and logging stay in one place.
struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string model;
  std::vector<double> eps;
  // evolve
  std::string init, phase;
  double tmax = NAN;
  double snapshot_every = 0.0;
  // evans
  std::string lambda_grid;
  // green
  double time = 1.0;
  std::vector<std::string> at;
};

// Key that --eps sets for each subcommand.
std::string eps_key(const std::string& command) {
  if (command == "evolve") return "evolution.eps";
  if (command == "green") return "green.eps";
  return "eps";
}

ExperimentConfig resolve(const Options& o, const std::string& command) {
  Json j = o.config.empty() ? Json::object() : read_config_json(o.config);
  if (!j.is_object()) throw ConfigError("config root must be an object");
  if (!o.model.empty()) j["model"] = Json{{"name", o.model}};
  if (!o.eps.empty()) {
    if (command != "profile" && command != "evans" && command != "sweep" && o.eps.size() != 1)
      throw ConfigError("--eps takes a single value for " + command);
    const Json v = eps_key(command) == "eps" ? Json(o.eps) : Json(o.eps.front());
    apply_override(j, eps_key(command) + "=" + v.dump());
  }
  if (!o.init.empty()) apply_init_spec(j, o.init);
  if (!o.phase.empty()) apply_override(j, "evolution.phase=" + Json(o.phase).dump());
  if (std::isfinite(o.tmax)) apply_override(j, "evolution.t_end=" + Json(o.tmax).dump());
  for (const auto& s : o.sets) apply_override(j, s);
  ExperimentConfig c = config_from_json(j);
  fs::create_directories(c.output_dir);
  save_config((fs::path(c.output_dir) / "config.json").string(), c);
  std::printf("config %s -> %s/config.json (workers %u)\n", config_hash(c).c_str(),
              c.output_dir.c_str(), worker_count());
  return c;
}

fs::path eps_dir(const ExperimentConfig& c, double eps) {
  char name[32];
  std::snprintf(name, sizeof name, "eps_%g", eps);
  return fs::path(c.output_dir) / name;
}

std::vector<EpsProfile> solve_profiles(const ExperimentConfig& c, const LayerProfile& layer) {
  auto slots = parallel_map<std::optional<EpsProfile>>(c.eps.size(), [&](std::size_t k) {
    return std::optional(solve_profile_eps(layer, c.eps[k], c.profile));
  });
  std::vector<EpsProfile> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

int cmd_profile(const ExperimentConfig& c, const Options&) {
  const Model m = build_model(c.model);
  const auto layer = solve_layer(m.law, m.shock, build_grid(c.grid));
  const auto profiles = solve_profiles(c, layer);
  const auto rep = verify_profile_asymptotics(layer, profiles, 1);
  std::ofstream out(fs::path(c.output_dir) / "profile_asymptotics.csv");
  out << "eps,sigma_eps,sigma_drift,weighted_diff,weighted_ratio,ratio0,ratio1,residual\n";
  std::printf("eps        sigma_eps          |U-U0|_w/eps  residual\n");
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const auto& p = profiles[k];
    const auto& row = rep.rows[k];
    const double res = profile_residual(p).max_residual;
    const auto dir = eps_dir(c, p.eps);
    fs::create_directories(dir);
    write_profile_csv((dir / "profile.csv").string(), layer, p);
    char line[256];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.eps,
                  p.sigma_eps, row.sigma_drift, row.weighted_diff, row.weighted_ratio,
                  row.ratio.at(0), row.ratio.at(1), res);
    out << line;
    std::printf("%-10g %-18.15f %-13.6g %.3g\n", p.eps, p.sigma_eps, row.weighted_ratio, res);
  }
  std::printf("weighted ratio spread %.4g: %s\n", rep.weighted_spread, rep.pass ? "pass" : "fail");
  return rep.pass ? 0 : kNumericalFailure;
}

// `lo:hi:n`, n >= 1 points including both ends.
std::vector<double> parse_range(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  int n = 0;
  char c1 = 0, c2 = 0, extra = 0;
  std::istringstream in(text);
  if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || (in >> extra))
    throw ConfigError("range '" + text + "' is not of the form lo:hi:n");
  std::vector<double> out(n, lo);
  for (int k = 1; k < n; ++k) out[k] = lo + (hi - lo) * k / (n - 1);
  return out;
}

// D on a rectangular lambda grid `re_lo:re_hi:n,im_lo:im_hi:m`, one CSV per eps.
void write_evans_grid(const ExperimentConfig& c, const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos) throw ConfigError("--lambda-grid needs re-range,im-range");
  const auto re = parse_range(spec.substr(0, comma));
  const auto im = parse_range(spec.substr(comma + 1));
  const Model m = build_model(c.model);
  const auto layer = solve_layer(m.law, m.shock, build_grid(c.grid));
  const auto profiles = solve_profiles(c, layer);
  parallel_for(profiles.size(), [&](std::size_t k) {
    const auto coeffs = make_coefficients(profiles[k]);
    std::ofstream out(eps_dir(c, profiles[k].eps) / "evans_grid.csv");
    out << "re_lambda,im_lambda,re_D,im_D,log_scale\n";
    char line[160];
    for (double x : re)
      for (double y : im) {
        const auto d = evans(coeffs, Complex(x, y));
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", x, y,
                      d.value.real(), d.value.imag(), d.log_scale);
        out << line;
      }
  });
  std::printf("evans_grid.csv: %zu x %zu lambda values per eps\n", re.size(), im.size());
}

int cmd_evans(ExperimentConfig c, const Options& o) {
  c.decay.enabled = false;
  c.basin.enabled = false;
  c.reference_checks = false;
  const auto res = run_sweep(c);
  if (!o.lambda_grid.empty()) write_evans_grid(c, o.lambda_grid);
  std::printf("eps        circle  rectangle  |D'(0)|/|D(1)|  HF error\n");
  bool ok = true;
  for (const auto& r : res.records) {
    if (!r.ok) {
      std::printf("%-10g failed: %s\n", r.eps, r.failure.c_str());
      ok = false;
      continue;
    }
    std::printf("%-10g %-7.4f %-10.4f %-15.6g %.4g\n", r.eps, r.circle_winding, r.rect_winding,
                r.evans_slope, r.hf_error);
    ok = ok && r.circle_roots == 1 && r.rect_roots == 0 && r.evans_slope > 1e-6;
  }
  const Report rep = report(res);
  write_report(c.output_dir, res, rep);
  return ok ? 0 : kNumericalFailure;
}

// Pointwise split of the time Green function at `x,y` pairs (grid nodes).
int green_points(const ExperimentConfig& c, const Options& o) {
  const Model m = build_model(c.model);
  const auto layer = solve_layer(m.law, m.shock, build_grid(c.grid));
  const auto prof = solve_profile_eps(layer, c.green.eps, c.profile);
  const TimeGreen green(prof, c.green.time);
  std::ofstream out(fs::path(c.output_dir) / "green_points.csv");
  out << "t,x,y,G_total,G_pt,G_ess,G_p,error_estimate\n";
  std::printf("eps %g, t %g\n%-9s %-9s %-14s %-14s %-14s %s\n", c.green.eps, o.time, "x", "y",
              "G", "G_pt", "G_ess", "G_p");
  for (const auto& pair : o.at) {
    double x = 0.0, y = 0.0;
    char sep = 0, extra = 0;
    std::istringstream in(pair);
    if (!(in >> x >> sep >> y) || sep != ',' || (in >> extra))
      throw ConfigError("--at '" + pair + "' is not of the form x,y");
    GreenSample g;
    try {
      g = green.split_at(o.time, x, y);
    } catch (const RangeError& e) {
      throw ConfigError(std::string("--at: ") + e.what());
    }
    char line[256];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.3g\n", o.time,
                  x, y, g.total, g.pt, g.ess, g.phase, g.error_estimate);
    out << line;
    std::printf("%-9g %-9g %-14.6e %-14.6e %-14.6e %.6e\n", x, y, g.total, g.pt, g.ess, g.phase);
  }
  return 0;
}

int cmd_green(const ExperimentConfig& c, const Options& o) {
  if (!o.at.empty()) return green_points(c, o);
  SweepResult res;
  res.config_hash = config_hash(c);
  res.reference = run_reference_checks(c);
  const Report rep = report(res);
  write_report(c.output_dir, res, rep);
  std::fputs(rep.text.c_str(), stdout);
  return rep.exit_code();
}

int cmd_evolve(const ExperimentConfig& c, const Options& o) {
  const Model m = build_model(c.model);
  const auto layer = solve_layer(m.law, m.shock, build_grid(c.grid));
  const auto prof = solve_profile_eps(layer, c.evolve_eps, c.profile);
  Evolver evo(prof, c.evolution);
  evo.reset(evo.initial_data(c.init));

  // Snapshots land on the first sample at or after each multiple of the period.
  std::ofstream snap;
  double next_snap = 0.0;
  const auto nodes = evo.grid().nodes();
  auto take_snapshot = [&](const SeriesRow& row) {
    if (!(o.snapshot_every > 0.0) || row.t < next_snap - 1e-9) return false;
    const auto& v = evo.state().v;
    char line[96];
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", row.t, nodes[i], v[i]);
      snap << line;
    }
    while (next_snap <= row.t + 1e-9) next_snap += o.snapshot_every;
    return false;
  };
  if (o.snapshot_every > 0.0) {
    snap.open(fs::path(c.output_dir) / "snapshots.csv");
    snap << "t,x,v\n";
    take_snapshot(evo.sample());
  }

  std::vector<SeriesRow> rows;
  int code = 0;
  try {
    rows = evo.run(c.evolve_t_end, take_snapshot);
  } catch (const DivergenceError& e) {
    std::printf("diverged: %s\n", e.what());
    code = kNumericalFailure;
  }
  const auto path = (fs::path(c.output_dir) / "series.csv").string();
  write_series_csv(path, rows);
  for (const auto& w : evo.warnings()) std::printf("warning: %s\n", w.c_str());
  const auto& s = evo.state();
  std::printf("eps %g, init %s, phase %s, scheme %s, dt %g, theta %g\n", prof.eps,
              to_string(c.init.kind).c_str(), to_string(evo.phase_method()).c_str(),
              to_string(c.evolution.scheme).c_str(), evo.dt(), evo.theta());
  std::printf("t %g: psi %.10g, psi' %.3e, sup|v| %.3e -> %s\n", s.t, s.psi, s.dpsi,
              num::sup_norm(s.v), path.c_str());
  return code;
}

int cmd_sweep(const ExperimentConfig& c, const Options&) {
  const auto res = run_sweep(c);
  save_sweep((fs::path(c.output_dir) / "records.json").string(), res);
  const Report rep = report(res);
  write_report(c.output_dir, res, rep);
  std::fputs(rep.text.c_str(), stdout);
  return rep.exit_code();
}

int cmd_report(const ExperimentConfig& c, const Options&) {
  const auto path = fs::path(c.output_dir) / "records.json";
  const SweepResult res = fs::exists(path) ? load_sweep(path.string()) : SweepResult{};
  if (!res.config_hash.empty() && res.config_hash != config_hash(c))
    std::printf("note: records were produced by config %s\n", res.config_hash.c_str());
  const Report rep = report(res);
  write_report(c.output_dir, res, rep);
  std::fputs(rep.text.c_str(), stdout);
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viscous shock stability experiments"};
  app.require_subcommand(1);
  Options o;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const ExperimentConfig&, const Options&);
  };
  const Command commands[] = {
      {"profile", "Solve the eps-profiles and check the O(eps) law", cmd_profile},
      {"evans", "Root audit and high-frequency limit of the Evans function",
       [](const ExperimentConfig& c, const Options& opt) { return cmd_evans(c, opt); }},
      {"green", "Layer, scattering and Green-function reference checks", cmd_green},
      {"evolve", "One nonlinear run with the configured initial data", cmd_evolve},
      {"sweep", "Full eps-sweep with decay fits and basin bisection", cmd_sweep},
      {"report", "Summarise records.json from the output directory", cmd_report},
  };
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", o.config, "JSON configuration (defaults if omitted)");
    sub->add_option("--set", o.sets, "Override a config key, e.g. grid.spacing=0.1");
    sub->add_option("--model", o.model, "Built-in model name");
    sub->add_option("--eps", o.eps, "Viscosity value(s)")->delimiter(',');
    const std::string name = cmd.name;
    if (name == "evolve") {
      sub->add_option("--init", o.init, "Initial data, kind[:key=value,...]");
      sub->add_option("--phase", o.phase, "none, anchor or duhamel");
      sub->add_option("--tmax", o.tmax, "Final fast time");
      sub->add_option("--snapshot-every", o.snapshot_every, "Write v to snapshots.csv");
    } else if (name == "evans") {
      sub->add_option("--lambda-grid", o.lambda_grid, "re_lo:re_hi:n,im_lo:im_hi:m");
    } else if (name == "green") {
      sub->add_option("--time", o.time, "Time for --at evaluations");
      sub->add_option("--at", o.at, "Grid point pair x,y (repeatable)");
    }
  }
  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& cmd : commands)
      if (app.got_subcommand(cmd.name)) return cmd.run(resolve(o, cmd.name), o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalFailure;
  }
  return 0;
}
