#include "shocklab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "shocklab/parallel.hpp"

namespace shocklab {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, const char* spec = "%.6g") {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string eps_dir(double eps) { return "eps_" + fmt(eps, "%g"); }

bool is_reference_cubic(const ModelConfig& m) {
  const Model b = builtin_model("burgers-cubic");
  return m.flux == b.law.flux_coeffs() && m.source == b.law.source_coeffs() &&
         m.u_minus == b.shock.u_minus && m.u_plus == b.shock.u_plus;
}

// Stage runner: times the stage and turns the first error into a failure.
class Stages {
 public:
  explicit Stages(RunRecord& r) : r_(r) {}
  template <class Fn>
  bool run(const char* name, Fn&& fn) {
    if (!r_.ok) return false;
    const auto t0 = Clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      r_.ok = false;
      r_.failure = std::string(name) + ": " + e.what();
    }
    r_.seconds.emplace_back(name, since(t0));
    return r_.ok;
  }

 private:
  RunRecord& r_;
};

void write_evans_csv(const std::string& path, const RunRecord& r) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "eps,circle_winding,circle_roots,rect_winding,rect_roots,evans_slope,hf_error\n";
  out << fmt(r.eps, "%.17g") << ',' << fmt(r.circle_winding, "%.17g") << ',' << r.circle_roots
      << ',' << fmt(r.rect_winding, "%.17g") << ',' << r.rect_roots << ','
      << fmt(r.evans_slope, "%.17g") << ',' << fmt(r.hf_error, "%.17g") << '\n';
}

void write_basin_csv(const std::string& path, const BasinReport& b) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "sup_amplitude,decayed\n";
  for (const auto& [a, d] : b.trials) out << fmt(a, "%.17g") << ',' << (d ? 1 : 0) << '\n';
}

RunRecord run_one(const ExperimentConfig& c, const LayerProfile& layer, double eps) {
  RunRecord r;
  r.eps = eps;
  r.directory = (fs::path(c.output_dir) / eps_dir(eps)).string();
  Stages stages(r);
  std::optional<EpsProfile> slot;

  stages.run("output", [&] { fs::create_directories(r.directory); });
  stages.run("profile", [&] {
    slot.emplace(solve_profile_eps(layer, eps, c.profile));
    const auto& prof = *slot;
    r.sigma_eps = prof.sigma_eps;
    r.sigma_drift = std::abs(prof.sigma_eps - prof.shock.sigma0);
    r.profile_residual = profile_residual(prof).max_residual;
    r.weighted_diff = verify_profile_asymptotics(layer, {prof}, 1).rows.at(0).weighted_diff;
    write_profile_csv((fs::path(r.directory) / "profile.csv").string(), layer, prof);
  });
  stages.run("evans", [&] {
    const auto& prof = *slot;
    const auto coeffs = make_coefficients(prof);
    const auto circle = count_roots(prof, keyhole_contour(0.0, c.evans.circle_radius,
                                                          coeffs->branch_tip(),
                                                          c.evans.keyhole_gap,
                                                          c.evans.circle_nodes));
    r.circle_winding = circle.winding;
    r.circle_roots = circle.count;
    const auto rect = count_roots(
        prof, rectangle_contour(c.evans.rect_re_lo, c.evans.rect_re_hi, c.evans.rect_im_lo,
                                c.evans.rect_im_hi, c.evans.rect_nodes));
    r.rect_winding = rect.winding;
    r.rect_roots = rect.count;
    r.evans_slope = evans_slope_at_zero(prof, c.evans.derivative_step);
    r.hf_error = evans_hf_limit(prof, {c.evans.hf_lambda}).rows.at(0).error;
    write_evans_csv((fs::path(r.directory) / "evans.csv").string(), r);
  });
  if (c.decay.enabled)
    stages.run("decay", [&] {
      DecayOptions o;
      o.amplitude = c.decay.amplitude;
      o.window_start = c.decay.window_start;
      o.window_end = c.decay.window_end;
      o.evolution = c.evolution;
      o.init = c.init;
      const auto d = decay_experiment(*slot, o);
      r.target_rate = d.target_rate;
      r.v0_sup = d.v0_sup;
      r.norm_rate = d.norm_fit.ok() ? d.norm_fit.rate : NAN;
      r.dpsi_rate = d.dpsi_fit.ok() ? d.dpsi_fit.rate : NAN;
      r.monitor_rate = d.monitor_fit.ok() ? d.monitor_fit.rate : NAN;
      r.norm_fit_residual = d.norm_fit.residual;
      r.psi_inf = d.psi_inf;
      r.phase_constant = d.phase_constant;
      r.warnings = d.warnings;
      write_series_csv((fs::path(r.directory) / "series.csv").string(), d.series);
    });
  if (c.basin.enabled)
    stages.run("basin", [&] {
      BasinOptions o;
      o.lo = c.basin.lo;
      o.hi = c.basin.hi;
      o.iterations = c.basin.iterations;
      o.horizon = c.basin.horizon;
      o.evolution = c.evolution;
      o.init = c.init;
      const auto b = basin_threshold(*slot, o);
      r.basin_sup = b.threshold_sup;
      r.basin_weighted = b.threshold_weighted;
      r.basin_bracketed = b.bracketed;
      write_basin_csv((fs::path(r.directory) / "basin.csv").string(), b);
    });
  return r;
}

// cos^4 bump of radius `radius`, the smooth data of the propagator check.
std::vector<double> bump(const ProfileGrid& grid, double center, double radius) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = (grid.x(i) - center) / radius;
    if (std::abs(z) < 1.0) w[i] = std::pow(std::cos(0.5 * std::numbers::pi * z), 4);
  }
  return w;
}

double max_of(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

double evans_slope_at_zero(const EpsProfile& profile, double step_fraction) {
  const auto coeffs = make_coefficients(profile);
  const double gap = -coeffs->branch_tip();
  if (!(gap > 0.0)) throw RangeError("essential spectrum touches 0; D'(0) is not defined");
  const double h = step_fraction * gap;
  const Complex dp = evans(coeffs, h).full(), dm = evans(coeffs, -h).full();
  const double scale = std::abs(evans(coeffs, 1.0).full());
  return std::abs((dp - dm) / (2.0 * h)) / scale;
}

ReferenceChecks run_reference_checks(const ExperimentConfig& c) {
  ReferenceChecks out;
  const Model model = build_model(c.model);
  const auto grid = build_grid(c.grid);
  auto t0 = Clock::now();
  const auto layer = solve_layer(model.law, model.shock, grid);
  if (is_reference_cubic(c.model)) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      worst = std::max(worst, std::abs(layer.u0[i] - 1.0 / (1.0 + std::exp(grid.x(i) / 2.0))));
    out.layer_error = worst;
  }
  out.seconds.emplace_back("layer", since(t0));

  t0 = Clock::now();
  const auto hf = evans_hf_limit(layer_as_profile(layer), {c.evans.hf_lambda});
  out.hf_limit = hf.limit;
  out.hf_ratio_error = hf.rows.at(0).error;
  out.seconds.emplace_back("hf", since(t0));

  t0 = Clock::now();
  const auto prof = solve_profile_eps(layer, c.green.eps, c.profile);
  const auto coeffs = make_coefficients(prof);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> re(c.green.lambda_re_lo, c.green.lambda_re_hi);
  std::uniform_real_distribution<double> im(-c.green.lambda_im_max, c.green.lambda_im_max);
  std::vector<Complex> lambdas;
  for (int k = 0; k < c.green.scattering_samples; ++k) {
    const double a = re(rng);
    lambdas.emplace_back(a, im(rng));
  }
  const auto checks = parallel_map<ScatteringCheck>(lambdas.size(), [&](std::size_t k) {
    return check_scattering(solve_spectral(coeffs, lambdas[k]), *coeffs,
                            {-5.0, -1.0, 0.0, 2.0, 5.0});
  });
  if (!checks.empty()) {
    out.scattering_closed_form = 0.0;
    out.scattering_pairing = 0.0;
    for (const auto& s : checks) {
      out.scattering_closed_form = std::max(out.scattering_closed_form, s.closed_form_error);
      out.scattering_pairing =
          std::max({out.scattering_pairing, s.self_pairing, s.cross_pairing_error});
    }
  }
  out.seconds.emplace_back("scattering", since(t0));

  t0 = Clock::now();
  const auto& g = prof.grid;
  out.green_continuity = out.green_flux_jump = out.green_residual = 0.0;
  for (Complex lambda : {Complex(0.3, 0.0), Complex(0.1, 0.7), Complex(-0.02, 1.5)}) {
    const SpectralGreen sg(coeffs, lambda);
    for (double y : {-3.0, 0.0, 1.0, 4.0}) {
      const std::size_t j = g.index_of(y);
      const Complex up = sg.value(j, j, true), down = sg.value(j, j, false);
      out.green_continuity = std::max(out.green_continuity, std::abs(up - down) / std::abs(up));
      const Complex jump = sg.flux(j, j, true) - sg.flux(j, j, false);
      out.green_flux_jump = std::max(out.green_flux_jump, std::abs(jump + 1.0));
      out.green_residual = std::max(out.green_residual, sg.residual(prof, j));
    }
  }
  out.seconds.emplace_back("spectral_green", since(t0));

  t0 = Clock::now();
  const TimeGreen green(prof, c.green.time);
  ContourBundle::Options bo = c.green.time.bundle;
  bo.window = std::min(bo.window, 12.0);
  const ContourBundle split_curve(coeffs, green.curves().right_curve(*coeffs), 1.0, bo);
  ContourSpec other;
  other.kind = ContourSpec::Kind::small;
  other.alpha = coeffs->a_plus;
  other.b = coeffs->beta_plus;
  other.omega0 = 1.1;
  other.zeta_plus = {1.0, -0.35};
  other.zeta_minus = {1.0, 0.35};
  const ContourBundle second(coeffs, other, 1.0, bo);
  out.contour_independence = 0.0;
  for (double t : {1.0, 3.0})
    for (auto [x, y] : {std::pair{0.0, 0.0}, {2.0, -1.0}, {-3.0, 4.0}, {5.0, 6.0}}) {
      const auto a = time_green(split_curve, t, g.index_of(x), g.index_of(y));
      const auto b = time_green(second, t, g.index_of(x), g.index_of(y));
      out.contour_independence =
          std::max(out.contour_independence,
                   std::abs(a.value - b.value) / (a.error_estimate() + b.error_estimate()));
    }
  out.seconds.emplace_back("contour_independence", since(t0));

  t0 = Clock::now();
  const std::size_t lo = green.bundle(true).first_index();
  out.stationarity = 0.0;
  for (double t : c.green.stationarity_times) {
    const auto a = green.apply(t, coeffs->du);
    for (std::size_t r = 0; r < a.total.size(); ++r)
      out.stationarity = std::max(out.stationarity, std::abs(a.total[r] - coeffs->du[lo + r]));
  }
  out.seconds.emplace_back("stationarity", since(t0));

  t0 = Clock::now();
  const auto w = bump(g, 1.5, 3.0);
  const auto ref = MolPropagator(prof, c.green.time.mol_dt).apply(w, c.green.propagator_time);
  const auto a = green.apply(c.green.propagator_time, w);
  out.propagator = 0.0;
  for (std::size_t r = 0; r < a.total.size(); ++r)
    out.propagator = std::max(out.propagator, std::abs(a.total[r] - ref[lo + r]));
  out.seconds.emplace_back("propagator", since(t0));
  return out;
}

SweepResult run_sweep(const ExperimentConfig& c) {
  SweepResult res;
  res.config_hash = config_hash(c);
  const Model model = build_model(c.model);
  res.sigma0 = model.shock.sigma0;
  const auto layer = solve_layer(model.law, model.shock, build_grid(c.grid));
  fs::create_directories(c.output_dir);
  save_config((fs::path(c.output_dir) / "config.json").string(), c);

  res.records = parallel_map<RunRecord>(
      c.eps.size(), [&](std::size_t k) { return run_one(c, layer, c.eps[k]); });
  if (c.reference_checks) res.reference = run_reference_checks(c);
  return res;
}

bool Report::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& k) { return k.pass; });
}

Report report(const SweepResult& res) {
  Report rep;
  const auto& recs = res.records;
  std::vector<const RunRecord*> good;
  std::string failed;
  for (const auto& r : recs) {
    if (r.ok) {
      good.push_back(&r);
    } else {
      failed += " eps=" + fmt(r.eps, "%g") + " (" + r.failure + ")";
    }
  }
  auto add = [&](int id, const char* name, bool pass, std::string detail) {
    if (!failed.empty()) {
      pass = false;
      detail += "; failed runs:" + failed;
    }
    rep.criteria.push_back({id, name, pass, std::move(detail)});
  };
  auto spread = [](const std::vector<double>& v) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return *mx / *mn;
  };
  auto column = [&](double RunRecord::*field) {
    std::vector<double> v;
    for (const auto* r : good) v.push_back(r->*field);
    return v;
  };
  auto all_present = [&](double RunRecord::*field) {
    return !good.empty() &&
           std::all_of(good.begin(), good.end(), [&](const RunRecord* r) { return !std::isnan(r->*field); });
  };

  if (!recs.empty()) {
    // 1. Weighted profile correction over eps, and the speed drift over eps^2.
    if (all_present(&RunRecord::weighted_diff) || !failed.empty()) {
      std::vector<double> ratio, drift;
      for (const auto* r : good) {
        ratio.push_back(r->weighted_diff / r->eps);
        drift.push_back(r->sigma_drift / (r->eps * r->eps));
      }
      bool pass = ratio.size() >= 2 && spread(ratio) <= 2.0;
      // Stable means either identically zero to rounding or within a factor 2.
      const double dmax = drift.empty() ? 0.0 : max_of(drift);
      const bool drift_stable = dmax <= 1e-6 || spread(drift) <= 2.0;
      pass = pass && drift_stable;
      add(1, "profile O(eps) law", pass,
          ratio.size() >= 2 ? "weighted/eps spread " + fmt(spread(ratio)) + " (<= 2), max drift/eps^2 " +
                                  fmt(dmax) + (drift_stable ? " stable" : " unstable")
                            : "needs at least two eps");
    }
    // 3. Root audit.
    if (all_present(&RunRecord::circle_winding) || !failed.empty()) {
      bool pass = !good.empty();
      double min_slope = INFINITY;
      std::string counts;
      for (const auto* r : good) {
        pass = pass && r->circle_roots == 1 && r->rect_roots == 0 && r->evans_slope > 1e-6;
        min_slope = std::min(min_slope, r->evans_slope);
        counts += " " + std::to_string(r->circle_roots) + "/" + std::to_string(r->rect_roots);
      }
      add(3, "Evans root audit", pass,
          "circle/rectangle roots" + counts + ", min |D'(0)|/|D(1)| " + fmt(min_slope) +
              " (> 1e-6)");
    }
  }

  if (res.reference) {
    const auto& ref = *res.reference;
    if (!std::isnan(ref.layer_error))
      rep.criteria.push_back({2, "layer closed form", ref.layer_error <= 1e-8,
                              "max node error " + fmt(ref.layer_error) + " (<= 1e-8)"});
    rep.criteria.push_back({4, "high-frequency limit", ref.hf_ratio_error <= 0.05,
                            "|D/sqrt(lambda) - " + fmt(ref.hf_limit) + "| = " +
                                fmt(ref.hf_ratio_error) + " (<= 0.05)"});
    if (!std::isnan(ref.scattering_closed_form))
      rep.criteria.push_back(
          {5, "scattering and duality identities",
           ref.scattering_closed_form <= 1e-6 && ref.scattering_pairing <= 1e-6,
           "closed form " + fmt(ref.scattering_closed_form) + ", pairings " +
               fmt(ref.scattering_pairing) + " (<= 1e-6)"});
    rep.criteria.push_back(
        {6, "Green function contracts",
         ref.green_continuity <= 1e-6 && ref.green_flux_jump <= 1e-6 &&
             ref.green_residual <= 1e-6 && ref.contour_independence <= 2.0 &&
             ref.stationarity <= 1e-4,
         "continuity " + fmt(ref.green_continuity) + ", flux jump " +
             fmt(ref.green_flux_jump) + ", residual " + fmt(ref.green_residual) +
             " (<= 1e-6), contour difference/estimate " + fmt(ref.contour_independence) +
             " (<= 2), stationarity " + fmt(ref.stationarity) + " (<= 1e-4)"});
    rep.criteria.push_back({7, "propagator oracle", ref.propagator <= 1e-3,
                            "sup difference " + fmt(ref.propagator) + " (<= 1e-3)"});
  }

  if (!recs.empty()) {
    // 8 and 10 share the decay runs.
    if (all_present(&RunRecord::target_rate) || !failed.empty()) {
      bool pass = !good.empty();
      std::string rates;
      for (const auto* r : good) {
        const double a = r->norm_rate / r->target_rate, b = r->dpsi_rate / r->target_rate;
        pass = pass && a >= 0.8 && a <= 1.2 && b >= 0.8 && b <= 1.2 && std::isfinite(r->psi_inf);
        rates += " " + fmt(a, "%.3f") + "/" + fmt(b, "%.3f");
      }
      const auto c = column(&RunRecord::phase_constant);
      const bool stable = c.size() >= 2 && std::all_of(c.begin(), c.end(), [](double x) {
                            return std::isfinite(x) && x > 0.0;
                          }) && spread(c) <= 2.0;
      pass = pass && stable;
      add(8, "nonlinear decay", pass,
          "norm/phase-rate ratios to eps*omega_inf" + rates + " (in [0.8, 1.2]), phase constant spread " +
              (c.size() >= 2 ? fmt(spread(c)) : std::string("n/a")) + " (<= 2)");

      bool mpass = !good.empty();
      std::string mrates;
      for (const auto* r : good) {
        const double a = r->monitor_rate / r->target_rate;
        mpass = mpass && a >= 0.5;
        mrates += " " + fmt(a, "%.3f");
      }
      add(10, "gradient-weight monitor", mpass, "monitor-rate ratios" + mrates + " (>= 0.5)");
    }
    if (all_present(&RunRecord::basin_weighted) || !failed.empty()) {
      const auto a = column(&RunRecord::basin_weighted);
      bool pass = a.size() >= 2 && std::all_of(good.begin(), good.end(), [](const RunRecord* r) {
                    return r->basin_bracketed;
                  });
      std::string vals;
      for (double x : a) vals += " " + fmt(x, "%.4f");
      pass = pass && spread(a) <= 2.0;
      add(9, "uniform basin", pass,
          "A* (weighted)" + vals + ", spread " + (a.size() >= 2 ? fmt(spread(a)) : "n/a") +
              " (<= 2)");
    }
  }
  std::sort(rep.criteria.begin(), rep.criteria.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });

  std::ostringstream t;
  t << "config " << res.config_hash << ", " << recs.size() << " eps runs\n";
  if (!recs.empty()) {
    t << "eps        sigma_eps   roots  |D'(0)|     rate/target  dpsi/target  C          A*\n";
    for (const auto& r : recs) {
      char line[256];
      std::snprintf(line, sizeof line, "%-10g %-11.8f %d/%-4d %-11.4g %-12.4f %-12.4f %-10.4f %-8.4f%s\n",
                    r.eps, r.sigma_eps, r.circle_roots, r.rect_roots, r.evans_slope,
                    r.norm_rate / r.target_rate, r.dpsi_rate / r.target_rate, r.phase_constant,
                    r.basin_weighted, r.ok ? "" : ("  FAILED " + r.failure).c_str());
      t << line;
    }
  }
  for (const auto& k : rep.criteria)
    t << (k.pass ? "[PASS] " : "[FAIL] ") << k.id << ' ' << k.name << ": " << k.detail << '\n';
  if (rep.criteria.empty()) t << "no criteria evaluated\n";
  rep.text = t.str();
  return rep;
}

void write_report(const std::string& dir, const SweepResult& res, const Report& rep) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw ConfigError("cannot write '" + (fs::path(dir) / name).string() + "'");
    return out;
  };
  auto num = [](double x) { return fmt(x, "%.17g"); };
  {
    auto out = open("sweep.csv");
    out << "eps,ok,sigma_eps,sigma_drift,weighted_diff,profile_residual,circle_winding,"
           "circle_roots,rect_winding,rect_roots,evans_slope,hf_error,target_rate,v0_sup,"
           "norm_rate,dpsi_rate,monitor_rate,psi_inf,phase_constant,basin_sup,basin_weighted,"
           "basin_bracketed\n";
    for (const auto& r : res.records)
      out << num(r.eps) << ',' << (r.ok ? 1 : 0) << ',' << num(r.sigma_eps) << ','
          << num(r.sigma_drift) << ',' << num(r.weighted_diff) << ',' << num(r.profile_residual)
          << ',' << num(r.circle_winding) << ',' << r.circle_roots << ','
          << num(r.rect_winding) << ',' << r.rect_roots << ',' << num(r.evans_slope) << ','
          << num(r.hf_error) << ',' << num(r.target_rate) << ',' << num(r.v0_sup) << ','
          << num(r.norm_rate) << ',' << num(r.dpsi_rate) << ',' << num(r.monitor_rate) << ','
          << num(r.psi_inf) << ',' << num(r.phase_constant) << ',' << num(r.basin_sup) << ','
          << num(r.basin_weighted) << ',' << (r.basin_bracketed ? 1 : 0) << '\n';
  }
  {
    auto out = open("criteria.csv");
    out << "id,name,pass,detail\n";
    for (const auto& k : rep.criteria)
      out << k.id << ",\"" << k.name << "\"," << (k.pass ? 1 : 0) << ",\"" << k.detail << "\"\n";
  }
  if (res.reference) {
    const auto& r = *res.reference;
    auto out = open("reference.csv");
    out << "check,value\n"
        << "layer_error," << num(r.layer_error) << '\n'
        << "hf_limit," << num(r.hf_limit) << '\n'
        << "hf_ratio_error," << num(r.hf_ratio_error) << '\n'
        << "scattering_closed_form," << num(r.scattering_closed_form) << '\n'
        << "scattering_pairing," << num(r.scattering_pairing) << '\n'
        << "green_continuity," << num(r.green_continuity) << '\n'
        << "green_flux_jump," << num(r.green_flux_jump) << '\n'
        << "green_residual," << num(r.green_residual) << '\n'
        << "contour_independence," << num(r.contour_independence) << '\n'
        << "stationarity," << num(r.stationarity) << '\n'
        << "propagator," << num(r.propagator) << '\n';
  }
  {
    auto out = open("timings.csv");
    out << "eps,stage,seconds\n";
    for (const auto& r : res.records)
      for (const auto& [stage, s] : r.seconds) out << num(r.eps) << ',' << stage << ',' << fmt(s) << '\n';
    if (res.reference)
      for (const auto& [stage, s] : res.reference->seconds) out << "reference," << stage << ',' << fmt(s) << '\n';
  }
  auto out = open("summary.txt");
  out << rep.text;
}

namespace {

Json number(double x) { return std::isnan(x) ? Json(nullptr) : Json(x); }
double number(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return NAN;
  return it->get<double>();
}
Json timings(const std::vector<std::pair<std::string, double>>& s) {
  Json j = Json::array();
  for (const auto& [k, v] : s) j.push_back({k, v});
  return j;
}
std::vector<std::pair<std::string, double>> timings(const Json& j) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& e : j) out.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
  return out;
}

}  // namespace

Json to_json(const SweepResult& res) {
  Json j;
  j["config_hash"] = res.config_hash;
  j["sigma0"] = number(res.sigma0);
  j["records"] = Json::array();
  for (const auto& r : res.records) {
    j["records"].push_back({{"eps", r.eps},
                            {"ok", r.ok},
                            {"failure", r.failure},
                            {"directory", r.directory},
                            {"sigma_eps", number(r.sigma_eps)},
                            {"sigma_drift", number(r.sigma_drift)},
                            {"weighted_diff", number(r.weighted_diff)},
                            {"profile_residual", number(r.profile_residual)},
                            {"circle_winding", number(r.circle_winding)},
                            {"circle_roots", r.circle_roots},
                            {"rect_winding", number(r.rect_winding)},
                            {"rect_roots", r.rect_roots},
                            {"evans_slope", number(r.evans_slope)},
                            {"hf_error", number(r.hf_error)},
                            {"target_rate", number(r.target_rate)},
                            {"v0_sup", number(r.v0_sup)},
                            {"norm_rate", number(r.norm_rate)},
                            {"dpsi_rate", number(r.dpsi_rate)},
                            {"monitor_rate", number(r.monitor_rate)},
                            {"norm_fit_residual", number(r.norm_fit_residual)},
                            {"psi_inf", number(r.psi_inf)},
                            {"phase_constant", number(r.phase_constant)},
                            {"warnings", r.warnings},
                            {"basin_sup", number(r.basin_sup)},
                            {"basin_weighted", number(r.basin_weighted)},
                            {"basin_bracketed", r.basin_bracketed},
                            {"seconds", timings(r.seconds)}});
  }
  if (res.reference) {
    const auto& r = *res.reference;
    j["reference"] = {{"layer_error", number(r.layer_error)},
                      {"hf_ratio_error", number(r.hf_ratio_error)},
                      {"hf_limit", number(r.hf_limit)},
                      {"scattering_closed_form", number(r.scattering_closed_form)},
                      {"scattering_pairing", number(r.scattering_pairing)},
                      {"green_continuity", number(r.green_continuity)},
                      {"green_flux_jump", number(r.green_flux_jump)},
                      {"green_residual", number(r.green_residual)},
                      {"contour_independence", number(r.contour_independence)},
                      {"stationarity", number(r.stationarity)},
                      {"propagator", number(r.propagator)},
                      {"seconds", timings(r.seconds)}};
  }
  return j;
}

SweepResult sweep_from_json(const Json& j) {
  try {
    SweepResult res;
    res.config_hash = j.value("config_hash", "");
    res.sigma0 = number(j, "sigma0");
    for (const auto& e : j.value("records", Json::array())) {
      RunRecord r;
      r.eps = e.at("eps").get<double>();
      r.ok = e.at("ok").get<bool>();
      r.failure = e.value("failure", "");
      r.directory = e.value("directory", "");
      r.sigma_eps = number(e, "sigma_eps");
      r.sigma_drift = number(e, "sigma_drift");
      r.weighted_diff = number(e, "weighted_diff");
      r.profile_residual = number(e, "profile_residual");
      r.circle_winding = number(e, "circle_winding");
      r.circle_roots = e.value("circle_roots", -1);
      r.rect_winding = number(e, "rect_winding");
      r.rect_roots = e.value("rect_roots", -1);
      r.evans_slope = number(e, "evans_slope");
      r.hf_error = number(e, "hf_error");
      r.target_rate = number(e, "target_rate");
      r.v0_sup = number(e, "v0_sup");
      r.norm_rate = number(e, "norm_rate");
      r.dpsi_rate = number(e, "dpsi_rate");
      r.monitor_rate = number(e, "monitor_rate");
      r.norm_fit_residual = number(e, "norm_fit_residual");
      r.psi_inf = number(e, "psi_inf");
      r.phase_constant = number(e, "phase_constant");
      r.warnings = e.value("warnings", std::vector<std::string>{});
      r.basin_sup = number(e, "basin_sup");
      r.basin_weighted = number(e, "basin_weighted");
      r.basin_bracketed = e.value("basin_bracketed", false);
      if (e.contains("seconds")) r.seconds = timings(e.at("seconds"));
      res.records.push_back(std::move(r));
    }
    if (j.contains("reference")) {
      const auto& e = j.at("reference");
      ReferenceChecks r;
      r.layer_error = number(e, "layer_error");
      r.hf_ratio_error = number(e, "hf_ratio_error");
      r.hf_limit = number(e, "hf_limit");
      r.scattering_closed_form = number(e, "scattering_closed_form");
      r.scattering_pairing = number(e, "scattering_pairing");
      r.green_continuity = number(e, "green_continuity");
      r.green_flux_jump = number(e, "green_flux_jump");
      r.green_residual = number(e, "green_residual");
      r.contour_independence = number(e, "contour_independence");
      r.stationarity = number(e, "stationarity");
      r.propagator = number(e, "propagator");
      if (e.contains("seconds")) r.seconds = timings(e.at("seconds"));
      res.reference = r;
    }
    return res;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed sweep record: ") + e.what());
  }
}

void save_sweep(const std::string& path, const SweepResult& r) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << to_json(r).dump(2) << '\n';
}

SweepResult load_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sweep record '" + path + "'");
  try {
    return sweep_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw ConfigError("sweep record '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace shocklab
