#include "shocklab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace shocklab {

namespace {

// Reads one JSON object, remembering which keys were consumed so that typos
// surface as errors instead of silently keeping a default.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const Json::exception&) {
      throw ConfigError("'" + where(key) + "' has the wrong type");
    }
  }

  void read_kind(const char* key, InitSpec::Kind& out) {
    std::string s = to_string(out);
    read(key, s);
    out = parse_init_kind(s);
  }
  void read_scheme(const char* key, Scheme& out) {
    std::string s = to_string(out);
    read(key, s);
    out = parse_scheme(s);
  }
  void read_phase(const char* key, PhaseMethod& out) {
    std::string s = to_string(out);
    read(key, s);
    out = parse_phase_method(s);
  }
  void read_rule(const char* key, QuadratureRule& out) {
    std::string s = out == QuadratureRule::trapezoid ? "trapezoid" : "gauss-kronrod";
    read(key, s);
    if (s == "trapezoid") {
      out = QuadratureRule::trapezoid;
    } else if (s == "gauss-kronrod") {
      out = QuadratureRule::gauss_kronrod;
    } else {
      throw ConfigError("'" + where(key) + "' must be 'gauss-kronrod' or 'trapezoid'");
    }
  }

  Section sub(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? Section(empty(), where(key)) : Section(*it, where(key));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown key '" + where(k.c_str()) + "'");
  }

  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  static const Json& empty() {
    static const Json e = Json::object();
    return e;
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void validate(const ExperimentConfig& c) {
  require(c.grid.half_width > 0.0 && c.grid.spacing > 0.0, "grid half-width and spacing must be positive");
  require(!c.eps.empty(), "eps list is empty");
  for (double e : c.eps) require(e > 0.0 && e < 1.0, "eps values must lie in (0, 1)");
  require(c.model.oleinik_samples > 0, "model.oleinik_samples must be positive");
  require(c.evans.circle_radius > 0.0 && c.evans.circle_nodes >= 8, "evans circle is too coarse");
  require(c.evans.rect_re_lo < c.evans.rect_re_hi && c.evans.rect_im_lo < c.evans.rect_im_hi,
          "evans rectangle is empty");
  require(c.evans.derivative_step > 0.0 && c.evans.derivative_step < 1.0,
          "evans.derivative_step must lie in (0, 1)");
  require(c.green.eps > 0.0, "green.eps must be positive");
  require(c.green.scattering_samples >= 0, "green.scattering_samples must be nonnegative");
  require(c.evolution.half_width >= c.grid.half_width,
          "evolution.half_width must cover the profile grid");
  require(c.evolution.cfl > 0.0 && c.evolution.dt >= 0.0, "evolution time step must be positive");
  require(c.evolution.sample_every > 0.0, "evolution.sample_every must be positive");
  require(c.evolution.duhamel_step > 0.0, "evolution.duhamel_step must be positive");
  require(c.evolve_t_end > 0.0, "evolve.t_end must be positive");
  require(c.decay.window_start < c.decay.window_end, "decay window is empty");
  require(c.basin.lo < c.basin.hi && c.basin.iterations >= 0, "basin bracket is invalid");
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  Section root(j, "");

  auto m = root.sub("model");
  m.read("name", c.model.name);
  const Json& mj = j.contains("model") ? j.at("model") : Json::object();
  const bool has_flux = mj.contains("flux"), has_source = mj.contains("source");
  if (!has_flux || !has_source) {
    const auto names = builtin_model_names();
    if (std::find(names.begin(), names.end(), c.model.name) == names.end())
      throw ConfigError("model '" + c.model.name + "' is not built in and lacks coefficients");
    const Model b = builtin_model(c.model.name);
    c.model.flux = b.law.flux_coeffs();
    c.model.source = b.law.source_coeffs();
    c.model.u_minus = b.shock.u_minus;
    c.model.u_plus = b.shock.u_plus;
  }
  m.read("flux", c.model.flux);
  m.read("source", c.model.source);
  m.read("u_minus", c.model.u_minus);
  m.read("u_plus", c.model.u_plus);
  m.read("oleinik_samples", c.model.oleinik_samples);
  m.finish();

  root.read("eps", c.eps);
  auto g = root.sub("grid");
  g.read("half_width", c.grid.half_width);
  g.read("spacing", c.grid.spacing);
  g.finish();

  auto p = root.sub("profile");
  p.read("tol", c.profile.tol);
  p.read("max_iter", c.profile.max_iter);
  p.read("polish", c.profile.polish);
  p.read("polish_tol", c.profile.polish_tol);
  p.finish();

  auto e = root.sub("evans");
  e.read("circle_radius", c.evans.circle_radius);
  e.read("circle_nodes", c.evans.circle_nodes);
  e.read("keyhole_gap", c.evans.keyhole_gap);
  e.read("rect_re_lo", c.evans.rect_re_lo);
  e.read("rect_re_hi", c.evans.rect_re_hi);
  e.read("rect_im_lo", c.evans.rect_im_lo);
  e.read("rect_im_hi", c.evans.rect_im_hi);
  e.read("rect_nodes", c.evans.rect_nodes);
  e.read("hf_lambda", c.evans.hf_lambda);
  e.read("derivative_step", c.evans.derivative_step);
  e.finish();

  auto gr = root.sub("green");
  gr.read("eps", c.green.eps);
  gr.read("stationarity_times", c.green.stationarity_times);
  gr.read("propagator_time", c.green.propagator_time);
  gr.read("scattering_samples", c.green.scattering_samples);
  gr.read("lambda_re_lo", c.green.lambda_re_lo);
  gr.read("lambda_re_hi", c.green.lambda_re_hi);
  gr.read("lambda_im_max", c.green.lambda_im_max);
  auto& t = c.green.time;
  gr.read("t_min", t.t_min);
  gr.read("t_max", t.t_max);
  gr.read("eta0", t.eta0);
  gr.read("kappa0", t.kappa0);
  gr.read("truncation_tol", t.truncation_tol);
  gr.read("mol_below", t.mol_below);
  gr.read("mol_dt", t.mol_dt);
  gr.read("window", t.bundle.window);
  auto q = gr.sub("quadrature");
  q.read_rule("rule", t.bundle.quadrature.rule);
  q.read("panel_width", t.bundle.quadrature.panel_width);
  q.read("lf_panels", t.bundle.quadrature.lf_panels);
  q.read("trapezoid_step", t.bundle.quadrature.trapezoid_step);
  q.read("tail_ratio", t.bundle.quadrature.tail_ratio);
  q.finish();
  gr.finish();
  root.read("reference_checks", c.reference_checks);

  auto ev = root.sub("evolution");
  auto& o = c.evolution;
  ev.read("half_width", o.half_width);
  ev.read("cfl", o.cfl);
  ev.read("dt", o.dt);
  ev.read_scheme("scheme", o.scheme);
  ev.read_phase("phase", o.phase);
  ev.read("theta", o.theta);
  ev.read("x_star", o.x_star);
  ev.read("sample_every", o.sample_every);
  ev.read("blowup_factor", o.blowup_factor);
  ev.read("duhamel_step", o.duhamel_step);
  ev.read("duhamel_max_bytes", o.duhamel_max_bytes);
  ev.read("eps", c.evolve_eps);
  ev.read("t_end", c.evolve_t_end);
  ev.finish();
  // The Duhamel kernel shares the time-Green settings of the green section.
  o.green = c.green.time;

  auto in = root.sub("init");
  in.read_kind("kind", c.init.kind);
  in.read("amplitude", c.init.amplitude);
  in.read("weighted", c.init.weighted);
  in.read("center", c.init.center);
  in.read("width", c.init.width);
  in.read("slow_start", c.init.slow_start);
  in.read("slow_ramp", c.init.slow_ramp);
  in.read("boundary_ramp", c.init.boundary_ramp);
  in.read("shift", c.init.shift);
  in.read("path", c.init.path);
  in.finish();

  auto d = root.sub("decay");
  d.read("enabled", c.decay.enabled);
  d.read("amplitude", c.decay.amplitude);
  d.read("window_start", c.decay.window_start);
  d.read("window_end", c.decay.window_end);
  d.finish();

  auto b = root.sub("basin");
  b.read("enabled", c.basin.enabled);
  b.read("lo", c.basin.lo);
  b.read("hi", c.basin.hi);
  b.read("iterations", c.basin.iterations);
  b.read("horizon", c.basin.horizon);
  b.finish();

  root.read("output_dir", c.output_dir);
  root.read("seed", c.seed);
  root.finish();
  validate(c);
  build_model(c.model);  // surfaces invalid models as configuration errors
  return c;
}

Json to_json(const ExperimentConfig& c) {
  const auto& t = c.green.time;
  const auto& o = c.evolution;
  Json j;
  j["model"] = {{"name", c.model.name},       {"flux", c.model.flux},
                {"source", c.model.source},   {"u_minus", c.model.u_minus},
                {"u_plus", c.model.u_plus},   {"oleinik_samples", c.model.oleinik_samples}};
  j["eps"] = c.eps;
  j["grid"] = {{"half_width", c.grid.half_width}, {"spacing", c.grid.spacing}};
  j["profile"] = {{"tol", c.profile.tol},
                  {"max_iter", c.profile.max_iter},
                  {"polish", c.profile.polish},
                  {"polish_tol", c.profile.polish_tol}};
  j["evans"] = {{"circle_radius", c.evans.circle_radius},
                {"circle_nodes", c.evans.circle_nodes},
                {"keyhole_gap", c.evans.keyhole_gap},
                {"rect_re_lo", c.evans.rect_re_lo},
                {"rect_re_hi", c.evans.rect_re_hi},
                {"rect_im_lo", c.evans.rect_im_lo},
                {"rect_im_hi", c.evans.rect_im_hi},
                {"rect_nodes", c.evans.rect_nodes},
                {"hf_lambda", c.evans.hf_lambda},
                {"derivative_step", c.evans.derivative_step}};
  j["green"] = {
      {"eps", c.green.eps},
      {"stationarity_times", c.green.stationarity_times},
      {"propagator_time", c.green.propagator_time},
      {"scattering_samples", c.green.scattering_samples},
      {"lambda_re_lo", c.green.lambda_re_lo},
      {"lambda_re_hi", c.green.lambda_re_hi},
      {"lambda_im_max", c.green.lambda_im_max},
      {"t_min", t.t_min},
      {"t_max", t.t_max},
      {"eta0", t.eta0},
      {"kappa0", t.kappa0},
      {"truncation_tol", t.truncation_tol},
      {"mol_below", t.mol_below},
      {"mol_dt", t.mol_dt},
      {"window", t.bundle.window},
      {"quadrature",
       {{"rule", t.bundle.quadrature.rule == QuadratureRule::trapezoid ? "trapezoid"
                                                                       : "gauss-kronrod"},
        {"panel_width", t.bundle.quadrature.panel_width},
        {"lf_panels", t.bundle.quadrature.lf_panels},
        {"trapezoid_step", t.bundle.quadrature.trapezoid_step},
        {"tail_ratio", t.bundle.quadrature.tail_ratio}}}};
  j["reference_checks"] = c.reference_checks;
  j["evolution"] = {{"half_width", o.half_width},
                    {"cfl", o.cfl},
                    {"dt", o.dt},
                    {"scheme", to_string(o.scheme)},
                    {"phase", to_string(o.phase)},
                    {"theta", o.theta},
                    {"x_star", o.x_star},
                    {"sample_every", o.sample_every},
                    {"blowup_factor", o.blowup_factor},
                    {"duhamel_step", o.duhamel_step},
                    {"duhamel_max_bytes", o.duhamel_max_bytes},
                    {"eps", c.evolve_eps},
                    {"t_end", c.evolve_t_end}};
  j["init"] = {{"kind", to_string(c.init.kind)},
               {"amplitude", c.init.amplitude},
               {"weighted", c.init.weighted},
               {"center", c.init.center},
               {"width", c.init.width},
               {"slow_start", c.init.slow_start},
               {"slow_ramp", c.init.slow_ramp},
               {"boundary_ramp", c.init.boundary_ramp},
               {"shift", c.init.shift},
               {"path", c.init.path}};
  j["decay"] = {{"enabled", c.decay.enabled},
                {"amplitude", c.decay.amplitude},
                {"window_start", c.decay.window_start},
                {"window_end", c.decay.window_end}};
  j["basin"] = {{"enabled", c.basin.enabled},
                {"lo", c.basin.lo},
                {"hi", c.basin.hi},
                {"iterations", c.basin.iterations},
                {"horizon", c.basin.horizon}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

Json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_json(read_config_json(path));
}

void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override '" + key + "' descends into a value");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

void apply_init_spec(Json& j, const std::string& spec) {
  const auto colon = spec.find(':');
  apply_override(j, "init.kind=\"" + spec.substr(0, colon) + "\"");
  if (colon == std::string::npos) return;
  std::stringstream rest(spec.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ','))
    if (!item.empty()) apply_override(j, "init." + item);
}

void save_config(const std::string& path, const ExperimentConfig& c) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << to_json(c).dump(2) << '\n';
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Model build_model(const ModelConfig& m) {
  try {
    auto law = ScalarLaw::polynomial(m.name, m.flux, m.source);
    auto shock = ShockTriple::create(law, m.u_minus, m.u_plus);
    const auto oleinik = check_oleinik(law, shock, m.oleinik_samples);
    if (!oleinik.ok)
      throw ConfigError("model violates the Oleinik condition (margin " +
                        std::to_string(oleinik.margin) + ")");
    if (!check_endstate_stability(law, shock).ok)
      throw ConfigError("model endstates are not stable zeros of the source");
    return {std::move(law), shock};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
}

ProfileGrid build_grid(const GridConfig& g) {
  try {
    return ProfileGrid(g.half_width, g.spacing);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
}

}  // namespace shocklab
