#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "shocklab/harness.hpp"

using namespace shocklab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("shocklab_test_" + name);
  fs::remove_all(d);
  return d;
}

// Two cheap eps values with the expensive stages switched off.
ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.eps = {0.1, 0.05};
  c.reference_checks = false;
  c.decay.enabled = false;
  c.basin.enabled = false;
  c.output_dir = out.string();
  return c;
}

RunRecord passing_record(double eps) {
  RunRecord r;
  r.eps = eps;
  r.sigma_eps = 0.5;
  r.sigma_drift = 0.0;
  r.weighted_diff = 0.3 * eps;
  r.circle_winding = 1.0;
  r.circle_roots = 1;
  r.rect_winding = 0.0;
  r.rect_roots = 0;
  r.evans_slope = 0.1;
  r.target_rate = 0.5 * eps;
  r.norm_rate = r.dpsi_rate = r.target_rate;
  r.monitor_rate = 1.1 * r.target_rate;
  r.psi_inf = -1.0;
  r.phase_constant = 1.0;
  r.basin_weighted = 0.37;
  r.basin_bracketed = true;
  return r;
}

}  // namespace

TEST_CASE("defaults are materialised and round-trip bit for bit") {
  const auto c = config_from_json(Json::object());
  CHECK(c.model.flux == std::vector<double>{0.0, 0.0, 0.5});
  CHECK(c.model.source == std::vector<double>{0.0, -0.5, 1.5, -1.0});
  CHECK(c.eps == std::vector<double>{0.1, 0.05, 0.025, 0.0125});
  const Json j = to_json(c);
  CHECK(j["model"].contains("oleinik_samples"));
  CHECK(j["evolution"]["phase"] == "anchor");
  CHECK(j["init"]["kind"] == "plateau");

  Json tweaked = j;
  tweaked["evolution"]["dt"] = 0.1 / 7.0;
  tweaked["green"]["kappa0"] = 0.0123456789012345678;
  tweaked["eps"] = {0.1, 1.0 / 3.0};
  const auto a = config_from_json(tweaked);
  const auto dumped = to_json(a).dump();
  CHECK(to_json(config_from_json(Json::parse(dumped))).dump() == dumped);
  CHECK(config_from_json(Json::parse(dumped)).evolution.dt == 0.1 / 7.0);
  CHECK(config_hash(a) == config_hash(config_from_json(Json::parse(dumped))));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(c).size() == 16);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(config_from_json(Json{{"epsilon", {0.1}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"grid", {{"spacing", "fine"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"grid", {{"h", 0.05}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"eps", Json::array()}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"eps", {0.0}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"evolution", {{"phase", "pinned"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(Json{{"model", {{"name", "kdv"}}}}), ConfigError);
  // Endstates that are not zeros of the source.
  CHECK_THROWS_AS(config_from_json(Json{{"model", {{"u_minus", 0.8}}}}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/shocklab.json"), ConfigError);

  const auto d = scratch_dir("badjson");
  fs::create_directories(d);
  std::ofstream(d / "c.json") << "{ \"eps\": [0.1,";
  CHECK_THROWS_AS(load_config((d / "c.json").string()), ConfigError);
  fs::remove_all(d);
}

TEST_CASE("command-line overrides go through the same validation") {
  Json j = Json::object();
  apply_override(j, "grid.spacing=0.1");
  apply_override(j, "eps=[0.1,0.05]");
  apply_override(j, "evolution.phase=duhamel");
  apply_init_spec(j, "gaussian:amplitude=0.02,center=3,width=1.5");
  const auto c = config_from_json(j);
  CHECK(c.grid.spacing == 0.1);
  CHECK(c.eps == std::vector<double>{0.1, 0.05});
  CHECK(c.evolution.phase == PhaseMethod::duhamel);
  CHECK(c.init.kind == InitSpec::Kind::gaussian);
  CHECK(c.init.amplitude == 0.02);
  CHECK(c.init.width == 1.5);

  Json k = Json::object();
  apply_init_spec(k, "csv:path=v0.csv");
  CHECK(config_from_json(k).init.path == "v0.csv");

  CHECK_THROWS_AS(apply_override(j, "grid.spacing"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "grid..spacing=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "grid.spacing.x=1"), ConfigError);
  Json bad = Json::object();
  apply_override(bad, "grid.h=0.1");
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  Json kind = Json::object();
  apply_init_spec(kind, "blob");
  CHECK_THROWS_AS(config_from_json(kind), ConfigError);
}

TEST_CASE("custom polynomial models load from coefficients") {
  const auto c = config_from_json(Json{{"model",
                                        {{"name", "asym"},
                                         {"flux", {0.0, 0.0, 0.5}},
                                         {"source", {0.0, -0.25, 1.25, -1.0}}}}});
  const Model m = build_model(c.model);
  CHECK(m.shock.sigma0 == doctest::Approx(0.5));
  CHECK(m.law.g(0.25) == doctest::Approx(0.0).scale(1e-15));
}

TEST_CASE("empty record list gives an empty report that passes") {
  const Report rep = report(SweepResult{});
  CHECK(rep.criteria.empty());
  CHECK(rep.exit_code() == 0);
}

TEST_CASE("a single failing criterion is named and fails the exit code") {
  SweepResult res;
  for (double e : {0.1, 0.05, 0.025, 0.0125}) res.records.push_back(passing_record(e));
  const Report good = report(res);
  CHECK(good.exit_code() == 0);
  for (int id : {1, 3, 8, 9, 10})
    CHECK(std::any_of(good.criteria.begin(), good.criteria.end(),
                      [&](const Criterion& k) { return k.id == id && k.pass; }));

  res.records[2].monitor_rate = 0.3 * res.records[2].target_rate;
  const Report bad = report(res);
  CHECK(bad.exit_code() == 2);
  int failing = 0;
  for (const auto& k : bad.criteria)
    if (!k.pass) {
      ++failing;
      CHECK(k.name == "gradient-weight monitor");
    }
  CHECK(failing == 1);
  CHECK(bad.text.find("[FAIL] 10 gradient-weight monitor") != std::string::npos);
}

TEST_CASE("basin uniformity flag follows the max/min ratio") {
  SweepResult res;
  for (double e : {0.1, 0.05, 0.025}) res.records.push_back(passing_record(e));
  auto basin = [&] {
    for (const auto& k : report(res).criteria)
      if (k.id == 9) return k.pass;
    FAIL("basin criterion missing");
    return false;
  };
  res.records[0].basin_weighted = 0.2;
  res.records[2].basin_weighted = 0.39;
  CHECK(basin());
  res.records[2].basin_weighted = 0.41;
  CHECK_FALSE(basin());
}

TEST_CASE("failed runs fail the criteria they feed") {
  SweepResult res;
  for (double e : {0.1, 0.05}) res.records.push_back(passing_record(e));
  res.records[1].ok = false;
  res.records[1].failure = "decay: boom";
  const Report rep = report(res);
  CHECK(rep.exit_code() == 2);
  CHECK(rep.text.find("decay: boom") != std::string::npos);
}

TEST_CASE("sweep records round-trip through JSON") {
  SweepResult res;
  res.config_hash = "0123456789abcdef";
  res.sigma0 = 0.5;
  res.records.push_back(passing_record(0.1));
  res.records[0].warnings = {"w"};
  res.records[0].seconds = {{"profile", 1.5}};
  res.reference = ReferenceChecks{};
  res.reference->propagator = 2e-4;
  const auto d = scratch_dir("roundtrip");
  fs::create_directories(d);
  save_sweep((d / "r.json").string(), res);
  const auto back = load_sweep((d / "r.json").string());
  CHECK(to_json(back).dump() == to_json(res).dump());
  CHECK(std::isnan(back.records[0].hf_error));
  CHECK(back.reference->propagator == 2e-4);
  fs::remove_all(d);
}

TEST_CASE("sweep orchestration: one record per eps, deterministic outputs") {
  const auto d1 = scratch_dir("sweep1"), d2 = scratch_dir("sweep2");
  const auto a = run_sweep(small_config(d1));
  const auto b = run_sweep(small_config(d2));
  REQUIRE(a.records.size() == 2);
  for (const auto& r : a.records) {
    CHECK(r.ok);
    CHECK(r.circle_roots == 1);
    CHECK(r.rect_roots == 0);
    CHECK(r.evans_slope > 1e-6);
    CHECK(fs::exists(fs::path(r.directory) / "profile.csv"));
    CHECK(fs::exists(fs::path(r.directory) / "evans.csv"));
  }
  const auto ra = report(a), rb = report(b);
  write_report(d1.string(), a, ra);
  write_report(d2.string(), b, rb);
  for (const char* f : {"sweep.csv", "criteria.csv", "eps_0.1/profile.csv", "eps_0.05/evans.csv"})
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  CHECK(ra.exit_code() == 0);
  CHECK(fs::exists(d1 / "config.json"));
  CHECK(load_config((d1 / "config.json").string()).eps == std::vector<double>{0.1, 0.05});
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("a failing eps is recorded while the sweep continues") {
  const auto d = scratch_dir("partial");
  auto c = small_config(d);
  c.eps = {0.1, 0.0125};
  c.decay.enabled = true;
  // The plateau of the smaller eps no longer fits in this domain.
  c.evolution.half_width = 100.0;
  const auto res = run_sweep(c);
  REQUIRE(res.records.size() == 2);
  CHECK(res.records[0].ok);
  CHECK(std::isfinite(res.records[0].norm_rate));
  CHECK_FALSE(res.records[1].ok);
  CHECK(res.records[1].failure.rfind("decay:", 0) == 0);
  CHECK(res.records[1].circle_roots == 1);
  CHECK(report(res).exit_code() == 2);
  fs::remove_all(d);
}
