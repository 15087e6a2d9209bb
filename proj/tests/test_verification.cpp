#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "cqop/error.hpp"
#include "cqop/verification.hpp"

using namespace cqop;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::numeric;
}

}  // namespace

TEST_CASE("ring suite passes and checks torque along z only") {
  const Chart c = builtin_chart(SurfaceKind::ring, 1.0);
  const Report r = run_suite(c, build_grid(c, 64, 1));
  CHECK(r.failed() == 0);
  CHECK(r.all_pass());
  REQUIRE(r.find("torque.net") != nullptr);
  CHECK(r.find("torque.net")->residual <= 1e-10);
  CHECK(r.find("conservation.L") == nullptr);
  const CheckResult* bare = r.find("counterexample.bare_gradient");
  REQUIRE(bare != nullptr);
  CHECK(bare->mode == CheckMode::floor);
  CHECK(bare->tolerance == doctest::Approx(0.5));
  CHECK(bare->residual == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("registry order") {
  const auto ids = registered_checks(SurfaceKind::sphere);
  REQUIRE(ids.size() > 10);
  CHECK(ids.front() == "quadrature.area");
  CHECK(ids.back() == "counterexample.bare_gradient");
  auto pos = [&](const std::string& id) { return std::find(ids.begin(), ids.end(), id) - ids.begin(); };
  CHECK(pos("hermiticity.H") < pos("spectrum.analytic"));
  CHECK(pos("spectrum.analytic") < pos("identity.H_v2"));
  CHECK(pos("identity.velocity") < pos("conservation.Lz"));
  CHECK(pos("conservation.Lz") < pos("force.equivalence"));
  CHECK(pos("force.equivalence") < pos("torque.net"));
  CHECK(pos("torque.net") < pos("radial.dr"));
  const auto ring = registered_checks(SurfaceKind::ring);
  CHECK(std::find(ring.begin(), ring.end(), "radial.f1_form") == ring.end());
}

TEST_CASE("same seed, same residuals") {
  const Chart c = builtin_chart(SurfaceKind::sphere, 1.0);
  const GridPtr g = build_grid(c, 10, 20);
  SuiteConfig cfg;
  cfg.only = {"hermiticity.H", "force.equivalence", "torque.net", "identity.H_L2"};
  const Report a = run_suite(c, g, cfg);
  const Report b = run_suite(c, g, cfg);
  REQUIRE(a.checks.size() == 4);
  for (std::size_t k = 0; k < a.checks.size(); ++k) {
    CHECK(a.checks[k].id == b.checks[k].id);
    CHECK(a.checks[k].residual == b.checks[k].residual);
  }
  cfg.seed = 8;
  const Report c8 = run_suite(c, g, cfg);
  CHECK(c8.checks[1].residual != a.checks[1].residual);
}

TEST_CASE("tolerance overrides") {
  const Chart c = builtin_chart(SurfaceKind::ring, 1.0);
  const GridPtr g = build_grid(c, 32, 1);
  SuiteConfig cfg;
  cfg.only = {"hermiticity.H"};
  cfg.tolerances["hermiticity.H"] = 1e-30;
  const Report r = run_suite(c, g, cfg);
  CHECK(r.failed() == 1);
  CHECK(r.checks[0].tolerance == 1e-30);

  cfg.tolerances = {{"no.such.check", 1.0}};
  CHECK(code_of([&] { (void)run_suite(c, g, cfg); }) == ErrorCode::invalid_argument);
  cfg.tolerances = {{"hermiticity.H", -1.0}};
  CHECK(code_of([&] { (void)run_suite(c, g, cfg); }) == ErrorCode::invalid_argument);
  cfg.tolerances.clear();
  cfg.only = {"bogus"};
  CHECK(code_of([&] { (void)run_suite(c, g, cfg); }) == ErrorCode::invalid_argument);
}

TEST_CASE("custom charts are rejected") {
  Chart c = builtin_chart(SurfaceKind::ring, 1.0);
  const GridPtr g = build_grid(c, 16, 1);
  c.kind = SurfaceKind::custom;
  CHECK(code_of([&] { (void)run_suite(c, g); }) == ErrorCode::unsupported);
}

TEST_CASE("report serialization") {
  const Chart c = builtin_chart(SurfaceKind::ring, 1.0);
  SuiteConfig cfg;
  cfg.only = {"quadrature.area", "torque.net"};
  const Report r = run_suite(c, build_grid(c, 16, 1), cfg);
  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j.at("chart").at("kind") == "ring");
  REQUIRE(j.at("checks").size() == 2);
  for (const char* key : {"id", "description", "residual", "tolerance", "pass", "wall_ms"})
    CHECK(j.at("checks")[0].contains(key));
  CHECK(j.at("summary").at("pass") == 2);
  CHECK(j.at("summary").at("fail") == 0);
  CHECK(j.contains("notes"));
  const std::string text = report_to_text(r);
  CHECK(text.find("quadrature.area") != std::string::npos);
  CHECK(text.find("PASS") != std::string::npos);
}

TEST_CASE("cylinder ground energy") {
  const Chart c = builtin_chart(SurfaceKind::cylinder, 1.0, 10.0);
  SuiteConfig cfg;
  cfg.only = {"spectrum.ground"};
  const Report r = run_suite(c, build_grid(c, 32, 32), cfg);
  CHECK(r.checks.at(0).residual <= 1e-12);
}

TEST_CASE("convergence study") {
  const Chart c = builtin_chart(SurfaceKind::cylinder, 1.0, 10.0);
  CHECK(code_of([&] { (void)convergence_study(c, {{16, 16}}, 7, {"quadrature.area"}); }) ==
        ErrorCode::invalid_argument);
  CHECK(code_of([&] { (void)convergence_study(c, {{16, 16}, {8, 8}}, 7, {"quadrature.area"}); }) ==
        ErrorCode::invalid_argument);
  const ConvergenceTable t = convergence_study(c, {{8, 8}, {16, 16}}, 7, {"quadrature.area", "force.equivalence"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].residuals[0] <= 1e-12);
  CHECK(t.rows[1].residuals[0] <= 1e-12);
  CHECK(t.spectral[0]);
  const auto j = nlohmann::json::parse(convergence_to_json(t));
  CHECK(j.at("rows").size() == 2);
}
