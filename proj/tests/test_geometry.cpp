#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cqop/error.hpp"
#include "cqop/geometry.hpp"

using namespace cqop;

namespace {

constexpr double kPi = std::numbers::pi;

const char* kTorus = R"json({
  "coords": ["theta", "phi", "r"],
  "h": ["r", "2 + r*cos(theta)", "1"],
  "a": 0.5,
  "domains": [{"min": 0, "max": 6.283185307179586, "periodic": true},
              {"min": 0, "max": 6.283185307179586, "periodic": true}],
  "hbar": 1, "mass": 1
})json";

const char* kFlat = R"json({
  "coords": ["x", "y", "z"],
  "h": ["1", "1", "1"],
  "a": 0,
  "domains": [{"min": 0, "max": 1, "periodic": false}, {"min": 0, "max": 1, "periodic": false}],
  "hbar": 1, "mass": 1
})json";

double at(const Expr& e, const Chart& c, double q1, double q2) { return evaluate(e, c.surface_point(q1, q2)); }

}  // namespace

TEST_CASE("built-in charts") {
  const Chart s = builtin_chart(SurfaceKind::sphere, 1.0);
  CHECK(to_string(s.h[1]) == to_string(parse("r*sin(theta)")));
  const Chart c = builtin_chart(SurfaceKind::cylinder, 2.0, 10.0);
  CHECK(to_string(c.h[0]) == "r");
  CHECK(c.a == 2.0);
  CHECK_THROWS_AS((void)builtin_chart(SurfaceKind::sphere, -1.0), Error);
  CHECK_THROWS_AS((void)builtin_chart(SurfaceKind::cylinder, 1.0, 0.0), Error);
}

TEST_CASE("mean curvature") {
  CHECK(at(mean_curvature(builtin_chart(SurfaceKind::sphere, 1.0)), builtin_chart(SurfaceKind::sphere, 1.0), 1.0,
           2.0) == doctest::Approx(-1.0).epsilon(1e-14));
  const Chart c = builtin_chart(SurfaceKind::cylinder, 2.0, 10.0);
  CHECK(at(mean_curvature(c), c, 0.3, 4.0) == doctest::Approx(-0.25).epsilon(1e-14));
  const Chart flat = chart_from_json(kFlat);
  CHECK(at(mean_curvature(flat), flat, 0.2, 0.7) == 0.0);
}

TEST_CASE("Gaussian curvature and the geometric potential") {
  const Chart c = builtin_chart(SurfaceKind::cylinder, 1.0, 10.0);
  CHECK(std::abs(at(gaussian_curvature(c), c, 0.3, 4.0)) <= 1e-15);
  CHECK(at(geometric_potential(c), c, 0.3, 4.0) == doctest::Approx(-0.125).epsilon(1e-14));

  // K = M^2 = 1/R^2 on the sphere, so the potential vanishes.
  const Chart s = builtin_chart(SurfaceKind::sphere, 1.0);
  CHECK(at(gaussian_curvature(s), s, 1.1, 0.2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(at(geometric_potential(s), s, 1.1, 0.2)) <= 1e-14);

  const Chart flat = chart_from_json(kFlat);
  CHECK(at(gaussian_curvature(flat), flat, 0.2, 0.7) == 0.0);
  CHECK(at(geometric_potential(flat), flat, 0.2, 0.7) == 0.0);
}

TEST_CASE("sphere bracket vanishes at random surface points") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> theta(0.05, kPi - 0.05), phi(0.0, 2 * kPi);
  for (double r : {0.5, 1.0, 3.0}) {
    const Chart s = builtin_chart(SurfaceKind::sphere, r);
    const CurvatureData d = curvature(s);
    for (int k = 0; k < 50; ++k) CHECK(std::abs(at(d.bracket, s, theta(rng), phi(rng))) <= 1e-12);
  }
}

TEST_CASE("potential matches -(hbar^2/2m)(M^2 - K) at random points") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  Chart torus = chart_from_json(kTorus);
  torus.params = {0.7, 1.9};
  const Chart charts[] = {builtin_chart(SurfaceKind::sphere, 1.3, 1.0, {2.0, 0.5}),
                          builtin_chart(SurfaceKind::cylinder, 0.8, 5.0, {1.0, 3.0}), torus};
  for (const Chart& c : charts) {
    const CurvatureData d = curvature(c);
    const double scale = c.params.hbar * c.params.hbar / (2 * c.params.mass);
    for (int k = 0; k < 50; ++k) {
      const double q1 = u(rng), q2 = u(rng);
      const double m = at(d.mean, c, q1, q2), kk = at(d.gaussian, c, q1, q2);
      CHECK(at(d.potential, c, q1, q2) == doctest::Approx(-scale * (m * m - kk)).epsilon(1e-12));
    }
  }
}

TEST_CASE("torus curvatures match the textbook formulas") {
  const Chart torus = chart_from_json(kTorus);
  const CurvatureData d = curvature(torus);
  const double r = 0.5, big = 2.0;
  for (double theta : {0.0, 0.7, 2.0, 3.1, 4.5}) {
    const double ring = big + r * std::cos(theta);
    const double m = -0.5 * (1.0 / r + std::cos(theta) / ring);
    const double k = std::cos(theta) / (r * ring);
    CHECK(at(d.mean, torus, theta, 1.0) == doctest::Approx(m).epsilon(1e-13));
    CHECK(at(d.gaussian, torus, theta, 1.0) == doctest::Approx(k).epsilon(1e-13));
  }
}

TEST_CASE("scaling the sphere radius") {
  const Chart a = builtin_chart(SurfaceKind::sphere, 1.0);
  const Chart b = builtin_chart(SurfaceKind::sphere, 2.0);
  for (double theta : {0.3, 1.2, 2.8}) {
    CHECK(at(mean_curvature(b), b, theta, 0.4) == doctest::Approx(at(mean_curvature(a), a, theta, 0.4) / 2));
    CHECK(at(gaussian_curvature(b), b, theta, 0.4) == doctest::Approx(at(gaussian_curvature(a), a, theta, 0.4) / 4));
  }
}

TEST_CASE("chart JSON round trip and errors") {
  const Chart torus = chart_from_json(kTorus);
  CHECK(torus.kind == SurfaceKind::custom);
  const Chart again = chart_from_json(chart_to_json(torus));
  CHECK(chart_to_json(again) == chart_to_json(torus));
  CHECK(again.coords == torus.coords);
  CHECK(again.a == 0.5);

  auto code = [](const std::string& text) {
    try {
      (void)chart_from_json(text);
    } catch (const Error& e) {
      return e.code();
    } catch (const ExprError&) {
      return ErrorCode::parse;
    }
    return ErrorCode::numeric;  // no error: flagged by the caller
  };
  CHECK(code(R"json({"coords": [)json") == ErrorCode::parse);
  CHECK(code(R"json({"coords": ["a","b","c"]})json") == ErrorCode::parse);
  std::string bad_h3 = kTorus;
  bad_h3.replace(bad_h3.find("\"1\"]"), 3, "\"r\"");
  CHECK(code(bad_h3) == ErrorCode::invalid_argument);
  std::string bad_expr = kTorus;
  bad_expr.replace(bad_expr.find("2 + r"), 5, "2 + *");
  CHECK(code(bad_expr) == ErrorCode::parse);
}
