// Exercises the shared library through its C header only.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "cqop.h"

namespace {

struct ChartHandle {
  cqop_chart* p = nullptr;
  ~ChartHandle() { cqop_chart_free(p); }
};
struct SurfaceHandle {
  cqop_surface* p = nullptr;
  ~SurfaceHandle() { cqop_surface_free(p); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  cqop_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("curvature constants") {
  ChartHandle c;
  REQUIRE(cqop_chart_builtin("sphere", 2.0, 1.0, 1.0, 1.0, &c.p) == CQOP_OK);
  double m = 0, k = 0, v = 0;
  REQUIRE(cqop_curvature_at(c.p, 1.0, 0.3, &m, &k, &v) == CQOP_OK);
  CHECK(m == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(k == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(v) <= 1e-15);
  int builtin = 0;
  CHECK(cqop_chart_is_builtin(c.p, &builtin) == CQOP_OK);
  CHECK(builtin == 1);
}

TEST_CASE("error codes and messages") {
  cqop_chart* c = nullptr;
  CHECK(cqop_chart_builtin("sphere", -1.0, 1.0, 1.0, 1.0, &c) == CQOP_ERR_INVALID_ARGUMENT);
  CHECK(c == nullptr);
  CHECK(std::strlen(cqop_last_error()) > 0);
  CHECK(cqop_chart_builtin("torus", 1.0, 1.0, 1.0, 1.0, &c) == CQOP_ERR_INVALID_ARGUMENT);
  CHECK(cqop_chart_from_json("{\"coords\": [", &c) == CQOP_ERR_PARSE);
  CHECK(std::string(cqop_last_error()).find("parse error") != std::string::npos);
  CHECK(cqop_chart_load("/nonexistent/chart.json", &c) == CQOP_ERR_IO);
  CHECK(cqop_chart_builtin(nullptr, 1.0, 1.0, 1.0, 1.0, &c) == CQOP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(cqop_status_name(CQOP_ERR_PARSE)) == "parse error");

  ChartHandle s;
  REQUIRE(cqop_chart_builtin("sphere", 1.0, 1.0, 1.0, 1.0, &s.p) == CQOP_OK);
  cqop_surface* surf = nullptr;
  CHECK(cqop_surface_new(s.p, 4, 4, &surf) == CQOP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(cqop_last_error()).find("below minimum") != std::string::npos);
  // A successful call clears the message.
  int builtin = 0;
  CHECK(cqop_chart_is_builtin(s.p, &builtin) == CQOP_OK);
  CHECK(std::string(cqop_last_error()).empty());
}

TEST_CASE("custom chart from JSON") {
  const char* torus = R"json({"coords": ["theta", "phi", "r"], "h": ["r", "2 + r*cos(theta)", "1"], "a": 0.5,
    "domains": [{"min": 0, "max": 6.283185307179586, "periodic": true},
                {"min": 0, "max": 6.283185307179586, "periodic": true}], "hbar": 1, "mass": 1})json";
  ChartHandle c;
  REQUIRE(cqop_chart_from_json(torus, &c.p) == CQOP_OK);
  int builtin = 1;
  CHECK(cqop_chart_is_builtin(c.p, &builtin) == CQOP_OK);
  CHECK(builtin == 0);
  char* js = nullptr;
  REQUIRE(cqop_curvature_json(c.p, 4, &js) == CQOP_OK);
  const std::string text = take(js);
  CHECK(text.find("\"table\"") != std::string::npos);
  char* back = nullptr;
  REQUIRE(cqop_chart_to_json(c.p, &back) == CQOP_OK);
  ChartHandle again;
  CHECK(cqop_chart_from_json(back, &again.p) == CQOP_OK);
  cqop_string_free(back);
  cqop_surface* s = nullptr;
  CHECK(cqop_surface_new(c.p, 16, 16, &s) == CQOP_ERR_UNSUPPORTED);
}

TEST_CASE("ring surface: verify, spectrum, evolve, dump") {
  ChartHandle c;
  REQUIRE(cqop_chart_builtin("ring", 1.0, 1.0, 1.0, 1.0, &c.p) == CQOP_OK);
  SurfaceHandle s;
  REQUIRE(cqop_surface_new(c.p, 32, 1, &s.p) == CQOP_OK);
  int nodes = 0;
  CHECK(cqop_surface_nodes(s.p, &nodes) == CQOP_OK);
  CHECK(nodes == 32);

  char* js = nullptr;
  char* text = nullptr;
  int failed = -1;
  REQUIRE(cqop_verify(s.p, 7, nullptr, &js, &text, &failed) == CQOP_OK);
  CHECK(failed == 0);
  CHECK(take(js).find("\"summary\"") != std::string::npos);
  CHECK(take(text).find("torque.net") != std::string::npos);
  CHECK(cqop_verify(s.p, 7, "{\"bogus\": 1}", nullptr, nullptr, &failed) == CQOP_ERR_INVALID_ARGUMENT);
  CHECK(cqop_verify(s.p, 7, "{\"hermiticity.H\": 1e-30}", nullptr, nullptr, &failed) == CQOP_OK);
  CHECK(failed == 1);

  double values[3], exact[3];
  REQUIRE(cqop_spectrum(s.p, 3, values, exact) == CQOP_OK);
  CHECK(values[0] == doctest::Approx(-0.125).epsilon(1e-12));
  CHECK(values[1] == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(values[2] == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(exact[1] == 0.375);
  CHECK(cqop_spectrum(s.p, 0, values, nullptr) == CQOP_ERR_INVALID_ARGUMENT);

  char* csv = nullptr;
  char* summary = nullptr;
  REQUIRE(cqop_evolve(s.p, "{\"kind\":\"packet\",\"sigma\":0.3}", 0.01, 50, &csv, &summary) == CQOP_OK);
  CHECK(take(csv).rfind("t,norm,E,Lz,Fx,Fy,Fz,x,y,z\n", 0) == 0);
  CHECK(take(summary).find("direction_cosine") != std::string::npos);
  CHECK(cqop_evolve(s.p, "{\"kind\":\"packet\"}", 0.01, 5, nullptr, nullptr) == CQOP_ERR_INVALID_ARGUMENT);
  CHECK(cqop_evolve(s.p, "{\"kind\":\"modes\",\"modes\":[[1,0],[2,0]]}", 0.01, 5, nullptr, nullptr) == CQOP_OK);
  CHECK(cqop_evolve(s.p, "not json", 0.01, 5, nullptr, nullptr) == CQOP_ERR_PARSE);

  const auto path = (std::filesystem::temp_directory_path() / "cqop_capi_h.bin").string();
  CHECK(cqop_dump_operator(s.p, "H", path.c_str()) == CQOP_OK);
  CHECK(std::filesystem::file_size(path) == 16 + 16 * 32 * 32);
  std::filesystem::remove(path);
  CHECK(cqop_dump_operator(s.p, "Q", path.c_str()) == CQOP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("convergence through the C interface") {
  ChartHandle c;
  REQUIRE(cqop_chart_builtin("ring", 1.0, 1.0, 1.0, 1.0, &c.p) == CQOP_OK);
  const int res[] = {16, 1, 32, 1};
  char* js = nullptr;
  REQUIRE(cqop_convergence(c.p, res, 2, 7, "force.equivalence,torque.net", &js) == CQOP_OK);
  CHECK(take(js).find("\"rows\"") != std::string::npos);
  CHECK(cqop_convergence(c.p, res, 1, 7, "torque.net", &js) == CQOP_ERR_INVALID_ARGUMENT);
}
