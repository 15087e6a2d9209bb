#include "cqop/geometry.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

namespace cqop {

namespace {

constexpr int kValidationSamples = 7;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

Expr h1h2(const Chart& c) { return c.h[0] * c.h[1]; }

// Unit-length placeholder range for the ring's absent axial coordinate.
constexpr Domain kPlaceholderDomain{0.0, 1.0, true};

}  // namespace

std::string_view to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::sphere: return "sphere";
    case SurfaceKind::cylinder: return "cylinder";
    case SurfaceKind::ring: return "ring";
    case SurfaceKind::custom: return "custom";
  }
  return "custom";
}

SurfaceKind surface_kind_from_string(std::string_view name) {
  if (name == "sphere") return SurfaceKind::sphere;
  if (name == "cylinder") return SurfaceKind::cylinder;
  if (name == "ring") return SurfaceKind::ring;
  invalid("unknown chart '" + std::string(name) + "' (expected sphere, cylinder or ring)");
}

Bindings Chart::surface_point(double q1, double q2) const {
  return Bindings{{coords[0], q1}, {coords[1], q2}, {coords[2], a}};
}

void validate(const Chart& c) {
  std::set<std::string> names;
  for (const auto& n : c.coords) {
    if (!is_identifier(n)) invalid("invalid coordinate name '" + n + "'");
    names.insert(n);
  }
  if (names.size() != 3) invalid("coordinate names must be distinct");
  if (!std::isfinite(c.a)) invalid("surface value a must be finite");
  if (!(c.params.hbar > 0.0) || !std::isfinite(c.params.hbar)) invalid("hbar must be positive");
  if (!(c.params.mass > 0.0) || !std::isfinite(c.params.mass)) invalid("mass must be positive");
  for (int d = 0; d < 2; ++d) {
    const Domain& dom = c.domains[d];
    if (!std::isfinite(dom.min) || !std::isfinite(dom.max) || !(dom.max > dom.min))
      invalid("domain " + std::to_string(d + 1) + " must satisfy min < max");
  }
  for (int k = 0; k < 3; ++k) {
    for (const auto& v : free_variables(c.h[k])) {
      if (!names.count(v)) invalid("scale factor h" + std::to_string(k + 1) + " uses unknown variable '" + v + "'");
    }
  }
  for (int i = 0; i < kValidationSamples; ++i) {
    for (int j = 0; j < kValidationSamples; ++j) {
      const double q1 = c.domains[0].min + (i + 0.5) / kValidationSamples * c.domains[0].length();
      const double q2 = c.domains[1].min + (j + 0.5) / kValidationSamples * c.domains[1].length();
      const Bindings b = c.surface_point(q1, q2);
      if (std::abs(evaluate(c.h[2], b) - 1.0) > 1e-12) invalid("h3 must equal 1 on the surface");
      if (!(evaluate(c.h[0], b) > 0.0)) invalid("h1 must be positive on the surface");
      if (!(evaluate(c.h[1], b) > 0.0)) invalid("h2 must be positive on the surface");
    }
  }
}

Chart builtin_chart(SurfaceKind kind, double radius, double axial_period, PhysParams params) {
  if (!(radius > 0.0) || !std::isfinite(radius)) invalid("radius must be positive");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Chart c;
  c.kind = kind;
  c.a = radius;
  c.params = params;
  switch (kind) {
    case SurfaceKind::sphere:
      c.coords = {"theta", "phi", "r"};
      c.h = {parse("r"), parse("r*sin(theta)"), parse("1")};
      c.domains = {Domain{0.0, std::numbers::pi, false}, Domain{0.0, two_pi, true}};
      break;
    case SurfaceKind::cylinder:
      if (!(axial_period > 0.0) || !std::isfinite(axial_period)) invalid("axial period Lz must be positive");
      c.coords = {"theta", "z", "r"};
      c.h = {parse("r"), parse("1"), parse("1")};
      c.domains = {Domain{0.0, two_pi, true}, Domain{0.0, axial_period, true}};
      break;
    case SurfaceKind::ring:
      c.coords = {"theta", "z", "r"};
      c.h = {parse("r"), parse("1"), parse("1")};
      c.domains = {Domain{0.0, two_pi, true}, kPlaceholderDomain};
      break;
    case SurfaceKind::custom: invalid("custom charts are loaded from JSON");
  }
  validate(c);
  return c;
}

Chart chart_from_json(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("chart JSON: ") + e.what());
  }
  auto need = [&](const char* key) -> const json& {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::parse, std::string("chart JSON: missing key '") + key + "'");
    return j.at(key);
  };
  Chart c;
  c.kind = SurfaceKind::custom;
  try {
    const json& coords = need("coords");
    const json& h = need("h");
    const json& domains = need("domains");
    if (!coords.is_array() || coords.size() != 3) throw Error(ErrorCode::parse, "chart JSON: 'coords' must hold 3 names");
    if (!h.is_array() || h.size() != 3) throw Error(ErrorCode::parse, "chart JSON: 'h' must hold 3 expressions");
    if (!domains.is_array() || domains.size() != 2) throw Error(ErrorCode::parse, "chart JSON: 'domains' must hold 2 entries");
    for (int k = 0; k < 3; ++k) {
      c.coords[k] = coords[k].get<std::string>();
      const auto text_k = h[k].get<std::string>();
      try {
        c.h[k] = parse(text_k);
      } catch (const ExprError& e) {
        throw Error(ErrorCode::parse, "chart JSON: h[" + std::to_string(k) + "]: " + e.what());
      }
    }
    c.a = need("a").get<double>();
    for (int d = 0; d < 2; ++d) {
      const json& dom = domains[d];
      c.domains[d] = Domain{dom.at("min").get<double>(), dom.at("max").get<double>(), dom.at("periodic").get<bool>()};
    }
    c.params.hbar = j.value("hbar", 1.0);
    c.params.mass = j.value("mass", 1.0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("chart JSON: ") + e.what());
  }
  try {
    validate(c);
  } catch (const ExprError& e) {
    throw Error(ErrorCode::invalid_argument, std::string("chart JSON: ") + e.what());
  }
  return c;
}

std::string chart_to_json(const Chart& c) {
  using nlohmann::json;
  json j;
  j["coords"] = {c.coords[0], c.coords[1], c.coords[2]};
  j["h"] = {to_string(c.h[0]), to_string(c.h[1]), to_string(c.h[2])};
  j["a"] = c.a;
  j["domains"] = json::array();
  for (const auto& d : c.domains) j["domains"].push_back({{"min", d.min}, {"max", d.max}, {"periodic", d.periodic}});
  j["hbar"] = c.params.hbar;
  j["mass"] = c.params.mass;
  return j.dump();
}

Expr mean_curvature(const Chart& c) {
  const Expr area = h1h2(c);
  const Expr m = -(differentiate(area, c.coords[2]) / (Expr::number(2.0) * area));
  return substitute(m, c.coords[2], c.a);
}

namespace {

Expr bracket(const Chart& c) {
  const Expr area = h1h2(c);
  const Expr d1 = differentiate(area, c.coords[2]);
  const Expr d2 = differentiate(d1, c.coords[2]);
  const Expr twice = Expr::number(2.0) * area;
  return substitute(d2 / twice - pow(d1, 2) / pow(twice, 2), c.coords[2], c.a);
}

}  // namespace

Expr gaussian_curvature(const Chart& c) { return pow(mean_curvature(c), 2) + bracket(c); }

Expr geometric_potential(const Chart& c) {
  const double scale = c.params.hbar * c.params.hbar / (2.0 * c.params.mass);
  return -(Expr::number(scale) * (pow(mean_curvature(c), 2) - gaussian_curvature(c)));
}

CurvatureData curvature(const Chart& c) {
  CurvatureData out;
  out.mean = mean_curvature(c);
  out.bracket = bracket(c);
  out.gaussian = pow(out.mean, 2) + out.bracket;
  const double scale = c.params.hbar * c.params.hbar / (2.0 * c.params.mass);
  out.potential = -(Expr::number(scale) * (pow(out.mean, 2) - out.gaussian));
  return out;
}

}  // namespace cqop
