#pragma once

// Surface charts in orthogonal curvilinear coordinates (q1, q2, q3) with the
// surface at q3 = a, and the curvature fields derived from their scale factors.

#include <array>
#include <string>
#include <string_view>

#include "cqop/error.hpp"
#include "cqop/expr.hpp"

namespace cqop {

enum class SurfaceKind { sphere, cylinder, ring, custom };

[[nodiscard]] std::string_view to_string(SurfaceKind kind);
/// Parses "sphere", "cylinder" or "ring".
[[nodiscard]] SurfaceKind surface_kind_from_string(std::string_view name);

struct PhysParams {
  double hbar = 1.0;
  double mass = 1.0;
};

struct Domain {
  double min = 0.0;
  double max = 1.0;
  bool periodic = false;

  [[nodiscard]] double length() const { return max - min; }
};

struct Chart {
  SurfaceKind kind = SurfaceKind::custom;
  std::array<std::string, 3> coords;
  std::array<Expr, 3> h;
  double a = 1.0;  // value of q3 on the surface
  std::array<Domain, 2> domains;
  PhysParams params;

  /// Binds (q1, q2) and q3 = a.
  [[nodiscard]] Bindings surface_point(double q1, double q2) const;
};

/// Checks coordinate names, parameters, h3 == 1 and h1, h2 > 0 on interior
/// sample points. Throws Error(invalid_argument) on violation.
void validate(const Chart& chart);

/// Built-in charts. `axial_period` is used by the cylinder only. The ring is
/// the cylinder chart with a unit-length placeholder axial coordinate whose
/// derivative is never taken.
[[nodiscard]] Chart builtin_chart(SurfaceKind kind, double radius, double axial_period = 1.0,
                                  PhysParams params = {});

/// Chart JSON: {"coords":[q1,q2,q3], "h":[e1,e2,e3], "a":real,
/// "domains":[{"min","max","periodic"}, {...}], "hbar":real, "mass":real}.
/// Loaded charts are always SurfaceKind::custom.
[[nodiscard]] Chart chart_from_json(std::string_view text);
[[nodiscard]] std::string chart_to_json(const Chart& chart);

struct CurvatureData {
  Expr mean;       // M
  Expr gaussian;   // K
  Expr potential;  // -(hbar^2/2m)(M^2 - K)
  Expr bracket;    // W = d3^2(h1h2)/(2h1h2) - (d3(h1h2))^2/(2h1h2)^2, equal to K - M^2
};

[[nodiscard]] Expr mean_curvature(const Chart& chart);
[[nodiscard]] Expr gaussian_curvature(const Chart& chart);
[[nodiscard]] Expr geometric_potential(const Chart& chart);
[[nodiscard]] CurvatureData curvature(const Chart& chart);

}  // namespace cqop
