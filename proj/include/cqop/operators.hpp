#pragma once

// Surface operators of thin-layer quantization assembled as dense matrices.
// Vector operators are expressed in the fixed Cartesian frame; curvilinear unit
// vectors enter as position-dependent diagonal multiplications.

#include <array>
#include <functional>
#include <optional>

#include "cqop/geometry.hpp"
#include "cqop/grid.hpp"
#include "cqop/scalar_op.hpp"

namespace cqop {

/// Cartesian components of a vector field sampled at the nodes.
using CartesianField = std::array<rvec, 3>;

/// Unit vectors q̂1, q̂2, q̂3 (surface normal) and the position vector per node.
struct Frame {
  CartesianField e1;
  CartesianField e2;
  CartesianField e3;
  CartesianField position;
};

/// Throws Error(unsupported) for custom charts: the Cartesian embedding of a
/// chart is only known for the built-in surfaces.
[[nodiscard]] Frame frame_fields(const Chart& chart, const Grid& grid);

/// alpha q̂1 + beta q̂2 in Cartesian components.
[[nodiscard]] CartesianField tangent_field(const Chart& chart, const Grid& grid,
                                           const std::function<double(double, double)>& alpha,
                                           const std::function<double(double, double)>& beta);

[[nodiscard]] VectorOp field_op(const GridPtr& grid, const CartesianField& field, const std::string& label);

/// ∇' = q̂1/h1 d1 + q̂2/h2 d2.
[[nodiscard]] VectorOp surface_gradient(const Chart& chart, const GridPtr& grid);
/// Only the q̂1/h1 d1 part of the surface gradient.
[[nodiscard]] VectorOp surface_gradient_q1(const Chart& chart, const GridPtr& grid);
/// p_s = -i hbar (∇' + q̂3 M); Hermitian under the weighted inner product.
[[nodiscard]] VectorOp surface_momentum(const Chart& chart, const GridPtr& grid);
/// -i hbar ∇' without the curvature term; not Hermitian.
[[nodiscard]] VectorOp bare_gradient_momentum(const Chart& chart, const GridPtr& grid);

/// Scale-factor form of the Laplacian, split by coordinate. Exact on band
/// states but not Hermitian on the sphere grid, where intermediates leave the
/// per-m Legendre band; kept as an independent cross-check.
struct LaplacianParts {
  ScalarOp q1;  // (1/h1h2) d1 (h2/h1) d1
  ScalarOp q2;  // (1/h2^2) d2 d2
};
[[nodiscard]] LaplacianParts laplacian_parts(const Chart& chart, const GridPtr& grid);
/// ∇'.∇' summed over Cartesian components of the gradient. Every intermediate
/// of a band state stays in the band, so this form is Hermitian.
[[nodiscard]] ScalarOp laplacian(const Chart& chart, const GridPtr& grid);

/// H_s = -(hbar^2/2m) ∇'^2 - (hbar^2/2m)(M^2 - K).
[[nodiscard]] ScalarOp hamiltonian(const Chart& chart, const GridPtr& grid);
/// v_s^2 = -(hbar^2/m^2) ∇'^2 + (hbar^2/m^2) M^2.
[[nodiscard]] ScalarOp velocity_squared(const Chart& chart, const GridPtr& grid);
/// L = R ^ p_s (sphere, cylinder, ring).
[[nodiscard]] VectorOp angular_momentum(const Chart& chart, const GridPtr& grid);
[[nodiscard]] VectorOp position_op(const Chart& chart, const GridPtr& grid);

struct ForceParts {
  VectorOp total;  // F1 + F2
  VectorOp f1;     // -(m/R) r̂ v^2, r̂ composed to the left of v^2
  VectorOp f2;     // (hbar^2/mR^2) ∇'
};

/// Closed-form centripetal force. On the cylinder the v^2 in F1 is the ring
/// velocity squared and F2 keeps only the θ̂ part of the gradient.
[[nodiscard]] ForceParts force_closed_form(const Chart& chart, const GridPtr& grid);
/// F = (m / i hbar)[v, H] = (1 / i hbar)[p, H], assembled by matrix products.
[[nodiscard]] VectorOp force_heisenberg(const VectorOp& momentum, const ScalarOp& hamiltonian, double hbar);
/// 1/2 (R ^ F - F ^ R).
[[nodiscard]] VectorOp torque(const VectorOp& position, const VectorOp& force);
/// 1/2 sum_c (t_c F_c + F_c t_c). Throws Error(invalid_argument) unless t is
/// tangential at every node.
[[nodiscard]] ScalarOp symmetrized_tangential_contraction(const Chart& chart, const Grid& grid,
                                                          const CartesianField& t, const VectorOp& force);

/// Everything the verification suite and the dynamics need for one grid,
/// assembled once.
struct OperatorSet {
  Chart chart;
  GridPtr grid;
  CurvatureData curvature;
  rvec mean_curvature;  // M at the nodes
  rvec gaussian_curvature;
  Frame frame;

  VectorOp gradient;
  VectorOp gradient_q1;
  VectorOp momentum;
  VectorOp position;
  VectorOp angular;
  ScalarOp laplacian;
  ScalarOp hamiltonian;
  ScalarOp v2;
  ScalarOp v2_force;  // v^2 entering F1
  ForceParts force;

  [[nodiscard]] double hbar() const { return chart.params.hbar; }
  [[nodiscard]] double mass() const { return chart.params.mass; }
  [[nodiscard]] double radius() const { return chart.a; }
};

[[nodiscard]] OperatorSet build_operators(const Chart& chart, const GridPtr& grid);

/// Spectral-band compression of H: returns (eigenvalues ascending, eigenvectors
/// sampled at the nodes, orthonormal under the weights).
struct BandEigensystem {
  rvec values;
  cmat vectors;
};
[[nodiscard]] BandEigensystem band_eigensystem(const ScalarOp& h);

/// Binary container: "CQOP", u32 N, two u32 reserved (16-byte header), then N*N row-major complex128,
/// little-endian.
void write_operator(const ScalarOp& op, const std::string& path);
[[nodiscard]] cmat read_operator(const std::string& path);

}  // namespace cqop
