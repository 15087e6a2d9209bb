#pragma once

// Spectral discretization of the built-in surfaces.
//
// Sphere: Gauss-Legendre nodes in cos(theta) (no node at a pole) times uniform
// periodic phi. Both derivative matrices go through the per-azimuthal-mode
// associated Legendre transform, so they are exact on spherical harmonics with
// l <= N1 - 1 and annihilate everything outside that band.
// Cylinder and ring: uniform periodic nodes with Fourier differentiation.
//
// Nodes are stored row-major: node = i * N2 + j with i indexing q1.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "cqop/geometry.hpp"
#include "cqop/scalar_op.hpp"

namespace cqop {

inline constexpr int kMinResolution = 8;
inline constexpr int kMaxNodes = 4096;

/// Spherical harmonic (l, m) on the sphere; Fourier pair (n, k) on the cylinder
/// with k = 0 on the ring.
struct SpectralMode {
  int first = 0;
  int second = 0;

  friend bool operator==(const SpectralMode&, const SpectralMode&) = default;
};

struct Grid {
  SurfaceKind kind = SurfaceKind::custom;
  int n1 = 0;
  int n2 = 0;
  double radius = 1.0;
  double axial_period = 1.0;
  std::array<std::string, 3> coords;
  double a = 1.0;

  std::vector<double> q1;  // per node
  std::vector<double> q2;  // per node
  rvec weights;            // quadrature weights including h1*h2
  cmat d1;                 // derivative along q1
  cmat d2;                 // derivative along q2

  std::vector<double> legendre_x;        // sphere: Gauss-Legendre nodes in cos(theta)
  std::vector<double> legendre_weights;  // sphere: matching weights on [-1, 1]

  /// Resolved modes: the subspace on which H maps into itself exactly.
  std::vector<SpectralMode> band;
  /// Columns are the band modes sampled at the nodes, orthonormal under weights.
  cmat band_basis;

  [[nodiscard]] int size() const { return n1 * n2; }
  [[nodiscard]] double area() const;
  /// Normalized samples of a single spectral mode.
  [[nodiscard]] cvec sample_mode(SpectralMode mode) const;
  /// Samples f(q1, q2) at every node.
  [[nodiscard]] rvec sample(const std::function<double(double, double)>& f) const;
  /// Samples an expression over (q1, q2) with q3 = a.
  [[nodiscard]] rvec sample(const Expr& f) const;
  /// True when `mode` lies in the band used for test states (l <= N1/2 on the
  /// sphere, |n| <= N1/4 and |k| <= N2/4 on the cylinder and ring).
  [[nodiscard]] bool in_test_band(SpectralMode mode) const;
};

/// Throws Error(invalid_argument) for resolutions below the minimum, odd
/// Fourier sizes or more than kMaxNodes nodes; Error(unsupported) for custom charts.
[[nodiscard]] GridPtr build_grid(const Chart& chart, int n1, int n2);

struct SurfaceState {
  cvec values;
  GridPtr grid;
};

[[nodiscard]] cplx inner_product(const Grid& g, const cvec& a, const cvec& b);
[[nodiscard]] cplx inner_product(const SurfaceState& a, const SurfaceState& b);
[[nodiscard]] double norm(const Grid& g, const cvec& v);
[[nodiscard]] SurfaceState normalize(SurfaceState s);
/// Orthogonal projection (under the weights) onto the band.
[[nodiscard]] cvec project_to_band(const Grid& g, const cvec& v);

/// Real diagonal multiplication operator; throws Error(domain) on a non-finite node value.
[[nodiscard]] ScalarOp mult_op(const GridPtr& g, const std::function<double(double, double)>& f,
                               std::string label = "mult");
[[nodiscard]] ScalarOp mult_op(const GridPtr& g, const Expr& f);

enum class Coord { q1, q2 };
[[nodiscard]] ScalarOp deriv_op(const GridPtr& g, Coord coord);

/// Pseudo-random normalized states built from test-band modes with complex
/// Gaussian coefficients. Deterministic in `seed`.
[[nodiscard]] std::vector<cvec> test_states(const Grid& g, int count, std::uint64_t seed);
/// Same as above but restricted to modes with first index <= max_first (sphere l,
/// or |n|, |k| on Fourier grids); used to compare resolutions on one family.
[[nodiscard]] std::vector<cvec> test_states(const Grid& g, int count, std::uint64_t seed, int max_first,
                                            int max_second);

/// Normalized associated Legendre functions (no Condon-Shortley phase) for
/// l = m..lmax at x = cos(theta), s = sin(theta), with d/dtheta. Entry l - m.
void normalized_legendre(int lmax, int m, double x, double s, std::span<double> p, std::span<double> dp);

/// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace cqop
