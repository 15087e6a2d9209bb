#pragma once

// Dense operators on surface wavefunctions sampled at grid nodes. Adjoints and
// norms are always taken with respect to the quadrature inner product
// <a, b> = sum_i w_i conj(a_i) b_i.

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace cqop {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;

struct Grid;
using GridPtr = std::shared_ptr<const Grid>;

struct ScalarOp {
  cmat matrix;
  GridPtr grid;
  std::string label;

  [[nodiscard]] cvec operator()(const cvec& v) const { return matrix * v; }
};

/// Cartesian (x, y, z) components of a vector operator.
struct VectorOp {
  std::array<ScalarOp, 3> c;
  std::string label;

  [[nodiscard]] const ScalarOp& operator[](int k) const { return c[static_cast<std::size_t>(k)]; }
  [[nodiscard]] ScalarOp& operator[](int k) { return c[static_cast<std::size_t>(k)]; }
};

/// Throws Error(grid_mismatch) unless both operands live on the same grid.
void require_same_grid(const GridPtr& a, const GridPtr& b);

[[nodiscard]] ScalarOp operator+(const ScalarOp& a, const ScalarOp& b);
[[nodiscard]] ScalarOp operator-(const ScalarOp& a, const ScalarOp& b);
[[nodiscard]] ScalarOp operator*(cplx s, const ScalarOp& a);
/// Matrix product: (a * b) v = a (b v).
[[nodiscard]] ScalarOp operator*(const ScalarOp& a, const ScalarOp& b);
[[nodiscard]] ScalarOp commutator(const ScalarOp& a, const ScalarOp& b);
[[nodiscard]] ScalarOp identity_op(const GridPtr& grid);
/// Multiplies by a real diagonal on the left (diag(d) * a) or on the right (a * diag(d)).
[[nodiscard]] ScalarOp scale_rows(const rvec& d, const ScalarOp& a);
[[nodiscard]] ScalarOp scale_cols(const ScalarOp& a, const rvec& d);

[[nodiscard]] VectorOp operator+(const VectorOp& a, const VectorOp& b);
[[nodiscard]] VectorOp operator*(cplx s, const VectorOp& a);
/// sum_c a_c b_c
[[nodiscard]] ScalarOp dot(const VectorOp& a, const VectorOp& b);
/// (a ^ b)_i = a_j b_k - a_k b_j with operator products in that order.
[[nodiscard]] VectorOp cross(const VectorOp& a, const VectorOp& b);
/// 1/2 (a ^ b - b ^ a)
[[nodiscard]] VectorOp cross_symmetrized(const VectorOp& a, const VectorOp& b);

/// A^dagger v = W^{-1} A^H W v.
[[nodiscard]] cvec adjoint_apply(const ScalarOp& a, const cvec& v);
/// max over states of ||(A - A^dagger) psi|| / ||psi|| in the weighted norm.
[[nodiscard]] double hermiticity_residual(const ScalarOp& a, std::span<const cvec> states);
/// Component-wise maximum of hermiticity_residual.
[[nodiscard]] double hermiticity_residual(const VectorOp& a, std::span<const cvec> states);

}  // namespace cqop
