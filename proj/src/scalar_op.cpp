#include "cqop/scalar_op.hpp"

#include <algorithm>
#include <cmath>

#include "cqop/error.hpp"
#include "cqop/grid.hpp"

namespace cqop {

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b || a.get() != b.get()) throw Error(ErrorCode::grid_mismatch, "operands live on different grids");
}

ScalarOp operator+(const ScalarOp& a, const ScalarOp& b) {
  require_same_grid(a.grid, b.grid);
  return {a.matrix + b.matrix, a.grid, "(" + a.label + " + " + b.label + ")"};
}

ScalarOp operator-(const ScalarOp& a, const ScalarOp& b) {
  require_same_grid(a.grid, b.grid);
  return {a.matrix - b.matrix, a.grid, "(" + a.label + " - " + b.label + ")"};
}

ScalarOp operator*(cplx s, const ScalarOp& a) { return {s * a.matrix, a.grid, a.label}; }

ScalarOp operator*(const ScalarOp& a, const ScalarOp& b) {
  require_same_grid(a.grid, b.grid);
  cmat product(a.matrix.rows(), b.matrix.cols());
  product.noalias() = a.matrix * b.matrix;
  return {std::move(product), a.grid, a.label + " " + b.label};
}

ScalarOp commutator(const ScalarOp& a, const ScalarOp& b) {
  require_same_grid(a.grid, b.grid);
  cmat out(a.matrix.rows(), a.matrix.cols());
  out.noalias() = a.matrix * b.matrix;
  out.noalias() -= b.matrix * a.matrix;
  return {std::move(out), a.grid, "[" + a.label + ", " + b.label + "]"};
}

ScalarOp identity_op(const GridPtr& grid) {
  return {cmat::Identity(grid->size(), grid->size()), grid, "1"};
}

ScalarOp scale_rows(const rvec& d, const ScalarOp& a) {
  ScalarOp out{a.matrix, a.grid, a.label};
  for (Eigen::Index r = 0; r < out.matrix.rows(); ++r) out.matrix.row(r) *= d(r);
  return out;
}

ScalarOp scale_cols(const ScalarOp& a, const rvec& d) {
  ScalarOp out{a.matrix, a.grid, a.label};
  for (Eigen::Index c = 0; c < out.matrix.cols(); ++c) out.matrix.col(c) *= d(c);
  return out;
}

VectorOp operator+(const VectorOp& a, const VectorOp& b) {
  VectorOp out;
  for (int k = 0; k < 3; ++k) out[k] = a[k] + b[k];
  out.label = "(" + a.label + " + " + b.label + ")";
  return out;
}

VectorOp operator*(cplx s, const VectorOp& a) {
  VectorOp out;
  for (int k = 0; k < 3; ++k) out[k] = s * a[k];
  out.label = a.label;
  return out;
}

ScalarOp dot(const VectorOp& a, const VectorOp& b) {
  ScalarOp out = a[0] * b[0];
  for (int k = 1; k < 3; ++k) {
    require_same_grid(out.grid, a[k].grid);
    out.matrix.noalias() += a[k].matrix * b[k].matrix;
  }
  out.label = a.label + "." + b.label;
  return out;
}

VectorOp cross(const VectorOp& a, const VectorOp& b) {
  VectorOp out;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    out[i] = a[j] * b[k] - a[k] * b[j];
  }
  out.label = a.label + "^" + b.label;
  return out;
}

VectorOp cross_symmetrized(const VectorOp& a, const VectorOp& b) {
  const VectorOp ab = cross(a, b);
  const VectorOp ba = cross(b, a);
  VectorOp out;
  for (int k = 0; k < 3; ++k) out[k] = cplx(0.5) * (ab[k] - ba[k]);
  out.label = "sym(" + a.label + "^" + b.label + ")";
  return out;
}

cvec adjoint_apply(const ScalarOp& a, const cvec& v) {
  const rvec& w = a.grid->weights;
  const cvec wv = w.cast<cplx>().cwiseProduct(v);
  cvec out = a.matrix.adjoint() * wv;
  return out.cwiseQuotient(w.cast<cplx>());
}

double hermiticity_residual(const ScalarOp& a, std::span<const cvec> states) {
  const Grid& g = *a.grid;
  double worst = 0.0;
  for (const cvec& psi : states) {
    const cvec defect = a.matrix * psi - adjoint_apply(a, psi);
    worst = std::max(worst, norm(g, defect) / norm(g, psi));
  }
  return worst;
}

double hermiticity_residual(const VectorOp& a, std::span<const cvec> states) {
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) worst = std::max(worst, hermiticity_residual(a[k], states));
  return worst;
}

}  // namespace cqop
