#include "cqop/operators.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace cqop {

namespace {

rvec sampled(const Grid& g, const Expr& e) {
  try {
    return g.sample(e);
  } catch (const ExprError& err) {
    throw Error(ErrorCode::domain, err.what());
  }
}

void require_builtin(const Chart& chart, const char* what) {
  if (chart.kind == SurfaceKind::custom)
    throw Error(ErrorCode::unsupported, std::string(what) + " is available for the sphere, cylinder and ring charts only");
}

ScalarOp diag_op(const GridPtr& g, const rvec& d, std::string label) {
  return ScalarOp{d.cast<cplx>().asDiagonal().toDenseMatrix(), g, std::move(label)};
}

const char* axis_name(int k) { return k == 0 ? "x" : (k == 1 ? "y" : "z"); }

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char bytes[sizeof(T)];
  for (std::size_t b = 0; b < sizeof(T); ++b) bytes[b] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * b)) & 0xFFu);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return static_cast<T>(v);
}

}  // namespace

Frame frame_fields(const Chart& chart, const Grid& grid) {
  require_builtin(chart, "the Cartesian frame");
  const int n = grid.size();
  Frame f;
  for (auto* field : {&f.e1, &f.e2, &f.e3, &f.position})
    for (auto& comp : *field) comp = rvec::Zero(n);
  for (int k = 0; k < n; ++k) {
    const double u = grid.q1[static_cast<std::size_t>(k)];
    const double v = grid.q2[static_cast<std::size_t>(k)];
    if (chart.kind == SurfaceKind::sphere) {
      const double st = std::sin(u), ct = std::cos(u), sp = std::sin(v), cp = std::cos(v);
      f.e1[0](k) = ct * cp;
      f.e1[1](k) = ct * sp;
      f.e1[2](k) = -st;
      f.e2[0](k) = -sp;
      f.e2[1](k) = cp;
      f.e3[0](k) = st * cp;
      f.e3[1](k) = st * sp;
      f.e3[2](k) = ct;
      for (int c = 0; c < 3; ++c) f.position[c](k) = chart.a * f.e3[c](k);
    } else {
      const double s = std::sin(u), c = std::cos(u);
      f.e1[0](k) = -s;
      f.e1[1](k) = c;
      f.e2[2](k) = 1.0;
      f.e3[0](k) = c;
      f.e3[1](k) = s;
      f.position[0](k) = chart.a * c;
      f.position[1](k) = chart.a * s;
      f.position[2](k) = chart.kind == SurfaceKind::cylinder ? v : 0.0;
    }
  }
  return f;
}

CartesianField tangent_field(const Chart& chart, const Grid& grid, const std::function<double(double, double)>& alpha,
                             const std::function<double(double, double)>& beta) {
  const Frame f = frame_fields(chart, grid);
  const rvec a = grid.sample(alpha);
  const rvec b = grid.sample(beta);
  CartesianField t;
  for (int c = 0; c < 3; ++c) t[c] = a.cwiseProduct(f.e1[c]) + b.cwiseProduct(f.e2[c]);
  return t;
}

VectorOp field_op(const GridPtr& grid, const CartesianField& field, const std::string& label) {
  VectorOp out;
  for (int c = 0; c < 3; ++c) out[c] = diag_op(grid, field[c], label + "_" + axis_name(c));
  out.label = label;
  return out;
}

namespace {

VectorOp gradient_impl(const Chart& chart, const GridPtr& grid, bool include_q2) {
  const Frame f = frame_fields(chart, *grid);
  const rvec h1 = sampled(*grid, chart.h[0]);
  const rvec h2 = sampled(*grid, chart.h[1]);
  VectorOp out;
  for (int c = 0; c < 3; ++c) {
    ScalarOp comp{cmat::Zero(grid->size(), grid->size()), grid, ""};
    const rvec a = f.e1[c].cwiseQuotient(h1);
    if (a.cwiseAbs().maxCoeff() > 0.0) comp.matrix += scale_rows(a, deriv_op(grid, Coord::q1)).matrix;
    if (include_q2 && grid->n2 > 1) {
      const rvec b = f.e2[c].cwiseQuotient(h2);
      if (b.cwiseAbs().maxCoeff() > 0.0) comp.matrix += scale_rows(b, deriv_op(grid, Coord::q2)).matrix;
    }
    comp.label = std::string("grad_") + axis_name(c);
    out[c] = std::move(comp);
  }
  out.label = include_q2 ? "grad" : "grad_q1";
  return out;
}

}  // namespace

VectorOp surface_gradient(const Chart& chart, const GridPtr& grid) { return gradient_impl(chart, grid, true); }

VectorOp surface_gradient_q1(const Chart& chart, const GridPtr& grid) { return gradient_impl(chart, grid, false); }

VectorOp surface_momentum(const Chart& chart, const GridPtr& grid) {
  const VectorOp grad = surface_gradient(chart, grid);
  const Frame f = frame_fields(chart, *grid);
  const rvec m = sampled(*grid, mean_curvature(chart));
  const cplx factor(0.0, -chart.params.hbar);
  VectorOp p;
  for (int c = 0; c < 3; ++c) {
    ScalarOp comp = grad[c];
    comp.matrix.diagonal() += (f.e3[c].cwiseProduct(m)).cast<cplx>();
    p[c] = factor * comp;
    p[c].label = std::string("p_") + axis_name(c);
  }
  p.label = "p";
  return p;
}

VectorOp bare_gradient_momentum(const Chart& chart, const GridPtr& grid) {
  VectorOp p = cplx(0.0, -chart.params.hbar) * surface_gradient(chart, grid);
  p.label = "-i hbar grad";
  return p;
}

LaplacianParts laplacian_parts(const Chart& chart, const GridPtr& grid) {
  const rvec h1 = sampled(*grid, chart.h[0]);
  const rvec h2 = sampled(*grid, chart.h[1]);
  const rvec inv_area = h1.cwiseProduct(h2).cwiseInverse();
  const ScalarOp d1 = deriv_op(grid, Coord::q1);
  const ScalarOp d2 = deriv_op(grid, Coord::q2);
  LaplacianParts parts;
  parts.q1 = scale_rows(inv_area, d1 * scale_rows(h2.cwiseQuotient(h1), d1));
  parts.q1.label = "lap_q1";
  if (grid->n2 > 1) {
    // h1/h2 never depends on q2 for the built-in charts, so it can sit to the
    // left of both derivatives. On the sphere this matters: D2 projects onto the
    // per-m Legendre band, and (1/sin) d2 psi is not in that band.
    parts.q2 = scale_rows(inv_area.cwiseProduct(h1.cwiseQuotient(h2)), d2 * d2);
  } else {
    parts.q2 = ScalarOp{cmat::Zero(grid->size(), grid->size()), grid, ""};
  }
  parts.q2.label = "lap_q2";
  return parts;
}

ScalarOp laplacian(const Chart& chart, const GridPtr& grid) {
  const VectorOp grad = surface_gradient(chart, grid);
  ScalarOp lap = dot(grad, grad);
  lap.label = "lap";
  return lap;
}

namespace {

ScalarOp hamiltonian_from(const Chart& chart, const GridPtr& grid, const ScalarOp& lap) {
  const double hb = chart.params.hbar;
  const double scale = -hb * hb / (2.0 * chart.params.mass);
  ScalarOp h = cplx(scale) * lap;
  h.matrix.diagonal() += sampled(*grid, geometric_potential(chart)).cast<cplx>();
  h.label = "H";
  return h;
}

ScalarOp velocity_squared_from(const Chart& chart, const GridPtr& grid, const ScalarOp& lap) {
  const double hb = chart.params.hbar;
  const double m = chart.params.mass;
  const double scale = hb * hb / (m * m);
  ScalarOp v2 = cplx(-scale) * lap;
  v2.matrix.diagonal() += (scale * sampled(*grid, mean_curvature(chart)).array().square()).matrix().cast<cplx>();
  v2.label = "v2";
  return v2;
}

VectorOp angular_from(const Frame& f, const VectorOp& p, const GridPtr& grid) {
  VectorOp l;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    l[i] = scale_rows(f.position[j], p[k]) - scale_rows(f.position[k], p[j]);
    l[i].grid = grid;
    l[i].label = std::string("L_") + axis_name(i);
  }
  l.label = "L";
  return l;
}

ForceParts force_from(const Chart& chart, const Frame& f, const ScalarOp& v2_force, const VectorOp& grad_force) {
  const double hb = chart.params.hbar;
  const double m = chart.params.mass;
  const double r = chart.a;
  ForceParts out;
  for (int c = 0; c < 3; ++c) {
    out.f1[c] = scale_rows(-(m / r) * f.e3[c], v2_force);
    out.f1[c].label = std::string("F1_") + axis_name(c);
    out.f2[c] = cplx(hb * hb / (m * r * r)) * grad_force[c];
    out.f2[c].label = std::string("F2_") + axis_name(c);
    out.total[c] = out.f1[c] + out.f2[c];
    out.total[c].label = std::string("F_") + axis_name(c);
  }
  out.f1.label = "F1";
  out.f2.label = "F2";
  out.total.label = "F";
  return out;
}

}  // namespace

ScalarOp hamiltonian(const Chart& chart, const GridPtr& grid) {
  return hamiltonian_from(chart, grid, laplacian(chart, grid));
}

ScalarOp velocity_squared(const Chart& chart, const GridPtr& grid) {
  return velocity_squared_from(chart, grid, laplacian(chart, grid));
}

VectorOp angular_momentum(const Chart& chart, const GridPtr& grid) {
  require_builtin(chart, "angular momentum");
  return angular_from(frame_fields(chart, *grid), surface_momentum(chart, grid), grid);
}

VectorOp position_op(const Chart& chart, const GridPtr& grid) {
  VectorOp r = field_op(grid, frame_fields(chart, *grid).position, "R");
  return r;
}

ForceParts force_closed_form(const Chart& chart, const GridPtr& grid) {
  require_builtin(chart, "the closed-form force");
  const Frame f = frame_fields(chart, *grid);
  if (chart.kind == SurfaceKind::sphere) {
    return force_from(chart, f, velocity_squared(chart, grid), surface_gradient(chart, grid));
  }
  const VectorOp ring_grad = surface_gradient_q1(chart, grid);
  return force_from(chart, f, velocity_squared_from(chart, grid, dot(ring_grad, ring_grad)), ring_grad);
}

VectorOp force_heisenberg(const VectorOp& momentum, const ScalarOp& h, double hbar) {
  VectorOp f;
  const cplx factor = 1.0 / cplx(0.0, hbar);
  for (int c = 0; c < 3; ++c) {
    f[c] = factor * commutator(momentum[c], h);
    f[c].label = std::string("Fh_") + axis_name(c);
  }
  f.label = "F_heisenberg";
  return f;
}

VectorOp torque(const VectorOp& position, const VectorOp& force) {
  VectorOp t = cross_symmetrized(position, force);
  t.label = "tau(" + force.label + ")";
  return t;
}

ScalarOp symmetrized_tangential_contraction(const Chart& chart, const Grid& grid, const CartesianField& t,
                                            const VectorOp& force) {
  const Frame f = frame_fields(chart, grid);
  for (int k = 0; k < grid.size(); ++k) {
    double normal = 0.0, len = 0.0;
    for (int c = 0; c < 3; ++c) {
      normal += t[c](k) * f.e3[c](k);
      len += t[c](k) * t[c](k);
    }
    if (std::abs(normal) > 1e-12 * std::max(1.0, std::sqrt(len)))
      throw Error(ErrorCode::invalid_argument, "field is not tangential at node " + std::to_string(k));
  }
  ScalarOp out{cmat::Zero(grid.size(), grid.size()), force[0].grid, "sym(t.F)"};
  for (int c = 0; c < 3; ++c) {
    out.matrix += 0.5 * scale_rows(t[c], force[c]).matrix;
    out.matrix += 0.5 * scale_cols(force[c], t[c]).matrix;
  }
  return out;
}

OperatorSet build_operators(const Chart& chart, const GridPtr& grid) {
  require_builtin(chart, "operator assembly");
  OperatorSet s;
  s.chart = chart;
  s.grid = grid;
  s.curvature = curvature(chart);
  s.mean_curvature = sampled(*grid, s.curvature.mean);
  s.gaussian_curvature = sampled(*grid, s.curvature.gaussian);
  s.frame = frame_fields(chart, *grid);
  s.gradient = surface_gradient(chart, grid);
  s.gradient_q1 = chart.kind == SurfaceKind::sphere ? s.gradient : surface_gradient_q1(chart, grid);
  s.momentum = surface_momentum(chart, grid);
  s.position = field_op(grid, s.frame.position, "R");
  s.angular = angular_from(s.frame, s.momentum, grid);
  s.laplacian = dot(s.gradient, s.gradient);
  s.laplacian.label = "lap";
  s.hamiltonian = hamiltonian_from(chart, grid, s.laplacian);
  s.v2 = velocity_squared_from(chart, grid, s.laplacian);
  if (chart.kind == SurfaceKind::sphere) {
    s.v2_force = s.v2;
    s.force = force_from(chart, s.frame, s.v2, s.gradient);
  } else {
    s.v2_force = velocity_squared_from(chart, grid, dot(s.gradient_q1, s.gradient_q1));
    s.v2_force.label = "v2_ring";
    s.force = force_from(chart, s.frame, s.v2_force, s.gradient_q1);
  }
  return s;
}

BandEigensystem band_eigensystem(const ScalarOp& h) {
  const Grid& g = *h.grid;
  const cmat& basis = g.band_basis;
  const cmat hb = h.matrix * basis;
  cmat weighted = basis;
  for (Eigen::Index r = 0; r < weighted.rows(); ++r) weighted.row(r) *= g.weights(r);
  cmat compressed = weighted.adjoint() * hb;
  compressed = 0.5 * (compressed + compressed.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<cmat> solver(compressed);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::numeric, "eigendecomposition failed");
  return BandEigensystem{solver.eigenvalues(), basis * solver.eigenvectors()};
}

void write_operator(const ScalarOp& op, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  const auto n = static_cast<std::uint32_t>(op.matrix.rows());
  out.write("CQOP", 4);
  put_le<std::uint32_t>(out, n);
  put_le<std::uint32_t>(out, 0u);
  put_le<std::uint32_t>(out, 0u);  // pads the header to 16 bytes
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < n; ++c) {
      const cplx z = op.matrix(r, c);
      for (double part : {z.real(), z.imag()}) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(part));
    }
  }
  if (!out) throw Error(ErrorCode::io, "write to '" + path + "' failed");
}

cmat read_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CQOP", 4) != 0) throw Error(ErrorCode::parse, "'" + path + "' is not an operator dump");
  const auto n = get_le<std::uint32_t>(in);
  (void)get_le<std::uint32_t>(in);
  (void)get_le<std::uint32_t>(in);
  cmat m(n, n);
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < n; ++c) {
      const double re = std::bit_cast<double>(get_le<std::uint64_t>(in));
      const double im = std::bit_cast<double>(get_le<std::uint64_t>(in));
      m(r, c) = cplx(re, im);
    }
  }
  if (!in) throw Error(ErrorCode::parse, "'" + path + "' is truncated");
  return m;
}

}  // namespace cqop
