#include "cqop/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <set>

#include <json.hpp>

namespace cqop {

namespace {

using Field3 = std::array<cvec, 3>;

struct Context {
  const OperatorSet& ops;
  const Grid& g;
  std::vector<cvec> states;
  double hbar;
  double m;
  double r;
  double mean;  // M, constant on the built-in charts
  double gauss;
  std::optional<BandEigensystem> eig;
  std::vector<std::string> notes;

  [[nodiscard]] SurfaceKind kind() const { return ops.chart.kind; }
  [[nodiscard]] double vnorm(const Field3& v, std::initializer_list<int> comps) const {
    double s = 0.0;
    for (int c : comps) s += std::pow(norm(g, v[static_cast<std::size_t>(c)]), 2);
    return std::sqrt(s);
  }
};

std::initializer_list<int> all_components() {
  static const std::initializer_list<int> c = {0, 1, 2};
  return c;
}

Field3 apply(const VectorOp& a, const cvec& v) { return {a[0](v), a[1](v), a[2](v)}; }

cvec mul(const rvec& d, const cvec& v) { return d.cast<cplx>().cwiseProduct(v); }

/// 1/2 (R ^ F - F ^ R) psi with R diagonal.
Field3 torque_apply(const Frame& f, const VectorOp& force, const cvec& psi) {
  const auto& R = f.position;
  const Field3 fpsi = apply(force, psi);
  Field3 out;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    const cvec r_f = mul(R[j], fpsi[k]) - mul(R[k], fpsi[j]);
    const cvec f_r = force[j](mul(R[k], psi)) - force[k](mul(R[j], psi));
    out[i] = 0.5 * (r_f - f_r);
  }
  return out;
}

/// Weighted adjoint of the torque applied to psi.
Field3 torque_adjoint_apply(const Frame& f, const VectorOp& force, const cvec& psi) {
  const auto& R = f.position;
  Field3 out;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    const cvec a = adjoint_apply(force[k], mul(R[j], psi)) - adjoint_apply(force[j], mul(R[k], psi));
    const cvec b = mul(R[k], adjoint_apply(force[j], psi)) - mul(R[j], adjoint_apply(force[k], psi));
    out[i] = 0.5 * (a - b);
  }
  return out;
}

cvec contraction_apply(const CartesianField& t, const VectorOp& force, const cvec& psi) {
  cvec out = cvec::Zero(psi.size());
  for (int c = 0; c < 3; ++c) out += 0.5 * (mul(t[c], force[c](psi)) + force[c](mul(t[c], psi)));
  return out;
}

/// sum_c t_c G_c psi
cvec directional_apply(const CartesianField& t, const VectorOp& grad, const cvec& psi) {
  cvec out = cvec::Zero(psi.size());
  for (int c = 0; c < 3; ++c) out += mul(t[c], grad[c](psi));
  return out;
}

/// sum_c G_c (t_c psi)
cvec divergence_apply(const CartesianField& t, const VectorOp& grad, const cvec& psi) {
  cvec out = cvec::Zero(psi.size());
  for (int c = 0; c < 3; ++c) out += grad[c](mul(t[c], psi));
  return out;
}

double max_over_states(const Context& ctx, const std::function<double(const cvec&)>& residual) {
  double worst = 0.0;
  for (const cvec& psi : ctx.states) worst = std::max(worst, residual(psi) / norm(ctx.g, psi));
  return worst;
}

double min_over_states(const Context& ctx, const std::function<double(const cvec&)>& residual) {
  double best = std::numeric_limits<double>::infinity();
  for (const cvec& psi : ctx.states) best = std::min(best, residual(psi));
  return best;
}

std::initializer_list<int> torque_components(SurfaceKind kind) {
  static const std::initializer_list<int> z_only = {2};
  return kind == SurfaceKind::sphere ? all_components() : z_only;
}

std::initializer_list<int> position_components(SurfaceKind kind) {
  // The axial coordinate is a sawtooth on a periodic grid, so [z, H] is not
  // resolved on the cylinder.
  static const std::initializer_list<int> xy = {0, 1};
  return kind == SurfaceKind::cylinder ? xy : all_components();
}

double torque_scale(SurfaceKind kind) { return kind == SurfaceKind::sphere ? 2.0 : 1.0; }

CartesianField radial_dr(const Context& ctx) {
  const Grid& g = ctx.g;
  switch (ctx.kind()) {
    case SurfaceKind::sphere:
      return tangent_field(ctx.ops.chart, g, [](double, double) { return 1.0; },
                           [](double theta, double) { return std::sin(theta); });
    case SurfaceKind::cylinder:
      return tangent_field(ctx.ops.chart, g, [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
    default:
      return tangent_field(ctx.ops.chart, g, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
  }
}

const BandEigensystem& eigensystem(Context& ctx) {
  if (!ctx.eig) ctx.eig = band_eigensystem(ctx.ops.hamiltonian);
  return *ctx.eig;
}

std::vector<double> analytic_spectrum(const Context& ctx, int& count) {
  count = 0;
  for (const auto& mode : ctx.g.band)
    if (ctx.g.in_test_band(mode)) ++count;
  return analytic_band_spectrum(ctx.ops.chart, ctx.g);
}

struct Definition {
  std::string id;
  std::string description;
  CheckMode mode;
  std::function<bool(SurfaceKind)> applies;
  double tolerance;  // NaN: the curvature-scaled floor hbar|M|
  std::function<double(Context&)> run;
};

auto every_kind() {
  return [](SurfaceKind) { return true; };
}
auto sphere_only() {
  return [](SurfaceKind k) { return k == SurfaceKind::sphere; };
}
double fixed(double tol) { return tol; }

double hermiticity(const Context& ctx, const VectorOp& a) { return hermiticity_residual(a, ctx.states); }

const std::vector<Definition>& registry() {
  static const std::vector<Definition> defs = [] {
    std::vector<Definition> d;
    d.push_back({"quadrature.area", "sum of weights equals the analytic surface area (relative)", CheckMode::ceiling,
                 every_kind(), fixed(1e-12), [](Context& ctx) {
                   const double exact = ctx.g.area();
                   return std::abs(ctx.g.weights.sum() - exact) / exact;
                 }});
    d.push_back({"quadrature.orthonormality", "sampled band modes are orthonormal under the weights", CheckMode::ceiling,
                 every_kind(), fixed(1e-12), [](Context& ctx) {
                   const cmat& b = ctx.g.band_basis;
                   cmat wb = b;
                   for (Eigen::Index r = 0; r < wb.rows(); ++r) wb.row(r) *= ctx.g.weights(r);
                   const cmat gram = b.adjoint() * wb;
                   return (gram - cmat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
                 }});
    d.push_back({"hermiticity.p", "surface momentum components are Hermitian", CheckMode::ceiling, every_kind(),
                 fixed(1e-10), [](Context& ctx) { return hermiticity(ctx, ctx.ops.momentum); }});
    d.push_back({"hermiticity.H", "Hamiltonian is Hermitian", CheckMode::ceiling, every_kind(), fixed(1e-10),
                 [](Context& ctx) { return hermiticity_residual(ctx.ops.hamiltonian, ctx.states); }});
    d.push_back({"hermiticity.v2", "velocity squared is Hermitian", CheckMode::ceiling, every_kind(), fixed(1e-10),
                 [](Context& ctx) { return hermiticity_residual(ctx.ops.v2, ctx.states); }});
    d.push_back({"hermiticity.L", "angular momentum components are Hermitian", CheckMode::ceiling, every_kind(),
                 fixed(1e-10), [](Context& ctx) { return hermiticity(ctx, ctx.ops.angular); }});
    d.push_back({"hermiticity.F", "total force components are Hermitian", CheckMode::ceiling, every_kind(),
                 fixed(1e-10), [](Context& ctx) { return hermiticity(ctx, ctx.ops.force.total); }});
    d.push_back({"spectrum.analytic", "low eigenvalues match the analytic spectrum (relative)", CheckMode::ceiling,
                 every_kind(), fixed(1e-10), [](Context& ctx) {
                   int count = 0;
                   const std::vector<double> exact = analytic_spectrum(ctx, count);
                   const rvec& values = eigensystem(ctx).values;
                   const double scale = ctx.hbar * ctx.hbar / (ctx.m * ctx.r * ctx.r);
                   double worst = 0.0;
                   for (int k = 0; k < count; ++k) {
                     const double e = exact[static_cast<std::size_t>(k)];
                     worst = std::max(worst, std::abs(values(k) - e) / std::max(std::abs(e), scale));
                   }
                   return worst;
                 }});
    d.push_back({"spectrum.ground", "ground energy equals the analytic minimum (absolute)", CheckMode::ceiling,
                 every_kind(), fixed(1e-12), [](Context& ctx) {
                   const double exact = ctx.kind() == SurfaceKind::sphere
                                            ? 0.0
                                            : -ctx.hbar * ctx.hbar / (8.0 * ctx.m * ctx.r * ctx.r);
                   return std::abs(eigensystem(ctx).values(0) - exact);
                 }});
    d.push_back({"identity.H_v2", "H = m v^2/2 - hbar^2/2mR^2 (sphere) or - hbar^2/4mR^2 (cylinder, ring)",
                 CheckMode::ceiling, every_kind(), fixed(1e-9), [](Context& ctx) {
                   const double shift = (ctx.kind() == SurfaceKind::sphere ? 2.0 : 4.0) * ctx.m * ctx.r * ctx.r;
                   const double c = ctx.hbar * ctx.hbar / shift;
                   return max_over_states(ctx, [&](const cvec& psi) {
                     return norm(ctx.g, ctx.ops.hamiltonian(psi) - 0.5 * ctx.m * ctx.ops.v2(psi) + c * psi);
                   });
                 }});
    d.push_back({"identity.H_v2_general", "H = m v^2/2 - (hbar^2/2m)(2M^2 - K)", CheckMode::ceiling, every_kind(),
                 fixed(1e-9), [](Context& ctx) {
                   const rvec& mm = ctx.ops.mean_curvature;
                   const rvec shift = (ctx.hbar * ctx.hbar / (2.0 * ctx.m)) *
                                      (2.0 * mm.array().square() - ctx.ops.gaussian_curvature.array()).matrix();
                   return max_over_states(ctx, [&](const cvec& psi) {
                     return norm(ctx.g, ctx.ops.hamiltonian(psi) - 0.5 * ctx.m * ctx.ops.v2(psi) + mul(shift, psi));
                   });
                 }});
    d.push_back({"identity.H_L2",
                 "H = L.L/2mR^2 (sphere) or L_z^2/2mR^2 + p_z^2/2m - hbar^2/8mR^2 (cylinder, ring)",
                 CheckMode::ceiling, every_kind(), fixed(1e-9), [](Context& ctx) {
                   const auto& L = ctx.ops.angular;
                   const auto& p = ctx.ops.momentum;
                   const double mr2 = ctx.m * ctx.r * ctx.r;
                   return max_over_states(ctx, [&](const cvec& psi) {
                     cvec rhs;
                     if (ctx.kind() == SurfaceKind::sphere) {
                       rhs = (L[0](L[0](psi)) + L[1](L[1](psi)) + L[2](L[2](psi))) / (2.0 * mr2);
                     } else {
                       rhs = L[2](L[2](psi)) / (2.0 * mr2) + p[2](p[2](psi)) / (2.0 * ctx.m) -
                             ctx.hbar * ctx.hbar / (8.0 * mr2) * psi;
                     }
                     return norm(ctx.g, ctx.ops.hamiltonian(psi) - rhs);
                   });
                 }});
    d.push_back({"identity.v2_pp", "m^2 v^2 = p.p", CheckMode::ceiling, every_kind(), fixed(1e-9), [](Context& ctx) {
                   const auto& p = ctx.ops.momentum;
                   return max_over_states(ctx, [&](const cvec& psi) {
                     const cvec pp = p[0](p[0](psi)) + p[1](p[1](psi)) + p[2](p[2](psi));
                     return norm(ctx.g, ctx.m * ctx.m * ctx.ops.v2(psi) - pp);
                   });
                 }});
    d.push_back({"identity.velocity", "(1/i hbar)[R, H] = p/m componentwise", CheckMode::ceiling, every_kind(),
                 fixed(1e-9), [](Context& ctx) {
                   const auto& pos = ctx.ops.frame.position;
                   const cplx factor = 1.0 / cplx(0.0, ctx.hbar);
                   return max_over_states(ctx, [&](const cvec& psi) {
                     Field3 defect;
                     const cvec hpsi = ctx.ops.hamiltonian(psi);
                     for (int c = 0; c < 3; ++c) {
                       const cvec comm = mul(pos[c], hpsi) - ctx.ops.hamiltonian(mul(pos[c], psi));
                       defect[c] = factor * comm - ctx.ops.momentum[c](psi) / ctx.m;
                     }
                     return ctx.vnorm(defect, position_components(ctx.kind()));
                   });
                 }});
    d.push_back({"identity.torque_antisym", "R^p + p^R = 0", CheckMode::ceiling, every_kind(), fixed(1e-10),
                 [](Context& ctx) {
                   const auto& pos = ctx.ops.frame.position;
                   const auto& p = ctx.ops.momentum;
                   return max_over_states(ctx, [&](const cvec& psi) {
                     const Field3 ppsi = apply(p, psi);
                     Field3 sum;
                     for (int i = 0; i < 3; ++i) {
                       const int j = (i + 1) % 3;
                       const int k = (i + 2) % 3;
                       sum[i] = mul(pos[j], ppsi[k]) - mul(pos[k], ppsi[j]) + p[j](mul(pos[k], psi)) -
                                p[k](mul(pos[j], psi));
                     }
                     return ctx.vnorm(sum, position_components(ctx.kind()));
                   });
                 }});
    d.push_back({"identity.divergence_rhat", "grad'.r_hat = -2M", CheckMode::ceiling, every_kind(), fixed(1e-9),
                 [](Context& ctx) {
                   const CartesianField& normal = ctx.ops.frame.e3;
                   return max_over_states(ctx, [&](const cvec& psi) {
                     const cvec lhs = divergence_apply(normal, ctx.ops.gradient, psi) -
                                      directional_apply(normal, ctx.ops.gradient, psi);
                     return norm(ctx.g, lhs + 2.0 * mul(ctx.ops.mean_curvature, psi));
                   });
                 }});
    d.push_back({"conservation.Lz", "[L_z, H] = 0", CheckMode::ceiling, every_kind(), fixed(1e-10),
                 [](Context& ctx) {
                   const ScalarOp& lz = ctx.ops.angular[2];
                   return max_over_states(ctx, [&](const cvec& psi) {
                     return norm(ctx.g, lz(ctx.ops.hamiltonian(psi)) - ctx.ops.hamiltonian(lz(psi)));
                   });
                 }});
    d.push_back({"conservation.L", "[L, H] = 0 for every component", CheckMode::ceiling, sphere_only(), fixed(1e-10),
                 [](Context& ctx) {
                   return max_over_states(ctx, [&](const cvec& psi) {
                     Field3 comm;
                     const cvec hpsi = ctx.ops.hamiltonian(psi);
                     for (int c = 0; c < 3; ++c)
                       comm[c] = ctx.ops.angular[c](hpsi) - ctx.ops.hamiltonian(ctx.ops.angular[c](psi));
                     return ctx.vnorm(comm, all_components());
                   });
                 }});
    d.push_back({"force.equivalence", "(1/i hbar)[p, H] equals the closed-form force", CheckMode::ceiling,
                 every_kind(), fixed(1e-8), [](Context& ctx) {
                   const cplx factor = 1.0 / cplx(0.0, ctx.hbar);
                   return max_over_states(ctx, [&](const cvec& psi) {
                     Field3 defect;
                     const cvec hpsi = ctx.ops.hamiltonian(psi);
                     for (int c = 0; c < 3; ++c) {
                       const ScalarOp& p = ctx.ops.momentum[c];
                       defect[c] = factor * (p(hpsi) - ctx.ops.hamiltonian(p(psi))) - ctx.ops.force.total[c](psi);
                     }
                     return ctx.vnorm(defect, all_components());
                   });
                 }});
    for (int piece = 1; piece <= 2; ++piece) {
      const double sign = piece == 1 ? -1.0 : 1.0;
      d.push_back({"torque.piece" + std::to_string(piece),
                   std::string("torque of F") + (piece == 1 ? "1" : "2") +
                       (piece == 1 ? " equals -" : " equals +") +
                       "c i hbar L/mR^2 (c = 2 sphere, c = 1 cylinder z)",
                   CheckMode::ceiling, every_kind(), fixed(1e-8), [piece, sign](Context& ctx) {
                     const VectorOp& f = piece == 1 ? ctx.ops.force.f1 : ctx.ops.force.f2;
                     const cplx expected =
                         sign * torque_scale(ctx.kind()) * cplx(0.0, ctx.hbar) / (ctx.m * ctx.r * ctx.r);
                     return max_over_states(ctx, [&](const cvec& psi) {
                       Field3 tau = torque_apply(ctx.ops.frame, f, psi);
                       for (int c = 0; c < 3; ++c) tau[c] -= expected * ctx.ops.angular[c](psi);
                       return ctx.vnorm(tau, torque_components(ctx.kind()));
                     });
                   }});
    }
    d.push_back({"torque.net", "net torque of the total force vanishes", CheckMode::ceiling, every_kind(), fixed(1e-9),
                 [](Context& ctx) {
                   return max_over_states(ctx, [&](const cvec& psi) {
                     return ctx.vnorm(torque_apply(ctx.ops.frame, ctx.ops.force.total, psi),
                                      torque_components(ctx.kind()));
                   });
                 }});
    d.push_back({"torque.ablation_F2",
                 "without F2 the net torque exceeds 0.1 ||(2 hbar/mR^2) L psi|| (ratio, counterexample)",
                 CheckMode::floor, every_kind(), fixed(0.1), [](Context& ctx) {
                   const double scale = 2.0 * ctx.hbar / (ctx.m * ctx.r * ctx.r);
                   const auto comps = torque_components(ctx.kind());
                   return min_over_states(ctx, [&](const cvec& psi) {
                     const Field3 tau = torque_apply(ctx.ops.frame, ctx.ops.force.f1, psi);
                     const Field3 lpsi = apply(ctx.ops.angular, psi);
                     const double ref = scale * ctx.vnorm(lpsi, comps);
                     return ref > 0.0 ? ctx.vnorm(tau, comps) / ref : std::numeric_limits<double>::infinity();
                   });
                 }});
    d.push_back({"radial.dr", "symmetrized contraction of the total force with the tangent dr vanishes",
                 CheckMode::ceiling, every_kind(), fixed(1e-8), [](Context& ctx) {
                   const CartesianField dr = radial_dr(ctx);
                   return max_over_states(ctx, [&](const cvec& psi) {
                     return norm(ctx.g, contraction_apply(dr, ctx.ops.force.total, psi));
                   });
                 }});
    d.push_back({"radial.divergence_law",
                 "contraction with tangent t equals -(hbar^2/2mR^2) div t, for t = sin(theta) theta_hat, "
                 "sin(theta) phi_hat",
                 CheckMode::ceiling, sphere_only(), fixed(1e-8), [](Context& ctx) {
                   const Chart& chart = ctx.ops.chart;
                   const double c = ctx.hbar * ctx.hbar / (2.0 * ctx.m * ctx.r * ctx.r);
                   const auto one = [](double theta, double) { return std::sin(theta); };
                   const auto zero = [](double, double) { return 0.0; };
                   const CartesianField t_theta = tangent_field(chart, ctx.g, one, zero);
                   const CartesianField t_phi = tangent_field(chart, ctx.g, zero, one);
                   const double r = ctx.r;
                   const rvec div_theta = ctx.g.sample([r](double theta, double) { return 2.0 * std::cos(theta) / r; });
                   return max_over_states(ctx, [&](const cvec& psi) {
                     const double a =
                         norm(ctx.g, contraction_apply(t_theta, ctx.ops.force.total, psi) + c * mul(div_theta, psi));
                     const double b = norm(ctx.g, contraction_apply(t_phi, ctx.ops.force.total, psi));
                     return std::hypot(a, b);
                   });
                 }});
    for (int piece = 1; piece <= 2; ++piece) {
      d.push_back({"radial.f" + std::to_string(piece) + "_form",
                   piece == 1 ? "F1 contraction with dr matches (hbar^2/mR)(-(2/R) grad'.dr + cot(theta)/R^2)"
                              : "F2 contraction with dr matches (hbar^2/mR^2)(dr.grad' + grad'.dr)",
                   CheckMode::flag, sphere_only(), fixed(1e-6), [piece](Context& ctx) {
                     const CartesianField dr = radial_dr(ctx);
                     const double c = ctx.hbar * ctx.hbar / (ctx.m * ctx.r);
                     const double r = ctx.r;
                     const rvec cot = ctx.g.sample([](double theta, double) { return std::cos(theta) / std::sin(theta); });
                     const VectorOp& grad = ctx.ops.gradient;
                     const VectorOp& f = piece == 1 ? ctx.ops.force.f1 : ctx.ops.force.f2;
                     // grad'.dr is read both as the composition sum_c G_c dr_c and as dr.grad';
                     // the better-matching reading is reported.
                     double composed = 0.0, directional = 0.0;
                     for (const cvec& psi : ctx.states) {
                       const cvec lhs = contraction_apply(dr, f, psi);
                       const cvec div = divergence_apply(dr, grad, psi);
                       const cvec dir = directional_apply(dr, grad, psi);
                       cvec rhs_a, rhs_b;
                       if (piece == 1) {
                         rhs_a = c * (-(2.0 / r) * div + mul(cot, psi) / (r * r));
                         rhs_b = c * (-(2.0 / r) * dir + mul(cot, psi) / (r * r));
                       } else {
                         rhs_a = rhs_b = c * (dir + div) / r;
                       }
                       const double n = norm(ctx.g, psi);
                       composed = std::max(composed, norm(ctx.g, lhs - rhs_a) / n);
                       directional = std::max(directional, norm(ctx.g, lhs - rhs_b) / n);
                     }
                     char buf[256];
                     std::snprintf(buf, sizeof buf,
                                   "radial.f%d_form: residual %.3e reading grad'.dr as a composition, %.3e as dr.grad'",
                                   piece, composed, directional);
                     ctx.notes.emplace_back(buf);
                     return std::min(composed, directional);
                   }});
    }
    d.push_back({"counterexample.bare_gradient",
                 "-i hbar grad without the curvature term is not Hermitian (defect at least hbar|M|)", CheckMode::floor,
                 every_kind(), std::nan(""),
                 [](Context& ctx) {
                   const VectorOp bare = bare_gradient_momentum(ctx.ops.chart, ctx.ops.grid);
                   return min_over_states(ctx, [&](const cvec& psi) {
                     Field3 defect;
                     for (int c = 0; c < 3; ++c) defect[c] = bare[c](psi) - adjoint_apply(bare[c], psi);
                     return ctx.vnorm(defect, all_components()) / norm(ctx.g, psi);
                   });
                 }});
    return d;
  }();
  return defs;
}

std::string resolution_string(const Grid& g) { return std::to_string(g.n1) + "x" + std::to_string(g.n2); }

void add_fixed_notes(Context& ctx) {
  char buf[512];
  if (ctx.kind() == SurfaceKind::sphere) {
    std::snprintf(buf, sizeof buf,
                  "Gaussian curvature from the scale-factor bracket is K = %.15g = M^2 = 1/R^2; the value "
                  "1/(2R^2) would contradict the vanishing geometric potential, so it is not used.",
                  ctx.gauss);
    ctx.notes.emplace_back(buf);
  }
  ctx.notes.emplace_back(
      "The general relation H = m v^2/2 - (hbar^2/m^2)(M^2 - K^2) is dimensionally inconsistent; "
      "identity.H_v2_general tests the corrected H = m v^2/2 - (hbar^2/2m)(2M^2 - K).");
  if (ctx.kind() == SurfaceKind::sphere) {
    ctx.notes.emplace_back(
        "Sphere torque pieces are checked against the target -/+ 2i hbar L/mR^2; the symmetrized definition "
        "gives -/+ i hbar L/mR^2, so torque.piece1 and torque.piece2 are expected to fail by that factor of 2.");
    ctx.notes.emplace_back(
        "Sphere radiality: the total force equals (1/2){r_hat, -m v^2/R + hbar^2/mR^3}, so its symmetrized "
        "contraction with a tangent field t is -(hbar^2/2mR^2) div t. The field dr = theta_hat + sin(theta) phi_hat "
        "has div = cot(theta)/R, so radial.dr is expected to fail; radial.divergence_law tests the general law.");
  } else {
    ctx.notes.emplace_back(
        "Cylinder force: F2 uses only the theta_hat part of the surface gradient; adding z_hat d_z would break the "
        "agreement with the commutator.");
    ctx.notes.emplace_back(
        "Cylinder and ring torques are checked along z only; the x and y components do not vanish on the cylinder "
        "(tau_x = -z F_y).");
  }
}

}  // namespace

std::string_view to_string(CheckMode mode) {
  switch (mode) {
    case CheckMode::ceiling: return "ceiling";
    case CheckMode::floor: return "floor";
    case CheckMode::flag: return "flag";
  }
  return "ceiling";
}

std::vector<double> analytic_band_spectrum(const Chart& chart, const Grid& g) {
  if (chart.kind == SurfaceKind::custom) throw Error(ErrorCode::unsupported, "no analytic spectrum for custom charts");
  const double hbar = chart.params.hbar, m = chart.params.mass, r = chart.a;
  std::vector<double> values;
  values.reserve(g.band.size());
  for (const auto& mode : g.band) {
    if (chart.kind == SurfaceKind::sphere) {
      const double l = mode.first;
      values.push_back(hbar * hbar * l * (l + 1.0) / (2.0 * m * r * r));
    } else {
      const double n = mode.first;
      const double k = 2.0 * std::numbers::pi * mode.second / g.axial_period;
      values.push_back(hbar * hbar * (n * n / (r * r) + k * k) / (2.0 * m) - hbar * hbar / (8.0 * m * r * r));
    }
  }
  std::sort(values.begin(), values.end());
  return values;
}

int Report::passed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(),
                                        [](const CheckResult& c) { return c.pass && c.mode != CheckMode::flag; }));
}

int Report::failed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(),
                                        [](const CheckResult& c) { return !c.pass && c.mode != CheckMode::flag; }));
}

int Report::flagged() const {
  return static_cast<int>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return c.mode == CheckMode::flag; }));
}

const CheckResult* Report::find(std::string_view id) const {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

std::vector<std::string> registered_checks(SurfaceKind kind) {
  std::vector<std::string> ids;
  for (const auto& def : registry())
    if (def.applies(kind)) ids.push_back(def.id);
  return ids;
}

double default_tolerance(std::string_view id) {
  for (const auto& def : registry())
    if (def.id == id) return def.tolerance;
  throw Error(ErrorCode::invalid_argument, "unknown check id '" + std::string(id) + "'");
}

Report run_suite(const Chart& chart, const GridPtr& grid, const SuiteConfig& config) {
  if (chart.kind == SurfaceKind::custom)
    throw Error(ErrorCode::unsupported, "the verification suite needs a sphere, cylinder or ring chart");
  return run_suite(build_operators(chart, grid), config);
}

Report run_suite(const OperatorSet& ops, const SuiteConfig& config) {
  const Chart& chart = ops.chart;
  if (chart.kind == SurfaceKind::custom)
    throw Error(ErrorCode::unsupported, "the verification suite needs a sphere, cylinder or ring chart");
  if (config.state_count < 1) throw Error(ErrorCode::invalid_argument, "state count must be positive");

  const std::vector<std::string> ids = registered_checks(chart.kind);
  const std::set<std::string, std::less<>> known(ids.begin(), ids.end());
  for (const auto& [id, tol] : config.tolerances) {
    if (!known.contains(id))
      throw Error(ErrorCode::invalid_argument, "unknown check id '" + id + "' in tolerance override");
    if (!(tol > 0.0) || !std::isfinite(tol))
      throw Error(ErrorCode::invalid_argument, "tolerance for '" + id + "' must be positive");
  }
  for (const auto& id : config.only)
    if (!known.contains(id)) throw Error(ErrorCode::invalid_argument, "unknown check id '" + id + "'");

  const Grid& g = *ops.grid;
  Context ctx{ops, g, {}, ops.hbar(), ops.mass(), ops.radius(), ops.mean_curvature(0), ops.gaussian_curvature(0),
              std::nullopt, {}};
  ctx.states = config.family ? test_states(g, config.state_count, config.seed, config.family->first,
                                           config.family->second)
                             : test_states(g, config.state_count, config.seed);
  add_fixed_notes(ctx);

  Report report;
  report.chart = ChartDescriptor{chart.kind,           chart.a,     g.axial_period, ops.hbar(), ops.mass(), g.n1, g.n2,
                                 config.seed};
  const std::set<std::string, std::less<>> only(config.only.begin(), config.only.end());
  for (const auto& def : registry()) {
    if (!def.applies(chart.kind)) continue;
    if (!only.empty() && !only.contains(def.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    CheckResult result;
    result.id = def.id;
    result.description = def.description;
    result.mode = def.mode;
    result.resolution = resolution_string(g);
    const auto override_it = config.tolerances.find(def.id);
    if (override_it != config.tolerances.end()) {
      result.tolerance = override_it->second;
    } else {
      result.tolerance = std::isnan(def.tolerance) ? ctx.hbar * std::abs(ctx.mean) : def.tolerance;
    }
    result.residual = def.run(ctx);
    result.pass = def.mode == CheckMode::floor ? result.residual >= result.tolerance
                                               : result.residual <= result.tolerance;
    result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.checks.push_back(std::move(result));
  }

  if (only.empty() || only.contains("torque.piece1") || only.contains("torque.piece2")) {
    // Each torque piece is anti-Hermitian on its own; report how far from Hermitian.
    for (int piece = 1; piece <= 2; ++piece) {
      const VectorOp& f = piece == 1 ? ops.force.f1 : ops.force.f2;
      const double worst = max_over_states(ctx, [&](const cvec& psi) {
        const Field3 a = torque_apply(ops.frame, f, psi);
        const Field3 b = torque_adjoint_apply(ops.frame, f, psi);
        Field3 diff;
        for (int c = 0; c < 3; ++c) diff[c] = a[c] - b[c];
        return ctx.vnorm(diff, all_components());
      });
      char buf[200];
      std::snprintf(buf, sizeof buf, "torque piece %d Hermiticity residual %.3e (no target asserted)", piece, worst);
      ctx.notes.emplace_back(buf);
      if (chart.kind == SurfaceKind::sphere) {
        const cplx expected = (piece == 1 ? -1.0 : 1.0) * cplx(0.0, ctx.hbar) / (ctx.m * ctx.r * ctx.r);
        const double unit = max_over_states(ctx, [&](const cvec& psi) {
          Field3 tau = torque_apply(ops.frame, f, psi);
          for (int c = 0; c < 3; ++c) tau[c] -= expected * ops.angular[c](psi);
          return ctx.vnorm(tau, all_components());
        });
        std::snprintf(buf, sizeof buf, "torque piece %d against %si hbar L/mR^2 (coefficient 1): residual %.3e", piece,
                      piece == 1 ? "-" : "+", unit);
        ctx.notes.emplace_back(buf);
      }
    }
  }
  report.notes = std::move(ctx.notes);
  return report;
}

namespace {

nlohmann::json chart_json(const ChartDescriptor& c) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(c.kind));
  j["R"] = c.radius;
  if (c.kind == SurfaceKind::cylinder) j["Lz"] = c.axial_period;
  j["hbar"] = c.hbar;
  j["mass"] = c.mass;
  j["resolution"] = std::to_string(c.n1) + "x" + std::to_string(c.n2);
  j["seed"] = c.seed;
  return j;
}

}  // namespace

std::string report_to_json(const Report& report) {
  nlohmann::json j;
  j["chart"] = chart_json(report.chart);
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"id", c.id},
                           {"description", c.description},
                           {"residual", c.residual},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass},
                           {"mode", std::string(to_string(c.mode))},
                           {"resolution", c.resolution},
                           {"wall_ms", c.wall_ms}});
  }
  j["notes"] = report.notes;
  j["summary"] = {{"pass", report.passed()}, {"fail", report.failed()}, {"flagged", report.flagged()}};
  return j.dump(2);
}

std::string report_to_text(const Report& report) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "chart %s  R=%g  res=%dx%d  seed=%llu\n", std::string(to_string(report.chart.kind)).c_str(),
                report.chart.radius, report.chart.n1, report.chart.n2,
                static_cast<unsigned long long>(report.chart.seed));
  out += line;
  std::snprintf(line, sizeof line, "%-30s %-8s %12s %12s %-6s %10s\n", "check", "mode", "residual", "tolerance",
                "result", "ms");
  out += line;
  out += std::string(83, '-') + "\n";
  for (const auto& c : report.checks) {
    const char* verdict = c.pass ? "PASS" : (c.mode == CheckMode::flag ? "FLAG" : "FAIL");
    std::snprintf(line, sizeof line, "%-30s %-8s %12.3e %12.3e %-6s %10.1f\n", c.id.c_str(),
                  std::string(to_string(c.mode)).c_str(), c.residual, c.tolerance, verdict, c.wall_ms);
    out += line;
  }
  std::snprintf(line, sizeof line, "passed %d  failed %d  flagged %d\n", report.passed(), report.failed(),
                report.flagged());
  out += line;
  for (const auto& n : report.notes) out += "note: " + n + "\n";
  return out;
}

ConvergenceTable convergence_study(const Chart& chart, const std::vector<std::pair<int, int>>& resolutions,
                                   std::uint64_t seed, const std::vector<std::string>& ids) {
  if (resolutions.size() < 2) throw Error(ErrorCode::invalid_argument, "a convergence study needs at least two resolutions");
  for (std::size_t k = 1; k < resolutions.size(); ++k) {
    const auto [a1, a2] = resolutions[k - 1];
    const auto [b1, b2] = resolutions[k];
    if (b1 < a1 || b2 < a2 || static_cast<long>(b1) * b2 <= static_cast<long>(a1) * a2)
      throw Error(ErrorCode::invalid_argument, "resolutions must be strictly increasing");
  }
  if (ids.empty()) throw Error(ErrorCode::invalid_argument, "no checks selected");

  ConvergenceTable table;
  table.ids = ids;
  SuiteConfig config;
  config.seed = seed;
  config.only = ids;
  const auto [c1, c2] = resolutions.front();
  if (chart.kind == SurfaceKind::sphere) {
    config.family = std::pair{c1 / 2, 0};
  } else {
    config.family = std::pair{c1 / 4, c2 == 1 ? 0 : c2 / 4};
  }
  for (const auto& [n1, n2] : resolutions) {
    const Report report = run_suite(chart, build_grid(chart, n1, n2), config);
    ConvergenceRow row{n1, n2, {}};
    for (const auto& id : ids) {
      const CheckResult* c = report.find(id);
      if (!c) throw Error(ErrorCode::invalid_argument, "check '" + id + "' does not apply to this chart");
      row.residuals.push_back(c->residual);
    }
    table.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    bool monotone = true, spectral = true;
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
      const double prev = table.rows[k - 1].residuals[i];
      const double cur = table.rows[k].residuals[i];
      if (cur > std::max(prev, table.floor)) monotone = false;
      if (cur > std::max(prev / 10.0, table.floor)) spectral = false;
    }
    table.monotone.push_back(monotone);
    table.spectral.push_back(spectral);
  }
  return table;
}

std::string convergence_to_json(const ConvergenceTable& table) {
  nlohmann::json j;
  j["ids"] = table.ids;
  j["floor"] = table.floor;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows)
    j["rows"].push_back({{"resolution", std::to_string(row.n1) + "x" + std::to_string(row.n2)},
                         {"residuals", row.residuals}});
  j["monotone"] = table.monotone;
  j["spectral"] = table.spectral;
  return j.dump(2);
}

}  // namespace cqop
