#include "cqop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

namespace cqop {

namespace {

cmat weighted(const Grid& g, const cmat& v) {
  cmat out = v;
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) *= g.weights(r);
  return out;
}

cmat scaled_rows(const rvec& d, const cmat& v) {
  cmat out = v;
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) *= d(r);
  return out;
}

double quadratic(const cvec& c, const cmat& a) { return (c.adjoint() * (a * c))(0).real(); }

void require_hermitian(const OperatorSet& ops) {
  const double r = hermiticity_residual(ops.hamiltonian, test_states(*ops.grid, 4, 1));
  if (r > 1e-10) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "Hamiltonian is not Hermitian (residual %.3e)", r);
    throw Error(ErrorCode::numeric, buf);
  }
}

std::initializer_list<int> torque_components(SurfaceKind kind) {
  static const std::initializer_list<int> all = {0, 1, 2};
  static const std::initializer_list<int> z_only = {2};
  return kind == SurfaceKind::sphere ? all : z_only;
}

}  // namespace

cplx expectation(const ScalarOp& a, const SurfaceState& psi) {
  require_same_grid(a.grid, psi.grid);
  return inner_product(*psi.grid, psi.values, a(psi.values));
}

double expectation_real(const ScalarOp& a, const SurfaceState& psi) {
  const cplx e = expectation(a, psi);
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real()))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "expectation of %s has imaginary part %.3e", a.label.c_str(), e.imag());
    throw Error(ErrorCode::numeric, buf);
  }
  return e.real();
}

std::array<double, 3> expectation_real(const VectorOp& a, const SurfaceState& psi) {
  return {expectation_real(a[0], psi), expectation_real(a[1], psi), expectation_real(a[2], psi)};
}

Propagator::Propagator(const OperatorSet& ops) : ops_(&ops) {
  require_hermitian(ops);
  eigen_ = band_eigensystem(ops.hamiltonian);
  const Grid& g = *ops.grid;
  const cmat& v = eigen_.vectors;
  const cmat wv = weighted(g, v);
  auto band = [&](const cmat& av) -> cmat { return wv.adjoint() * av; };
  energy_ = band(ops.hamiltonian.matrix * v);
  lz_ = band(ops.angular[2].matrix * v);
  std::array<cmat, 3> rv, fv;
  for (int k = 0; k < 3; ++k) {
    rv[k] = scaled_rows(ops.frame.position[k], v);
    fv[k] = ops.force.total[k].matrix * v;
    force_[k] = band(fv[k]);
    position_[k] = band(rv[k]);
    momentum_[k] = band(ops.momentum[k].matrix * v);
  }
  // tau_i = 1/2 (R_j F_k - R_k F_j - F_j R_k + F_k R_j), only where it is checked.
  for (int i : torque_components(ops.chart.kind)) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    cmat t = weighted(g, rv[j]).adjoint() * fv[k] - weighted(g, rv[k]).adjoint() * fv[j];
    t -= band(ops.force.total[j].matrix * rv[k]);
    t += band(ops.force.total[k].matrix * rv[j]);
    torque_[i] = 0.5 * t;
  }
}

EvolutionRun Propagator::run(const SurfaceState& psi0, double dt, int steps) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::invalid_argument, "time step must be positive");
  if (steps < 0) throw Error(ErrorCode::invalid_argument, "step count must be non-negative");
  require_same_grid(ops_->grid, psi0.grid);

  const Grid& g = *ops_->grid;
  EvolutionRun run;
  run.initial = psi0;
  run.dt = dt;
  run.steps = steps;
  run.eigen = eigen_;
  const cmat& v = eigen_.vectors;
  run.coefficients = weighted(g, v).adjoint() * psi0.values;
  const double lost = norm(g, v * run.coefficients - psi0.values);
  if (lost > 1e-8 * norm(g, psi0.values))
    throw Error(ErrorCode::invalid_argument, "initial state is not resolved by the grid band; project it first");

  const double hbar = ops_->hbar();
  run.series.reserve(static_cast<std::size_t>(steps) + 1);
  for (int s = 0; s <= steps; ++s) {
    const double t = s * dt;
    // Phases from t = 0 each step, so rounding does not accumulate.
    cvec ct = run.coefficients;
    for (Eigen::Index k = 0; k < ct.size(); ++k) ct(k) *= std::polar(1.0, -eigen_.values(k) * t / hbar);
    Observables o;
    o.t = t;
    o.norm = norm(g, v * ct);
    o.energy = quadratic(ct, energy_);
    o.lz = quadratic(ct, lz_);
    for (int k = 0; k < 3; ++k) {
      o.force[k] = quadratic(ct, force_[k]);
      o.position[k] = quadratic(ct, position_[k]);
      o.momentum[k] = quadratic(ct, momentum_[k]);
      o.torque[k] = torque_[k].size() ? quadratic(ct, torque_[k]) : 0.0;
    }
    run.series.push_back(o);
  }
  return run;
}

EvolutionRun propagate(const OperatorSet& ops, const SurfaceState& psi0, double dt, int steps) {
  return Propagator(ops).run(psi0, dt, steps);
}

SurfaceState state_at(const EvolutionRun& run, double t, double hbar) {
  cvec ct = run.coefficients;
  for (Eigen::Index k = 0; k < ct.size(); ++k) ct(k) *= std::polar(1.0, -run.eigen.values(k) * t / hbar);
  return SurfaceState{run.eigen.vectors * ct, run.initial.grid};
}

SurfaceState gaussian_packet(const Chart& chart, const GridPtr& grid, double sigma, int l0) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::invalid_argument, "packet width sigma must be positive");
  if (chart.kind == SurfaceKind::custom) throw Error(ErrorCode::unsupported, "packets need a built-in chart");
  const Grid& g = *grid;
  cvec values(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const double q1 = g.q1[static_cast<std::size_t>(k)];
    const double q2 = g.q2[static_cast<std::size_t>(k)];
    double d = 0.0, phase = 0.0;
    if (chart.kind == SurfaceKind::sphere) {
      // Angle to the point on the equator at phi = 0.
      d = std::acos(std::clamp(std::sin(q1) * std::cos(q2), -1.0, 1.0));
      phase = l0 * q2;
    } else {
      const double dtheta = std::remainder(q1, 2.0 * std::numbers::pi);
      const double dz = chart.kind == SurfaceKind::cylinder ? (q2 - 0.5 * g.axial_period) / chart.a : 0.0;
      d = std::hypot(dtheta, dz);
      phase = l0 * q1;
    }
    values(k) = std::exp(-d * d / (4.0 * sigma * sigma)) * std::polar(1.0, phase);
  }
  return normalize(SurfaceState{project_to_band(g, values), grid});
}

SurfaceState mode_superposition(const GridPtr& grid, const std::vector<SpectralMode>& modes) {
  if (modes.empty()) throw Error(ErrorCode::invalid_argument, "no modes given");
  cvec values = cvec::Zero(grid->size());
  for (const auto& m : modes) {
    if (std::find(grid->band.begin(), grid->band.end(), m) == grid->band.end())
      throw Error(ErrorCode::invalid_argument,
                  "mode (" + std::to_string(m.first) + ", " + std::to_string(m.second) + ") is outside the grid band");
    values += grid->sample_mode(m);
  }
  return normalize(SurfaceState{values, grid});
}

std::string series_to_csv(const EvolutionRun& run) {
  std::string out = "t,norm,E,Lz,Fx,Fy,Fz,x,y,z\n";
  char line[512];
  for (const auto& o : run.series) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", o.t, o.norm,
                  o.energy, o.lz, o.force[0], o.force[1], o.force[2], o.position[0], o.position[1], o.position[2]);
    out += line;
  }
  return out;
}

double ehrenfest_residual(const EvolutionRun& run) {
  const auto& s = run.series;
  if (s.size() < 5) throw Error(ErrorCode::invalid_argument, "the Ehrenfest check needs at least 4 steps");
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 2; i + 2 < s.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double dp = (-s[i + 2].momentum[c] + 8.0 * s[i + 1].momentum[c] - 8.0 * s[i - 1].momentum[c] +
                         s[i - 2].momentum[c]) /
                        (12.0 * run.dt);
      worst = std::max(worst, std::abs(dp - s[i].force[c]));
      scale = std::max(scale, std::abs(s[i].force[c]));
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

EvolutionSummary summarize(const OperatorSet& ops, const EvolutionRun& run) {
  EvolutionSummary out;
  out.steps = run.steps;
  out.dt = run.dt;
  const Observables& first = run.series.front();
  for (const auto& o : run.series) {
    out.norm_drift = std::max(out.norm_drift, std::abs(o.norm - 1.0));
    out.energy_drift = std::max(out.energy_drift, std::abs(o.energy - first.energy));
    out.lz_drift = std::max(out.lz_drift, std::abs(o.lz - first.lz));
    for (int c : torque_components(ops.chart.kind)) out.max_torque = std::max(out.max_torque, std::abs(o.torque[c]));
  }
  out.ehrenfest = run.series.size() >= 5 ? ehrenfest_residual(run) : 0.0;

  // <r_hat> is the normal direction; on the cylinder only its radial (x, y) part.
  const SurfaceState psi = normalize(run.initial);
  std::array<double, 3> rhat{};
  for (int c = 0; c < 3; ++c) {
    const ScalarOp n{ops.frame.e3[c].cast<cplx>().asDiagonal().toDenseMatrix(), ops.grid, "n"};
    rhat[c] = expectation_real(n, psi);
  }
  const auto& f = first.force;
  const double fnorm = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
  const double rnorm = std::sqrt(rhat[0] * rhat[0] + rhat[1] * rhat[1] + rhat[2] * rhat[2]);
  if (fnorm > 0.0 && rnorm > 0.0) {
    out.direction_cosine = -(f[0] * rhat[0] + f[1] * rhat[1] + f[2] * rhat[2]) / (fnorm * rnorm);
    out.force_angle_deg = std::acos(std::clamp(out.direction_cosine, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  }
  const double v2 = expectation_real(ops.v2_force, psi);
  const double classical = ops.mass() * v2 / ops.radius();
  out.magnitude_ratio = classical > 0.0 ? fnorm / classical : 0.0;
  return out;
}

std::string summary_to_json(const EvolutionSummary& s) {
  nlohmann::json j;
  j["steps"] = s.steps;
  j["dt"] = s.dt;
  j["norm_drift"] = s.norm_drift;
  j["energy_drift"] = s.energy_drift;
  j["lz_drift"] = s.lz_drift;
  j["max_torque"] = s.max_torque;
  j["ehrenfest_residual"] = s.ehrenfest;
  j["force_angle_deg"] = s.force_angle_deg;
  j["direction_cosine"] = s.direction_cosine;
  j["magnitude_ratio"] = s.magnitude_ratio;
  return j.dump(2);
}

}  // namespace cqop
