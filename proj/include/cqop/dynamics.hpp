#pragma once

// Time evolution under H by phases in its eigenbasis, with observables logged
// at every step.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cqop/operators.hpp"

namespace cqop {

struct Observables {
  double t = 0.0;
  double norm = 0.0;
  double energy = 0.0;
  double lz = 0.0;
  std::array<double, 3> force{};
  std::array<double, 3> position{};
  std::array<double, 3> momentum{};
  std::array<double, 3> torque{};
};

struct EvolutionRun {
  SurfaceState initial;
  double dt = 0.0;
  int steps = 0;
  BandEigensystem eigen;
  cvec coefficients;  // initial state in the eigenbasis
  std::vector<Observables> series;  // steps + 1 entries, t = 0 included
};

/// <psi|A psi> under the weighted inner product.
[[nodiscard]] cplx expectation(const ScalarOp& a, const SurfaceState& psi);
/// Real part of the expectation of a Hermitian operator; throws Error(numeric)
/// when the imaginary part exceeds 1e-10 (relative to max(1, |Re|)).
[[nodiscard]] double expectation_real(const ScalarOp& a, const SurfaceState& psi);
[[nodiscard]] std::array<double, 3> expectation_real(const VectorOp& a, const SurfaceState& psi);

/// Eigendecomposition of H plus the logged observables compressed onto the
/// eigenbasis (A_b = V^H W A V), built once and reused across runs.
class Propagator {
public:
  /// Throws Error(numeric) if H is not Hermitian to 1e-10 on the test family.
  explicit Propagator(const OperatorSet& ops);

  /// psi(t + dt) = sum_k exp(-i E_k dt/hbar) c_k(t) phi_k. Throws
  /// Error(invalid_argument) for a non-positive dt, negative steps, or an
  /// initial state outside the band.
  [[nodiscard]] EvolutionRun run(const SurfaceState& psi0, double dt, int steps) const;
  [[nodiscard]] const BandEigensystem& eigensystem() const { return eigen_; }

private:
  const OperatorSet* ops_;
  BandEigensystem eigen_;
  cmat energy_, lz_;
  std::array<cmat, 3> force_, position_, momentum_, torque_;
};

[[nodiscard]] EvolutionRun propagate(const OperatorSet& ops, const SurfaceState& psi0, double dt, int steps);

/// State at time t of a run.
[[nodiscard]] SurfaceState state_at(const EvolutionRun& run, double t, double hbar);

/// exp(-d^2 / 4 sigma^2) exp(i l0 q2) around the reference point, projected on
/// the band and normalized. d is the great-circle angle on the sphere and
/// sqrt(dtheta^2 + (dz/R)^2) on the cylinder and ring; the reference point is
/// (theta, phi) = (pi/2, 0) on the sphere and theta = 0, z = Lz/2 otherwise.
/// On the cylinder and ring the phase winds around the axis, exp(i l0 theta).
[[nodiscard]] SurfaceState gaussian_packet(const Chart& chart, const GridPtr& grid, double sigma = 0.3, int l0 = 4);

/// Equal-weight superposition of spectral modes, normalized.
[[nodiscard]] SurfaceState mode_superposition(const GridPtr& grid, const std::vector<SpectralMode>& modes);

/// Header "t,norm,E,Lz,Fx,Fy,Fz,x,y,z", 17 significant digits.
[[nodiscard]] std::string series_to_csv(const EvolutionRun& run);

struct EvolutionSummary {
  int steps = 0;
  double dt = 0.0;
  double norm_drift = 0.0;
  double energy_drift = 0.0;
  double lz_drift = 0.0;
  double max_torque = 0.0;  // largest |<tau_c>| over components that must vanish
  double ehrenfest = 0.0;   // max |d<p>/dt - <F>| / max |<F>|
  // Classical correspondence at t = 0.
  double force_angle_deg = 0.0;   // angle between <F> and -<r_hat>
  double direction_cosine = 0.0;  // cos of that angle
  double magnitude_ratio = 0.0;   // |<F>| / (m <v^2> / R)
};

[[nodiscard]] EvolutionSummary summarize(const OperatorSet& ops, const EvolutionRun& run);
[[nodiscard]] std::string summary_to_json(const EvolutionSummary& s);

/// Five-point central difference of <p> compared with <F> over the interior of
/// the series.
[[nodiscard]] double ehrenfest_residual(const EvolutionRun& run);

}  // namespace cqop
