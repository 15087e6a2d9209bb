#include "cqop/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace cqop {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

// P̄_l^m for l = m..lmax; zero-length when m > lmax.
void legendre_column(int lmax, int m, double x, double s, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(std::max(0, lmax - m + 1)), 0.0);
  if (m > lmax || m < 0) return;
  double pmm = std::sqrt(0.5);
  for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  out[0] = pmm;
  if (lmax == m) return;
  out[1] = std::sqrt(2.0 * m + 3.0) * x * pmm;
  for (int l = m + 2; l <= lmax; ++l) {
    const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
    const double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - static_cast<double>(m) * m) /
                               (4.0 * (l - 1) * (l - 1) - 1.0));
    out[l - m] = a * (x * out[l - m - 1] - b * out[l - m - 2]);
  }
}

// Uniform-node Fourier differentiation matrix for an even number of points on a
// period of length `period`; the Nyquist mode is differentiated to zero.
Eigen::MatrixXd fourier_diff(int n, double period) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  if (n == 1) return d;
  const double scale = 2.0 * kPi / period;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int diff = j - k;
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      d(j, k) = scale * 0.5 * sign / std::tan(kPi * diff / n);
    }
  }
  return d;
}

void build_sphere(Grid& g) {
  const int n1 = g.n1;
  const int n2 = g.n2;
  gauss_legendre(n1, g.legendre_x, g.legendre_weights);
  const double dphi = 2.0 * kPi / n2;
  g.q1.resize(static_cast<std::size_t>(g.size()));
  g.q2.resize(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      g.q1[i * n2 + j] = std::acos(g.legendre_x[i]);
      g.q2[i * n2 + j] = j * dphi;
    }
  }

  // Per-|m| theta blocks of the transform band l = |m| .. N1-1:
  //   proj[m](i, i') = sum_l P(x_i) P(x_i') w_i'      (projector)
  //   dth[m](i, i')  = sum_l dP/dtheta(x_i) P(x_i') w_i'
  const int lmax = n1 - 1;
  const int mmax = std::min(n2 / 2 - 1, lmax);
  std::vector<Eigen::MatrixXd> proj(static_cast<std::size_t>(mmax + 1));
  std::vector<Eigen::MatrixXd> dth(static_cast<std::size_t>(mmax + 1));
  std::vector<double> p(static_cast<std::size_t>(n1)), dp(static_cast<std::size_t>(n1));
  for (int m = 0; m <= mmax; ++m) {
    const int count = lmax - m + 1;
    Eigen::MatrixXd vals(n1, count), ders(n1, count);
    for (int i = 0; i < n1; ++i) {
      const double x = g.legendre_x[i];
      const double s = std::sqrt(1.0 - x * x);
      normalized_legendre(lmax, m, x, s, std::span(p.data(), static_cast<std::size_t>(count)),
                          std::span(dp.data(), static_cast<std::size_t>(count)));
      for (int l = 0; l < count; ++l) {
        vals(i, l) = p[l];
        ders(i, l) = dp[l];
      }
    }
    Eigen::MatrixXd weighted = vals.transpose();
    for (int i = 0; i < n1; ++i) weighted.col(i) *= g.legendre_weights[i];
    proj[m] = vals * weighted;
    dth[m] = ders * weighted;
  }

  // Azimuthal kernels, combining +m and -m: theta part uses cos(m dphi), phi
  // derivative uses d/dphi of the same, -m sin(m dphi).
  const int n = g.size();
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> cos_k(static_cast<std::size_t>((mmax + 1) * n2)), sin_k(cos_k.size());
  for (int m = 0; m <= mmax; ++m) {
    for (int dj = 0; dj < n2; ++dj) {
      const double factor = (m == 0 ? 1.0 : 2.0) / n2;
      cos_k[m * n2 + dj] = factor * std::cos(m * dj * dphi);
      sin_k[m * n2 + dj] = -factor * m * std::sin(m * dj * dphi);
    }
  }
  for (int i = 0; i < n1; ++i) {
    for (int ip = 0; ip < n1; ++ip) {
      for (int j = 0; j < n2; ++j) {
        for (int jp = 0; jp < n2; ++jp) {
          const int dj = ((j - jp) % n2 + n2) % n2;
          double a = 0.0, b = 0.0;
          for (int m = 0; m <= mmax; ++m) {
            a += cos_k[m * n2 + dj] * dth[m](i, ip);
            b += sin_k[m * n2 + dj] * proj[m](i, ip);
          }
          d1(i * n2 + j, ip * n2 + jp) = a;
          d2(i * n2 + j, ip * n2 + jp) = b;
        }
      }
    }
  }
  g.d1 = d1.cast<cplx>();
  g.d2 = d2.cast<cplx>();

  for (int l = 0; l <= n1 - 2; ++l) {
    for (int m = -l; m <= l; ++m) {
      if (std::abs(m) <= n2 / 2 - 1) g.band.push_back({l, m});
    }
  }
}

void build_periodic(Grid& g) {
  const int n1 = g.n1;
  const int n2 = g.n2;
  const double h1 = 2.0 * kPi / n1;
  const double h2 = g.axial_period / n2;
  g.q1.resize(static_cast<std::size_t>(g.size()));
  g.q2.resize(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      g.q1[i * n2 + j] = i * h1;
      g.q2[i * n2 + j] = j * h2;
    }
  }
  const Eigen::MatrixXd dth = fourier_diff(n1, 2.0 * kPi);
  const Eigen::MatrixXd dz = fourier_diff(n2, g.axial_period);
  const int n = g.size();
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n1; ++i)
    for (int ip = 0; ip < n1; ++ip)
      for (int j = 0; j < n2; ++j) d1(i * n2 + j, ip * n2 + j) = dth(i, ip);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      for (int jp = 0; jp < n2; ++jp) d2(i * n2 + j, i * n2 + jp) = dz(j, jp);
  g.d1 = d1.cast<cplx>();
  g.d2 = d2.cast<cplx>();

  // The Cartesian frame multiplies by cos/sin(theta), shifting the angular
  // index by one; |n| = N1/2 - 1 would land on the Nyquist mode, whose
  // derivative is dropped, so the angular band stops one short of it.
  const int kmax = n2 == 1 ? 0 : n2 / 2 - 1;
  for (int nn = -(n1 / 2 - 2); nn <= n1 / 2 - 2; ++nn)
    for (int k = -kmax; k <= kmax; ++k) g.band.push_back({nn, k});
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
  if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
}

void normalized_legendre(int lmax, int m, double x, double s, std::span<double> p, std::span<double> dp) {
  std::vector<double> mid, up, down;
  legendre_column(lmax, m, x, s, mid);
  legendre_column(lmax, m + 1, x, s, up);
  if (m > 0) legendre_column(lmax, m - 1, x, s, down);
  for (int l = m; l <= lmax; ++l) {
    const std::size_t k = static_cast<std::size_t>(l - m);
    p[k] = mid[k];
    const double pu = (l >= m + 1) ? up[static_cast<std::size_t>(l - m - 1)] : 0.0;
    if (m == 0) {
      dp[k] = -std::sqrt(static_cast<double>(l) * (l + 1)) * pu;
    } else {
      const double pd = down[static_cast<std::size_t>(l - m + 1)];
      dp[k] = 0.5 * (std::sqrt(static_cast<double>(l + m) * (l - m + 1)) * pd -
                     std::sqrt(static_cast<double>(l - m) * (l + m + 1)) * pu);
    }
  }
}

double Grid::area() const {
  switch (kind) {
    case SurfaceKind::sphere: return 4.0 * kPi * radius * radius;
    case SurfaceKind::cylinder: return 2.0 * kPi * radius * axial_period;
    case SurfaceKind::ring: return 2.0 * kPi * radius;
    case SurfaceKind::custom: break;
  }
  return weights.sum();
}

cvec Grid::sample_mode(SpectralMode mode) const {
  cvec out(size());
  if (kind == SurfaceKind::sphere) {
    const int l = mode.first;
    const int m = std::abs(mode.second);
    if (l < 0 || m > l) invalid("invalid spherical harmonic index");
    std::vector<double> col;
    const double norm = 1.0 / (std::sqrt(2.0 * kPi) * radius);
    for (int i = 0; i < n1; ++i) {
      const double x = legendre_x[static_cast<std::size_t>(i)];
      legendre_column(l, m, x, std::sqrt(1.0 - x * x), col);
      const double pl = col[static_cast<std::size_t>(l - m)];
      for (int j = 0; j < n2; ++j) {
        const double phi = q2[static_cast<std::size_t>(i * n2 + j)];
        out(i * n2 + j) = norm * pl * std::polar(1.0, mode.second * phi);
      }
    }
    return out;
  }
  const double norm = 1.0 / std::sqrt(area());
  for (int node = 0; node < size(); ++node) {
    const double phase = mode.first * q1[static_cast<std::size_t>(node)] +
                         2.0 * kPi * mode.second * q2[static_cast<std::size_t>(node)] / axial_period;
    out(node) = norm * std::polar(1.0, phase);
  }
  return out;
}

rvec Grid::sample(const std::function<double(double, double)>& f) const {
  rvec out(size());
  for (int k = 0; k < size(); ++k) out(k) = f(q1[static_cast<std::size_t>(k)], q2[static_cast<std::size_t>(k)]);
  return out;
}

rvec Grid::sample(const Expr& f) const {
  Bindings b{{coords[0], 0.0}, {coords[1], 0.0}, {coords[2], a}};
  rvec out(size());
  for (int k = 0; k < size(); ++k) {
    b[coords[0]] = q1[static_cast<std::size_t>(k)];
    b[coords[1]] = q2[static_cast<std::size_t>(k)];
    out(k) = evaluate(f, b);
  }
  return out;
}

bool Grid::in_test_band(SpectralMode mode) const {
  if (kind == SurfaceKind::sphere) return mode.first <= n1 / 2 && std::abs(mode.second) <= mode.first;
  return std::abs(mode.first) <= n1 / 4 && std::abs(mode.second) <= n2 / 4;
}

GridPtr build_grid(const Chart& chart, int n1, int n2) {
  if (chart.kind == SurfaceKind::custom)
    throw Error(ErrorCode::unsupported, "grids are available for the sphere, cylinder and ring charts only");
  switch (chart.kind) {
    case SurfaceKind::sphere:
      if (n1 < kMinResolution || n2 < kMinResolution)
        invalid("resolution below minimum: sphere needs N1 >= 8 and N2 >= 8");
      if (n2 % 2) invalid("odd Fourier size: N2 must be even");
      break;
    case SurfaceKind::cylinder:
      if (n1 < kMinResolution || n2 < kMinResolution)
        invalid("resolution below minimum: cylinder needs N1 >= 8 and N2 >= 8");
      if (n1 % 2 || n2 % 2) invalid("odd Fourier size: cylinder resolutions must be even");
      break;
    case SurfaceKind::ring:
      if (n1 < kMinResolution) invalid("resolution below minimum: ring needs N1 >= 8");
      if (n1 % 2) invalid("odd Fourier size: ring N1 must be even");
      if (n2 != 1) invalid("ring grids take N2 = 1");
      break;
    case SurfaceKind::custom: break;
  }
  if (static_cast<long long>(n1) * n2 > kMaxNodes)
    invalid("resolution above maximum: at most " + std::to_string(kMaxNodes) + " nodes");

  auto g = std::make_shared<Grid>();
  g->kind = chart.kind;
  g->n1 = n1;
  g->n2 = n2;
  g->radius = chart.a;
  g->axial_period = chart.domains[1].length();
  g->coords = chart.coords;
  g->a = chart.a;
  if (chart.kind == SurfaceKind::sphere) {
    build_sphere(*g);
  } else {
    build_periodic(*g);
  }

  // Weights carry the h1*h2 measure; the sphere's Gauss weights live in
  // cos(theta), hence the 1/sin(theta) Jacobian.
  const rvec area_element = g->sample(chart.h[0] * chart.h[1]);
  g->weights.resize(g->size());
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const int k = i * n2 + j;
      double w = 0.0;
      if (chart.kind == SurfaceKind::sphere) {
        w = area_element(k) * g->legendre_weights[static_cast<std::size_t>(i)] /
            std::sin(g->q1[static_cast<std::size_t>(k)]) * (2.0 * kPi / n2);
      } else {
        w = area_element(k) * (2.0 * kPi / n1) * (g->axial_period / n2);
      }
      g->weights(k) = w;
    }
  }

  g->band_basis.resize(g->size(), static_cast<Eigen::Index>(g->band.size()));
  for (std::size_t b = 0; b < g->band.size(); ++b) g->band_basis.col(static_cast<Eigen::Index>(b)) = g->sample_mode(g->band[b]);
  return g;
}

cplx inner_product(const Grid& g, const cvec& a, const cvec& b) {
  if (a.size() != g.size() || b.size() != g.size())
    throw Error(ErrorCode::grid_mismatch, "state size does not match grid");
  cplx sum = 0.0;
  for (int k = 0; k < g.size(); ++k) sum += g.weights(k) * std::conj(a(k)) * b(k);
  return sum;
}

cplx inner_product(const SurfaceState& a, const SurfaceState& b) {
  require_same_grid(a.grid, b.grid);
  return inner_product(*a.grid, a.values, b.values);
}

double norm(const Grid& g, const cvec& v) { return std::sqrt(std::max(0.0, inner_product(g, v, v).real())); }

SurfaceState normalize(SurfaceState s) {
  const double n = norm(*s.grid, s.values);
  if (!(n > 0.0)) throw Error(ErrorCode::numeric, "cannot normalize a zero state");
  s.values /= n;
  return s;
}

cvec project_to_band(const Grid& g, const cvec& v) {
  const cvec weighted = g.weights.cast<cplx>().cwiseProduct(v);
  const cvec coeffs = g.band_basis.adjoint() * weighted;
  return g.band_basis * coeffs;
}

ScalarOp mult_op(const GridPtr& g, const std::function<double(double, double)>& f, std::string label) {
  const rvec d = g->sample(f);
  for (int k = 0; k < d.size(); ++k) {
    if (!std::isfinite(d(k)))
      throw Error(ErrorCode::domain, "multiplication operator '" + label + "' is not finite at node " + std::to_string(k));
  }
  return ScalarOp{d.cast<cplx>().asDiagonal().toDenseMatrix(), g, std::move(label)};
}

ScalarOp mult_op(const GridPtr& g, const Expr& f) {
  rvec d;
  try {
    d = g->sample(f);
  } catch (const ExprError& e) {
    throw Error(ErrorCode::domain, std::string("multiplication operator: ") + e.what());
  }
  for (int k = 0; k < d.size(); ++k) {
    if (!std::isfinite(d(k))) throw Error(ErrorCode::domain, "multiplication operator is not finite at node " + std::to_string(k));
  }
  return ScalarOp{d.cast<cplx>().asDiagonal().toDenseMatrix(), g, to_string(f)};
}

ScalarOp deriv_op(const GridPtr& g, Coord coord) {
  return coord == Coord::q1 ? ScalarOp{g->d1, g, "d/d" + g->coords[0]} : ScalarOp{g->d2, g, "d/d" + g->coords[1]};
}

std::vector<cvec> test_states(const Grid& g, int count, std::uint64_t seed, int max_first, int max_second) {
  std::vector<SpectralMode> modes;
  if (g.kind == SurfaceKind::sphere) {
    // Leaves room for operator products to raise |m| without reaching Nyquist.
    const int mcap = std::max(0, g.n2 / 2 - 4);
    for (int l = 0; l <= max_first; ++l)
      for (int m = -l; m <= l; ++m)
        if (std::abs(m) <= mcap) modes.push_back({l, m});
  } else {
    for (int n = -max_first; n <= max_first; ++n)
      for (int k = -max_second; k <= max_second; ++k) modes.push_back({n, k});
  }
  std::vector<cvec> basis;
  basis.reserve(modes.size());
  for (const auto& m : modes) basis.push_back(g.sample_mode(m));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cvec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    cvec v = cvec::Zero(g.size());
    for (const auto& b : basis) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v += cplx(re, im) * b;
    }
    v /= norm(g, v);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<cvec> test_states(const Grid& g, int count, std::uint64_t seed) {
  if (g.kind == SurfaceKind::sphere) return test_states(g, count, seed, g.n1 / 2, 0);
  return test_states(g, count, seed, g.n1 / 4, g.n2 == 1 ? 0 : g.n2 / 4);
}

}  // namespace cqop
