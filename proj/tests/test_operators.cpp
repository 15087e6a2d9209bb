#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "cqop/error.hpp"
#include "cqop/operators.hpp"

using namespace cqop;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

struct Fixture {
  Chart chart;
  GridPtr grid;
  OperatorSet ops;
  Fixture(SurfaceKind kind, int n1, int n2, double r = 1.0, double lz = 10.0)
      : chart(builtin_chart(kind, r, lz)), grid(build_grid(chart, n1, n2)), ops(build_operators(chart, grid)) {}
};

const Fixture& sphere() {
  static const Fixture f(SurfaceKind::sphere, 12, 24);
  return f;
}
const Fixture& cylinder() {
  static const Fixture f(SurfaceKind::cylinder, 16, 16);
  return f;
}
const Fixture& ring() {
  static const Fixture f(SurfaceKind::ring, 32, 1);
  return f;
}

cvec field_times(const rvec& f, const cvec& psi) { return f.cast<cplx>().cwiseProduct(psi); }

double rel(const cvec& a, const cvec& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_CASE("surface gradient") {
  const auto& s = sphere();
  const cvec y00 = s.grid->sample_mode({0, 0});
  for (int c = 0; c < 3; ++c) CHECK(s.ops.gradient[c](y00).norm() <= 1e-12 * y00.norm());

  // Divergence of the normal: sum_c G_c (r_hat_c psi) = (2/R) psi on constants.
  cvec div = cvec::Zero(y00.size());
  for (int c = 0; c < 3; ++c) div += s.ops.gradient[c](field_times(s.ops.frame.e3[c], y00));
  CHECK(rel(div, 2.0 * y00) <= 1e-12);

  const auto& cy = cylinder();
  const cvec e1 = cy.grid->sample_mode({1, 0});
  for (int c = 0; c < 3; ++c)
    CHECK((cy.ops.gradient[c](e1) - I * field_times(cy.ops.frame.e1[c], e1)).norm() <= 1e-12 * e1.norm());
}

TEST_CASE("surface momentum is Hermitian; the bare gradient is not") {
  for (const Fixture* f : {&sphere(), &cylinder(), &ring()}) {
    const auto states = test_states(*f->grid, 8, 2);
    CHECK(hermiticity_residual(f->ops.momentum, states) <= 1e-10);
    const VectorOp bare = bare_gradient_momentum(f->chart, f->grid);
    // Defect (-i hbar grad)^dagger - (-i hbar grad) = -2 i hbar M r_hat; |r_hat| = 1.
    const double m = f->chart.kind == SurfaceKind::sphere ? 1.0 : 0.5;  // |M| at R = 1
    for (const auto& psi : states) {
      double defect2 = 0.0;
      for (int c = 0; c < 3; ++c) defect2 += std::pow(norm(*f->grid, adjoint_apply(bare[c], psi) - bare[c](psi)), 2);
      CHECK(std::sqrt(defect2) / norm(*f->grid, psi) == doctest::Approx(2.0 * m).epsilon(1e-10));
    }
  }
}

TEST_CASE("ring momentum on a plane wave") {
  const auto& r = ring();
  const cvec psi = r.grid->sample_mode({1, 0});
  for (int c = 0; c < 3; ++c) {
    const cvec expected = field_times(r.ops.frame.e1[c], psi) + (I / 2.0) * field_times(r.ops.frame.e3[c], psi);
    CHECK((r.ops.momentum[c](psi) - expected).norm() <= 1e-12 * psi.norm());
  }
}

TEST_CASE("Hamiltonian spectrum") {
  const auto eig = band_eigensystem(sphere().ops.hamiltonian);
  CHECK(std::abs(eig.values(0)) <= 1e-12);
  for (int k = 1; k <= 3; ++k) CHECK(eig.values(k) == doctest::Approx(1.0).epsilon(1e-12));
  int fifteen = 0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k)
    if (std::abs(eig.values(k) - 15.0) <= 1e-9) ++fifteen;
  CHECK(fifteen == 11);

  const auto cy = band_eigensystem(cylinder().ops.hamiltonian);
  CHECK(cy.values(0) == doctest::Approx(-0.125).epsilon(1e-12));
  // Eigenvectors are orthonormal under the weights.
  const auto& g = *sphere().grid;
  const cmat gram = eig.vectors.adjoint() * g.weights.cast<cplx>().asDiagonal() * eig.vectors;
  CHECK((gram - cmat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("velocity squared") {
  const auto& s = sphere();
  const cvec y00 = s.grid->sample_mode({0, 0});
  CHECK(rel(s.ops.v2(y00), y00) <= 1e-12);
  const auto& r = ring();
  const cvec e1 = r.grid->sample_mode({1, 0});
  CHECK(rel(r.ops.v2(e1), 1.25 * e1) <= 1e-12);

  for (const Fixture* f : {&sphere(), &cylinder(), &ring()}) {
    const ScalarOp pp = dot(f->ops.momentum, f->ops.momentum);
    for (const auto& psi : test_states(*f->grid, 6, 4)) CHECK((f->ops.v2(psi) - pp(psi)).norm() <= 1e-9 * psi.norm());
  }
}

TEST_CASE("angular momentum") {
  const auto& s = sphere();
  const cvec y31 = s.grid->sample_mode({3, 1});
  CHECK(rel(s.ops.angular[2](y31), y31) <= 1e-12);
  const ScalarOp l2 = dot(s.ops.angular, s.ops.angular);
  for (int m = -2; m <= 2; ++m) {
    const cvec y = s.grid->sample_mode({2, m});
    CHECK(rel(l2(y), 6.0 * y) <= 1e-11);
  }
  const auto& c = cylinder();
  const cvec e2 = c.grid->sample_mode({2, 0});
  CHECK(rel(c.ops.angular[2](e2), 2.0 * e2) <= 1e-12);
}

TEST_CASE("position") {
  const auto& s = sphere();
  const ScalarOp rr = dot(s.ops.position, s.ops.position);
  CHECK((rr.matrix - cmat::Identity(rr.matrix.rows(), rr.matrix.cols())).cwiseAbs().maxCoeff() <= 1e-14);
  const Fixture c(SurfaceKind::cylinder, 8, 8, 2.0, 3.0);
  const cmat xy = c.ops.position[0].matrix * c.ops.position[0].matrix + c.ops.position[1].matrix * c.ops.position[1].matrix;
  CHECK((xy - 4.0 * cmat::Identity(xy.rows(), xy.cols())).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(hermiticity_residual(s.ops.position, test_states(*s.grid, 4, 1)) <= 1e-14);
}

TEST_CASE("force") {
  const auto& s = sphere();
  const cvec y00 = s.grid->sample_mode({0, 0});
  for (int c = 0; c < 3; ++c) {
    CHECK((s.ops.force.total[c](y00) + field_times(s.ops.frame.e3[c], y00)).norm() <= 1e-12 * y00.norm());
    CHECK(std::abs(inner_product(*s.grid, y00, s.ops.force.total[c](y00))) <= 1e-12);
  }
  // On the cylinder F1 carries the ring velocity, 1 + 1/4 on exp(i theta).
  const auto& cy = cylinder();
  const cvec e1 = cy.grid->sample_mode({1, 0});
  for (int c = 0; c < 3; ++c)
    CHECK((cy.ops.force.f1[c](e1) + 1.25 * field_times(cy.ops.frame.e3[c], e1)).norm() <= 1e-12 * e1.norm());

  const VectorOp heis = force_heisenberg(s.ops.momentum, s.ops.hamiltonian, s.ops.hbar());
  const cvec y31 = s.grid->sample_mode({3, 1});
  for (int c = 0; c < 3; ++c) CHECK((heis[c](y31) - s.ops.force.total[c](y31)).norm() <= 1e-8 * y31.norm());
}

TEST_CASE("velocity and conservation identities") {
  for (const Fixture* f : {&sphere(), &cylinder()}) {
    const auto& o = f->ops;
    for (const auto& psi : test_states(*f->grid, 6, 9)) {
      // (1/i hbar)[R, H] = p/m on the components that are not constant.
      for (int c = 0; c < (f->chart.kind == SurfaceKind::sphere ? 3 : 2); ++c) {
        const ScalarOp v = (1.0 / (I * o.hbar())) * commutator(o.position[c], o.hamiltonian);
        CHECK((v(psi) - o.momentum[c](psi) / o.mass()).norm() <= 1e-9 * psi.norm());
      }
      CHECK(commutator(o.angular[2], o.hamiltonian)(psi).norm() <= 1e-10 * psi.norm());
    }
  }
}

// Target torque pieces: tau(1) = -2i hbar L/mR^2, tau(2) = +2i hbar L/mR^2.
TEST_CASE("torque pieces on Y11") {
  const auto& s = sphere();
  const cvec y11 = s.grid->sample_mode({1, 1});
  const VectorOp t1 = torque(s.ops.position, s.ops.force.f1);
  const VectorOp t2 = torque(s.ops.position, s.ops.force.f2);
  CHECK((t1[2](y11) - (-2.0 * I) * y11).norm() <= 1e-8 * y11.norm());
  CHECK((t2[2](y11) - (2.0 * I) * y11).norm() <= 1e-8 * y11.norm());
  const VectorOp net = torque(s.ops.position, s.ops.force.total);
  for (const auto& psi : test_states(*s.grid, 6, 3))
    for (int c = 0; c < 3; ++c) CHECK(net[c](psi).norm() <= 1e-9 * psi.norm());
}

TEST_CASE("radial contraction of the total force") {
  const auto& cy = cylinder();
  const CartesianField t = tangent_field(cy.chart, *cy.grid, [](double, double) { return 1.0; },
                                         [](double, double) { return 1.0; });
  const ScalarOp contraction = symmetrized_tangential_contraction(cy.chart, *cy.grid, t, cy.ops.force.total);
  for (const auto& psi : test_states(*cy.grid, 6, 5)) CHECK(contraction(psi).norm() <= 1e-8 * psi.norm());

  CartesianField normal = cy.ops.frame.e3;
  CHECK_THROWS_AS((void)symmetrized_tangential_contraction(cy.chart, *cy.grid, normal, cy.ops.force.total), Error);
}

TEST_CASE("binary operator dump") {
  const auto dir = std::filesystem::temp_directory_path() / "cqop_test_dump";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "h.bin").string();
  const ScalarOp& h = ring().ops.hamiltonian;
  write_operator(h, path);
  CHECK(std::filesystem::file_size(path) == 16 + 16 * static_cast<std::uintmax_t>(h.matrix.size()));
  const cmat back = read_operator(path);
  CHECK(back == h.matrix);

  {
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "CQOP");
  }
  auto code = [](const std::string& p) {
    try {
      (void)read_operator(p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::numeric;
  };
  CHECK(code((dir / "missing.bin").string()) == ErrorCode::io);
  std::filesystem::resize_file(path, 100);
  CHECK(code(path) == ErrorCode::parse);
  {
    std::ofstream out(path, std::ios::binary);
    out << "XXXX0000000000000000";
  }
  CHECK(code(path) == ErrorCode::parse);
  std::filesystem::remove_all(dir);
}
