#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "flatstrip/beltrami.hpp"
#include "support.hpp"

using namespace flatstrip;
using namespace flatstrip::beltrami;

namespace {

Eigen::Matrix2d spd_sqrt(const Eigen::Matrix2d& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Complex apply_linear(const Eigen::Matrix2d& l, Complex v) {
  const Eigen::Vector2d r = l * Eigen::Vector2d(v.real(), v.imag());
  return {r.x(), r.y()};
}

/// a, b from the images of 1 and i: L(1) = a + b, L(i) = i(a - b).
std::pair<Complex, Complex> solve_ab(const Eigen::Matrix2d& l) {
  const Complex l1 = apply_linear(l, 1.0);
  const Complex li = apply_linear(l, {0.0, 1.0});
  const Complex a_minus_b = li / Complex(0, 1);
  return {(l1 + a_minus_b) / 2.0, (l1 - a_minus_b) / 2.0};
}

}  // namespace

TEST_SUITE("beltrami") {
  TEST_CASE("complex dilation of linear maps") {
    auto id = complex_dilation_linear(Eigen::Matrix2d::Identity());
    CHECK(std::abs(id.a - 1.0) < 1e-15);
    CHECK(std::abs(id.b) < 1e-15);
    CHECK(std::abs(id.mu) < 1e-15);

    const Eigen::Matrix2d d41{{4, 0}, {0, 1}};
    const Eigen::Matrix2d s21{{2, 1}, {1, 2}};
    for (const auto& l : {d41, s21}) {
      const auto [a, b] = solve_ab(l);
      const auto got = complex_dilation_linear(l);
      CHECK(std::abs(got.a - a) < 1e-14);
      CHECK(std::abs(got.b - b) < 1e-14);
    }
    CHECK(std::abs(complex_dilation_linear(d41).mu - 0.6) < 1e-15);
    CHECK(std::abs(complex_dilation_linear(s21).mu - Complex(0, 0.5)) < 1e-15);

    CHECK_THROWS_AS(complex_dilation_linear(Eigen::Matrix2d{{1, 2}, {2, 4}}), Error);
    try {
      complex_dilation_linear(Eigen::Matrix2d{{1, 0}, {0, -1}});
      FAIL("anti-conformal map accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateDilation);
    }
  }

  TEST_CASE("L(v) = a v + b conj(v) for random maps") {
    test::Rng rng(11);
    for (int k = 0; k < 200; ++k) {
      Eigen::Matrix2d l;
      l << rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2);
      if (std::abs(l.determinant()) < 1e-3) continue;
      const auto d = complex_dilation_linear(l);
      const Complex v(rng.uniform(-1, 1), rng.uniform(-1, 1));
      CHECK(std::abs(apply_linear(l, v) - (d.a * v + d.b * std::conj(v))) < 1e-13);
    }
  }

  TEST_CASE("tensor dilation") {
    CHECK(std::abs(dilation_of_tensor(Eigen::Matrix2d::Identity())) < 1e-15);
    CHECK(std::abs(dilation_of_tensor(Eigen::Matrix2d{{4, 0}, {0, 1}}) - 0.6) < 1e-15);
    CHECK(std::abs(dilation_of_tensor(Eigen::Matrix2d{{2, 1}, {1, 2}}) - Complex(0, 0.5)) < 1e-15);
    CHECK_THROWS_AS(dilation_of_tensor(Eigen::Matrix2d{{1, 2}, {2, 1}}), Error);
  }

  TEST_CASE("mu from tensor dilation") {
    CHECK(mu_from_dilation(Complex(0, 0)) == Complex(0, 0));
    CHECK(std::abs(mu_from_dilation(Complex(0.6, 0)) - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(mu_from_dilation(Complex(0, 0.96)) - Complex(0, 0.75)) < 1e-15);
    CHECK_THROWS_AS(mu_from_dilation(Complex(1.0, 0.0)), Error);
    CHECK_THROWS_AS(mu_from_dilation(Complex(0.8, 0.7)), Error);
  }

  TEST_CASE("mu equals the dilation of the SPD square root") {
    test::Rng rng(2024);
    for (int k = 0; k < 2000; ++k) {
      const Eigen::Matrix2d a = rng.spd(0.95);
      const Complex mu_a = dilation_of_tensor(a);
      const Complex mu = mu_from_dilation(mu_a);
      CHECK(std::abs(mu - complex_dilation_linear(spd_sqrt(a)).mu) < 1e-12);
      if (std::abs(mu_a) > 0.0) {
        CHECK(std::abs(mu) < std::abs(mu_a));
        CHECK(std::abs(std::arg(mu) - std::arg(mu_a)) < 1e-12);
      }
    }
  }

  TEST_CASE("sup norm bound") {
    const Domain d = Domain::disc(1.0, 17);
    auto constant = [&](Eigen::Matrix2d m) {
      return MetricTensorField::from_function(d, [m](Complex) { return m; });
    };
    const auto id = sup_norm_bound_check(constant(Eigen::Matrix2d::Identity()));
    CHECK(id.n == 0.0);
    CHECK(id.bound == 0.0);
    const auto d41 = sup_norm_bound_check(constant(Eigen::Matrix2d{{4, 0}, {0, 1}}));
    CHECK(d41.n == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(d41.bound == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    // E - G = 0, 2F / (E + G) = 0.96 e^{i arg}: max |mu_A| = 0.96 at z = 0
    const auto mixed = MetricTensorField::from_function(d, [](Complex z) {
      const double f = 0.96 * (1.0 - std::norm(z));
      return Eigen::Matrix2d{{1, f}, {f, 1}};
    });
    const auto b = sup_norm_bound_check(mixed);
    CHECK(b.n == doctest::Approx(0.96).epsilon(1e-14));
    CHECK(b.bound == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(b.mu_max <= b.bound + 1e-15);
    CHECK(b.bound < b.n);
  }

  TEST_CASE("holomorphic case returns the normalized identity") {
    const Domain d = Domain::disc(1.0, 48);
    const auto mu = BeltramiField::from_function(d, [](Complex) { return Complex(0, 0); });
    SolveReport rep;
    const GridMap w = solve_beltrami(mu, {{0.1, 0.05}, {2.0, 1.0}, 0.0}, {}, &rep);
    CHECK(rep.residual < 1e-12);
    const Grid& g = d.grid();
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (d.valid(i, j)) worst = std::max(worst, std::abs(w.at_node(i, j) - (g.point(i, j) - Complex(0.1, 0.05) + Complex(2, 1))));
    CHECK(worst < 1e-12);
  }

  TEST_CASE("constant coefficient gives an affine map") {
    const Domain d = Domain::rectangle(-1, 1, -1, 1, 64, 64);
    const auto mu = BeltramiField::from_function(d, [](Complex) { return Complex(1.0 / 3.0, 0); });
    const GridMap w = solve_beltrami(mu, {});
    // v -> v + conj(v)/3 = diag(4/3, 2/3)
    const Complex ex = w.at({0.5, 0.0}) - w.at({-0.5, 0.0});
    const Complex ey = w.at({0.0, 0.5}) - w.at({0.0, -0.5});
    CHECK(std::abs(ex - 4.0 / 3.0) < 1e-10);
    CHECK(std::abs(ey - Complex(0, 2.0 / 3.0)) < 1e-10);
  }

  TEST_CASE("variable coefficient round trip") {
    const Domain d = Domain::rectangle(-1, 1, -1, 1, 64, 64);
    auto field = [](Complex z) {
      return 0.5 * std::exp(Complex(0, 2.0 * z.real())) * (0.5 + 0.5 * std::cos(3.0 * z.imag()));
    };
    const auto mu = BeltramiField::from_function(d, field);
    CHECK(mu.sup_norm() == doctest::Approx(0.5).epsilon(1e-3));
    SolveReport rep;
    const GridMap w = solve_beltrami(mu, {}, {}, &rep);
    CHECK(rep.residual <= 1e-6);
    CHECK(rep.iterations <= static_cast<int>(std::ceil(10 * std::sqrt(rep.unknowns))));
    const Eigen::ArrayXXcd dil = w.dilation();
    const Grid& g = d.grid();
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (interior(d, i, j)) worst = std::max(worst, std::abs(dil(i, j) - mu.at_node(i, j)));
    CHECK(worst < 1e-5);
    CHECK(w.min_jacobian() > 0.0);
    CHECK(std::abs(w.at({0, 0})) < 1e-12);
    CHECK(std::abs(std::arg(w.dz(g.nx / 2, g.ny / 2))) < 0.1);
  }

  TEST_CASE("near-degenerate fields are refused") {
    const Domain d = Domain::disc(1.0, 32);
    const auto mu = BeltramiField::from_function(d, [](Complex) { return Complex(0.96, 0); });
    CHECK_THROWS_AS(solve_beltrami(mu, {}), Error);
    CHECK_THROWS_AS(BeltramiField::from_function(d, [](Complex) { return Complex(1.0, 0); }), Error);
  }

  TEST_CASE("tiny budget reports divergence") {
    const Domain d = Domain::rectangle(-1, 1, -1, 1, 48, 48);
    const auto mu = BeltramiField::from_function(d, [](Complex z) { return 0.4 * z * std::conj(z) / 2.0; });
    SolveOptions opt;
    opt.max_iterations = 1;
    opt.tolerance = 1e-12;
    try {
      solve_beltrami(mu, {}, opt);
      FAIL("expected divergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SolverDiverged);
    }
  }

  TEST_CASE("density recovery from known maps") {
    const Domain d = Domain::annulus(0.5, 1.0, 64);
    const Grid& g = d.grid();
    auto samples = [&](auto f) {
      Eigen::ArrayXXcd s(g.nx, g.ny);
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) s(i, j) = f(g.point(i, j));
      return s;
    };
    const GridMap identity(d, samples([](Complex z) { return z; }));
    const auto eye = MetricTensorField::from_function(d, [](Complex) { return Eigen::Matrix2d::Identity(); });
    const auto four = MetricTensorField::from_function(d, [](Complex) { return Eigen::Matrix2d(4 * Eigen::Matrix2d::Identity()); });
    CHECK(recover_density(eye, identity).rho({0.7, 0.1}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(recover_density(four, identity).rho({-0.3, 0.6}) == doctest::Approx(2.0).epsilon(1e-12));

    // A = (Dh)^t Dh for h = z^2: |h'|^2 I
    const auto pulled = MetricTensorField::from_function(d, [](Complex z) {
      return Eigen::Matrix2d(4.0 * std::norm(z) * Eigen::Matrix2d::Identity());
    });
    const GridMap squared(d, samples([](Complex z) { return z * z; }));
    const auto flat = recover_density(pulled, squared);
    for (const Complex z : {Complex(0.7, 0.1), Complex(-0.2, 0.6), Complex(0.1, -0.8)}) {
      CHECK(flat.rho(z * z) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(recover_density(pulled, identity).rho(z) == doctest::Approx(2.0 * std::abs(z)).epsilon(1e-3));
    }
  }

  TEST_CASE("conformal tensor recovers rho up to a constant") {
    const Domain d = Domain::disc(0.8, 64);
    const auto rho = ConformalDensity::from_expression(d, Expression::parse("2/(1-|z|^2)"));
    const auto a = MetricTensorField::conformal(rho);
    const auto mu = BeltramiField::from_tensor(a);
    CHECK(mu.sup_norm() < 1e-12);
    const Complex z0(0.0, 0.0);
    const GridMap w = solve_beltrami(mu, {z0, {}, 0.0});
    const auto back = recover_density(a, w);
    const double c = back.rho(w.at(z0)) / rho.rho(z0);
    for (const Complex z : {Complex(0.3, 0.2), Complex(-0.5, 0.1), Complex(0.05, -0.6)})
      CHECK(back.rho(w.at(z)) / c == doctest::Approx(rho.rho(z)).epsilon(1e-3));
  }
}
