#include <cmath>
#include <numbers>

#include "doctest.h"
#include "flatstrip/error.hpp"
#include "flatstrip/metric.hpp"

using namespace flatstrip;
using flatstrip::metric::curvature;

namespace {

ConformalDensity hyperbolic(int n, double radius = 1.0) {
  return ConformalDensity::from_expression(Domain::disc(radius, n), Expression::parse("2/(1-|z|^2)"));
}

double band_log_rho(Complex z) {
  const double t = std::max(0.0, std::abs(z.real()) - 0.3);
  return 0.8 * t * t * t;
}

}  // namespace

TEST_SUITE("metric") {
  TEST_CASE("formula parser evaluates with exact jets") {
    const Expression e = Expression::parse("exp(-Re(z)^2) * |z - 1| + conj(z)*i");
    const Complex z(0.3, -0.7);
    const Complex expect = std::exp(-0.09) * std::abs(z - 1.0) + std::conj(z) * Complex(0, 1);
    CHECK(std::abs(e.eval(z) - expect) < 1e-14);
    CHECK_THROWS_AS(Expression::parse("2 * (z"), Error);
    CHECK_THROWS_AS(Expression::parse("foo(z)"), Error);
  }

  TEST_CASE("constant density is flat") {
    const auto rho = ConformalDensity::from_expression(Domain::disc(1.0, 65), Expression::parse("1"));
    CHECK(curvature(rho, {0.1, 0.2}) == doctest::Approx(0.0).epsilon(1e-9));
    const auto grid = rho.sampled();
    CHECK(std::abs(curvature(grid, {0.1, 0.2})) < 1e-12);
  }

  TEST_CASE("hyperbolic disc has curvature -1") {
    const auto rho = hyperbolic(257);
    for (const Complex z : {Complex(0, 0), Complex(0.5, 0.25), Complex(-0.6, 0.3), Complex(0.1, -0.75)})
      CHECK(curvature(rho, z) == doctest::Approx(-1.0).epsilon(1e-5));
    const auto grid = rho.sampled();
    const Eigen::ArrayXXd k = metric::curvature_field(grid);
    const Grid& g = grid.domain().grid();
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (std::abs(g.point(i, j)) <= 0.8) worst = std::max(worst, std::abs(k(i, j) + 1.0));
    CHECK(worst < 5e-3);
  }

  TEST_CASE("grid curvature converges at second order") {
    const Complex z(0.5, 0.25);
    double prev = 0.0;
    for (int n : {65, 129, 257}) {
      const double err = std::abs(curvature(hyperbolic(n).sampled(), z) + 1.0);
      if (prev > 0.0) CHECK(std::log2(prev / err) > 1.9);
      prev = err;
    }
  }

  TEST_CASE("flat annulus 1/|z|") {
    const auto rho = ConformalDensity::from_expression(Domain::annulus(1.0, std::exp(1.0), 257),
                                                       Expression::parse("1/|z|"));
    const Eigen::ArrayXXd k = metric::curvature_field(rho);
    double worst = 0.0;
    for (Eigen::Index t = 0; t < k.size(); ++t)
      if (std::isfinite(k(t))) worst = std::max(worst, std::abs(k(t)));
    CHECK(worst < 5e-3);
  }

  TEST_CASE("stencil must stay in the domain") {
    const auto grid = hyperbolic(65).sampled();
    CHECK_THROWS_AS(curvature(grid, {0.999, 0.0}), Error);
    try {
      curvature(grid, {0.999, 0.0});
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StencilOutOfDomain);
    }
    CHECK_THROWS_AS(curvature(hyperbolic(65), {1.2, 0.0}), Error);
  }

  TEST_CASE("non-positive density is rejected") {
    const auto rho = ConformalDensity::from_expression(Domain::disc(1.0, 33), Expression::parse("Re(z)"));
    CHECK_THROWS_AS(rho.log_rho({-0.5, 0.0}), Error);
  }

  TEST_CASE("hyperbolic density is invariant under disc automorphisms") {
    const auto rho = hyperbolic(129);
    const auto samples = metric::sample_points(rho.domain());
    CHECK(samples.size() > 100);
    CHECK(metric::equivariance_residual(rho, MoebiusMap::disc_automorphism({0.2, 0.0}), samples) < 1e-12);
    CHECK(metric::equivariance_residual(rho, MoebiusMap::disc_automorphism({0.1, -0.3}, 0.7), samples) < 1e-12);
    CHECK(metric::equivariance_residual(rho, MoebiusMap::rotation(1.1), samples) < 1e-12);
  }

  TEST_CASE("flat annulus is invariant under rotation, not under translation") {
    const auto rho = ConformalDensity::from_expression(Domain::annulus(1.0, std::exp(1.0), 129),
                                                       Expression::parse("1/|z|"));
    const auto samples = metric::sample_points(rho.domain());
    CHECK(metric::equivariance_residual(rho, MoebiusMap::rotation(2 * std::numbers::pi / 5), samples) < 1e-12);
    CHECK_THROWS_AS(metric::equivariance_residual(rho, MoebiusMap::translation({5.0, 0.0}), samples), Error);
  }

  TEST_CASE("tensor equivariance residual") {
    const Domain d = Domain::disc(1.0, 33);
    const auto a = MetricTensorField::from_function(d, [](Complex) { return Eigen::Matrix2d{{4, 0}, {0, 1}}; });
    const auto samples = metric::sample_points(d, 50);
    CHECK(metric::tensor_equivariance_residual(a, MoebiusMap::rotation(std::numbers::pi / 2), samples) ==
          doctest::Approx(3.0).epsilon(1e-12));
    CHECK(metric::tensor_equivariance_residual(a, MoebiusMap::rotation(std::numbers::pi), samples) < 1e-12);
  }

  TEST_CASE("flat locus of the blended band is one component") {
    const Domain d = Domain::rectangle(-1.0, 1.0, -1.0, 1.0, 129, 129);
    const auto rho = ConformalDensity::from_function(d, [](Complex z) { return std::exp(band_log_rho(z)); });
    const auto locus = metric::flat_locus(rho, 1e-3);
    CHECK(locus.components() == 1);
    CHECK(locus.component_at({0.0, 0.0}) == 1);
    CHECK(locus.component_at({0.8, 0.0}) == 0);
    CHECK(locus.component_at({-0.25, 0.7}) == 1);
    const auto flat = metric::flat_locus(hyperbolic(65).sampled(), 1e-3);
    CHECK(flat.components() == 0);
  }

  TEST_CASE("areas") {
    const auto one = ConformalDensity::from_expression(Domain::rectangle(0, 1, 0, 1, 33, 33), Expression::parse("1"));
    CHECK(metric::area(one, [](Complex) { return true; }) == doctest::Approx(1.0).epsilon(1e-12));
    const auto two = one.scaled(2.0);
    CHECK(metric::area(two, [](Complex) { return true; }) == doctest::Approx(4.0).epsilon(1e-12));
    const auto ann = ConformalDensity::from_expression(Domain::annulus(1.0, std::exp(1.0), 257),
                                                       Expression::parse("1/|z|"));
    CHECK(metric::area(ann, [](Complex) { return true; }) == doctest::Approx(2 * std::numbers::pi).epsilon(1e-2));
  }

  TEST_CASE("grid density round trip") {
    const auto rho = hyperbolic(65, 0.9);
    const auto grid = rho.sampled();
    CHECK(grid.is_grid());
    const Complex z(0.31, -0.17);
    CHECK(grid.log_rho(z) == doctest::Approx(rho.log_rho(z)).epsilon(1e-3));
    const Eigen::Vector2d g1 = grid.grad_log_rho(z), g2 = rho.grad_log_rho(z);
    CHECK((g1 - g2).norm() < 1e-2);
  }
}
