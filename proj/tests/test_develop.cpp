#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "flatstrip/develop.hpp"
#include "flatstrip/expression.hpp"
#include "support.hpp"

using namespace flatstrip;
using namespace flatstrip::develop;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

ConformalDensity density(const Domain& d, const std::string& formula) {
  return ConformalDensity::from_expression(d, Expression::parse(formula));
}

Domain slit_annulus(int n = 141) { return slit(Domain::annulus(0.5, 3.5, n)); }

/// 8-point Gauss-Legendre on [a, b] for a complex integrand.
template <class F>
Complex gauss(F f, Complex a, Complex b, int pieces = 16) {
  static const double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
  static const double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  Complex sum;
  for (int p = 0; p < pieces; ++p) {
    const Complex lo = a + (b - a) * (double(p) / pieces), hi = a + (b - a) * (double(p + 1) / pieces);
    const Complex mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int k = 0; k < 4; ++k) sum += w[k] * half * (f(mid + x[k] * half) + f(mid - x[k] * half));
  }
  return sum;
}

double max_node_error(const DevelopingMap& dev, auto exact) {
  const Grid& g = dev.region().grid();
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (dev.region().valid(i, j)) worst = std::max(worst, std::abs(dev.values()(i, j) - exact(g.point(i, j))));
  return worst;
}

}  // namespace

TEST_SUITE("develop") {
  TEST_CASE("harmonicity check") {
    const auto disc = Domain::disc(0.9, 61);
    const auto flat = harmonicity_check(density(disc, "3"), disc, 1e-9);
    CHECK(flat.passed);
    CHECK(flat.max_laplacian < 1e-9);

    auto ann = [](int n) {
      const auto d = Domain::annulus(0.5, 3.5, n);
      return harmonicity_check(density(d, "1/abs(z)"), d, 1e-1).max_laplacian;
    };
    const double coarse = ann(71), fine = ann(141);
    MESSAGE("annulus laplacian " << coarse << " " << fine);
    CHECK(coarse < 1e-1);
    CHECK(coarse / fine > 3.5);

    const auto hyp = harmonicity_check(density(disc, "2/(1-abs(z)^2)"), disc, 1e-3);
    CHECK_FALSE(hyp.passed);
    CHECK(hyp.max_laplacian > 4.0);
  }

  TEST_CASE("slit cuts every loop around the centre") {
    const auto d = slit(Domain::annulus(0.5, 3.5, 60));
    const Grid& g = d.grid();
    for (int j = 0; j + 1 < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const Complex a = g.point(i, j), b = g.point(i, j + 1);
        // no vertical edge of the region crosses the negative real axis
        if (d.valid(i, j) && d.valid(i, j + 1) && a.real() < 0) CHECK_FALSE((a.imag() < 0 && b.imag() > 0));
      }
    }
    for (const double angle : {0.3, kPi / 4, 2.0}) {
      const auto s = slit(Domain::annulus(0.5, 3.5, 61), 0.0, angle);
      const auto f = harmonic_conjugate(density(s, "1/abs(z)"), s, std::polar(1.0, angle + kPi));
      CHECK(f.path_residual < 1e-6);
    }
  }

  TEST_CASE("harmonic conjugate examples") {
    const auto rect = Domain::rectangle(-1, 1, -1, 1, 41, 41);
    const Complex z0(0.2, -0.3);
    const auto f = harmonic_conjugate(density(rect, "exp(re(z))"), rect, z0);
    const Grid& g = rect.grid();
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) worst = std::max(worst, std::abs(f.psi(i, j) - (g.point(i, j) - z0).imag()));
    CHECK(worst < 1e-12);

    const auto s = slit_annulus();
    const auto c = harmonic_conjugate(density(s, "1/abs(z)"), s, 1.0);
    worst = 0.0;
    for (int j = 0; j < s.grid().ny; ++j)
      for (int i = 0; i < s.grid().nx; ++i)
        if (c.region.valid(i, j)) worst = std::max(worst, std::abs(c.psi(i, j) + std::arg(s.grid().point(i, j))));
    CHECK(worst < 1e-6);
  }

  TEST_CASE("an unslit annulus is not simply connected") {
    const auto d = Domain::annulus(0.5, 3.5, 71);
    try {
      harmonic_conjugate(density(d, "1/abs(z)"), d, 1.0);
      FAIL("expected NotSimplyConnected");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotSimplyConnected);
    }
  }

  TEST_CASE("developing map examples") {
    const auto rect = Domain::rectangle(-1, 2, -1, 1, 61, 41);
    const Complex z0(0.3, 0.1);
    const auto flat = DevelopingMap::build(density(rect, "1"), rect, z0);
    CHECK(max_node_error(flat, [&](Complex z) { return z - z0; }) < 1e-13);

    const auto s = slit_annulus();
    const auto lg = DevelopingMap::build(density(s, "1/abs(z)"), s, 1.0);
    const double err = max_node_error(lg, [](Complex z) { return std::log(z); });
    MESSAGE("log z error " << err << " CR " << lg.cr_residual() << " metric " << lg.metric_residual());
    CHECK(err < 1e-4);
    CHECK(lg.cr_residual() <= 1e-6);
    CHECK(lg.metric_residual() <= 1e-4);
    CHECK(std::abs(lg(1.0)) < 1e-15);
    CHECK(std::abs(lg({-2.0, 0.5}) - std::log(Complex(-2.0, 0.5))) < 1e-4);

    const auto box = Domain::rectangle(0.6, 1.4, -0.4, 0.4, 41, 41);
    const auto sq = DevelopingMap::build(density(box, "abs(2*z)"), box, 1.0);
    CHECK(max_node_error(sq, [](Complex z) { return z * z - 1.0; }) < 1e-7);
    CHECK(sq.cr_residual() <= 1e-6);
  }

  TEST_CASE("random harmonic densities match quadrature") {
    test::Rng rng(31);
    const auto rect = Domain::rectangle(-1, 1, -1, 1, 51, 51);
    for (int s = 0; s < 8; ++s) {
      const Complex c1(rng.uniform(-1, 1), rng.uniform(-1, 1)), c2(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
      std::ostringstream f;
      f.precision(17);
      f << "abs(exp((" << c1.real() << "+" << c1.imag() << "*i)*z+(" << c2.real() << "+" << c2.imag() << "*i)*z^2))";
      const Complex z0(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
      const auto dev = DevelopingMap::build(density(rect, f.str()), rect, z0);
      auto p = [&](Complex z) { return c1 * z + c2 * z * z; };
      const double phase = p(z0).imag();
      auto hprime = [&](Complex z) { return std::exp(p(z) - kI * phase); };
      double worst = 0.0;
      for (int k = 0; k < 20; ++k) {
        const Complex z(rng.uniform(-0.95, 0.95), rng.uniform(-0.95, 0.95));
        worst = std::max(worst, std::abs(dev(z) - gauss(hprime, z0, z)));
      }
      CHECK(worst < 1e-6);
      CHECK(dev.cr_residual() <= 1e-6);
      CHECK(dev.metric_residual() <= 1e-4);
      CHECK(std::abs(dev.derivative(z0).imag()) < 1e-14);
      CHECK(dev.derivative(z0).real() > 0);
    }
  }

  TEST_CASE("local isometry on segments") {
    test::Rng rng(32);
    const auto s = slit_annulus();
    const auto rho = density(s, "1/abs(z)");
    const auto dev = DevelopingMap::build(rho, s, 1.0);
    int tested = 0;
    while (tested < 30) {
      const Complex a = rng.complex_in_disc(3.3), b = a + std::polar(rng.uniform(0.1, 0.6), rng.uniform(-kPi, kPi));
      bool inside = true;
      for (int k = 0; k <= 50 && inside; ++k) {
        const Complex z = a + (b - a) * (k / 50.0);
        inside = std::abs(z) > 0.6 && std::abs(z) < 3.4 && !(z.real() < 0 && std::abs(z.imag()) < 0.1);
      }
      if (!inside) continue;
      ++tested;
      const double metric_length = std::abs(gauss([&](Complex z) { return Complex(rho.rho(z), 0.0); }, a, b));
      double image_length = 0.0;
      const int n = 400;
      Complex prev = dev(a);
      for (int k = 1; k <= n; ++k) {
        const Complex cur = dev(a + (b - a) * (double(k) / n));
        image_length += std::abs(cur - prev);
        prev = cur;
      }
      CHECK(std::abs(image_length - metric_length) <= 1e-4 * metric_length);
    }
  }

  TEST_CASE("pushforward examples") {
    const auto rect = Domain::rectangle(-2, 2, -2, 2, 81, 81);
    const auto flat = DevelopingMap::build(density(rect, "1"), rect, 0.0);
    const auto t = pushforward(flat, MoebiusMap::translation(1.0));
    CHECK(t.image.is_translation());
    CHECK(std::abs(t.image.a() - 1.0) < 1e-12);
    CHECK(t.residual < 1e-12);

    const auto s = slit_annulus();
    const auto dev = DevelopingMap::build(density(s, "1/abs(z)"), s, 1.0);
    for (const double theta : {2 * kPi / 5, 0.4, -1.1}) {
      const auto r = pushforward(dev, MoebiusMap::rotation(theta));
      MESSAGE("rotation " << theta << " residual " << r.residual << " inliers " << r.inliers << "/" << r.overlap);
      CHECK(r.image.is_translation());
      CHECK(std::abs(r.image.a() - kI * theta) < 1e-5);
      CHECK(r.residual <= 1e-5);
      CHECK(r.inliers < r.overlap);
    }
    const auto sc = pushforward(dev, MoebiusMap::scaling(1.5));
    CHECK(sc.image.is_translation());
    CHECK(std::abs(sc.image.a() - std::log(1.5)) < 1e-5);
    CHECK(sc.residual <= 1e-5);

    // a rotation about the origin of the flat plane keeps its exact angle
    const auto quarter = pushforward(flat, MoebiusMap::rotation(kPi / 2));
    REQUIRE(quarter.image.angle());
    CHECK(quarter.image.angle()->n == 4);
    CHECK(std::abs(quarter.image.a()) < 1e-12);
  }

  TEST_CASE("pushforward failures") {
    const auto rect = Domain::rectangle(-2, 2, -2, 2, 41, 41);
    const auto flat = DevelopingMap::build(density(rect, "1"), rect, 0.0);
    try {
      pushforward(flat, MoebiusMap::scaling(1.5));
      FAIL("expected NotIsometric");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotIsometric);
    }
    try {
      pushforward(flat, MoebiusMap::translation(100.0));
      FAIL("expected InsufficientOverlap");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientOverlap);
    }
  }

  TEST_CASE("pushforward is a homomorphism") {
    test::Rng rng(33);
    const auto s = slit_annulus();
    const auto dev = DevelopingMap::build(density(s, "1/abs(z)"), s, 1.0);
    for (int k = 0; k < 6; ++k) {
      const auto m1 = MoebiusMap::rotation(rng.uniform(-1.0, 1.0)).after(MoebiusMap::scaling(rng.uniform(0.9, 1.1)));
      const auto m2 = MoebiusMap::rotation(rng.uniform(-1.0, 1.0));
      const auto r12 = pushforward(dev, m1.after(m2)).image;
      const auto r1r2 = iso::compose(pushforward(dev, m1).image, pushforward(dev, m2).image);
      CHECK(std::abs(r12.lambda() - r1r2.lambda()) < 1e-6);
      CHECK(std::abs(r12.a() - r1r2.a()) < 2e-5);
    }
    const auto rect = Domain::rectangle(-2, 2, -2, 2, 41, 41);
    const auto flat = DevelopingMap::build(density(rect, "exp(re(z)/3)"), rect, 0.0);
    const auto a = MoebiusMap::translation({0.0, 0.4}), b = MoebiusMap::translation({0.0, -0.7});
    const auto ab = pushforward(flat, a.after(b)).image;
    const auto composed = iso::compose(pushforward(flat, a).image, pushforward(flat, b).image);
    CHECK(std::abs(ab.lambda() - composed.lambda()) < 1e-9);
    CHECK(std::abs(ab.a() - composed.a()) < 1e-9);
  }

  TEST_CASE("changing the base point changes h by an isometry") {
    test::Rng rng(34);
    const auto s = slit_annulus();
    const auto rho = density(s, "1/abs(z)");
    const auto h0 = DevelopingMap::build(rho, s, 1.0);
    for (int k = 0; k < 5; ++k) {
      Complex z1;
      do z1 = rng.complex_in_disc(3.0);
      while (std::abs(z1) < 0.8 || (z1.real() < 0 && std::abs(z1.imag()) < 0.2));
      const auto h1 = DevelopingMap::build(rho, s, z1);
      // h1 = lambda h0 + b with |lambda| = 1
      const Complex lambda = h1.derivative(1.0) / h0.derivative(1.0);
      CHECK(std::abs(std::abs(lambda) - 1.0) < 1e-12);
      const Complex b = h1(1.0) - lambda * h0(1.0);
      CHECK(max_node_error(h1, [&](Complex z) { return lambda * h0(z) + b; }) < 1e-6);
    }
  }

  TEST_CASE("pipeline classification") {
    const auto s = slit_annulus();
    const double theta = 2 * kPi / 5;
    const auto cyl = pipeline_classify(density(s, "1/abs(z)"), s, 1.0, {MoebiusMap::rotation(theta)});
    CHECK(cyl.group.kind == iso::GroupCase::Z);
    CHECK(cyl.group.case_number() == 5);
    CHECK(cyl.group.alpha == doctest::Approx(theta).epsilon(1e-6));
    CHECK(cyl.surface_case);
    CHECK(cyl.pushforwards.front().residual <= 1e-5);

    const auto rect = Domain::rectangle(-2, 2, -2, 2, 81, 81);
    const Complex tau(0.3, 1.1);
    const auto torus = pipeline_classify(density(rect, "1"), rect, 0.0,
                                         {MoebiusMap::translation(1.0), MoebiusMap::translation(tau)});
    CHECK(torus.group.kind == iso::GroupCase::Z2);
    CHECK(torus.group.case_number() == 6);
    CHECK(torus.surface_case);

    // a single half turn generates a finite group: no surface quotient
    const auto half = MoebiusMap::make(-1.0, 1.0, 0.0, 1.0);
    const auto finite = pipeline_classify(density(rect, "1"), rect, 0.0, {half});
    CHECK(finite.group.kind == iso::GroupCase::FiniteRotation);
    CHECK(finite.group.image_order == 2);
    CHECK_FALSE(finite.surface_case);

    const auto zminus = pipeline_classify(density(rect, "1"), rect, 0.0, {half, MoebiusMap::translation(1.0)});
    CHECK(zminus.group.kind == iso::GroupCase::Exceptional);
    CHECK(zminus.group.family == iso::Family::ZMinus);
    CHECK(zminus.group.case_number() == 7);
    CHECK(zminus.surface_case);
  }
}
