#include "flatstrip/density.hpp"

#include <cmath>
#include <limits>

#include "flatstrip/error.hpp"

namespace flatstrip {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double checked_log(double rho, Complex z) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw Error(ErrorCode::NonPositiveDensity,
                "rho = " + std::to_string(rho) + " at (" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
  }
  return std::log(rho);
}

// Derivative along one axis at a node, using whichever neighbours are samples.
double node_derivative(const Eigen::ArrayXXd& f, const Grid& g, int i, int j, int di, int dj) {
  auto ok = [&](int a, int b) { return g.in_range(a, b) && std::isfinite(f(a, b)); };
  const double c = f(i, j);
  if (ok(i + di, j + dj) && ok(i - di, j - dj)) return (f(i + di, j + dj) - f(i - di, j - dj)) / (2.0 * g.h);
  if (ok(i + di, j + dj) && ok(i + 2 * di, j + 2 * dj))
    return (-3.0 * c + 4.0 * f(i + di, j + dj) - f(i + 2 * di, j + 2 * dj)) / (2.0 * g.h);
  if (ok(i - di, j - dj) && ok(i - 2 * di, j - 2 * dj))
    return (3.0 * c - 4.0 * f(i - di, j - dj) + f(i - 2 * di, j - 2 * dj)) / (2.0 * g.h);
  if (ok(i + di, j + dj)) return (f(i + di, j + dj) - c) / g.h;
  if (ok(i - di, j - dj)) return (c - f(i - di, j - dj)) / g.h;
  return kNaN;
}

}  // namespace

bool interpolate_bilinear(const Eigen::ArrayXXd& field, const Grid& grid, Complex z, double& out) {
  const Eigen::Vector2d f = grid.to_index(z);
  int i = static_cast<int>(std::floor(f.x()));
  int j = static_cast<int>(std::floor(f.y()));
  // nodes on the last row/column interpolate from the cell below/left
  if (i == grid.nx - 1 && f.x() - i < 1e-12) --i;
  if (j == grid.ny - 1 && f.y() - j < 1e-12) --j;
  if (i < 0 || j < 0 || i + 1 >= grid.nx || j + 1 >= grid.ny) return false;
  const double s = f.x() - i;
  const double t = f.y() - j;
  auto corner = [&](int a, int b, double w) {
    if (w == 0.0) return 0.0;
    return w * field(a, b);
  };
  const double v = corner(i, j, (1 - s) * (1 - t)) + corner(i + 1, j, s * (1 - t)) + corner(i, j + 1, (1 - s) * t) +
                   corner(i + 1, j + 1, s * t);
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

struct ConformalDensity::Source {
  std::optional<Expression> expr;
  Function fn;
  std::string label;
  Eigen::ArrayXXd log;  // grid samples
  Eigen::ArrayXXd gx, gy;
};

ConformalDensity::ConformalDensity(Domain domain, std::shared_ptr<const Source> source, double log_scale)
    : domain_(std::move(domain)), source_(std::move(source)), log_scale_(log_scale) {}

ConformalDensity ConformalDensity::from_expression(const Domain& domain, const Expression& rho) {
  auto src = std::make_shared<Source>();
  src->expr = rho;
  src->label = rho.text();
  return ConformalDensity(domain, std::move(src), 0.0);
}

ConformalDensity ConformalDensity::from_function(const Domain& domain, Function rho, std::string label) {
  auto src = std::make_shared<Source>();
  src->fn = std::move(rho);
  src->label = std::move(label);
  return ConformalDensity(domain, std::move(src), 0.0);
}

ConformalDensity ConformalDensity::from_log_grid(const Domain& domain, Eigen::ArrayXXd log_rho) {
  const Grid& g = domain.grid();
  if (log_rho.rows() != g.nx || log_rho.cols() != g.ny)
    throw Error(ErrorCode::InvalidDomain, "log rho samples do not match the grid shape");
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!domain.valid(i, j)) {
        log_rho(i, j) = kNaN;
      } else if (!std::isfinite(log_rho(i, j))) {
        throw Error(ErrorCode::NonPositiveDensity, "non-finite log rho sample at node (" + std::to_string(i) + ", " +
                                                       std::to_string(j) + ")");
      }
    }
  }
  auto src = std::make_shared<Source>();
  src->label = "grid";
  src->gx.resize(g.nx, g.ny);
  src->gy.resize(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (std::isfinite(log_rho(i, j))) {
        src->gx(i, j) = node_derivative(log_rho, g, i, j, 1, 0);
        src->gy(i, j) = node_derivative(log_rho, g, i, j, 0, 1);
      } else {
        src->gx(i, j) = kNaN;
        src->gy(i, j) = kNaN;
      }
    }
  }
  src->log = std::move(log_rho);
  return ConformalDensity(domain, std::move(src), 0.0);
}

bool ConformalDensity::is_grid() const { return !source_->expr && !source_->fn; }

std::string ConformalDensity::describe() const {
  std::string s = source_->label;
  if (log_scale_ != 0.0) s = std::to_string(std::exp(log_scale_)) + " * (" + s + ")";
  return s;
}

double ConformalDensity::closed_log_rho(Complex z) const {
  if (source_->expr) {
    const Complex v = source_->expr->eval(z);
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v.real())))
      throw Error(ErrorCode::NonPositiveDensity, "formula is not real-valued at z");
    return checked_log(v.real(), z);
  }
  return checked_log(source_->fn(z), z);
}

double ConformalDensity::log_rho(Complex z) const {
  if (is_grid()) {
    double v = 0.0;
    if (!interpolate_bilinear(source_->log, domain_.grid(), z, v))
      throw Error(ErrorCode::MapsOutsideDomain, "point outside the sampled region of the grid density");
    return v + log_scale_;
  }
  return closed_log_rho(z) + log_scale_;
}

Eigen::Vector2d ConformalDensity::grad_log_rho(Complex z) const {
  if (is_grid()) {
    double gx = 0.0, gy = 0.0;
    if (!interpolate_bilinear(source_->gx, domain_.grid(), z, gx) ||
        !interpolate_bilinear(source_->gy, domain_.grid(), z, gy))
      throw Error(ErrorCode::MapsOutsideDomain, "point outside the sampled region of the grid density");
    return {gx, gy};
  }
  if (source_->expr) {
    const auto j = source_->expr->eval(Jet<double>::variable(z));
    const double rho = j.v.real();
    checked_log(rho, z);
    return {j.dx.real() / rho, j.dy.real() / rho};
  }
  const double s = fd_step();
  return {(closed_log_rho(z + Complex(s, 0)) - closed_log_rho(z - Complex(s, 0))) / (2 * s),
          (closed_log_rho(z + Complex(0, s)) - closed_log_rho(z - Complex(0, s))) / (2 * s)};
}

double ConformalDensity::laplacian_log_rho(Complex z) const {
  if (is_grid()) throw Error(ErrorCode::StencilOutOfDomain, "pointwise Laplacian requires a closed-form density");
  const double s = fd_step();
  if (source_->expr) {
    const Eigen::Vector2d px = grad_log_rho(z + Complex(s, 0));
    const Eigen::Vector2d mx = grad_log_rho(z - Complex(s, 0));
    const Eigen::Vector2d py = grad_log_rho(z + Complex(0, s));
    const Eigen::Vector2d my = grad_log_rho(z - Complex(0, s));
    return (px.x() - mx.x() + py.y() - my.y()) / (2 * s);
  }
  const double c = closed_log_rho(z);
  return (closed_log_rho(z + Complex(s, 0)) + closed_log_rho(z - Complex(s, 0)) + closed_log_rho(z + Complex(0, s)) +
          closed_log_rho(z - Complex(0, s)) - 4 * c) /
         (s * s);
}

const Eigen::ArrayXXd& ConformalDensity::log_samples() const {
  if (!is_grid()) throw Error(ErrorCode::InvalidDomain, "closed-form density has no samples; call sampled()");
  return source_->log;
}

ConformalDensity ConformalDensity::sampled(const Domain& domain) const {
  const Grid& g = domain.grid();
  if (is_grid()) {
    const Grid& mine = domain_.grid();
    if (mine.nx == g.nx && mine.ny == g.ny && mine.x0 == g.x0 && mine.y0 == g.y0 && mine.h == g.h) return *this;
  }
  Eigen::ArrayXXd samples(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      samples(i, j) = domain.valid(i, j) ? log_rho(g.point(i, j)) : kNaN;
    }
  }
  return from_log_grid(domain, std::move(samples));
}

ConformalDensity ConformalDensity::scaled(double s) const {
  if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveDensity, "scale factor must be positive");
  if (is_grid()) return from_log_grid(domain_, source_->log + std::log(s));
  return ConformalDensity(domain_, source_, log_scale_ + std::log(s));
}

// ---------------------------------------------------------------------------

void require_positive_definite(const Eigen::Matrix2d& a) {
  const double e = a(0, 0), f = 0.5 * (a(0, 1) + a(1, 0)), g = a(1, 1);
  if (!(e > 0.0) || !(e * g - f * f > 0.0) || !std::isfinite(e * g))
    throw Error(ErrorCode::NotPositiveDefinite, "tensor [[" + std::to_string(e) + ", " + std::to_string(f) + "], [" +
                                                    std::to_string(f) + ", " + std::to_string(g) + "]]");
}

MetricTensorField::MetricTensorField(Domain domain, Function fn, Eigen::ArrayXXd e, Eigen::ArrayXXd f,
                                     Eigen::ArrayXXd g)
    : domain_(std::move(domain)), fn_(std::move(fn)), e_(std::move(e)), f_(std::move(f)), g_(std::move(g)) {}

MetricTensorField MetricTensorField::from_function(const Domain& domain, Function a) {
  return MetricTensorField(domain, std::move(a), {}, {}, {});
}

MetricTensorField MetricTensorField::from_grid(const Domain& domain, Eigen::ArrayXXd e, Eigen::ArrayXXd f,
                                               Eigen::ArrayXXd g) {
  const Grid& gr = domain.grid();
  for (const auto* arr : {&e, &f, &g}) {
    if (arr->rows() != gr.nx || arr->cols() != gr.ny)
      throw Error(ErrorCode::InvalidDomain, "tensor samples do not match the grid shape");
  }
  for (int j = 0; j < gr.ny; ++j) {
    for (int i = 0; i < gr.nx; ++i) {
      if (!domain.valid(i, j)) {
        e(i, j) = f(i, j) = g(i, j) = kNaN;
      } else {
        Eigen::Matrix2d a;
        a << e(i, j), f(i, j), f(i, j), g(i, j);
        require_positive_definite(a);
      }
    }
  }
  return MetricTensorField(domain, {}, std::move(e), std::move(f), std::move(g));
}

MetricTensorField MetricTensorField::conformal(const ConformalDensity& rho) {
  return from_function(rho.domain(), [rho](Complex z) -> Eigen::Matrix2d {
    const double r = rho.rho(z);
    return r * r * Eigen::Matrix2d::Identity();
  });
}

Eigen::Matrix2d MetricTensorField::at(Complex z) const {
  Eigen::Matrix2d a;
  if (fn_) {
    a = fn_(z);
  } else {
    double e = 0, f = 0, g = 0;
    const Grid& gr = domain_.grid();
    if (!interpolate_bilinear(e_, gr, z, e) || !interpolate_bilinear(f_, gr, z, f) ||
        !interpolate_bilinear(g_, gr, z, g))
      throw Error(ErrorCode::MapsOutsideDomain, "point outside the sampled region of the tensor field");
    a << e, f, f, g;
  }
  require_positive_definite(a);
  return a;
}

Eigen::Matrix2d MetricTensorField::at_node(int i, int j) const {
  if (fn_) return at(domain_.grid().point(i, j));
  Eigen::Matrix2d a;
  a << e_(i, j), f_(i, j), f_(i, j), g_(i, j);
  require_positive_definite(a);
  return a;
}

// ---------------------------------------------------------------------------

MoebiusMap MoebiusMap::make(Complex a, Complex b, Complex c, Complex d) {
  if (std::abs(a * d - b * c) == 0.0) throw Error(ErrorCode::SingularMap, "Moebius map with ad - bc = 0");
  return {a, b, c, d};
}

MoebiusMap MoebiusMap::rotation(double theta) { return {std::polar(1.0, theta), 0.0, 0.0, 1.0}; }
MoebiusMap MoebiusMap::translation(Complex t) { return {1.0, t, 0.0, 1.0}; }
MoebiusMap MoebiusMap::scaling(double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::SingularMap, "scaling factor must be positive");
  return {r, 0.0, 0.0, 1.0};
}
MoebiusMap MoebiusMap::disc_automorphism(Complex z0, double theta) {
  if (!(std::abs(z0) < 1.0)) throw Error(ErrorCode::SingularMap, "disc automorphism needs |z0| < 1");
  const Complex u = std::polar(1.0, theta);
  return {u, -u * z0, -std::conj(z0), 1.0};
}

MoebiusMap MoebiusMap::after(const MoebiusMap& o) const {
  return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
}

bool MoebiusMap::preserves(const Domain& domain, double tol) const {
  const Grid& g = domain.grid();
  const int stride = std::max(1, std::max(g.nx, g.ny) / 24);
  const MoebiusMap inv = inverse();
  for (int j = 0; j < g.ny; j += stride) {
    for (int i = 0; i < g.nx; i += stride) {
      if (!domain.valid(i, j)) continue;
      const Complex z = g.point(i, j);
      for (const Complex w : {(*this)(z), inv(z)}) {
        if (domain.contains(w)) continue;
        // allow images that land within tol of the boundary
        bool near = false;
        for (const Complex dz : {Complex(tol, 0), Complex(-tol, 0), Complex(0, tol), Complex(0, -tol)})
          near = near || domain.contains(w + dz);
        if (!near) return false;
      }
    }
  }
  return true;
}

}  // namespace flatstrip
