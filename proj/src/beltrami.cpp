#include "flatstrip/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace flatstrip::beltrami {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const Complex kComplexNaN{kNaN, kNaN};

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

struct Corner {
  int i, j;
  double w;
};

/// Bilinear corners of z with nonzero weight; false outside the lattice box.
bool bilinear_corners(const Grid& g, Complex z, std::vector<Corner>& out) {
  const Eigen::Vector2d f = g.to_index(z);
  int i = static_cast<int>(std::floor(f.x()));
  int j = static_cast<int>(std::floor(f.y()));
  if (i == g.nx - 1 && f.x() - i < 1e-12) --i;
  if (j == g.ny - 1 && f.y() - j < 1e-12) --j;
  if (i < 0 || j < 0 || i + 1 >= g.nx || j + 1 >= g.ny) return false;
  const double s = f.x() - i, t = f.y() - j;
  out.clear();
  const Corner all[4] = {{i, j, (1 - s) * (1 - t)}, {i + 1, j, s * (1 - t)}, {i, j + 1, (1 - s) * t},
                         {i + 1, j + 1, s * t}};
  for (const Corner& c : all)
    if (c.w != 0.0) out.push_back(c);
  return true;
}

Complex interpolate(const Eigen::ArrayXXcd& field, const Grid& g, Complex z, const char* what) {
  std::vector<Corner> corners;
  Complex v{0.0, 0.0};
  if (bilinear_corners(g, z, corners)) {
    for (const Corner& c : corners) v += c.w * field(c.i, c.j);
    if (finite(v)) return v;
  }
  throw Error(ErrorCode::MapsOutsideDomain, std::string("point outside the sampled region of the ") + what);
}

/// Complex-linear functional sum_k coeff_k * w(node_k) over grid indices.
struct Functional {
  std::vector<std::int64_t> node;
  std::vector<Complex> coeff;

  void add(std::int64_t n, Complex c) {
    for (std::size_t k = 0; k < node.size(); ++k) {
      if (node[k] == n) {
        coeff[k] += c;
        return;
      }
    }
    node.push_back(n);
    coeff.push_back(c);
  }
};

/// d/dz (dzbar = false) or d/dzbar (true) at a node as a functional.
bool wirtinger(const Domain& d, int i, int j, bool bar, Functional& f) {
  const Stencil sx = derivative_stencil(d, i, j, 0);
  const Stencil sy = derivative_stencil(d, i, j, 1);
  if (sx.count == 0 || sy.count == 0) return false;
  const Complex iy = bar ? Complex(0, 0.5) : Complex(0, -0.5);
  for (int k = 0; k < sx.count; ++k) f.add(sx.node[static_cast<std::size_t>(k)], 0.5 * sx.weight[static_cast<std::size_t>(k)]);
  for (int k = 0; k < sy.count; ++k) f.add(sy.node[static_cast<std::size_t>(k)], iy * sy.weight[static_cast<std::size_t>(k)]);
  return true;
}

}  // namespace

bool interior(const Domain& d, int i, int j) {
  return d.valid(i, j) && d.valid(i - 1, j) && d.valid(i + 1, j) && d.valid(i, j - 1) && d.valid(i, j + 1);
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Appends the real and imaginary rows of sum c_k w_k (w_k = u_k + i v_k).
void push_rows(const Functional& f, const std::vector<int>& column, double scale, int& row,
               std::vector<Triplet>& out) {
  for (std::size_t k = 0; k < f.node.size(); ++k) {
    const int col = column[static_cast<std::size_t>(f.node[k])];
    const Complex c = scale * f.coeff[k];
    out.emplace_back(row, 2 * col, c.real());
    out.emplace_back(row, 2 * col + 1, -c.imag());
    out.emplace_back(row + 1, 2 * col, c.imag());
    out.emplace_back(row + 1, 2 * col + 1, c.real());
  }
  row += 2;
}

Complex apply(const Functional& f, const Eigen::ArrayXXcd& w, const Grid& g) {
  Complex v{0.0, 0.0};
  for (std::size_t k = 0; k < f.node.size(); ++k) {
    const std::int64_t n = f.node[k];
    v += f.coeff[k] * w(static_cast<int>(n % g.nx), static_cast<int>(n / g.nx));
  }
  return v;
}

}  // namespace

Complex dilation_of_tensor(const MetricTensorField& a, Complex z) { return dilation_of_tensor(a.at(z)); }

SupNormBound sup_norm_bound_check(const MetricTensorField& a) {
  const Domain& d = a.domain();
  const Grid& g = d.grid();
  SupNormBound out;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!d.valid(i, j)) continue;
      const Complex mu_a = dilation_of_tensor(a.at_node(i, j));
      out.n = std::max(out.n, std::abs(mu_a));
      out.mu_max = std::max(out.mu_max, std::abs(mu_from_dilation(mu_a)));
    }
  }
  if (out.n > 0.0) out.bound = out.n / (1.0 + std::sqrt(1.0 - out.n * out.n));
  return out;
}

// ---------------------------------------------------------------------------

BeltramiField::BeltramiField(Domain domain, Eigen::ArrayXXcd mu, double sup_norm)
    : domain_(std::move(domain)), mu_(std::move(mu)), sup_norm_(sup_norm) {}

BeltramiField BeltramiField::from_samples(const Domain& domain, Eigen::ArrayXXcd mu) {
  const Grid& g = domain.grid();
  if (mu.rows() != g.nx || mu.cols() != g.ny)
    throw Error(ErrorCode::InvalidDomain, "Beltrami samples do not match the grid shape");
  double sup = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!domain.valid(i, j)) {
        mu(i, j) = kComplexNaN;
        continue;
      }
      const double m = std::abs(mu(i, j));
      if (!(m < 1.0))
        throw Error(ErrorCode::DilationNotStrictlyBounded,
                    "|mu| >= 1 at node (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      sup = std::max(sup, m);
    }
  }
  return BeltramiField(domain, std::move(mu), sup);
}

BeltramiField BeltramiField::from_function(const Domain& domain, const std::function<Complex(Complex)>& mu) {
  const Grid& g = domain.grid();
  Eigen::ArrayXXcd s = Eigen::ArrayXXcd::Constant(g.nx, g.ny, kComplexNaN);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (domain.valid(i, j)) s(i, j) = mu(g.point(i, j));
  return from_samples(domain, std::move(s));
}

BeltramiField BeltramiField::from_tensor(const MetricTensorField& a) {
  const Domain& d = a.domain();
  const Grid& g = d.grid();
  Eigen::ArrayXXcd s = Eigen::ArrayXXcd::Constant(g.nx, g.ny, kComplexNaN);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (d.valid(i, j)) s(i, j) = mu_from_dilation(dilation_of_tensor(a.at_node(i, j)));
  return from_samples(d, std::move(s));
}

Complex BeltramiField::at(Complex z) const { return interpolate(mu_, domain_.grid(), z, "Beltrami field"); }

// ---------------------------------------------------------------------------

Stencil derivative_stencil(const Domain& domain, int i, int j, int axis) {
  const Grid& g = domain.grid();
  const int di = axis == 0 ? 1 : 0;
  const int dj = axis == 0 ? 0 : 1;
  auto ok = [&](int k) { return domain.valid(i + k * di, j + k * dj); };
  auto idx = [&](int k) { return g.index(i + k * di, j + k * dj); };
  Stencil s;
  auto set = [&](std::initializer_list<std::pair<int, double>> terms) {
    for (const auto& [k, w] : terms) {
      s.node[static_cast<std::size_t>(s.count)] = idx(k);
      s.weight[static_cast<std::size_t>(s.count)] = w / g.h;
      ++s.count;
    }
  };
  if (!ok(0)) return s;
  if (ok(-1) && ok(1)) {
    set({{-1, -0.5}, {1, 0.5}});
  } else if (ok(1) && ok(2)) {
    set({{0, -1.5}, {1, 2.0}, {2, -0.5}});
  } else if (ok(-1) && ok(-2)) {
    set({{0, 1.5}, {-1, -2.0}, {-2, 0.5}});
  } else if (ok(1)) {
    set({{0, -1.0}, {1, 1.0}});
  } else if (ok(-1)) {
    set({{0, 1.0}, {-1, -1.0}});
  }
  return s;
}

GridMap::GridMap(Domain domain, Eigen::ArrayXXcd w) : domain_(std::move(domain)), w_(std::move(w)) {
  const Grid& g = domain_.grid();
  if (w_.rows() != g.nx || w_.cols() != g.ny)
    throw Error(ErrorCode::InvalidDomain, "map samples do not match the grid shape");
  jac_ = Eigen::ArrayXXd::Constant(g.nx, g.ny, kNaN);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!domain_.valid(i, j)) {
        w_(i, j) = kComplexNaN;
        continue;
      }
      const Complex p = dz(i, j), q = dzbar(i, j);
      if (finite(p) && finite(q)) jac_(i, j) = std::norm(p) - std::norm(q);
    }
  }
}

Complex GridMap::axis_derivative(int i, int j, int axis) const {
  const Stencil s = derivative_stencil(domain_, i, j, axis);
  if (s.count == 0) return kComplexNaN;
  const Grid& g = domain_.grid();
  Complex v{0.0, 0.0};
  for (int k = 0; k < s.count; ++k) {
    const std::int64_t n = s.node[static_cast<std::size_t>(k)];
    v += s.weight[static_cast<std::size_t>(k)] * w_(static_cast<int>(n % g.nx), static_cast<int>(n / g.nx));
  }
  return v;
}

Complex GridMap::dz(int i, int j) const {
  return 0.5 * (axis_derivative(i, j, 0) - Complex(0, 1) * axis_derivative(i, j, 1));
}

Complex GridMap::dzbar(int i, int j) const {
  return 0.5 * (axis_derivative(i, j, 0) + Complex(0, 1) * axis_derivative(i, j, 1));
}

Complex GridMap::at(Complex z) const { return interpolate(w_, domain_.grid(), z, "grid map"); }

Eigen::ArrayXXcd GridMap::dilation() const {
  const Grid& g = domain_.grid();
  Eigen::ArrayXXcd out = Eigen::ArrayXXcd::Constant(g.nx, g.ny, kComplexNaN);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (std::isfinite(jac_(i, j))) out(i, j) = dzbar(i, j) / dz(i, j);
  return out;
}

double GridMap::min_jacobian(bool interior_only) const {
  const Grid& g = domain_.grid();
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (std::isfinite(jac_(i, j)) && (!interior_only || interior(domain_, i, j))) m = std::min(m, jac_(i, j));
  return m;
}

// ---------------------------------------------------------------------------

double beltrami_residual(const BeltramiField& mu, const GridMap& w) {
  const Grid& g = w.domain().grid();
  double num = 0.0, den = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!interior(w.domain(), i, j)) continue;
      const Complex p = w.dz(i, j);
      num += std::norm(w.dzbar(i, j) - mu.at_node(i, j) * p);
      den += std::norm(p);
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::numeric_limits<double>::infinity();
}

namespace {

struct LeastSquares {
  SparseMatrix a;
  Eigen::VectorXd b;
  Eigen::VectorXd colscale;

  void equilibrate() {
    colscale = Eigen::VectorXd::Zero(a.cols());
    for (int r = 0; r < a.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(a, r); it; ++it) colscale(it.col()) += it.value() * it.value();
    for (Eigen::Index c = 0; c < colscale.size(); ++c)
      colscale(c) = colscale(c) > 0.0 ? 1.0 / std::sqrt(colscale(c)) : 1.0;
  }
};

/// Column-preconditioned CGLS from x. `done(x, r)` is polled every 10 steps.
template <typename Done>
int cgls(const LeastSquares& ls, Eigen::VectorXd& x, int max_iter, Done done) {
  const Eigen::VectorXd& d = ls.colscale;
  Eigen::VectorXd y = x.cwiseQuotient(d);
  Eigen::VectorXd r = ls.b - ls.a * x;
  if (done(x, r)) return 0;
  Eigen::VectorXd s = d.cwiseProduct(ls.a.transpose() * r);
  Eigen::VectorXd dir = s;
  double gamma = s.squaredNorm();
  int iter = 0;
  while (iter < max_iter && gamma > 0.0) {
    const Eigen::VectorXd q = ls.a * d.cwiseProduct(dir);
    const double alpha = gamma / q.squaredNorm();
    y += alpha * dir;
    r -= alpha * q;
    s = d.cwiseProduct(ls.a.transpose() * r);
    const double gamma_new = s.squaredNorm();
    dir = s + (gamma_new / gamma) * dir;
    gamma = gamma_new;
    ++iter;
    if (iter % 10 == 0 || iter == max_iter) {
      x = d.cwiseProduct(y);
      r = ls.b - ls.a * x;
      if (done(x, r)) break;
    }
  }
  x = d.cwiseProduct(y);
  return iter;
}

}  // namespace

GridMap solve_beltrami(const BeltramiField& mu, const Normalization& norm, const SolveOptions& options,
                       SolveReport* report) {
  if (!(mu.sup_norm() < 1.0 - options.delta))
    throw Error(ErrorCode::DilationNotStrictlyBounded,
                "sup |mu| = " + std::to_string(mu.sup_norm()) + " is within delta of 1");
  if (!(options.tolerance > 0.0)) throw Error(ErrorCode::BadParameters, "solver tolerance must be positive");
  const Domain& d = mu.domain();
  const Grid& g = d.grid();

  std::vector<int> column(static_cast<std::size_t>(g.size()), -1);
  int n_nodes = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (d.valid(i, j)) column[static_cast<std::size_t>(g.index(i, j))] = n_nodes++;
  const int n = 2 * n_nodes;

  // node equations (centered, interior) and piecewise-linear triangle equations
  std::vector<Functional> equations, dzs, cells;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (d.valid(i, j) && d.valid(i + 1, j) && d.valid(i, j + 1) && d.valid(i + 1, j + 1)) {
        // two linear triangles per cell, each with a constant gradient
        const std::int64_t n00 = g.index(i, j), n10 = g.index(i + 1, j), n01 = g.index(i, j + 1),
                           n11 = g.index(i + 1, j + 1);
        const double k = 1.0 / g.h;
        const Complex m_lo = (mu.at_node(i, j) + mu.at_node(i + 1, j) + mu.at_node(i + 1, j + 1)) / 3.0;
        const Complex m_up = (mu.at_node(i, j) + mu.at_node(i, j + 1) + mu.at_node(i + 1, j + 1)) / 3.0;
        auto triangle = [&](Complex m, std::int64_t xa, std::int64_t xb, std::int64_t ya, std::int64_t yb) {
          // w_x = (w[xb] - w[xa]) / h, w_y = (w[yb] - w[ya]) / h
          Functional t;
          const Complex bx = 0.5 * (1.0 - m) * k, by = 0.5 * Complex(0, 1) * (1.0 + m) * k;
          t.add(xb, bx);
          t.add(xa, -bx);
          t.add(yb, by);
          t.add(ya, -by);
          cells.push_back(std::move(t));
        };
        triangle(m_lo, n00, n10, n10, n11);
        triangle(m_up, n01, n11, n00, n01);
      }
      if (!interior(d, i, j)) continue;
      Functional bar, hol;
      wirtinger(d, i, j, true, bar);
      wirtinger(d, i, j, false, hol);
      Functional eq = bar;
      for (std::size_t k = 0; k < hol.node.size(); ++k) eq.add(hol.node[k], -mu.at_node(i, j) * hol.coeff[k]);
      equations.push_back(std::move(eq));
      dzs.push_back(std::move(hol));
    }
  }
  if (equations.empty()) throw Error(ErrorCode::InvalidDomain, "domain has no interior nodes");

  std::vector<Corner> corners;
  if (!bilinear_corners(g, norm.z0, corners))
    throw Error(ErrorCode::MapsOutsideDomain, "normalization point outside the grid");
  Functional value, slope;
  for (const Corner& c : corners) {
    if (!interior(d, c.i, c.j))
      throw Error(ErrorCode::MapsOutsideDomain, "normalization point not surrounded by interior nodes");
    value.add(g.index(c.i, c.j), c.w);
    Functional local;
    wirtinger(d, c.i, c.j, false, local);
    for (std::size_t k = 0; k < local.node.size(); ++k) slope.add(local.node[k], c.w * local.coeff[k]);
  }

  const double weight = 1.0 / g.h;
  const Complex target_slope = std::polar(1.0, norm.direction);
  auto assemble = [&](const std::vector<Functional>& rows) {
    LeastSquares ls;
    const int m_eq = 2 * static_cast<int>(rows.size());
    std::vector<Triplet> triplets;
    int row = 0;
    for (const Functional& f : rows) push_rows(f, column, 1.0, row, triplets);
    push_rows(value, column, weight, row, triplets);
    push_rows(slope, column, weight, row, triplets);
    ls.a.resize(m_eq + 4, n);
    ls.a.setFromTriplets(triplets.begin(), triplets.end());
    ls.b = Eigen::VectorXd::Zero(m_eq + 4);
    ls.b(m_eq) = weight * norm.w0.real();
    ls.b(m_eq + 1) = weight * norm.w0.imag();
    ls.b(m_eq + 2) = weight * target_slope.real();
    ls.b(m_eq + 3) = weight * target_slope.imag();
    ls.equilibrate();
    return ls;
  };
  const LeastSquares smooth = assemble(cells);
  const LeastSquares exact = assemble(equations);
  const int m_eq = 2 * static_cast<int>(equations.size());

  SparseMatrix p(2 * static_cast<int>(dzs.size()), n);
  {
    std::vector<Triplet> triplets;
    int row = 0;
    for (const Functional& f : dzs) push_rows(f, column, 1.0, row, triplets);
    p.setFromTriplets(triplets.begin(), triplets.end());
  }

  // affine solution of the frozen-coefficient problem at z0
  const Complex mu0 = mu.at(norm.z0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = column[static_cast<std::size_t>(g.index(i, j))];
      if (c < 0) continue;
      const Complex dz0 = g.point(i, j) - norm.z0;
      const Complex w = norm.w0 + target_slope * (dz0 + mu0 * std::conj(dz0));
      x(2 * c) = w.real();
      x(2 * c + 1) = w.imag();
    }
  }

  const int budget = options.max_iterations > 0
                         ? options.max_iterations
                         : static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(n))));
  double residual = std::numeric_limits<double>::infinity();
  auto converged = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& r) {
    const double den = (p * xs).norm();
    residual = den > 0.0 ? r.head(m_eq).norm() / den : std::numeric_limits<double>::infinity();
    return residual <= options.tolerance && r.tail(4).norm() / weight <= 1e-9;
  };

  // stage 1: overdetermined triangle least squares, solved directly (smooth,
  // unique); stage 2: minimal correction to an exact solution of the node
  // equations
  int iter = 0;
  Eigen::VectorXd r0 = exact.b - exact.a * x;
  if (!converged(x, r0)) {
    const Eigen::SparseMatrix<double> at = smooth.a.transpose();
    const Eigen::SparseMatrix<double> normal = at * smooth.a;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
    if (ldlt.info() == Eigen::Success) {
      const Eigen::VectorXd x1 = ldlt.solve(at * smooth.b);
      if (ldlt.info() == Eigen::Success && x1.allFinite()) x = x1;
    }
    iter = cgls(exact, x, budget, converged);
  }

  Eigen::ArrayXXcd w = Eigen::ArrayXXcd::Constant(g.nx, g.ny, kComplexNaN);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = column[static_cast<std::size_t>(g.index(i, j))];
      if (c >= 0) w(i, j) = {x(2 * c), x(2 * c + 1)};
    }
  }
  // exact normalization; the equation is invariant under w -> e^{it} w + c
  const Complex w_z0 = apply(value, w, g);
  const Complex slope_z0 = apply(slope, w, g);
  const Complex rot = std::polar(1.0, norm.direction - std::arg(slope_z0));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (d.valid(i, j)) w(i, j) = norm.w0 + rot * (w(i, j) - w_z0);

  GridMap out(d, std::move(w));
  const double final_residual = beltrami_residual(mu, out);
  if (report) *report = {iter, final_residual, n};
  if (!(final_residual <= options.tolerance))
    throw Error(ErrorCode::SolverDiverged, "relative residual " + std::to_string(final_residual) + " after " +
                                               std::to_string(iter) + " iterations (target " +
                                               std::to_string(options.tolerance) + ")");
  if (!(out.min_jacobian(true) > 0.0))
    throw Error(ErrorCode::DegenerateJacobian, "Jacobian of the solved map is not positive everywhere");
  return out;
}

// ---------------------------------------------------------------------------

ConformalDensity recover_density(const MetricTensorField& a, const GridMap& w, int resolution) {
  const Domain& d = w.domain();
  const Grid& g = d.grid();
  Eigen::ArrayXXd q = Eigen::ArrayXXd::Constant(g.nx, g.ny, kNaN);
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double jac = w.jacobian()(i, j);
      if (!std::isfinite(jac)) continue;
      if (!(jac > 0.0))
        throw Error(ErrorCode::DegenerateJacobian,
                    "map Jacobian <= 0 at node (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      const Eigen::Matrix2d t = a.at_node(i, j);
      q(i, j) = 0.25 * std::log(t.determinant()) - 0.5 * std::log(jac);
      const Complex p = w.at_node(i, j);
      x0 = std::min(x0, p.real());
      x1 = std::max(x1, p.real());
      y0 = std::min(y0, p.imag());
      y1 = std::max(y1, p.imag());
    }
  }
  if (!(x1 > x0) || !(y1 > y0)) throw Error(ErrorCode::DegenerateJacobian, "map image is degenerate");

  const int res = resolution > 0 ? resolution : 4 * std::max(g.nx, g.ny);
  const double h = std::max(x1 - x0, y1 - y0) / (res - 1);
  Grid img{std::max(8, static_cast<int>(std::ceil((x1 - x0) / h - 1e-9)) + 1),
           std::max(8, static_cast<int>(std::ceil((y1 - y0) / h - 1e-9)) + 1), x0, y0, h};
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Constant(img.nx, img.ny, kNaN);
  NodeMask mask = NodeMask::Constant(img.nx, img.ny, false);

  auto raster = [&](const std::array<std::pair<int, int>, 3>& tri) {
    Complex p[3];
    double v[3];
    for (int k = 0; k < 3; ++k) {
      const auto [i, j] = tri[static_cast<std::size_t>(k)];
      if (!std::isfinite(q(i, j))) return;
      p[k] = w.at_node(i, j);
      v[k] = q(i, j);
    }
    const Complex e1 = p[1] - p[0], e2 = p[2] - p[0];
    const double area2 = e1.real() * e2.imag() - e1.imag() * e2.real();
    if (area2 == 0.0) return;
    const double lo_x = std::min({p[0].real(), p[1].real(), p[2].real()});
    const double hi_x = std::max({p[0].real(), p[1].real(), p[2].real()});
    const double lo_y = std::min({p[0].imag(), p[1].imag(), p[2].imag()});
    const double hi_y = std::max({p[0].imag(), p[1].imag(), p[2].imag()});
    const int i0 = std::max(0, static_cast<int>(std::ceil((lo_x - img.x0) / h - 1e-9)));
    const int i1 = std::min(img.nx - 1, static_cast<int>(std::floor((hi_x - img.x0) / h + 1e-9)));
    const int j0 = std::max(0, static_cast<int>(std::ceil((lo_y - img.y0) / h - 1e-9)));
    const int j1 = std::min(img.ny - 1, static_cast<int>(std::floor((hi_y - img.y0) / h + 1e-9)));
    const double eps = 1e-10;
    for (int jj = j0; jj <= j1; ++jj) {
      for (int ii = i0; ii <= i1; ++ii) {
        if (mask(ii, jj)) continue;
        const Complex r = img.point(ii, jj) - p[0];
        const double l1 = (r.real() * e2.imag() - r.imag() * e2.real()) / area2;
        const double l2 = (e1.real() * r.imag() - e1.imag() * r.real()) / area2;
        const double l0 = 1.0 - l1 - l2;
        if (l0 < -eps || l1 < -eps || l2 < -eps) continue;
        out(ii, jj) = l0 * v[0] + l1 * v[1] + l2 * v[2];
        mask(ii, jj) = true;
      }
    }
  };
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      raster({{{i, j}, {i + 1, j}, {i + 1, j + 1}}});
      raster({{{i, j}, {i + 1, j + 1}, {i, j + 1}}});
    }
  }
  return ConformalDensity::from_log_grid(Domain::masked(img, std::move(mask)), std::move(out));
}

}  // namespace flatstrip::beltrami
