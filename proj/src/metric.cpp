#include "flatstrip/metric.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "flatstrip/error.hpp"

namespace flatstrip::metric {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool has_stencil(const Eigen::ArrayXXd& l, const Grid& g, int i, int j) {
  if (i < 1 || j < 1 || i + 1 >= g.nx || j + 1 >= g.ny) return false;
  return std::isfinite(l(i, j)) && std::isfinite(l(i - 1, j)) && std::isfinite(l(i + 1, j)) &&
         std::isfinite(l(i, j - 1)) && std::isfinite(l(i, j + 1));
}

double five_point(const Eigen::ArrayXXd& l, const Grid& g, int i, int j) {
  const double lap = (l(i + 1, j) + l(i - 1, j) + l(i, j + 1) + l(i, j - 1) - 4.0 * l(i, j)) / (g.h * g.h);
  return -lap / std::exp(2.0 * l(i, j));
}

double spectral_norm_sym(const Eigen::Matrix2d& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double half = 0.5 * (m(0, 0) - m(1, 1));
  const double off = 0.5 * (m(0, 1) + m(1, 0));
  return std::abs(mean) + std::hypot(half, off);
}

Eigen::Matrix2d multiplication_matrix(Complex m) {
  Eigen::Matrix2d c;
  c << m.real(), -m.imag(), m.imag(), m.real();
  return c;
}

}  // namespace

double curvature_at_node(const ConformalDensity& rho, int i, int j) {
  const Eigen::ArrayXXd& l = rho.log_samples();
  const Grid& g = rho.domain().grid();
  if (!has_stencil(l, g, i, j))
    throw Error(ErrorCode::StencilOutOfDomain, "node (" + std::to_string(i) + ", " + std::to_string(j) +
                                                   ") lacks a full 5-point stencil");
  return five_point(l, g, i, j);
}

double curvature(const ConformalDensity& rho, Complex z) {
  if (!rho.is_grid()) {
    const double s = rho.fd_step();
    for (const Complex dz : {Complex(0, 0), Complex(2 * s, 0), Complex(-2 * s, 0), Complex(0, 2 * s), Complex(0, -2 * s)}) {
      if (!rho.domain().contains(z + dz))
        throw Error(ErrorCode::StencilOutOfDomain, "finite-difference stencil leaves the domain");
    }
    const double l = rho.log_rho(z);
    return -rho.laplacian_log_rho(z) / std::exp(2.0 * l);
  }
  const Grid& g = rho.domain().grid();
  const Eigen::Vector2d f = g.to_index(z);
  const int i = static_cast<int>(std::floor(f.x()));
  const int j = static_cast<int>(std::floor(f.y()));
  const double s = f.x() - i;
  const double t = f.y() - j;
  double k = 0.0;
  const int corners[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (const auto& c : corners) {
    const double w = (c[0] ? s : 1 - s) * (c[1] ? t : 1 - t);
    if (w == 0.0) continue;
    k += w * curvature_at_node(rho, i + c[0], j + c[1]);
  }
  return k;
}

Eigen::ArrayXXd curvature_field(const ConformalDensity& rho) {
  const ConformalDensity grid = rho.sampled();
  const Eigen::ArrayXXd& l = grid.log_samples();
  const Grid& g = grid.domain().grid();
  Eigen::ArrayXXd k = Eigen::ArrayXXd::Constant(g.nx, g.ny, kNaN);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (has_stencil(l, g, i, j)) k(i, j) = five_point(l, g, i, j);
  return k;
}

std::vector<Complex> sample_points(const Domain& domain, int max_count) {
  const Grid& g = domain.grid();
  std::int64_t valid = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) valid += domain.valid(i, j) ? 1 : 0;
  const int stride =
      std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(valid) / std::max(1, max_count)))));
  std::vector<Complex> out;
  for (int j = stride / 2; j < g.ny; j += stride)
    for (int i = stride / 2; i < g.nx; i += stride)
      if (domain.valid(i, j)) out.push_back(g.point(i, j));
  return out;
}

double equivariance_residual(const ConformalDensity& rho, const MoebiusMap& m, std::span<const Complex> samples) {
  double worst = 0.0;
  for (const Complex z : samples) {
    const Complex w = m(z);
    if (!rho.domain().contains(w))
      throw Error(ErrorCode::MapsOutsideDomain, "M maps a sample outside the domain");
    const double r = rho.rho(z);
    const double pushed = rho.rho(w) * std::abs(m.derivative(z));
    worst = std::max(worst, std::abs(pushed - r) / r);
  }
  return worst;
}

double tensor_equivariance_residual(const MetricTensorField& a, const MoebiusMap& m,
                                    std::span<const Complex> samples) {
  double worst = 0.0;
  for (const Complex z : samples) {
    const Complex w = m(z);
    if (!a.domain().contains(w))
      throw Error(ErrorCode::MapsOutsideDomain, "M maps a sample outside the domain");
    const Eigen::Matrix2d c = multiplication_matrix(m.derivative(z));
    const Eigen::Matrix2d diff = c.transpose() * a.at(w) * c - a.at(z);
    worst = std::max(worst, spectral_norm_sym(diff));
  }
  return worst;
}

int FlatLocus::component_at(Complex z) const {
  int i = 0, j = 0;
  if (!domain.grid().nearest(z, i, j)) return 0;
  return labels(i, j);
}

int FlatLocus::largest() const {
  int best = 0;
  for (int k = 0; k < components(); ++k)
    if (best == 0 || component_sizes[static_cast<std::size_t>(k)] > component_sizes[static_cast<std::size_t>(best - 1)])
      best = k + 1;
  return best;
}

double default_flat_tolerance(const ConformalDensity& rho) {
  const ConformalDensity grid = rho.sampled();
  const Eigen::ArrayXXd& l = grid.log_samples();
  const Grid& g = grid.domain().grid();
  double second = 0.0;
  for (int j = 1; j + 1 < g.ny; ++j) {
    for (int i = 1; i + 1 < g.nx; ++i) {
      if (!has_stencil(l, g, i, j)) continue;
      const double dxx = (l(i + 1, j) - 2 * l(i, j) + l(i - 1, j)) / (g.h * g.h);
      const double dyy = (l(i, j + 1) - 2 * l(i, j) + l(i, j - 1)) / (g.h * g.h);
      second = std::max({second, std::abs(dxx), std::abs(dyy)});
    }
  }
  return 10.0 * g.h * g.h * second;
}

FlatLocus flat_locus(const ConformalDensity& rho, std::optional<double> tol) {
  const ConformalDensity grid = rho.sampled();
  const Grid& g = grid.domain().grid();
  const double tolerance = tol ? *tol : default_flat_tolerance(grid);
  const Eigen::ArrayXXd k = curvature_field(grid);

  FlatLocus out{Eigen::ArrayXXi::Zero(g.nx, g.ny), {}, tolerance, grid.domain()};
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flat(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) flat(i, j) = std::isfinite(k(i, j)) && std::abs(k(i, j)) <= tolerance;

  std::deque<std::pair<int, int>> queue;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!flat(i, j) || out.labels(i, j) != 0) continue;
      const int id = out.components() + 1;
      int size = 0;
      out.labels(i, j) = id;
      queue.emplace_back(i, j);
      while (!queue.empty()) {
        const auto [a, b] = queue.front();
        queue.pop_front();
        ++size;
        const int nb[4][2] = {{a + 1, b}, {a - 1, b}, {a, b + 1}, {a, b - 1}};
        for (const auto& n : nb) {
          if (g.in_range(n[0], n[1]) && flat(n[0], n[1]) && out.labels(n[0], n[1]) == 0) {
            out.labels(n[0], n[1]) = id;
            queue.emplace_back(n[0], n[1]);
          }
        }
      }
      out.component_sizes.push_back(size);
    }
  }
  return out;
}

double area(const ConformalDensity& rho, const Region& region, int subdivisions) {
  const Domain& domain = rho.domain();
  const Grid& g = domain.grid();
  const int sub = std::max(1, subdivisions);
  const double hs = g.h / sub;
  double total = 0.0;
  // row-major accumulation keeps the reduction order fixed
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int b = 0; b < sub; ++b) {
      const double y = g.y0 + j * g.h + (b + 0.5) * hs;
      for (int i = 0; i + 1 < g.nx; ++i) {
        for (int a = 0; a < sub; ++a) {
          const Complex z(g.x0 + i * g.h + (a + 0.5) * hs, y);
          if (!domain.contains(z) || !region(z)) continue;
          double l = 0.0;
          if (rho.is_grid()) {
            if (!interpolate_bilinear(rho.log_samples(), g, z, l)) continue;
          } else {
            l = rho.log_rho(z);
          }
          total += std::exp(2.0 * l);
        }
      }
    }
  }
  return total * hs * hs;
}

}  // namespace flatstrip::metric
