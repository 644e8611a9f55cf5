#include "flatstrip/count.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

#include "flatstrip/error.hpp"

namespace flatstrip::count {

namespace {

constexpr std::int64_t kMaxDirections = 1'000'000;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Squared distance transform of one line (Felzenszwalb-Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[k]] == kInf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (k > 0 && s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = f[v[k]] == kInf ? kInf : dq * dq + f[v[k]];
  }
}

/// Squared distance (in nodes) from every node to the nearest set node.
Eigen::ArrayXXd squared_edt(const NodeMask& set) {
  const int nx = static_cast<int>(set.rows()), ny = static_cast<int>(set.cols());
  Eigen::ArrayXXd d(nx, ny);
  const int m = std::max(nx, ny);
  std::vector<double> f(m), out(m), z(m + 1);
  std::vector<int> v(m);
  for (int i = 0; i < nx; ++i) {
    f.assign(ny, 0.0);
    out.assign(ny, 0.0);
    for (int j = 0; j < ny; ++j) f[j] = set(i, j) ? 0.0 : kInf;
    edt_1d(f, out, v, z);
    for (int j = 0; j < ny; ++j) d(i, j) = out[j];
  }
  for (int j = 0; j < ny; ++j) {
    f.assign(nx, 0.0);
    out.assign(nx, 0.0);
    for (int i = 0; i < nx; ++i) f[i] = d(i, j);
    edt_1d(f, out, v, z);
    for (int i = 0; i < nx; ++i) d(i, j) = out[i];
  }
  return d;
}

void rasterize_triangle(NodeMask& mask, const Grid& g, Complex a, Complex b, Complex c) {
  const double xmin = std::min({a.real(), b.real(), c.real()}), xmax = std::max({a.real(), b.real(), c.real()});
  const double ymin = std::min({a.imag(), b.imag(), c.imag()}), ymax = std::max({a.imag(), b.imag(), c.imag()});
  const int i0 = std::max(0, static_cast<int>(std::floor((xmin - g.x0) / g.h))),
            i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((xmax - g.x0) / g.h)));
  const int j0 = std::max(0, static_cast<int>(std::floor((ymin - g.y0) / g.h))),
            j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((ymax - g.y0) / g.h)));
  auto cross = [](Complex u, Complex v) { return u.real() * v.imag() - u.imag() * v.real(); };
  const double area = cross(b - a, c - a);
  // nodes within half a spacing of the triangle count as covered
  const double slack = 0.5 * g.h;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Complex p = g.point(i, j);
      bool inside = true;
      if (area != 0.0) {
        const double s = area > 0 ? 1.0 : -1.0;
        inside = s * cross(b - a, p - a) >= -slack * std::abs(b - a) && s * cross(c - b, p - b) >= -slack * std::abs(c - b) &&
                 s * cross(a - c, p - c) >= -slack * std::abs(a - c);
      }
      if (inside) mask(i, j) = true;
    }
  }
}

}  // namespace

double lattice_area(double alpha, Complex a) {
  if (!(alpha > 0) || !(a.imag() > 0) || !std::isfinite(alpha) || !std::isfinite(a.real()) || !std::isfinite(a.imag())) {
    throw Error(ErrorCode::BadLattice, "need alpha > 0 and Im a > 0, got alpha = " + fmt(alpha) + ", a = " +
                                           fmt(a.real()) + "+" + fmt(a.imag()) + "i");
  }
  return alpha * a.imag();
}

std::vector<Direction> enumerate_directions(double alpha, Complex a, double r) {
  const double area = lattice_area(alpha, a);
  if (!(r > 0) || !std::isfinite(r)) throw Error(ErrorCode::BadParameters, "disc radius must be positive, got " + fmt(r));
  const double bound = area / r;
  const double cutoff = bound * (1.0 + 1e-12);
  // lattice points in the disc of radius B number about pi B^2 / area; coprime
  // ones modulo sign about 3/pi^2 of those
  const double estimate = 3.0 / std::numbers::pi * bound * bound / area;
  if (estimate > 1.2 * kMaxDirections) {
    throw Error(ErrorCode::BoundTooLarge, "about " + fmt(estimate) + " directions under the cutoff " + fmt(bound));
  }
  std::vector<Direction> out;
  const auto qmax = static_cast<std::int64_t>(std::floor(cutoff / a.imag()));
  for (std::int64_t q = 0; q <= qmax; ++q) {
    const double shift = q * a.real();
    const auto plo = static_cast<std::int64_t>(std::ceil((-cutoff - shift) / alpha));
    const auto phi = static_cast<std::int64_t>(std::floor((cutoff - shift) / alpha));
    for (std::int64_t p = plo; p <= phi; ++p) {
      if (q == 0 && p <= 0) continue;
      if (std::gcd(p, q) != 1) continue;
      const Complex v = double(p) * alpha + double(q) * a;
      const double len = std::abs(v);
      if (len > cutoff) continue;
      out.push_back({p, q, v, len});
      if (static_cast<std::int64_t>(out.size()) > kMaxDirections) {
        throw Error(ErrorCode::BoundTooLarge, "more than 10^6 directions under the cutoff " + fmt(bound));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Direction& x, const Direction& y) {
    if (std::abs(x.length - y.length) > 1e-12 * std::max(x.length, y.length)) return x.length < y.length;
    return x.q != y.q ? x.q < y.q : x.p < y.p;
  });
  return out;
}

ComplementDisc complement_disc(const Grid& grid, const NodeMask& image) {
  const Eigen::ArrayXXd d2 = squared_edt(image);
  ComplementDisc best;
  double best_clear = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (image(i, j)) continue;
      const double edge = std::min({double(i), double(grid.nx - 1 - i), double(j), double(grid.ny - 1 - j)});
      const double clear = std::min(std::sqrt(d2(i, j)), edge) * grid.h;
      if (clear > best_clear) {
        best_clear = clear;
        best.center = grid.point(i, j);
      }
    }
  }
  best.clearance = best_clear;
  best.r = best_clear - grid.h;
  if (!(best.r > 0)) {
    throw Error(ErrorCode::NoComplement,
                "the complement of the image has no interior at grid spacing " + fmt(grid.h));
  }
  return best;
}

ComplementDisc complement_disc(const develop::DevelopingMap& dev, double alpha, Complex a, int n) {
  const double height = lattice_area(alpha, a) / alpha;
  const double h = std::max(alpha, height) / n;
  const int cx = static_cast<int>(std::ceil(alpha / h)), cy = static_cast<int>(std::ceil(height / h));
  // one fundamental rectangle of margin on every side
  Grid canvas;
  canvas.h = h;
  canvas.nx = 3 * cx + 1;
  canvas.ny = 3 * cy + 1;
  canvas.x0 = -cx * h;
  canvas.y0 = -cy * h;
  NodeMask mask = NodeMask::Constant(canvas.nx, canvas.ny, false);

  auto reduce = [&](Complex w) {
    const double t = std::floor(w.imag() / height);
    w -= t * a;
    return w - std::floor(w.real() / alpha) * alpha;
  };
  const int mspan = 2 + static_cast<int>(std::ceil(std::abs(a.real()) / alpha));
  const Domain& region = dev.region();
  const Grid& g = region.grid();
  const auto& hv = dev.values();
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const bool c00 = region.valid(i, j), c10 = region.valid(i + 1, j), c01 = region.valid(i, j + 1),
                 c11 = region.valid(i + 1, j + 1);
      if (!c00) continue;
      const Complex base = reduce(hv(i, j)), shift = base - hv(i, j);
      for (int k = -1; k <= 1; ++k) {
        for (int m = -mspan; m <= mspan; ++m) {
          const Complex t = shift + double(k) * a + double(m) * alpha;
          const Complex p00 = hv(i, j) + t;
          if (p00.real() < canvas.x0 - alpha || p00.real() > canvas.x1() + alpha || p00.imag() < canvas.y0 - height ||
              p00.imag() > canvas.y1() + height) {
            continue;
          }
          if (c10 && c11) rasterize_triangle(mask, canvas, p00, hv(i + 1, j) + t, hv(i + 1, j + 1) + t);
          if (c01 && c11) rasterize_triangle(mask, canvas, p00, hv(i + 1, j + 1) + t, hv(i, j + 1) + t);
          if (!(c10 && c11) && !(c01 && c11)) rasterize_triangle(mask, canvas, p00, p00, p00);
        }
      }
    }
  }

  const Eigen::ArrayXXd d2 = squared_edt(mask);
  ComplementDisc best;
  double best_clear = 0.0;
  for (int j = cy; j < 2 * cy; ++j) {
    for (int i = cx; i < 2 * cx; ++i) {
      if (mask(i, j)) continue;
      const double clear = std::sqrt(d2(i, j)) * h;
      if (clear > best_clear) {
        best_clear = clear;
        best.center = canvas.point(i, j);
      }
    }
  }
  best.clearance = best_clear;
  best.r = best_clear - h;
  if (!(best.r > 0)) {
    throw Error(ErrorCode::NoComplement, "the developed image covers the fundamental domain at spacing " + fmt(h));
  }
  return best;
}

HomotopyClassBound class_bound(const iso::IsometryGroupDescription& description, int genus, std::optional<double> r) {
  if (genus < 2) throw Error(ErrorCode::BadParameters, "genus must be at least 2, got " + std::to_string(genus));
  HomotopyClassBound out;
  out.case_number = description.case_number();
  if (out.case_number < 5) {
    throw Error(ErrorCode::CaseNotCountable, std::string("case ") + std::to_string(out.case_number) + " (" +
                                                 iso::to_string(description.kind) +
                                                 ") cannot arise from a compact surface; the inputs are inconsistent");
  }
  out.per_direction = 3 * genus - 3;
  out.component_multiplier = 3 * genus - 3;
  out.alpha = description.alpha;
  out.a = description.a;
  out.r = r;
  if (description.family) out.family = iso::to_string(*description.family);

  if (out.case_number == 5) {
    out.total = 1;
    return out;
  }
  const bool lattice = description.a.imag() > 0;
  if (out.case_number == 7) out.covering_factor = std::max(1, description.image_order);
  if (lattice) {
    if (!r) throw Error(ErrorCode::BadParameters, "a complement disc radius r is required for a rank-2 lattice");
    out.bound_radius = lattice_area(out.alpha, out.a) / *r;
    out.directions = enumerate_directions(out.alpha, out.a, *r);
    out.contradiction = out.directions.empty();
  }
  const auto n = static_cast<std::int64_t>(out.directions.size());
  out.total = std::max<std::int64_t>(1, n * out.per_direction * out.covering_factor);
  return out;
}

}  // namespace flatstrip::count
