#include "flatstrip/domain.hpp"

#include <algorithm>
#include <cmath>

#include "flatstrip/error.hpp"

namespace flatstrip {

namespace {

void check_grid(const Grid& g) {
  if (!(g.h > 0.0) || !std::isfinite(g.h)) throw Error(ErrorCode::InvalidDomain, "grid spacing must be positive");
  if (g.nx < 8 || g.ny < 8) throw Error(ErrorCode::InvalidDomain, "grid needs at least 8 nodes per axis");
}

}  // namespace

bool Grid::nearest(Complex z, int& i, int& j) const {
  const Eigen::Vector2d f = to_index(z);
  i = static_cast<int>(std::lround(f.x()));
  j = static_cast<int>(std::lround(f.y()));
  return in_range(i, j);
}

const char* to_string(DomainKind kind) noexcept {
  switch (kind) {
    case DomainKind::Disc: return "disc";
    case DomainKind::UpperHalfPlane: return "upper-half-plane";
    case DomainKind::Annulus: return "annulus";
    case DomainKind::Rectangle: return "rectangle-grid";
    case DomainKind::Masked: return "masked-grid";
  }
  return "unknown";
}

Domain::Domain(DomainKind kind, Grid grid, Eigen::Vector4d bounds)
    : kind_(kind), grid_(grid), bounds_(bounds) {
  check_grid(grid_);
}

Domain Domain::disc(double radius, int n) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidDomain, "disc radius must be positive");
  if (n < 8) throw Error(ErrorCode::InvalidDomain, "grid needs at least 8 nodes per axis");
  Grid g{n, n, -radius, -radius, 2.0 * radius / (n - 1)};
  return Domain(DomainKind::Disc, g, {radius, 0.0, 0.0, 0.0});
}

Domain Domain::upper_half_plane(double x0, double x1, double y1, int nx, int ny) {
  if (!(x1 > x0) || !(y1 > 0.0)) throw Error(ErrorCode::InvalidDomain, "empty half-plane window");
  if (nx < 8 || ny < 8) throw Error(ErrorCode::InvalidDomain, "grid needs at least 8 nodes per axis");
  const double h = (x1 - x0) / (nx - 1);
  const Grid g{nx, ny, x0, y1 - (ny - 1) * h, h};
  if (g.y0 <= 0.0) throw Error(ErrorCode::InvalidDomain, "half-plane window reaches the real axis; raise y1 or nx");
  return Domain(DomainKind::UpperHalfPlane, g, {x0, x1, 0.0, y1});
}

Domain Domain::annulus(double r_in, double r_out, int n) {
  if (!(r_in >= 0.0) || !(r_out > r_in)) throw Error(ErrorCode::InvalidDomain, "annulus needs 0 <= r_in < r_out");
  if (n < 8) throw Error(ErrorCode::InvalidDomain, "grid needs at least 8 nodes per axis");
  Grid g{n, n, -r_out, -r_out, 2.0 * r_out / (n - 1)};
  return Domain(DomainKind::Annulus, g, {r_in, r_out, 0.0, 0.0});
}

Domain Domain::rectangle(const Grid& grid) {
  return Domain(DomainKind::Rectangle, grid, {grid.x0, grid.x1(), grid.y0, grid.y1()});
}

Domain Domain::rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (!(x1 > x0) || !(y1 > y0)) throw Error(ErrorCode::InvalidDomain, "empty rectangle");
  if (nx < 8 || ny < 8) throw Error(ErrorCode::InvalidDomain, "grid needs at least 8 nodes per axis");
  const double h = (x1 - x0) / (nx - 1);
  const double hy = (y1 - y0) / (ny - 1);
  if (std::abs(h - hy) > 1e-9 * std::max(h, hy))
    throw Error(ErrorCode::InvalidDomain, "rectangle grid must have equal spacing in x and y");
  return Domain(DomainKind::Rectangle, Grid{nx, ny, x0, y0, h}, {x0, x1, y0, y1});
}

Domain Domain::masked(const Grid& grid, NodeMask mask) {
  if (mask.rows() != grid.nx || mask.cols() != grid.ny)
    throw Error(ErrorCode::InvalidDomain, "mask does not match the grid shape");
  Domain d(DomainKind::Masked, grid, {grid.x0, grid.x1(), grid.y0, grid.y1()});
  d.mask_ = std::make_shared<const NodeMask>(std::move(mask));
  return d;
}

NodeMask Domain::mask() const {
  if (mask_) return *mask_;
  NodeMask m(grid_.nx, grid_.ny);
  for (int j = 0; j < grid_.ny; ++j)
    for (int i = 0; i < grid_.nx; ++i) m(i, j) = valid(i, j);
  return m;
}

bool Domain::contains(Complex z) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  switch (kind_) {
    case DomainKind::Disc:
      return std::abs(z) < bounds_[0];
    case DomainKind::Annulus: {
      const double r = std::abs(z);
      return r > bounds_[0] && r < bounds_[1];
    }
    case DomainKind::UpperHalfPlane:
      return z.imag() > 0.0;
    case DomainKind::Rectangle: {
      const double tol = 1e-9 * grid_.h;
      return z.real() >= bounds_[0] - tol && z.real() <= bounds_[1] + tol && z.imag() >= bounds_[2] - tol &&
             z.imag() <= bounds_[3] + tol;
    }
    case DomainKind::Masked: {
      int i = 0, j = 0;
      return grid_.nearest(z, i, j) && (*mask_)(i, j);
    }
  }
  return false;
}

double Domain::scale() const {
  switch (kind_) {
    case DomainKind::Disc: return bounds_[0];
    case DomainKind::Annulus: return bounds_[1];
    case DomainKind::UpperHalfPlane:
    case DomainKind::Rectangle:
    case DomainKind::Masked:
      return 0.5 * std::max(bounds_[1] - bounds_[0], bounds_[3] - bounds_[2]);
  }
  return 1.0;
}

Domain Domain::resampled(int nx, int ny) const {
  switch (kind_) {
    case DomainKind::Disc: return disc(bounds_[0], std::max(nx, ny));
    case DomainKind::Annulus: return annulus(bounds_[0], bounds_[1], std::max(nx, ny));
    case DomainKind::UpperHalfPlane: return upper_half_plane(bounds_[0], bounds_[1], bounds_[3], nx, ny);
    case DomainKind::Rectangle: return rectangle(bounds_[0], bounds_[1], bounds_[2], bounds_[3], nx, ny);
    case DomainKind::Masked: {
      const Domain box = rectangle(bounds_[0], bounds_[1], bounds_[2], bounds_[3], nx, ny);
      NodeMask m(box.grid().nx, box.grid().ny);
      for (int j = 0; j < box.grid().ny; ++j)
        for (int i = 0; i < box.grid().nx; ++i) m(i, j) = contains(box.grid().point(i, j));
      return masked(box.grid(), std::move(m));
    }
  }
  return *this;
}

}  // namespace flatstrip
