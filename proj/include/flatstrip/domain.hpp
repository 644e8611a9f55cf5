#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Core>

namespace flatstrip {

using Complex = std::complex<double>;

/// Uniform Cartesian lattice: node (i, j) sits at (x0 + i h, y0 + j h).
struct Grid {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 0.0;

  Complex point(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  std::int64_t index(int i, int j) const { return static_cast<std::int64_t>(j) * nx + i; }
  std::int64_t size() const { return static_cast<std::int64_t>(nx) * ny; }
  double x1() const { return x0 + (nx - 1) * h; }
  double y1() const { return y0 + (ny - 1) * h; }

  /// Fractional node coordinates of z.
  Eigen::Vector2d to_index(Complex z) const { return {(z.real() - x0) / h, (z.imag() - y0) / h}; }

  /// Nearest node; returns false when z falls outside the lattice box.
  bool nearest(Complex z, int& i, int& j) const;
};

enum class DomainKind { Disc, UpperHalfPlane, Annulus, Rectangle, Masked };

using NodeMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

const char* to_string(DomainKind kind) noexcept;

/// A planar coordinate domain plus the sampling grid laid over its bounding box.
/// Grid nodes that are not strictly inside the domain are not samples.
class Domain {
 public:
  /// Disc |z| < radius sampled by an n x n grid on [-radius, radius]^2.
  static Domain disc(double radius, int n);
  /// Window (x0, x1) x (0, y1] of the upper half plane, nodes with Im z > 0.
  static Domain upper_half_plane(double x0, double x1, double y1, int nx, int ny);
  /// Annulus r_in < |z| < r_out sampled by an n x n grid on [-r_out, r_out]^2.
  static Domain annulus(double r_in, double r_out, int n);
  /// Closed rectangle covered exactly by the grid.
  static Domain rectangle(const Grid& grid);
  static Domain rectangle(double x0, double x1, double y0, double y1, int nx, int ny);
  /// Arbitrary set of grid nodes; z belongs to it when its nearest node does.
  static Domain masked(const Grid& grid, NodeMask mask);

  DomainKind kind() const { return kind_; }
  const Grid& grid() const { return grid_; }
  /// (a, b, c, d): disc (R, -, -, -), annulus (r_in, r_out, -, -), rectangle/window (x0, x1, y0, y1).
  const Eigen::Vector4d& bounds() const { return bounds_; }

  /// Membership in the mathematical domain (strict for open domains).
  bool contains(Complex z) const;
  /// Node is a sample: inside the grid and strictly inside the domain.
  bool valid(int i, int j) const {
    if (!grid_.in_range(i, j)) return false;
    return mask_ ? (*mask_)(i, j) : contains(grid_.point(i, j));
  }
  /// All sample nodes.
  NodeMask mask() const;
  /// Characteristic length used to scale finite-difference steps.
  double scale() const;

  /// Same domain, different grid resolution (n nodes along the longer side).
  Domain resampled(int nx, int ny) const;

 private:
  Domain(DomainKind kind, Grid grid, Eigen::Vector4d bounds);

  DomainKind kind_;
  Grid grid_;
  Eigen::Vector4d bounds_;
  std::shared_ptr<const NodeMask> mask_;
};

}  // namespace flatstrip
