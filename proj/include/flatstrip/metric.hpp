#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "flatstrip/density.hpp"

namespace flatstrip::metric {

/// Gaussian curvature K = -Laplacian(log rho) / rho^2.
///
/// Grid densities use the 5-point Laplacian at nodes and bilinear
/// interpolation of the nodal values in between; all four surrounding nodes
/// need a full stencil of samples. Closed forms use central differences.
double curvature(const ConformalDensity& rho, Complex z);

/// 5-point curvature at node (i, j) of a grid density.
double curvature_at_node(const ConformalDensity& rho, int i, int j);

/// Nodal curvature of `rho` sampled on its domain grid; NaN where the
/// 5-point stencil is incomplete.
Eigen::ArrayXXd curvature_field(const ConformalDensity& rho);

/// Valid grid nodes taken on a stride so that at most ~max_count are returned.
std::vector<Complex> sample_points(const Domain& domain, int max_count = 400);

/// max |rho(M z)|M'(z)| - rho(z)| / rho(z) over the samples.
double equivariance_residual(const ConformalDensity& rho, const MoebiusMap& m, std::span<const Complex> samples);

/// max spectral norm of conj(M') A(M z) M' - A(z), with M'(z) acting as the
/// real 2x2 matrix of complex multiplication.
double tensor_equivariance_residual(const MetricTensorField& a, const MoebiusMap& m, std::span<const Complex> samples);

/// Nodes with |K| <= tol, labelled by 4-connected component.
struct FlatLocus {
  Eigen::ArrayXXi labels;          ///< 0 = not flat (or no stencil), k >= 1 component id
  std::vector<int> component_sizes;  ///< index k - 1
  double tolerance = 0.0;
  Domain domain;

  int components() const { return static_cast<int>(component_sizes.size()); }
  bool flat(int i, int j) const { return labels(i, j) > 0; }
  /// Component containing the node nearest to z, or 0.
  int component_at(Complex z) const;
  /// Largest component id, or 0 when empty.
  int largest() const;
};

/// Default flat tolerance 10 h^2 max|d^2 log rho| over the sampled nodes.
double default_flat_tolerance(const ConformalDensity& rho);

FlatLocus flat_locus(const ConformalDensity& rho, std::optional<double> tol = std::nullopt);

using Region = std::function<bool(Complex)>;

/// Area of `region` in the metric rho^2 |dz|^2: midpoint rule on each grid cell
/// split into `subdivisions`^2 subcells. Points where rho cannot be evaluated
/// (outside a grid density's samples) are skipped.
double area(const ConformalDensity& rho, const Region& region, int subdivisions = 4);

}  // namespace flatstrip::metric
