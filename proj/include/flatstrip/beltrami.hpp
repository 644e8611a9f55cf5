#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "flatstrip/density.hpp"
#include "flatstrip/error.hpp"

namespace flatstrip::beltrami {

/// L(v) = a v + b conj(v), mu = b / a.
template <typename Scalar>
struct LinearDilation {
  std::complex<Scalar> a;
  std::complex<Scalar> b;
  std::complex<Scalar> mu;
};

template <typename Derived>
LinearDilation<typename Derived::Scalar> complex_dilation_linear(const Eigen::MatrixBase<Derived>& l) {
  using S = typename Derived::Scalar;
  using C = std::complex<S>;
  const S det = l(0, 0) * l(1, 1) - l(0, 1) * l(1, 0);
  if (det == S(0)) throw Error(ErrorCode::SingularMap, "linear map has zero determinant");
  const C a((l(0, 0) + l(1, 1)) / S(2), (l(1, 0) - l(0, 1)) / S(2));
  const C b((l(0, 0) - l(1, 1)) / S(2), (l(1, 0) + l(0, 1)) / S(2));
  if (a == C(0)) throw Error(ErrorCode::DegenerateDilation, "linear map is anti-conformal (a = 0)");
  return {a, b, b / a};
}

/// ((E - G) + 2iF) / (E + G) of the symmetric matrix [[E, F], [F, G]].
template <typename Derived>
std::complex<typename Derived::Scalar> dilation_of_tensor(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  const S e = a(0, 0), g = a(1, 1), f = (a(0, 1) + a(1, 0)) / S(2);
  if (!(e > S(0)) || !(e * g - f * f > S(0))) throw Error(ErrorCode::NotPositiveDefinite, "tensor is not SPD");
  return std::complex<S>(e - g, S(2) * f) / (e + g);
}

Complex dilation_of_tensor(const MetricTensorField& a, Complex z);

/// Beltrami coefficient of the map with tensor dilation mu_a:
/// (mu_a / |mu_a|^2)(1 - sqrt(1 - |mu_a|^2)), and 0 at mu_a = 0.
template <typename Scalar>
std::complex<Scalar> mu_from_dilation(std::complex<Scalar> mu_a) {
  const Scalar n2 = std::norm(mu_a);
  if (!(n2 < Scalar(1)))
    throw Error(ErrorCode::DilationNotStrictlyBounded, "|mu_A| must be strictly below 1");
  if (n2 == Scalar(0)) return {};
  // 1 - sqrt(1 - t) = t / (1 + sqrt(1 - t)) avoids cancellation for small |mu_a|
  return mu_a / (Scalar(1) + std::sqrt(Scalar(1) - n2));
}

struct SupNormBound {
  double n = 0.0;      ///< max |mu_A| over the samples
  double bound = 0.0;  ///< (1 - sqrt(1 - n^2)) / n, 0 when n = 0
  double mu_max = 0.0; ///< max |mu| actually attained
};

SupNormBound sup_norm_bound_check(const MetricTensorField& a);

/// Sampled Beltrami coefficient with |mu| < 1.
class BeltramiField {
 public:
  static BeltramiField from_function(const Domain& domain, const std::function<Complex(Complex)>& mu);
  /// mu_from_dilation(dilation_of_tensor(A)) at every sample.
  static BeltramiField from_tensor(const MetricTensorField& a);
  /// Samples must be finite with modulus < 1 at valid nodes; other nodes are ignored.
  static BeltramiField from_samples(const Domain& domain, Eigen::ArrayXXcd mu);

  const Domain& domain() const { return domain_; }
  const Eigen::ArrayXXcd& samples() const { return mu_; }
  double sup_norm() const { return sup_norm_; }
  Complex at_node(int i, int j) const { return mu_(i, j); }
  /// Bilinear interpolation; MapsOutsideDomain off the samples.
  Complex at(Complex z) const;

 private:
  BeltramiField(Domain domain, Eigen::ArrayXXcd mu, double sup_norm);

  Domain domain_;
  Eigen::ArrayXXcd mu_;
  double sup_norm_;
};

/// Real weights of a first derivative at a node, built from sample nodes only:
/// centered where possible, second-order one-sided otherwise, first-order as a
/// last resort. Empty when the node has no sample neighbour on that axis.
struct Stencil {
  int count = 0;
  std::array<std::int64_t, 3> node{};
  std::array<double, 3> weight{};
};

Stencil derivative_stencil(const Domain& domain, int i, int j, int axis);

/// Node whose four axis neighbours are samples (centered stencils on both axes).
bool interior(const Domain& domain, int i, int j);

/// Sampled planar map w on a grid.
class GridMap {
 public:
  GridMap(Domain domain, Eigen::ArrayXXcd w);

  const Domain& domain() const { return domain_; }
  const Eigen::ArrayXXcd& values() const { return w_; }
  Complex at_node(int i, int j) const { return w_(i, j); }
  /// Bilinear interpolation of w; MapsOutsideDomain off the samples.
  Complex at(Complex z) const;

  /// Discrete d/dz and d/dzbar at a node (NaN when no stencil exists).
  Complex dz(int i, int j) const;
  Complex dzbar(int i, int j) const;
  /// |dz w|^2 - |dzbar w|^2, NaN off the samples.
  const Eigen::ArrayXXd& jacobian() const { return jac_; }
  /// dzbar w / dz w at every sample, NaN elsewhere.
  Eigen::ArrayXXcd dilation() const;
  /// Smallest Jacobian over the samples (or the interior nodes only).
  double min_jacobian(bool interior_only = false) const;

 private:
  Complex axis_derivative(int i, int j, int axis) const;

  Domain domain_;
  Eigen::ArrayXXcd w_;
  Eigen::ArrayXXd jac_;
};

struct Normalization {
  Complex z0{0.0, 0.0};
  Complex w0{0.0, 0.0};
  /// Prescribed argument of dz w at z0 (0 = positive real).
  double direction = 0.0;
};

struct SolveOptions {
  double tolerance = 1e-6;
  /// 0 selects 10 sqrt(#real unknowns).
  int max_iterations = 0;
  /// Fields with sup_norm >= 1 - delta are rejected.
  double delta = 0.05;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  ///< ||dzbar w - mu dz w||_2 / ||dz w||_2
  int unknowns = 0;
};

/// Least-squares solution of dzbar w = mu dz w at the interior nodes with
/// w(z0) = w0 and dz w(z0) real positive (rotated by `direction`). The
/// boundary ring carries no equation. Throws DilationNotStrictlyBounded,
/// SolverDiverged or DegenerateJacobian.
GridMap solve_beltrami(const BeltramiField& mu, const Normalization& norm, const SolveOptions& options = {},
                       SolveReport* report = nullptr);

/// Discrete residual ||dzbar w - mu dz w||_2 / ||dz w||_2 over the interior nodes.
double beltrami_residual(const BeltramiField& mu, const GridMap& w);

/// Density on the image of w with rho^2(w(z)) = sqrt(det A(z)) / det D_z w,
/// carried to a grid over the image bounding box (nx x ny nodes along the
/// longer side given by `resolution`, default: four times the source grid size) by
/// piecewise-linear interpolation over the image of each grid triangle.
ConformalDensity recover_density(const MetricTensorField& a, const GridMap& w, int resolution = 0);

}  // namespace flatstrip::beltrami
