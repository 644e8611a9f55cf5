#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "flatstrip/domain.hpp"
#include "flatstrip/expression.hpp"

namespace flatstrip {

/// Bilinear interpolation of a node field; false if any of the four corners
/// is outside the grid or not finite.
bool interpolate_bilinear(const Eigen::ArrayXXd& field, const Grid& grid, Complex z, double& out);

/// Positive scalar field rho defining the metric rho^2 <.,.> on a planar domain.
///
/// Either closed form (parsed formula or callable) or grid samples. Samples are
/// stored as log rho; nodes that are not domain samples hold NaN.
class ConformalDensity {
 public:
  using Function = std::function<double(Complex)>;

  static ConformalDensity from_expression(const Domain& domain, const Expression& rho);
  static ConformalDensity from_function(const Domain& domain, Function rho, std::string label = "function");
  /// `log_rho` is nx x ny; non-sample nodes must be NaN.
  static ConformalDensity from_log_grid(const Domain& domain, Eigen::ArrayXXd log_rho);

  bool is_grid() const;
  const Domain& domain() const { return domain_; }
  std::string describe() const;

  /// log rho at z. Throws NonPositiveDensity when rho(z) <= 0 or is not finite,
  /// MapsOutsideDomain when a grid density cannot interpolate at z.
  double log_rho(Complex z) const;
  double rho(Complex z) const { return std::exp(log_rho(z)); }
  /// Gradient of log rho: exact for formulas, central differences otherwise.
  Eigen::Vector2d grad_log_rho(Complex z) const;
  /// Laplacian of log rho for closed forms (central differences of the
  /// gradient with step 1e-5 * domain scale).
  double laplacian_log_rho(Complex z) const;

  /// Grid samples (nx x ny); only for grid densities.
  const Eigen::ArrayXXd& log_samples() const;

  /// Samples on `domain`'s grid. A grid density is returned unchanged if the
  /// grids agree.
  ConformalDensity sampled(const Domain& domain) const;
  ConformalDensity sampled() const { return sampled(domain_); }
  /// rho -> s rho.
  ConformalDensity scaled(double s) const;

  /// Step used for closed-form finite differences.
  double fd_step() const { return 1e-5 * domain_.scale(); }

 private:
  struct Source;
  ConformalDensity(Domain domain, std::shared_ptr<const Source> source, double log_scale);

  double closed_log_rho(Complex z) const;

  Domain domain_;
  std::shared_ptr<const Source> source_;
  double log_scale_ = 0.0;
};

/// Field of SPD matrices A(z) = [[E, F], [F, G]].
class MetricTensorField {
 public:
  using Function = std::function<Eigen::Matrix2d(Complex)>;

  static MetricTensorField from_function(const Domain& domain, Function a);
  static MetricTensorField from_grid(const Domain& domain, Eigen::ArrayXXd e, Eigen::ArrayXXd f, Eigen::ArrayXXd g);
  /// rho^2 I.
  static MetricTensorField conformal(const ConformalDensity& rho);

  const Domain& domain() const { return domain_; }
  bool is_grid() const { return !fn_; }

  /// Tensor at z (bilinear for grids). Throws NotPositiveDefinite.
  Eigen::Matrix2d at(Complex z) const;
  Eigen::Matrix2d at_node(int i, int j) const;

 private:
  MetricTensorField(Domain domain, Function fn, Eigen::ArrayXXd e, Eigen::ArrayXXd f, Eigen::ArrayXXd g);

  Domain domain_;
  Function fn_;
  Eigen::ArrayXXd e_, f_, g_;
};

/// Throws NotPositiveDefinite unless E > 0 and EG - F^2 > 0.
void require_positive_definite(const Eigen::Matrix2d& a);

/// z -> (a z + b) / (c z + d).
struct MoebiusMap {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};
  Complex c{0.0, 0.0};
  Complex d{1.0, 0.0};

  /// Throws SingularMap if ad - bc = 0.
  static MoebiusMap make(Complex a, Complex b, Complex c, Complex d);
  static MoebiusMap identity() { return {}; }
  static MoebiusMap rotation(double theta);
  static MoebiusMap translation(Complex t);
  static MoebiusMap scaling(double r);
  /// e^{i theta} (z - z0) / (1 - conj(z0) z), an automorphism of the unit disc.
  static MoebiusMap disc_automorphism(Complex z0, double theta = 0.0);

  Complex operator()(Complex z) const { return (a * z + b) / (c * z + d); }
  Complex derivative(Complex z) const {
    const Complex den = c * z + d;
    return (a * d - b * c) / (den * den);
  }
  MoebiusMap inverse() const { return {d, -b, -c, a}; }
  /// (*this) o other
  MoebiusMap after(const MoebiusMap& other) const;

  /// Checks on boundary/interior samples that the map sends the domain into itself.
  bool preserves(const Domain& domain, double tol = 1e-9) const;
};

}  // namespace flatstrip
