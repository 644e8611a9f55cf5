#pragma once

#include <optional>
#include <vector>

#include "flatstrip/density.hpp"
#include "flatstrip/error.hpp"

namespace flatstrip::geodesy {

/// Position and velocity, unit speed: rho(z) |v| = 1.
struct GeodesicState {
  Complex z;
  Complex v;
};

struct GeodesicPath {
  std::vector<double> t;
  std::vector<GeodesicState> states;
  double step = 0.0;
  /// Integration stopped because the next step left the domain.
  bool left_domain = false;

  std::size_t size() const { return t.size(); }
  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }
  /// Cubic Hermite interpolation of the position; t is clamped to the range.
  Complex position(double time) const;
  /// max |rho(z)|v| - 1| over the samples.
  double speed_residual(const ConformalDensity& rho) const;
};

/// Thrown by integrate_geodesic when the path exits; carries the part computed so far.
class LeftDomainError : public Error {
 public:
  LeftDomainError(GeodesicPath partial, const std::string& what)
      : Error(ErrorCode::LeftDomain, what), partial_(std::move(partial)) {}
  const GeodesicPath& partial() const { return partial_; }

 private:
  GeodesicPath partial_;
};

/// Start state with the velocity direction of `direction` scaled to unit speed.
GeodesicState unit_state(const ConformalDensity& rho, Complex z, Complex direction);

struct IntegrateOptions {
  double step = 1e-3;
  /// Return the partial path flagged `left_domain` instead of throwing.
  bool stop_at_boundary = false;
  /// Allowed speed drift per unit time before renormalization.
  double max_drift_rate = 1e-5;
};

/// RK4 for z'' + 2 (d log rho / dz) z'^2 = 0 with the speed renormalized after
/// every step. Throws LeftDomainError or StepTooLarge.
GeodesicPath integrate_geodesic(const ConformalDensity& rho, const GeodesicState& start, double duration,
                                const IntegrateOptions& options = {});

struct ClosedGeodesicCheck {
  bool invariant = false;
  double c = 0.0;
  /// max |M(gamma(t)) - gamma(t + c)| over the overlapping samples.
  double deviation = 0.0;
};

/// Best time shift c with M(gamma(t)) = gamma(t + c); a shift with c < 0 is
/// found through M^-1. Throws PathTooShort when no shift fits inside the path.
ClosedGeodesicCheck closed_geodesic_check(const ConformalDensity& rho, const MoebiusMap& m, const GeodesicPath& path,
                                          double tol = 1e-6);

struct DistanceSample {
  double t;
  double distance;        ///< refined estimate
  double graph_distance;  ///< grid-graph estimate
  Complex foot;           ///< nearest point found on the second path
};

struct DistancePair {
  double sup = 0.0;
  double inf = 0.0;
  double horizon = 0.0;
  std::vector<DistanceSample> samples;
};

struct DistanceOptions {
  /// Number of sample times on gamma1 over [t_begin, t_begin + horizon].
  int samples = 17;
  /// Relative disagreement between graph and refined distance that raises GridTooCoarse.
  double max_graph_error = 0.05;
};

/// d(gamma1(t), gamma2) for sampled t: 16-neighbour Dijkstra on the grid of
/// rho's domain with rho-weighted edges, then one smoothing pass of the
/// extracted polyline. Throws GridTooCoarse or PathTooShort.
DistancePair bounded_distance_pair(const ConformalDensity& rho, const GeodesicPath& gamma1, const GeodesicPath& gamma2,
                                   double horizon, const DistanceOptions& options = {});

struct FlatStrip {
  GeodesicPath gamma1;
  GeodesicPath gamma2;
  double alpha = 0.0;
  /// gamma1(t_begin) and the unit tangent there; the strip lies on the `side` (+1 left, -1 right).
  Complex origin;
  Complex direction;
  int side = 1;
  double max_curvature = 0.0;
  Complex witness;
  double horizon = 0.0;
  int nodes_checked = 0;
};

struct StripOptions {
  double horizon = 0.0;  ///< 0: the common duration of both paths
  /// (sup - inf) / sup above this raises NotParallel.
  double parallel_tol = 1e-2;
  DistanceOptions distance;
};

/// Certifies that gamma1 and gamma2 bound a flat strip: |K| <= tol at every
/// grid node rasterized between the paths and constant distance. Throws
/// NotParallel or NotFlat (the message names the witness point).
FlatStrip certify_flat_strip(const ConformalDensity& rho, const GeodesicPath& gamma1, const GeodesicPath& gamma2,
                             double tol, const StripOptions& options = {});

}  // namespace flatstrip::geodesy
