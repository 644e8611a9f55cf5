#pragma once

#include <vector>

#include <Eigen/Core>

#include "flatstrip/beltrami.hpp"
#include "flatstrip/density.hpp"
#include "flatstrip/isogroup.hpp"
#include "flatstrip/metric.hpp"

namespace flatstrip::develop {

/// Nodes of `domain` where `keep` holds, as a masked domain on the same grid.
Domain restrict(const Domain& domain, const metric::Region& keep);

/// `domain` minus the nodes within 0.75 h of the ray from `center` in
/// direction `angle`; cuts every closed grid path around `center`.
Domain slit(const Domain& domain, Complex center = {}, double angle = 3.141592653589793);

struct Harmonicity {
  double max_laplacian = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  int nodes = 0;
};

/// max |5-point Laplacian of log rho| over region nodes whose stencil lies in the region.
Harmonicity harmonicity_check(const ConformalDensity& rho, const Domain& region, double tol);

struct ConjugateField {
  Domain region;          ///< nodes reached from the base point
  Eigen::ArrayXXd psi;    ///< NaN off the region
  Complex z0;
  double path_residual = 0.0;  ///< max loop defect over all grid edges
};

/// psi with d psi = -d_y log rho dx + d_x log rho dy, psi(z0) = 0, integrated
/// along a breadth-first spanning tree of the region's grid graph; every other
/// edge is audited. Throws NotSimplyConnected when the audit exceeds tol.
ConjugateField harmonic_conjugate(const ConformalDensity& rho, const Domain& region, Complex z0, double tol = 1e-6);

/// Holomorphic h with h' = exp(log rho + i psi), h(z0) = 0, h'(z0) > 0.
class DevelopingMap {
 public:
  static DevelopingMap build(const ConformalDensity& rho, const Domain& region, Complex z0, double tol = 1e-6);

  const Domain& region() const { return conj_.region; }
  const ConformalDensity& density() const { return rho_; }
  const Eigen::ArrayXXcd& values() const { return h_; }
  const Eigen::ArrayXXd& psi() const { return conj_.psi; }
  Complex z0() const { return conj_.z0; }
  double path_residual() const { return conj_.path_residual; }

  /// h at any point whose nearest grid node is in the region, integrated
  /// along the straight segment from that node. MapsOutsideDomain otherwise.
  Complex operator()(Complex z) const;
  /// exp(log rho + i psi) at z, same reach as operator().
  Complex derivative(Complex z) const;

  /// Discrete Cauchy-Riemann residual: max over grid edges of the relative
  /// mismatch between the nodal difference of h and the edge integral of h'.
  double cr_residual() const;
  /// max ||h_x| - rho| / rho, h_x from centred differences of the nodal
  /// values at nodes where a centred stencil fits.
  double metric_residual() const;
  beltrami::GridMap grid_map() const { return beltrami::GridMap(conj_.region, h_); }

 private:
  DevelopingMap(ConformalDensity rho, ConjugateField conj, Eigen::ArrayXXcd h);
  /// psi and h at z from the nearest region node.
  bool extend(Complex z, double& psi, Complex& h) const;

  ConformalDensity rho_;
  ConjugateField conj_;
  Eigen::ArrayXXcd h_;
};

struct PushforwardIsometry {
  MoebiusMap source;
  iso::PlaneIsometry image;
  Complex lambda_fit;      ///< least-squares rotation part before projection
  double residual = 0.0;   ///< max |h(M z) - R(h(z))| over the inlier pairs
  int overlap = 0;         ///< node pairs with z and M z in the region
  int inliers = 0;         ///< pairs on the same sheet as the majority
};

struct PushforwardOptions {
  int min_pairs = 16;
  /// Allowed | |lambda| - 1 | of the fit.
  double isometry_tol = 1e-3;
};

/// Least-squares R(w) = lambda w + a with h o M = R o h. Pairs whose images
/// straddle a slit land on another sheet and are dropped. Rotation parts
/// within 1e-6 turns of k/n (n <= 12) are stored exactly. Throws
/// InsufficientOverlap or NotIsometric.
PushforwardIsometry pushforward(const DevelopingMap& dev, const MoebiusMap& m, const PushforwardOptions& options = {});

struct PipelineReport {
  iso::IsometryGroupDescription group;
  std::vector<PushforwardIsometry> pushforwards;
  Harmonicity harmonicity;
  double path_residual = 0.0;
  double cr_residual = 0.0;
  double metric_residual = 0.0;
  /// The group falls in case 5, 6 or 7, as it must for a surface.
  bool surface_case = false;
};

/// Develops the region, pushes each deck generator forward and classifies
/// the resulting isometry group.
PipelineReport pipeline_classify(const ConformalDensity& rho, const Domain& region, Complex z0,
                                 const std::vector<MoebiusMap>& deck, int word_bound = 8, double tol = 1e-6);

}  // namespace flatstrip::develop
