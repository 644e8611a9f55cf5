#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flatstrip/develop.hpp"
#include "flatstrip/domain.hpp"
#include "flatstrip/isogroup.hpp"

namespace flatstrip::count {

/// Area of C / Z^2(alpha, a) = alpha Im a. Throws BadLattice unless alpha > 0 and Im a > 0.
double lattice_area(double alpha, Complex a);

struct Direction {
  std::int64_t p = 0;
  std::int64_t q = 0;
  Complex vector;  ///< p alpha + q a
  double length = 0.0;
};

/// Coprime (p, q) modulo sign with 0 < |p alpha + q a| <= lattice_area / r,
/// sign fixed by q > 0 or (q = 0, p = 1), sorted by length then (q, p).
/// Throws BoundTooLarge past 10^6 directions.
std::vector<Direction> enumerate_directions(double alpha, Complex a, double r);

struct ComplementDisc {
  Complex center;
  double r = 0.0;          ///< clearance minus one grid spacing
  double clearance = 0.0;  ///< distance from the centre to the image
};

/// Largest disc in the box of `grid` avoiding the nodes set in `image`
/// (exact Euclidean distance transform; the box edge counts as image).
/// Throws NoComplement when no disc of positive radius remains.
ComplementDisc complement_disc(const Grid& grid, const NodeMask& image);

/// The developed image reduced into the fundamental rectangle
/// [0, alpha) x [0, Im a) of Z^2(alpha, a), rasterized with n nodes along
/// the longer side and searched with periodic distances.
ComplementDisc complement_disc(const develop::DevelopingMap& dev, double alpha, Complex a, int n = 256);

struct HomotopyClassBound {
  int case_number = 0;
  std::string family;         ///< exceptional family label, empty otherwise
  double alpha = 0.0;
  Complex a;
  std::optional<double> r;
  double bound_radius = 0.0;  ///< lattice_area / r
  std::vector<Direction> directions;
  int per_direction = 0;       ///< 3g - 3
  int covering_factor = 1;     ///< order of the rotation image in case 7
  std::int64_t total = 0;
  int component_multiplier = 0;  ///< 3g - 3 bound on the components, reported apart from total
  /// A rank-2 lattice with no direction under the cutoff: the inputs cannot
  /// come from a surface carrying a flat strip.
  bool contradiction = false;
};

/// Upper bound on homotopy classes of flat-cylinder geodesics. Case 5 gives 1;
/// case 6 |directions| (3g - 3); case 7 that times the rotation-image order
/// (a Z-minus kernel has no directions and counts as one class). Throws
/// CaseNotCountable for cases 1-4 and BadParameters for g < 2 or a missing
/// or non-positive r where a lattice needs one.
HomotopyClassBound class_bound(const iso::IsometryGroupDescription& description, int genus,
                               std::optional<double> r = std::nullopt);

}  // namespace flatstrip::count
