#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flatstrip/domain.hpp"

namespace flatstrip::iso {

/// Rotation angle 2 pi k / n with 0 <= k < n and gcd(k, n) = 1.
struct ExactAngle {
  std::int64_t k = 0;
  std::int64_t n = 1;

  static ExactAngle reduced(std::int64_t k, std::int64_t n);
  Complex unit() const;
  bool operator==(const ExactAngle&) const = default;
};

/// Orientation-preserving isometry z -> lambda z + a.
class PlaneIsometry {
 public:
  PlaneIsometry() = default;
  /// |lambda| must be within 1e-9 of 1 (it is then normalized). Throws BadParameters.
  static PlaneIsometry make(Complex lambda, Complex a);
  /// z -> e^{2 pi i k / n} z + a, carrying the exact angle.
  static PlaneIsometry rotation(std::int64_t k, std::int64_t n, Complex a = {});
  static PlaneIsometry translation(Complex a);
  static PlaneIsometry identity() { return translation({}); }

  Complex lambda() const { return lambda_; }
  Complex a() const { return a_; }
  const std::optional<ExactAngle>& angle() const { return angle_; }

  Complex operator()(Complex z) const { return lambda_ * z + a_; }
  bool is_translation() const;
  /// Fixed point a / (1 - lambda); only for non-translations.
  Complex center() const;

 private:
  Complex lambda_{1.0, 0.0};
  Complex a_{0.0, 0.0};
  std::optional<ExactAngle> angle_ = ExactAngle{};

  friend PlaneIsometry compose(const PlaneIsometry& s, const PlaneIsometry& t);
  friend PlaneIsometry inverse(const PlaneIsometry& t);
};

/// s o t
PlaneIsometry compose(const PlaneIsometry& s, const PlaneIsometry& t);
PlaneIsometry inverse(const PlaneIsometry& t);
/// l o t o l^-1
PlaneIsometry conjugate(const PlaneIsometry& l, const PlaneIsometry& t);
inline Complex rotation_part(const PlaneIsometry& t) { return t.lambda(); }

/// Continued-fraction match of theta (in turns) by k/n with n <= max_den and
/// |theta - k/n| <= tol.
std::optional<ExactAngle> rational_angle(double turns, std::int64_t max_den = 1'000'000, double tol = 1e-13);

/// Rank-0/1/2 translation lattice in canonical form: alpha > 0 real, and for
/// rank 2 a in H with alpha <= |a|, |Re a| <= alpha / 2 (ties: Re a = +alpha/2,
/// and Re a >= 0 when |a| = alpha).
struct TranslationLattice {
  int rank = 0;
  double alpha = 0.0;
  Complex a{0.0, 0.0};
  bool reduced = true;
};

/// Lattice spanned by b1, b2 brought to canonical form. `u` receives the unit
/// complex with conj(u) * lattice = Z alpha + Z a.
TranslationLattice canonical_lattice(Complex b1, Complex b2, Complex* u = nullptr);

struct KernelAnalysis {
  enum class Kind { Trivial, Discrete, DenseLine, DensePlane };
  Kind kind = Kind::Trivial;
  TranslationLattice lattice;
  /// Unit direction: the generator direction (rank 1) or the dense axis.
  Complex axis{1.0, 0.0};
  /// Rotation taking the lattice to canonical position (rank 2).
  Complex frame{1.0, 0.0};
  /// Iteration cap reached somewhere in the reduction.
  bool numerical = false;
  std::vector<std::string> evidence;
};

/// Translations among all words of length <= word_bound in the generators
/// and their inverses, reduced to a lattice or a density verdict.
KernelAnalysis translation_subgroup(std::span<const PlaneIsometry> generators, int word_bound);

/// Reduction of explicit translation vectors (scale = size of the inputs).
KernelAnalysis analyze_translations(std::span<const Complex> vectors, double scale);

/// Integer matrix [[r_a, r_b], [s_a, s_b]] with lambda alpha = r_a alpha + s_a a
/// and lambda a = r_b alpha + s_b a, determinant 1. Throws NotCrystallographic.
std::array<std::array<int, 2>, 2> crystallographic_check(Complex lambda, const TranslationLattice& lattice);

enum class GroupCase { Minimal, RotationMinimal, FiniteRotation, LineMinimal, Z, Z2, Exceptional };
enum class Family { Lambda0, Lambda1, Z2i, ZMinus, Z2Minus };

const char* to_string(GroupCase c) noexcept;
const char* to_string(Family f) noexcept;
/// 1..7 in the numbering of the classification.
int case_number(GroupCase c) noexcept;

struct IsometryGroupDescription {
  GroupCase kind = GroupCase::FiniteRotation;
  std::optional<Family> family;
  /// Order of the rotation image d(G); 0 when infinite.
  int image_order = 1;
  double alpha = 0.0;
  Complex a{0.0, 0.0};
  Complex axis{1.0, 0.0};
  PlaneIsometry conjugator;
  std::vector<std::string> evidence;
  /// "exact" when every angle decision used exact fractions, else "numerical".
  std::string confidence = "exact";

  int case_number() const { return iso::case_number(kind); }
  /// Short label such as "Z2(1, 0.3+1.1i)" or "Lambda0(1)".
  std::string label() const;
};

IsometryGroupDescription classify(std::span<const PlaneIsometry> generators, int word_bound = 8);

std::vector<PlaneIsometry> exceptional_constructors(Family family, double alpha, std::optional<Complex> a = {});

}  // namespace flatstrip::iso
