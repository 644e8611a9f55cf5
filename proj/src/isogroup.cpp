#include "flatstrip/isogroup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <numbers>
#include <numeric>

#include "flatstrip/error.hpp"

namespace flatstrip::iso {

namespace {

constexpr std::size_t kMaxElements = 400'000;
constexpr int kReductionCap = 20'000;
constexpr int kEuclidCap = 400;

double cross(Complex p, Complex q) { return p.real() * q.imag() - p.imag() * q.real(); }

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string fmt(Complex z) {
  std::string s = fmt(z.real());
  s += z.imag() < 0 ? "-" : "+";
  s += fmt(std::abs(z.imag())) + "i";
  return s;
}

Complex canonical_direction(Complex u) {
  u /= std::abs(u);
  if (u.real() < 0.0 || (u.real() == 0.0 && u.imag() < 0.0)) u = -u;
  return u;
}

void gauss_reduce(Complex& b1, Complex& b2) {
  for (int it = 0; it < 10'000; ++it) {
    if (std::norm(b1) > std::norm(b2)) std::swap(b1, b2);
    const double m = std::round((b2 * std::conj(b1)).real() / std::norm(b1));
    if (m == 0.0) break;
    b2 -= m * b1;
  }
}

/// Shortest representative of v modulo the lattice spanned by a Gauss-reduced pair.
Complex reduce_mod(Complex v, Complex b1, Complex b2) {
  const double d = cross(b1, b2);
  const double x = std::round(cross(v, b2) / d);
  const double y = std::round(cross(b1, v) / d);
  Complex r = v - x * b1 - y * b2;
  const Complex shifts[8] = {b1, -b1, b2, -b2, b1 + b2, -b1 - b2, b1 - b2, b2 - b1};
  Complex best = r;
  for (const Complex s : shifts)
    if (std::norm(r + s) < std::norm(best)) best = r + s;
  return best;
}

struct Euclid1D {
  bool dense = false;
  bool numerical = false;
  double g = 0.0;
};

/// Generator of the subgroup of R spanned by the values, or a density verdict.
Euclid1D euclid_1d(const std::vector<double>& values, double eps_zero, double eps_disc) {
  Euclid1D out;
  for (const double raw : values) {
    double y = std::abs(raw);
    if (y <= eps_zero) continue;
    double x = out.g;
    if (x < y) std::swap(x, y);
    int steps = 0;
    while (y > eps_zero) {
      if (y < eps_disc) {
        out.dense = true;
        out.g = y;
        return out;
      }
      if (++steps > kEuclidCap) {
        out.numerical = true;
        break;
      }
      double r = std::fmod(x, y);
      r = std::min(r, y - r);
      x = y;
      y = r;
    }
    out.g = x;
  }
  return out;
}

struct Element {
  PlaneIsometry t;
  std::string word;
  int length = 0;
};

using Key = std::array<std::int64_t, 6>;

Key key_of(const PlaneIsometry& t) {
  auto q = [](double x) { return static_cast<std::int64_t>(std::llround(x * 1e10)); };
  Key k{-1, -1, q(t.lambda().real()), q(t.lambda().imag()), q(t.a().real()), q(t.a().imag())};
  if (t.angle()) {
    k[0] = t.angle()->k;
    k[1] = t.angle()->n;
    k[2] = k[3] = 0;
  }
  return k;
}

double generator_scale(std::span<const PlaneIsometry> gens) {
  double s = 0.0;
  for (const auto& g : gens) s = std::max(s, std::abs(g.a()));
  return s > 0.0 ? s : 1.0;
}

/// Breadth-first enumeration of the ball of radius `bound` in the word metric.
std::vector<Element> enumerate(std::span<const PlaneIsometry> gens, int bound) {
  std::vector<std::pair<PlaneIsometry, std::string>> letters;
  for (std::size_t j = 0; j < gens.size(); ++j) {
    const std::string name = "g" + std::to_string(j + 1);
    letters.emplace_back(gens[j], name);
    letters.emplace_back(inverse(gens[j]), name + "^-1");
  }
  std::vector<Element> out{{PlaneIsometry::identity(), "e", 0}};
  std::map<Key, std::size_t> seen{{key_of(out[0].t), 0}};
  std::size_t begin = 0;
  for (int len = 1; len <= bound; ++len) {
    const std::size_t end = out.size();
    for (std::size_t e = begin; e < end; ++e) {
      for (const auto& [letter, name] : letters) {
        PlaneIsometry next = compose(out[e].t, letter);
        if (!seen.emplace(key_of(next), out.size()).second) continue;
        out.push_back({next, out[e].length == 0 ? name : out[e].word + " " + name, len});
        if (out.size() > kMaxElements)
          throw Error(ErrorCode::InconclusiveBudget, "word enumeration exceeded " + std::to_string(kMaxElements) +
                                                         " distinct elements; lower the word bound");
      }
    }
    begin = end;
  }
  return out;
}

KernelAnalysis analyze_elements(const std::vector<Element>& elems, int bound, double scale) {
  std::vector<Complex> vectors;
  std::vector<std::string> evidence;
  for (const auto& e : elems) {
    if (e.length > bound || e.length == 0 || !e.t.is_translation()) continue;
    if (std::abs(e.t.a()) <= 1e-11 * scale) continue;
    vectors.push_back(e.t.a());
    if (evidence.size() < 8) evidence.push_back(e.word + " = z + (" + fmt(e.t.a()) + ")");
  }
  KernelAnalysis k = analyze_translations(vectors, scale);
  k.evidence = std::move(evidence);
  return k;
}

bool same_verdict(const KernelAnalysis& x, const KernelAnalysis& y, double scale) {
  if (x.kind != y.kind) return false;
  const double tol = 1e-9 * scale;
  switch (x.kind) {
    case KernelAnalysis::Kind::Trivial:
    case KernelAnalysis::Kind::DensePlane:
      return true;
    case KernelAnalysis::Kind::DenseLine:
      return std::abs(cross(x.axis, y.axis)) <= 1e-6;
    case KernelAnalysis::Kind::Discrete:
      return x.lattice.rank == y.lattice.rank && std::abs(x.lattice.alpha - y.lattice.alpha) <= tol &&
             std::abs(x.lattice.a - y.lattice.a) <= tol;
  }
  return false;
}

KernelAnalysis stabilized(const std::vector<Element>& elems, int bound, double scale) {
  KernelAnalysis k = analyze_elements(elems, bound, scale);
  const KernelAnalysis wider = analyze_elements(elems, bound + 2, scale);
  if (!same_verdict(k, wider, scale))
    throw Error(ErrorCode::InconclusiveBudget, "translation subgroup changes between word bounds " +
                                                   std::to_string(bound) + " and " + std::to_string(bound + 2));
  k.numerical = k.numerical || wider.numerical;
  return k;
}

PlaneIsometry frame_map(Complex u, Complex center) {
  const Complex cu = std::conj(u) / std::abs(u);
  return PlaneIsometry::make(cu, -cu * center);
}

}  // namespace

ExactAngle ExactAngle::reduced(std::int64_t k, std::int64_t n) {
  if (n <= 0) throw Error(ErrorCode::BadParameters, "angle denominator must be positive");
  k %= n;
  if (k < 0) k += n;
  const std::int64_t g = std::gcd(k, n);
  return {k / g, n / g};
}

Complex ExactAngle::unit() const {
  if ((4 * k) % n == 0) {
    switch ((4 * k) / n) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      case 3: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

PlaneIsometry PlaneIsometry::make(Complex lambda, Complex a) {
  const double m = std::abs(lambda);
  if (!std::isfinite(m) || std::abs(m - 1.0) > 1e-9 || !std::isfinite(a.real()) || !std::isfinite(a.imag()))
    throw Error(ErrorCode::BadParameters, "rotation part must have modulus 1");
  PlaneIsometry t;
  t.lambda_ = lambda / m;
  t.a_ = a;
  t.angle_.reset();
  const Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int q = 0; q < 4; ++q) {
    if (lambda == quarter[q]) {
      t.angle_ = ExactAngle::reduced(q, 4);
      t.lambda_ = quarter[q];
    }
  }
  return t;
}

PlaneIsometry PlaneIsometry::rotation(std::int64_t k, std::int64_t n, Complex a) {
  PlaneIsometry t;
  t.angle_ = ExactAngle::reduced(k, n);
  t.lambda_ = t.angle_->unit();
  t.a_ = a;
  return t;
}

PlaneIsometry PlaneIsometry::translation(Complex a) { return rotation(0, 1, a); }

bool PlaneIsometry::is_translation() const {
  if (angle_) return angle_->k == 0;
  return std::abs(lambda_ - 1.0) <= 1e-12;
}

Complex PlaneIsometry::center() const { return a_ / (1.0 - lambda_); }

PlaneIsometry compose(const PlaneIsometry& s, const PlaneIsometry& t) {
  PlaneIsometry r;
  r.a_ = s.lambda_ * t.a_ + s.a_;
  if (s.angle_ && t.angle_) {
    r.angle_ = ExactAngle::reduced(s.angle_->k * t.angle_->n + t.angle_->k * s.angle_->n, s.angle_->n * t.angle_->n);
    r.lambda_ = r.angle_->unit();
  } else {
    r.angle_.reset();
    r.lambda_ = s.lambda_ * t.lambda_;
    r.lambda_ /= std::abs(r.lambda_);
  }
  return r;
}

PlaneIsometry inverse(const PlaneIsometry& t) {
  PlaneIsometry r;
  r.lambda_ = std::conj(t.lambda_);
  r.a_ = -std::conj(t.lambda_) * t.a_;
  if (t.angle_) {
    r.angle_ = ExactAngle::reduced(-t.angle_->k, t.angle_->n);
    r.lambda_ = r.angle_->unit();
  } else {
    r.angle_.reset();
  }
  return r;
}

PlaneIsometry conjugate(const PlaneIsometry& l, const PlaneIsometry& t) { return compose(compose(l, t), inverse(l)); }

std::optional<ExactAngle> rational_angle(double turns, std::int64_t max_den, double tol) {
  if (!std::isfinite(turns)) return std::nullopt;
  const double t = turns - std::floor(turns);
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = t;
  for (int it = 0; it < 64; ++it) {
    const double fa = std::floor(x);
    if (fa > 1e12) break;
    const auto a = static_cast<std::int64_t>(fa);
    const std::int64_t p = a * p1 + p0;
    const std::int64_t q = a * q1 + q0;
    if (q > max_den) break;
    if (std::abs(t - static_cast<double>(p) / static_cast<double>(q)) <= tol) return ExactAngle::reduced(p, q);
    const double frac = x - fa;
    if (frac <= 0.0) break;
    x = 1.0 / frac;
    p0 = p1;
    q0 = q1;
    p1 = p;
    q1 = q;
  }
  return std::nullopt;
}

TranslationLattice canonical_lattice(Complex b1, Complex b2, Complex* u_out) {
  if (std::abs(cross(b1, b2)) <= 1e-14 * std::abs(b1) * std::abs(b2))
    throw Error(ErrorCode::BadParameters, "lattice vectors are collinear");
  gauss_reduce(b1, b2);
  const double alpha = std::abs(b1);
  const double tol = 1e-9 * alpha;
  std::vector<std::pair<Complex, Complex>> cand{{b1, b2}, {-b1, b2}};
  if (std::abs(b2) <= alpha + tol) cand.insert(cand.end(), {{b2, b1}, {-b2, b1}});
  for (const Complex s : {b1 + b2, b1 - b2})
    if (std::abs(s) <= alpha + tol) cand.insert(cand.end(), {{s, b1}, {-s, b1}});

  TranslationLattice best{2, alpha, {}, true};
  Complex best_u;
  double best_arg = 0.0;
  bool have = false;
  for (const auto& [c, p] : cand) {
    const Complex u = c / std::abs(c);
    Complex a = p * std::conj(u);
    if (a.imag() < 0.0) a = -a;
    a -= std::round(a.real() / alpha) * alpha;
    if (std::abs(a.real() + 0.5 * alpha) <= tol) a += alpha;
    double arg = std::arg(u);
    if (arg < 0.0) arg += 2.0 * std::numbers::pi;
    const bool better = !have || a.real() > best.a.real() + tol ||
                        (std::abs(a.real() - best.a.real()) <= tol && arg < best_arg);
    if (better) {
      best.a = a;
      best_u = u;
      best_arg = arg;
      have = true;
    }
  }
  if (u_out) *u_out = best_u;
  return best;
}

KernelAnalysis analyze_translations(std::span<const Complex> input, double scale) {
  const double eps_zero = 1e-11 * scale;
  const double eps_disc = 1e-9 * scale;
  std::vector<Complex> v;
  for (const Complex t : input)
    if (std::abs(t) > eps_zero) v.push_back(t);
  KernelAnalysis out;
  if (v.empty()) return out;
  std::stable_sort(v.begin(), v.end(), [](Complex x, Complex y) {
    const double nx = std::norm(x), ny = std::norm(y);
    if (nx != ny) return nx < ny;
    return std::arg(x) < std::arg(y);
  });

  const Complex u = v.front() / std::abs(v.front());
  Complex second;
  bool planar = false;
  for (const Complex t : v) {
    if (std::abs(cross(u, t)) > eps_zero + 1e-13 * std::abs(t)) {
      second = t;
      planar = true;
      break;
    }
  }

  if (!planar) {
    std::vector<double> coords;
    for (const Complex t : v) coords.push_back((t * std::conj(u)).real());
    const Euclid1D e = euclid_1d(coords, eps_zero, eps_disc);
    out.numerical = e.numerical;
    out.axis = canonical_direction(u);
    if (e.dense) {
      out.kind = KernelAnalysis::Kind::DenseLine;
    } else {
      out.kind = KernelAnalysis::Kind::Discrete;
      out.lattice = {1, e.g, {}, true};
    }
    return out;
  }

  Complex b1 = v.front(), b2 = second;
  gauss_reduce(b1, b2);
  const double abs_err = 1e-14 * scale;
  std::deque<Complex> queue(v.begin(), v.end());
  bool dense = false;
  int steps = 0;
  while (!queue.empty()) {
    if (++steps > kReductionCap) {
      out.numerical = true;
      break;
    }
    const Complex t = queue.front();
    queue.pop_front();
    const Complex r = reduce_mod(t, b1, b2);
    if (std::abs(r) <= eps_zero) continue;
    if (std::abs(r) < eps_disc) dense = true;
    const double area = std::abs(cross(b1, b2));
    const double d1 = std::abs(cross(b1, r)), d2 = std::abs(cross(b2, r));
    const bool ok1 = d1 > abs_err * (std::abs(b1) + std::abs(r)) && d1 < area * (1.0 - 1e-9);
    const bool ok2 = d2 > abs_err * (std::abs(b2) + std::abs(r)) && d2 < area * (1.0 - 1e-9);
    if (!ok1 && !ok2) continue;
    if (ok1 && (!ok2 || d1 <= d2)) {
      queue.push_back(b2);
      b2 = r;
    } else {
      queue.push_back(b1);
      b1 = r;
    }
    gauss_reduce(b1, b2);
    if (dense && std::abs(b2) < eps_disc) {
      out.kind = KernelAnalysis::Kind::DensePlane;
      return out;
    }
  }

  if (dense) {
    Complex axis = b1 / std::abs(b1);
    double best = 1e-4;
    for (const Complex t : v) {
      const double s = std::abs(cross(axis, t)) / std::abs(t);
      if (s < best) {
        best = s;
        axis = t / std::abs(t);
      }
    }
    out.kind = KernelAnalysis::Kind::DenseLine;
    out.axis = canonical_direction(axis);
    return out;
  }
  out.kind = KernelAnalysis::Kind::Discrete;
  out.lattice = canonical_lattice(b1, b2, &out.frame);
  out.axis = out.frame;
  return out;
}

KernelAnalysis translation_subgroup(std::span<const PlaneIsometry> generators, int word_bound) {
  if (generators.empty()) throw Error(ErrorCode::BadParameters, "generator list is empty");
  if (word_bound < 4) throw Error(ErrorCode::BadParameters, "word bound must be at least 4");
  const double scale = generator_scale(generators);
  return stabilized(enumerate(generators, word_bound + 2), word_bound, scale);
}

std::array<std::array<int, 2>, 2> crystallographic_check(Complex lambda, const TranslationLattice& lattice) {
  if (lattice.rank != 2 || !(lattice.alpha > 0.0) || !(lattice.a.imag() > 0.0))
    throw Error(ErrorCode::BadParameters, "crystallographic check needs a rank-2 lattice");
  const double alpha = lattice.alpha;
  const Complex a = lattice.a;
  auto coords = [&](Complex w, int& x, int& y) {
    const double fy = w.imag() / a.imag();
    const double fx = (w.real() - fy * a.real()) / alpha;
    x = static_cast<int>(std::lround(fx));
    y = static_cast<int>(std::lround(fy));
    return std::abs(fx - x) <= 1e-9 && std::abs(fy - y) <= 1e-9;
  };
  std::array<std::array<int, 2>, 2> m{};
  int ra = 0, sa = 0, rb = 0, sb = 0;
  const bool ok = coords(lambda * alpha, ra, sa) && coords(lambda * a, rb, sb);
  if (!ok || ra * sb - rb * sa != 1)
    throw Error(ErrorCode::NotCrystallographic,
                "rotation " + fmt(lambda) + " does not preserve the lattice (" + fmt(alpha) + ", " + fmt(a) + ")");
  m[0] = {ra, rb};
  m[1] = {sa, sb};
  return m;
}

const char* to_string(GroupCase c) noexcept {
  switch (c) {
    case GroupCase::Minimal: return "Minimal";
    case GroupCase::RotationMinimal: return "RotationMinimal";
    case GroupCase::FiniteRotation: return "FiniteRotation";
    case GroupCase::LineMinimal: return "LineMinimal";
    case GroupCase::Z: return "Z";
    case GroupCase::Z2: return "Z2";
    case GroupCase::Exceptional: return "Exceptional";
  }
  return "unknown";
}

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::Lambda0: return "Lambda0";
    case Family::Lambda1: return "Lambda1";
    case Family::Z2i: return "Z2i";
    case Family::ZMinus: return "Zminus";
    case Family::Z2Minus: return "Z2minus";
  }
  return "unknown";
}

int case_number(GroupCase c) noexcept {
  switch (c) {
    case GroupCase::Minimal: return 1;
    case GroupCase::RotationMinimal: return 2;
    case GroupCase::FiniteRotation: return 3;
    case GroupCase::LineMinimal: return 4;
    case GroupCase::Z: return 5;
    case GroupCase::Z2: return 6;
    case GroupCase::Exceptional: return 7;
  }
  return 0;
}

std::string IsometryGroupDescription::label() const {
  switch (kind) {
    case GroupCase::Minimal:
    case GroupCase::RotationMinimal:
      return to_string(kind);
    case GroupCase::FiniteRotation:
      return "FiniteRotation(" + std::to_string(image_order) + ")";
    case GroupCase::LineMinimal:
      return "LineMinimal(" + fmt(axis) + ")";
    case GroupCase::Z:
      return "Z(" + fmt(alpha) + ")";
    case GroupCase::Z2:
      return "Z2(" + fmt(alpha) + ", " + fmt(a) + ")";
    case GroupCase::Exceptional:
      if (family == Family::Z2Minus) return "Z2minus(" + fmt(alpha) + ", " + fmt(a) + ")";
      return std::string(to_string(*family)) + "(" + fmt(alpha) + ")";
  }
  return "unknown";
}

IsometryGroupDescription classify(std::span<const PlaneIsometry> generators, int word_bound) {
  if (generators.empty()) throw Error(ErrorCode::BadParameters, "generator list is empty");
  if (word_bound < 4) throw Error(ErrorCode::BadParameters, "word bound must be at least 4");

  IsometryGroupDescription out;
  std::vector<PlaneIsometry> gens;
  std::int64_t order = 1;
  bool finite_image = true;
  for (const auto& g : generators) {
    if (g.angle()) {
      gens.push_back(g);
    } else {
      out.confidence = "numerical";
      const auto ang = rational_angle(std::arg(g.lambda()) / (2.0 * std::numbers::pi));
      if (ang) {
        gens.push_back(PlaneIsometry::rotation(ang->k, ang->n, g.a()));
      } else {
        gens.push_back(g);
        finite_image = false;
      }
    }
    if (gens.back().angle()) {
      order = std::lcm(order, gens.back().angle()->n);
      if (order > 1'000'000) finite_image = false;
    }
  }
  out.image_order = finite_image ? static_cast<int>(order) : 0;
  const int n_img = out.image_order;
  const double scale = generator_scale(gens);

  int bound = word_bound;
  std::vector<Element> elems = enumerate(gens, bound + 2);
  KernelAnalysis k = stabilized(elems, bound, scale);

  // A discrete kernel of rank 1 (or a non-invariant rank 2 lattice) cannot
  // carry a rotation of order > 2; the enumeration missed conjugates.
  auto inconsistent = [&](const KernelAnalysis& ka) {
    if (ka.kind != KernelAnalysis::Kind::Discrete) return false;
    if (ka.lattice.rank == 1) return n_img != 1 && n_img != 2;
    if (n_img == 1 || n_img == 2) return false;
    if (n_img != 3 && n_img != 4 && n_img != 6) return true;
    try {
      crystallographic_check(ExactAngle{1, n_img}.unit(), ka.lattice);
      return false;
    } catch (const Error&) {
      return true;
    }
  };
  if (inconsistent(k)) {
    bound += 4;
    elems = enumerate(gens, bound + 2);
    k = stabilized(elems, bound, scale);
    if (inconsistent(k))
      throw Error(ErrorCode::InconclusiveBudget, "translation lattice is not invariant under the rotation image");
  }
  if (k.numerical) out.confidence = "numerical";
  out.evidence = k.evidence;
  out.evidence.insert(out.evidence.begin(),
                      "|d(G)| = " + (n_img == 0 ? std::string("infinite") : std::to_string(n_img)));

  // Rotation centre of an element with primitive rotation part (smallest |centre|).
  auto centre = [&](std::int64_t n) {
    Complex best;
    bool have = false;
    for (const auto& e : elems) {
      if (e.t.is_translation()) continue;
      const bool primitive = n > 0 && e.t.angle() && e.t.angle()->n == n && e.t.angle()->k == 1;
      if (n > 0 && !primitive) continue;
      const Complex c = e.t.center();
      if (!have || std::abs(c) < std::abs(best) - 1e-12 * scale) {
        best = c;
        have = true;
      }
      if (n == 0) break;
    }
    return best;
  };

  switch (k.kind) {
    case KernelAnalysis::Kind::Trivial:
      if (n_img == 0) {
        out.kind = GroupCase::RotationMinimal;
        out.conjugator = PlaneIsometry::translation(-centre(0));
      } else {
        out.kind = GroupCase::FiniteRotation;
        out.conjugator = n_img == 1 ? PlaneIsometry::identity() : PlaneIsometry::translation(-centre(n_img));
      }
      break;
    case KernelAnalysis::Kind::DensePlane:
      out.kind = GroupCase::Minimal;
      break;
    case KernelAnalysis::Kind::DenseLine:
      if (n_img == 1 || n_img == 2) {
        out.kind = GroupCase::LineMinimal;
        out.axis = k.axis;
        out.conjugator = frame_map(k.axis, n_img == 2 ? centre(2) : Complex{});
      } else {
        // rotating the dense line by a non-real rotation part fills the plane
        out.kind = GroupCase::Minimal;
      }
      break;
    case KernelAnalysis::Kind::Discrete:
      out.alpha = k.lattice.alpha;
      if (k.lattice.rank == 1) {
        out.axis = k.axis;
        if (n_img == 1) {
          out.kind = GroupCase::Z;
          out.conjugator = frame_map(k.axis, {});
        } else {
          out.kind = GroupCase::Exceptional;
          out.family = Family::ZMinus;
          out.conjugator = frame_map(k.axis, centre(2));
        }
      } else {
        out.a = k.lattice.a;
        if (n_img == 1) {
          out.kind = GroupCase::Z2;
          out.conjugator = frame_map(k.frame, {});
        } else {
          out.kind = GroupCase::Exceptional;
          out.family = n_img == 2 ? Family::Z2Minus : n_img == 3 ? Family::Lambda1 : n_img == 4 ? Family::Z2i : Family::Lambda0;
          out.conjugator = frame_map(k.frame, centre(n_img));
        }
      }
      break;
  }
  return out;
}

std::vector<PlaneIsometry> exceptional_constructors(Family family, double alpha, std::optional<Complex> a) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::BadParameters, "alpha must be positive");
  const PlaneIsometry t = PlaneIsometry::translation(alpha);
  switch (family) {
    case Family::Lambda0: return {PlaneIsometry::rotation(1, 6), t};
    case Family::Lambda1: return {PlaneIsometry::rotation(1, 3), t};
    case Family::Z2i: return {PlaneIsometry::rotation(1, 4), t};
    case Family::ZMinus: return {PlaneIsometry::rotation(1, 2), t};
    case Family::Z2Minus:
      if (!a || !(a->imag() > 0.0) || !std::isfinite(a->real()) || !std::isfinite(a->imag()))
        throw Error(ErrorCode::BadParameters, "Z2minus needs a second generator in the upper half-plane");
      return {PlaneIsometry::rotation(1, 2), t, PlaneIsometry::translation(*a)};
  }
  throw Error(ErrorCode::BadParameters, "unknown family");
}

}  // namespace flatstrip::iso
