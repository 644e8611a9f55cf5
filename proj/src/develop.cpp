#include "flatstrip/develop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numbers>

#include "flatstrip/error.hpp"

namespace flatstrip::develop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kDi[4] = {1, -1, 0, 0};
constexpr int kDj[4] = {0, 0, 1, -1};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Holomorphic derivative of log rho + i psi: d_x log rho - i d_y log rho.
Complex log_derivative(const ConformalDensity& rho, Complex z) {
  const auto g = rho.grad_log_rho(z);
  return {g.x(), -g.y()};
}

constexpr double kGaussX[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kGaussW[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

/// Increment of psi from a to b, three-point Gauss on the straight segment.
double psi_increment(const ConformalDensity& rho, Complex a, Complex b) {
  const Complex mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Complex sum;
  for (int k = 0; k < 3; ++k) sum += kGaussW[k] * log_derivative(rho, mid + kGaussX[k] * half);
  return (half * sum).imag();
}

/// Increment of h from a to b given psi(a); psi at the Gauss points comes
/// from the same rule on the sub-segments.
Complex h_increment(const ConformalDensity& rho, Complex a, double psi_a, Complex b) {
  const Complex mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Complex sum;
  for (int k = 0; k < 3; ++k) {
    const Complex z = mid + kGaussX[k] * half;
    sum += kGaussW[k] * std::exp(Complex(rho.log_rho(z), psi_a + psi_increment(rho, a, z)));
  }
  return half * sum;
}

/// Centred stencils for d/dx, sixth then fourth order.
struct Stencil {
  int first;
  int size;
  double weights[7];
  double denominator;
};

constexpr Stencil kStencils[] = {
    {-3, 7, {-1, 9, -45, 0, 45, -9, 1}, 60},
    {-2, 5, {1, -8, 0, 8, -1}, 12},
};

bool stencil_fits(const Domain& d, int i, int j, int di, int dj, const Stencil& s) {
  for (int k = 0; k < s.size; ++k) {
    if (!d.valid(i + (s.first + k) * di, j + (s.first + k) * dj)) return false;
  }
  return true;
}

Complex apply(const Eigen::ArrayXXcd& f, double h, int i, int j, int di, int dj, const Stencil& s) {
  Complex sum;
  for (int k = 0; k < s.size; ++k) sum += s.weights[k] * f(i + (s.first + k) * di, j + (s.first + k) * dj);
  return sum / (s.denominator * h);
}

/// h_x and h_y from the widest centred stencil that fits both axes.
bool centred_gradient(const Eigen::ArrayXXcd& f, const Domain& d, int i, int j, Complex& hx, Complex& hy) {
  for (const auto& s : kStencils) {
    if (!stencil_fits(d, i, j, 1, 0, s) || !stencil_fits(d, i, j, 0, 1, s)) continue;
    hx = apply(f, d.grid().h, i, j, 1, 0, s);
    hy = apply(f, d.grid().h, i, j, 0, 1, s);
    return true;
  }
  return false;
}

}  // namespace

Domain restrict(const Domain& domain, const metric::Region& keep) {
  const Grid& g = domain.grid();
  NodeMask mask = domain.mask();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (mask(i, j) && !keep(g.point(i, j))) mask(i, j) = false;
    }
  }
  return Domain::masked(g, std::move(mask));
}

Domain slit(const Domain& domain, Complex center, double angle) {
  const Complex u = std::polar(1.0, angle);
  const double half = 0.75 * domain.grid().h;
  return restrict(domain, [=](Complex z) {
    const Complex w = (z - center) * std::conj(u);
    if (w.real() < -half) return true;
    const double dist = w.real() >= 0 ? std::abs(w.imag()) : std::abs(w);
    return dist > half;
  });
}

Harmonicity harmonicity_check(const ConformalDensity& rho, const Domain& region, double tol) {
  const Grid& g = region.grid();
  Eigen::ArrayXXd lr = Eigen::ArrayXXd::Constant(g.nx, g.ny, kNaN);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (region.valid(i, j)) lr(i, j) = rho.log_rho(g.point(i, j));
    }
  }
  Harmonicity out;
  out.tolerance = tol;
  for (int j = 1; j + 1 < g.ny; ++j) {
    for (int i = 1; i + 1 < g.nx; ++i) {
      if (!region.valid(i, j) || !region.valid(i + 1, j) || !region.valid(i - 1, j) || !region.valid(i, j + 1) ||
          !region.valid(i, j - 1)) {
        continue;
      }
      const double lap = (lr(i + 1, j) + lr(i - 1, j) + lr(i, j + 1) + lr(i, j - 1) - 4.0 * lr(i, j)) / (g.h * g.h);
      out.max_laplacian = std::max(out.max_laplacian, std::abs(lap));
      ++out.nodes;
    }
  }
  out.passed = out.nodes > 0 && out.max_laplacian <= tol;
  return out;
}

namespace {

struct Integration {
  ConjugateField conj;
  Eigen::ArrayXXcd h;
};

Integration integrate(const ConformalDensity& rho, const Domain& region, Complex z0, double tol) {
  const Grid& g = region.grid();
  int i0 = 0, j0 = 0;
  if (!g.nearest(z0, i0, j0) || !region.valid(i0, j0)) {
    throw Error(ErrorCode::MapsOutsideDomain, "base point " + fmt(z0.real()) + "+" + fmt(z0.imag()) + "i is not in the region");
  }
  Eigen::ArrayXXd psi = Eigen::ArrayXXd::Constant(g.nx, g.ny, kNaN);
  Eigen::ArrayXXcd h = Eigen::ArrayXXcd::Constant(g.nx, g.ny, Complex(kNaN, kNaN));
  NodeMask reached = NodeMask::Constant(g.nx, g.ny, false);

  const Complex p0 = g.point(i0, j0);
  psi(i0, j0) = psi_increment(rho, z0, p0);
  h(i0, j0) = h_increment(rho, z0, 0.0, p0);
  reached(i0, j0) = true;

  std::deque<std::pair<int, int>> queue{{i0, j0}};
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    const Complex a = g.point(i, j);
    for (int k = 0; k < 4; ++k) {
      const int ni = i + kDi[k], nj = j + kDj[k];
      if (!region.valid(ni, nj) || reached(ni, nj)) continue;
      const Complex b = g.point(ni, nj);
      psi(ni, nj) = psi(i, j) + psi_increment(rho, a, b);
      h(ni, nj) = h(i, j) + h_increment(rho, a, psi(i, j), b);
      reached(ni, nj) = true;
      queue.emplace_back(ni, nj);
    }
  }

  double residual = 0.0;
  int wi = i0, wj = j0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!reached(i, j)) continue;
      for (int k : {0, 2}) {
        const int ni = i + kDi[k], nj = j + kDj[k];
        if (!g.in_range(ni, nj) || !reached(ni, nj)) continue;
        const double r = std::abs(psi(ni, nj) - psi(i, j) - psi_increment(rho, g.point(i, j), g.point(ni, nj)));
        if (r > residual) {
          residual = r;
          wi = i;
          wj = j;
        }
      }
    }
  }
  if (residual > tol) {
    const Complex w = g.point(wi, wj);
    throw Error(ErrorCode::NotSimplyConnected, "loop defect " + fmt(residual) + " of the conjugate at " + fmt(w.real()) +
                                                   "+" + fmt(w.imag()) + "i exceeds " + fmt(tol));
  }

  Integration out{{Domain::masked(g, std::move(reached)), std::move(psi), z0, residual}, std::move(h)};
  return out;
}

}  // namespace

ConjugateField harmonic_conjugate(const ConformalDensity& rho, const Domain& region, Complex z0, double tol) {
  return integrate(rho, region, z0, tol).conj;
}

DevelopingMap::DevelopingMap(ConformalDensity rho, ConjugateField conj, Eigen::ArrayXXcd h)
    : rho_(std::move(rho)), conj_(std::move(conj)), h_(std::move(h)) {}

DevelopingMap DevelopingMap::build(const ConformalDensity& rho, const Domain& region, Complex z0, double tol) {
  auto r = integrate(rho, region, z0, tol);
  return DevelopingMap(rho, std::move(r.conj), std::move(r.h));
}

bool DevelopingMap::extend(Complex z, double& psi, Complex& h) const {
  const Grid& g = conj_.region.grid();
  int i = 0, j = 0;
  if (!g.nearest(z, i, j) || !conj_.region.valid(i, j)) return false;
  const Complex p = g.point(i, j);
  psi = conj_.psi(i, j) + psi_increment(rho_, p, z);
  h = h_(i, j) + h_increment(rho_, p, conj_.psi(i, j), z);
  return true;
}

Complex DevelopingMap::operator()(Complex z) const {
  double psi = 0.0;
  Complex h;
  if (!extend(z, psi, h)) {
    throw Error(ErrorCode::MapsOutsideDomain, fmt(z.real()) + "+" + fmt(z.imag()) + "i is not in the developed region");
  }
  return h;
}

Complex DevelopingMap::derivative(Complex z) const {
  double psi = 0.0;
  Complex h;
  if (!extend(z, psi, h)) {
    throw Error(ErrorCode::MapsOutsideDomain, fmt(z.real()) + "+" + fmt(z.imag()) + "i is not in the developed region");
  }
  return std::exp(Complex(rho_.log_rho(z), psi));
}

double DevelopingMap::cr_residual() const {
  const Grid& g = conj_.region.grid();
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!conj_.region.valid(i, j)) continue;
      for (int k : {0, 2}) {
        const int ni = i + kDi[k], nj = j + kDj[k];
        if (!conj_.region.valid(ni, nj)) continue;
        const Complex step =
            h_increment(rho_, g.point(i, j), conj_.psi(i, j), g.point(ni, nj));
        worst = std::max(worst, std::abs(h_(ni, nj) - h_(i, j) - step) / std::abs(step));
      }
    }
  }
  return worst;
}

double DevelopingMap::metric_residual() const {
  const Grid& g = conj_.region.grid();
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      Complex hx, hy;
      if (!conj_.region.valid(i, j) || !centred_gradient(h_, conj_.region, i, j, hx, hy)) continue;
      const double r = rho_.rho(g.point(i, j));
      worst = std::max(worst, std::abs(std::abs(hx) - r) / r);
    }
  }
  return worst;
}

PushforwardIsometry pushforward(const DevelopingMap& dev, const MoebiusMap& m, const PushforwardOptions& options) {
  const Domain& region = dev.region();
  const Grid& g = region.grid();

  struct Pair {
    Complex w, wm, lambda;
  };
  std::vector<Pair> pairs;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!region.valid(i, j)) continue;
      const Complex z = g.point(i, j);
      const Complex mz = m(z);
      int mi = 0, mj = 0;
      if (!std::isfinite(mz.real()) || !std::isfinite(mz.imag()) || !g.nearest(mz, mi, mj) || !region.valid(mi, mj)) {
        continue;
      }
      const Complex w = dev.values()(i, j);
      const Complex wm = dev(mz);
      // chain rule: h'(Mz) M'(z) = lambda h'(z)
      const Complex lambda = dev.derivative(mz) * m.derivative(z) / dev.derivative(z);
      pairs.push_back({w, wm, lambda});
    }
  }
  PushforwardIsometry out;
  out.source = m;
  out.overlap = static_cast<int>(pairs.size());
  if (out.overlap < options.min_pairs) {
    throw Error(ErrorCode::InsufficientOverlap,
                std::to_string(out.overlap) + " node pairs with z and M z in the region, need " +
                    std::to_string(options.min_pairs));
  }

  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  std::vector<double> lre, lim;
  for (const auto& p : pairs) {
    lre.push_back(p.lambda.real());
    lim.push_back(p.lambda.imag());
  }
  const Complex lambda_med(median(lre), median(lim));
  std::vector<double> are, aim;
  double scale = 1.0;
  for (const auto& p : pairs) {
    const Complex a = p.wm - lambda_med * p.w;
    are.push_back(a.real());
    aim.push_back(a.imag());
    scale = std::max(scale, std::abs(p.w));
  }
  const Complex a_med(median(are), median(aim));

  // pairs across a slit differ from the majority by a period of the developing map
  const double sheet_tol = 1e-2 * scale;
  std::vector<Pair> inliers;
  for (const auto& p : pairs) {
    if (std::abs(p.wm - lambda_med * p.w - a_med) <= sheet_tol) inliers.push_back(p);
  }
  out.inliers = static_cast<int>(inliers.size());
  if (out.inliers < options.min_pairs) {
    throw Error(ErrorCode::InsufficientOverlap, "only " + std::to_string(out.inliers) + " of " +
                                                    std::to_string(out.overlap) + " pairs agree on one sheet");
  }

  Complex wbar, wmbar;
  for (const auto& p : inliers) {
    wbar += p.w;
    wmbar += p.wm;
  }
  wbar /= static_cast<double>(inliers.size());
  wmbar /= static_cast<double>(inliers.size());
  Complex num;
  double den = 0.0;
  for (const auto& p : inliers) {
    num += (p.wm - wmbar) * std::conj(p.w - wbar);
    den += std::norm(p.w - wbar);
  }
  out.lambda_fit = den > 0 ? num / den : lambda_med;
  if (std::abs(std::abs(out.lambda_fit) - 1.0) > options.isometry_tol) {
    throw Error(ErrorCode::NotIsometric,
                "fitted |lambda| = " + fmt(std::abs(out.lambda_fit)) + ", tolerance " + fmt(options.isometry_tol));
  }
  Complex lambda = out.lambda_fit / std::abs(out.lambda_fit);
  const double turns = std::arg(lambda) / (2 * std::numbers::pi);
  const auto exact = iso::rational_angle(turns, 12, 1e-6);
  if (exact) lambda = exact->unit();

  Complex a;
  for (const auto& p : inliers) a += p.wm - lambda * p.w;
  a /= static_cast<double>(inliers.size());
  for (const auto& p : inliers) out.residual = std::max(out.residual, std::abs(p.wm - lambda * p.w - a));

  out.image = exact ? iso::PlaneIsometry::rotation(exact->k, exact->n, a) : iso::PlaneIsometry::make(lambda, a);
  return out;
}

PipelineReport pipeline_classify(const ConformalDensity& rho, const Domain& region, Complex z0,
                                 const std::vector<MoebiusMap>& deck, int word_bound, double tol) {
  PipelineReport report;
  report.harmonicity = harmonicity_check(rho, region, std::numeric_limits<double>::infinity());
  const auto dev = DevelopingMap::build(rho, region, z0, tol);
  report.path_residual = dev.path_residual();
  report.cr_residual = dev.cr_residual();
  report.metric_residual = dev.metric_residual();
  std::vector<iso::PlaneIsometry> images;
  for (const auto& m : deck) {
    report.pushforwards.push_back(pushforward(dev, m));
    images.push_back(report.pushforwards.back().image);
  }
  report.group = iso::classify(images, word_bound);
  const int c = report.group.case_number();
  report.surface_case = c >= 5 && c <= 7;
  return report;
}

}  // namespace flatstrip::develop
