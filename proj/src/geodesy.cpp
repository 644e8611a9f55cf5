#include "flatstrip/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "flatstrip/metric.hpp"

namespace flatstrip::geodesy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool inside(const ConformalDensity& rho, Complex z) { return rho.domain().contains(z); }

Complex acceleration(const ConformalDensity& rho, Complex z, Complex v) {
  const Eigen::Vector2d g = rho.grad_log_rho(z);
  return -Complex(g.x(), -g.y()) * v * v;
}

bool rk4_step(const ConformalDensity& rho, GeodesicState& s, double h) {
  const Complex z = s.z, v = s.v;
  const Complex k1z = v, k1v = acceleration(rho, z, v);
  const Complex z2 = z + 0.5 * h * k1z, v2 = v + 0.5 * h * k1v;
  if (!inside(rho, z2)) return false;
  const Complex k2z = v2, k2v = acceleration(rho, z2, v2);
  const Complex z3 = z + 0.5 * h * k2z, v3 = v + 0.5 * h * k2v;
  if (!inside(rho, z3)) return false;
  const Complex k3z = v3, k3v = acceleration(rho, z3, v3);
  const Complex z4 = z + h * k3z, v4 = v + h * k3v;
  if (!inside(rho, z4)) return false;
  const Complex k4z = v4, k4v = acceleration(rho, z4, v4);
  const Complex zn = z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
  if (!inside(rho, zn)) return false;
  s.z = zn;
  s.v = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return true;
}

/// rho-length of the segment a-b by Simpson's rule.
double segment_length(const ConformalDensity& rho, Complex a, Complex b) {
  const double len = std::abs(b - a);
  if (len == 0.0) return 0.0;
  return len * (rho.rho(a) + 4.0 * rho.rho(0.5 * (a + b)) + rho.rho(b)) / 6.0;
}

bool segment_inside(const ConformalDensity& rho, Complex a, Complex b) {
  for (const double s : {0.25, 0.5, 0.75})
    if (!inside(rho, a + s * (b - a))) return false;
  return true;
}

struct DistanceField {
  Eigen::ArrayXXd dist;
  Eigen::ArrayXi pred;      // flattened predecessor node, -1 at sources
  Eigen::ArrayXi source;    // index into `sources` for the nodes seeded directly
  Eigen::ArrayXXd node_rho;
  std::vector<Complex> sources;
};

/// Multi-source Dijkstra from points of `gamma` on the 16-neighbour grid graph.
DistanceField distance_from_path(const ConformalDensity& rho, const GeodesicPath& gamma) {
  const Domain& domain = rho.domain();
  const Grid& g = domain.grid();
  const int n = g.nx * g.ny;
  DistanceField f;
  f.dist = Eigen::ArrayXXd::Constant(g.nx, g.ny, kInf);
  f.pred = Eigen::ArrayXi::Constant(n, -1);
  f.source = Eigen::ArrayXi::Constant(n, -1);
  f.node_rho = Eigen::ArrayXXd::Constant(g.nx, g.ny, kInf);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (domain.valid(i, j)) {
        try {
          f.node_rho(i, j) = rho.rho(g.point(i, j));
        } catch (const Error&) {
        }
      }

  // sources spaced at most h / 2 along the path
  Complex last = gamma.states.front().z;
  f.sources.push_back(last);
  for (std::size_t k = 1; k < gamma.size(); ++k) {
    const Complex z = gamma.states[k].z;
    if (std::abs(z - last) >= 0.5 * g.h || k + 1 == gamma.size()) {
      f.sources.push_back(z);
      last = z;
    }
  }

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t s = 0; s < f.sources.size(); ++s) {
    const Complex q = f.sources[s];
    double rq = 0.0;
    try {
      rq = rho.rho(q);
    } catch (const Error&) {
      continue;
    }
    const Eigen::Vector2d idx = g.to_index(q);
    const int i0 = static_cast<int>(std::floor(idx.x())), j0 = static_cast<int>(std::floor(idx.y()));
    for (int j = j0 - 1; j <= j0 + 2; ++j) {
      for (int i = i0 - 1; i <= i0 + 2; ++i) {
        if (!g.in_range(i, j) || !std::isfinite(f.node_rho(i, j))) continue;
        const Complex p = g.point(i, j);
        if (std::abs(p - q) > 1.5 * g.h || !segment_inside(rho, p, q)) continue;
        const double d = std::abs(p - q) * 0.5 * (rq + f.node_rho(i, j));
        if (d < f.dist(i, j)) {
          f.dist(i, j) = d;
          f.source(i + g.nx * j) = static_cast<int>(s);
          heap.emplace(d, i + g.nx * j);
        }
      }
    }
  }

  static constexpr int kOffsets[16][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},  {1, -1}, {-1, 1}, {-1, -1},
                                          {1, 2},  {2, 1},  {-1, 2}, {-2, 1}, {1, -2}, {2, -1}, {-1, -2}, {-2, -1}};
  while (!heap.empty()) {
    const auto [d, id] = heap.top();
    heap.pop();
    const int i = id % g.nx, j = id / g.nx;
    if (d > f.dist(i, j)) continue;
    for (const auto& o : kOffsets) {
      const int a = i + o[0], b = j + o[1];
      if (!g.in_range(a, b) || !std::isfinite(f.node_rho(a, b))) continue;
      const double len = g.h * std::hypot(o[0], o[1]);
      const double nd = d + len * 0.5 * (f.node_rho(i, j) + f.node_rho(a, b));
      if (nd >= f.dist(a, b)) continue;
      if (!segment_inside(rho, g.point(i, j), g.point(a, b))) continue;
      f.dist(a, b) = nd;
      f.pred(a + g.nx * b) = id;
      f.source(a + g.nx * b) = -1;
      heap.emplace(nd, a + g.nx * b);
    }
  }
  return f;
}

/// Index of the path sample closest to z.
std::size_t nearest_sample(const GeodesicPath& path, Complex z) {
  std::size_t best = 0;
  double bd = kInf;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double d = std::norm(path.states[k].z - z);
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  return best;
}

/// Golden-section minimum of f on [lo, hi].
template <typename F>
double golden_min(F&& f, double lo, double hi, int iterations = 80) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iterations && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Time on `path` closest to z, refined between the neighbouring samples.
double nearest_time(const GeodesicPath& path, Complex z, std::size_t& k) {
  k = nearest_sample(path, z);
  const std::size_t lo = k > 0 ? k - 1 : 0;
  const std::size_t hi = std::min(k + 1, path.size() - 1);
  return golden_min([&](double t) { return std::abs(path.position(t) - z); }, path.t[lo], path.t[hi]);
}

/// Points at equal arc length along a polyline, endpoints kept.
std::vector<Complex> resample(const std::vector<Complex>& p, int segments) {
  std::vector<double> s{0.0};
  for (std::size_t k = 1; k < p.size(); ++k) s.push_back(s.back() + std::abs(p[k] - p[k - 1]));
  std::vector<Complex> out{p.front()};
  std::size_t k = 1;
  for (int q = 1; q < segments; ++q) {
    const double target = s.back() * q / segments;
    while (k + 1 < s.size() && s[k] < target) ++k;
    const double span = s[k] - s[k - 1];
    const double u = span > 0.0 ? (target - s[k - 1]) / span : 0.0;
    out.push_back(p[k - 1] + u * (p[k] - p[k - 1]));
  }
  out.push_back(p.back());
  return out;
}

/// Shortens the rho-length of a polyline from a fixed start to a point sliding
/// on gamma2, coarse to fine: relax a few vertices, then insert midpoints
/// until segments are below 2 h. Returns the final length.
double smooth_polyline(const ConformalDensity& rho, const std::vector<Complex>& initial, const GeodesicPath& gamma2,
                       double tau, double h, Complex& foot) {
  auto safe_len = [&](Complex a, Complex b) {
    if (!segment_inside(rho, a, b)) return kInf;
    try {
      return segment_length(rho, a, b);
    } catch (const Error&) {
      return kInf;
    }
  };
  auto length = [&](const std::vector<Complex>& p) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) s += safe_len(p[k], p[k + 1]);
    return s;
  };

  int segments = 4;
  std::vector<Complex> p = resample(initial, segments);
  while (!std::isfinite(length(p)) && segments < 4 * static_cast<int>(initial.size())) {
    segments *= 2;
    p = resample(initial, segments);
  }
  if (!std::isfinite(length(p))) p = initial;

  double total = length(p);
  for (;;) {
    double seg = 0.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) seg = std::max(seg, std::abs(p[k + 1] - p[k]));
    for (int sweep = 0; sweep < 200; ++sweep) {
      for (std::size_t k = 1; k + 1 < p.size(); ++k) {
        const Complex chord = p[k + 1] - p[k - 1];
        if (std::abs(chord) == 0.0) continue;
        const Complex nrm = Complex(0.0, 1.0) * chord / std::abs(chord);
        auto energy = [&](double s) {
          const Complex x = p[k] + s * nrm;
          return safe_len(p[k - 1], x) + safe_len(x, p[k + 1]);
        };
        const double delta = 1e-3 * seg;
        const double f0 = energy(0.0), fp = energy(delta), fm = energy(-delta);
        const double curv = fp - 2.0 * f0 + fm;
        double s = 0.0;
        if (std::isfinite(curv) && curv > 0.0) s = std::clamp(0.5 * delta * (fm - fp) / curv, -0.5 * seg, 0.5 * seg);
        else if (fp < f0 || fm < f0) s = fp < fm ? delta : -delta;
        if (s != 0.0 && energy(s) < f0) p[k] += s * nrm;
      }
      // the last vertex slides along gamma2 (unit speed: Euclidean d ~ time d rho)
      const Complex prev = p[p.size() - 2];
      const double window = std::max(4.0 * gamma2.step, 0.5 * std::abs(p.back() - prev) * rho.rho(p.back()));
      const double lo = std::max(gamma2.t_begin(), tau - window), hi = std::min(gamma2.t_end(), tau + window);
      const double t_new = golden_min([&](double t) { return safe_len(prev, gamma2.position(t)); }, lo, hi, 60);
      if (safe_len(prev, gamma2.position(t_new)) < safe_len(prev, p.back())) {
        tau = t_new;
        p.back() = gamma2.position(tau);
      }
      const double now = length(p);
      const bool done = std::abs(total - now) <= 1e-12 * now;
      total = now;
      if (done) break;
    }
    if (seg <= 2.0 * h) break;
    std::vector<Complex> finer{p.front()};
    for (std::size_t k = 1; k < p.size(); ++k) {
      finer.push_back(0.5 * (p[k - 1] + p[k]));
      finer.push_back(p[k]);
    }
    p = std::move(finer);
    total = length(p);
  }
  foot = p.back();
  return total;
}

}  // namespace

Complex GeodesicPath::position(double time) const {
  if (t.size() == 1) return states.front().z;
  const double u = std::clamp((time - t.front()) / step, 0.0, static_cast<double>(t.size() - 1));
  const std::size_t k = std::min(static_cast<std::size_t>(u), t.size() - 2);
  const double s = u - static_cast<double>(k);
  const double h = t[k + 1] - t[k];
  const Complex p0 = states[k].z, p1 = states[k + 1].z;
  const Complex m0 = states[k].v * h, m1 = states[k + 1].v * h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
}

double GeodesicPath::speed_residual(const ConformalDensity& rho) const {
  double worst = 0.0;
  for (const auto& s : states) worst = std::max(worst, std::abs(rho.rho(s.z) * std::abs(s.v) - 1.0));
  return worst;
}

GeodesicState unit_state(const ConformalDensity& rho, Complex z, Complex direction) {
  if (std::abs(direction) == 0.0) throw Error(ErrorCode::BadParameters, "zero start direction");
  return {z, direction / std::abs(direction) / rho.rho(z)};
}

GeodesicPath integrate_geodesic(const ConformalDensity& rho, const GeodesicState& start, double duration,
                                const IntegrateOptions& options) {
  if (!(duration > 0.0) || !(options.step > 0.0))
    throw Error(ErrorCode::BadParameters, "duration and step must be positive");
  if (!inside(rho, start.z)) throw Error(ErrorCode::LeftDomain, "start point is outside the domain");
  const auto steps = static_cast<std::int64_t>(std::ceil(duration / options.step - 1e-9));
  const double h = duration / static_cast<double>(steps);

  GeodesicPath path;
  path.step = h;
  GeodesicState s = start;
  s.v /= rho.rho(s.z) * std::abs(s.v);
  path.t.push_back(0.0);
  path.states.push_back(s);
  for (std::int64_t k = 1; k <= steps; ++k) {
    bool ok = false;
    try {
      ok = rk4_step(rho, s, h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MapsOutsideDomain && e.code() != ErrorCode::NonPositiveDensity) throw;
    }
    if (!ok) {
      path.left_domain = true;
      if (options.stop_at_boundary) return path;
      throw LeftDomainError(path, "geodesic leaves the domain at t = " + std::to_string(path.t.back()));
    }
    const double speed = rho.rho(s.z) * std::abs(s.v);
    if (std::abs(speed - 1.0) > options.max_drift_rate * h)
      throw Error(ErrorCode::StepTooLarge, "speed drift " + std::to_string(std::abs(speed - 1.0)) + " in one step of " +
                                               std::to_string(h));
    s.v /= speed;
    path.t.push_back(static_cast<double>(k) * h);
    path.states.push_back(s);
  }
  return path;
}

ClosedGeodesicCheck closed_geodesic_check(const ConformalDensity& rho, const MoebiusMap& m, const GeodesicPath& path,
                                          double tol) {
  (void)rho;
  if (path.size() < 3) throw Error(ErrorCode::PathTooShort, "path has fewer than three samples");
  const Complex z0 = path.states.front().z;

  struct Match {
    double c;
    double dist;
    bool at_end;
  };
  // earliest local minimum of |gamma(t) - w| that is as good as the global one
  auto match = [&](const MoebiusMap& map) {
    const Complex w = map(z0);
    std::vector<double> d(path.size());
    double best = kInf, spacing = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
      d[k] = std::abs(path.states[k].z - w);
      best = std::min(best, d[k]);
      if (k > 0) spacing = std::max(spacing, std::abs(path.states[k].z - path.states[k - 1].z));
    }
    std::size_t k = 0;
    while (d[k] > best + spacing) ++k;
    while (k + 1 < path.size() && d[k + 1] < d[k]) ++k;
    const std::size_t lo = k > 0 ? k - 1 : 0, hi = std::min(k + 1, path.size() - 1);
    const double t = golden_min([&](double s) { return std::abs(path.position(s) - w); }, path.t[lo], path.t[hi]);
    return Match{t - path.t_begin(), std::abs(path.position(t) - w), k + 1 == path.size()};
  };
  const Match fwd = match(m);
  const Match bwd = match(m.inverse());
  double c = fwd.c;
  double fit = fwd.dist;
  if (bwd.dist <= tol && (fwd.dist > tol || bwd.c < fwd.c)) {
    c = -bwd.c;
    fit = bwd.dist;
  } else if (fwd.dist > tol && (fwd.at_end || bwd.at_end)) {
    throw Error(ErrorCode::PathTooShort, "M(gamma(0)) is not reached within the sampled range");
  }

  ClosedGeodesicCheck out;
  out.c = c;
  out.deviation = fit;
  int overlap = 0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double tc = path.t[k] + c;
    if (tc < path.t_begin() - 1e-12 || tc > path.t_end() + 1e-12) continue;
    out.deviation = std::max(out.deviation, std::abs(m(path.states[k].z) - path.position(tc)));
    ++overlap;
  }
  if (overlap < 2) throw Error(ErrorCode::PathTooShort, "shifted path does not overlap the sampled range");
  out.invariant = out.deviation <= tol;
  return out;
}

DistancePair bounded_distance_pair(const ConformalDensity& rho, const GeodesicPath& gamma1, const GeodesicPath& gamma2,
                                   double horizon, const DistanceOptions& options) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::BadParameters, "horizon must be positive");
  if (gamma1.t_end() - gamma1.t_begin() < horizon * (1.0 - 1e-9) || gamma2.size() < 2)
    throw Error(ErrorCode::PathTooShort, "first path does not cover the horizon");
  const Grid& g = rho.domain().grid();
  const DistanceField field = distance_from_path(rho, gamma2);

  DistancePair out;
  out.horizon = horizon;
  out.sup = -kInf;
  out.inf = kInf;
  const int count = std::max(2, options.samples);
  for (int s = 0; s < count; ++s) {
    const double t = gamma1.t_begin() + horizon * s / (count - 1);
    const Complex p = gamma1.position(t);
    const double rp = rho.rho(p);

    // best grid node near p
    const Eigen::Vector2d idx = g.to_index(p);
    const int i0 = static_cast<int>(std::floor(idx.x())), j0 = static_cast<int>(std::floor(idx.y()));
    double graph = kInf;
    int best = -1;
    for (int j = j0 - 1; j <= j0 + 2; ++j)
      for (int i = i0 - 1; i <= i0 + 2; ++i) {
        if (!g.in_range(i, j) || !std::isfinite(field.dist(i, j))) continue;
        const Complex q = g.point(i, j);
        if (std::abs(q - p) > 1.5 * g.h || !segment_inside(rho, p, q)) continue;
        const double d = field.dist(i, j) + std::abs(q - p) * 0.5 * (rp + field.node_rho(i, j));
        if (d < graph) {
          graph = d;
          best = i + g.nx * j;
        }
      }
    if (best < 0) throw Error(ErrorCode::GridTooCoarse, "no grid node reaches the first path at t = " + std::to_string(t));

    // polyline p -> nodes -> source point on gamma2, edges split to <= 0.75 h
    std::vector<Complex> nodes{p};
    int id = best;
    while (field.pred(id) >= 0) {
      nodes.push_back(g.point(id % g.nx, id / g.nx));
      id = field.pred(id);
    }
    nodes.push_back(g.point(id % g.nx, id / g.nx));
    const Complex src = field.sources[static_cast<std::size_t>(field.source(id))];
    nodes.push_back(src);
    std::vector<Complex> poly{nodes.front()};
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(nodes[k] - nodes[k - 1]) / (0.75 * g.h))));
      for (int q = 1; q <= pieces; ++q) poly.push_back(nodes[k - 1] + (nodes[k] - nodes[k - 1]) * (double(q) / pieces));
    }
    std::size_t ks = 0;
    const double tau = nearest_time(gamma2, src, ks);
    Complex foot;
    const double refined = smooth_polyline(rho, poly, gamma2, tau, g.h, foot);
    if (std::abs(graph - refined) > options.max_graph_error * refined)
      throw Error(ErrorCode::GridTooCoarse, "graph distance " + std::to_string(graph) + " vs refined " +
                                                std::to_string(refined) + " at t = " + std::to_string(t));
    out.samples.push_back({t, refined, graph, foot});
    out.sup = std::max(out.sup, refined);
    out.inf = std::min(out.inf, refined);
  }
  return out;
}

FlatStrip certify_flat_strip(const ConformalDensity& rho, const GeodesicPath& gamma1, const GeodesicPath& gamma2,
                             double tol, const StripOptions& options) {
  const double horizon = options.horizon > 0.0
                             ? options.horizon
                             : std::min(gamma1.t_end() - gamma1.t_begin(), gamma2.t_end() - gamma2.t_begin());
  const DistancePair pair = bounded_distance_pair(rho, gamma1, gamma2, horizon, options.distance);
  if (pair.sup - pair.inf > options.parallel_tol * pair.sup)
    throw Error(ErrorCode::NotParallel, "distance varies between " + std::to_string(pair.inf) + " and " +
                                            std::to_string(pair.sup) + " over horizon " + std::to_string(horizon));

  const Domain& domain = rho.domain();
  const Grid& g = domain.grid();
  // quadrilaterals between gamma1 samples and their feet on gamma2, split into triangles
  std::vector<Complex> a, b;
  Complex last{kInf, kInf};
  for (std::size_t k = 0; k < gamma1.size() && gamma1.t[k] <= gamma1.t_begin() + horizon + 1e-12; ++k) {
    const Complex z = gamma1.states[k].z;
    if (std::abs(z - last) < 0.5 * g.h && k + 1 < gamma1.size()) continue;
    std::size_t ks = 0;
    const double tau = nearest_time(gamma2, z, ks);
    a.push_back(z);
    b.push_back(gamma2.position(tau));
    last = z;
  }
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mark = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(g.nx, g.ny, false);
  auto raster = [&](Complex p, Complex q, Complex r) {
    const double area = (q - p).real() * (r - p).imag() - (q - p).imag() * (r - p).real();
    if (std::abs(area) < 1e-300) return;
    const double xmin = std::min({p.real(), q.real(), r.real()}), xmax = std::max({p.real(), q.real(), r.real()});
    const double ymin = std::min({p.imag(), q.imag(), r.imag()}), ymax = std::max({p.imag(), q.imag(), r.imag()});
    const int i0 = std::max(0, static_cast<int>(std::floor((xmin - g.x0) / g.h)));
    const int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((xmax - g.x0) / g.h)));
    const int j0 = std::max(0, static_cast<int>(std::floor((ymin - g.y0) / g.h)));
    const int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((ymax - g.y0) / g.h)));
    const double eps = 1e-9;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const Complex z = g.point(i, j);
        const double l1 = ((q - z).real() * (r - z).imag() - (q - z).imag() * (r - z).real()) / area;
        const double l2 = ((r - z).real() * (p - z).imag() - (r - z).imag() * (p - z).real()) / area;
        const double l3 = 1.0 - l1 - l2;
        if (l1 >= -eps && l2 >= -eps && l3 >= -eps) mark(i, j) = true;
      }
  };
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    raster(a[k], a[k + 1], b[k + 1]);
    raster(a[k], b[k + 1], b[k]);
  }

  FlatStrip strip;
  strip.gamma1 = gamma1;
  strip.gamma2 = gamma2;
  strip.alpha = 0.5 * (pair.sup + pair.inf);
  strip.horizon = horizon;
  strip.origin = gamma1.states.front().z;
  strip.direction = gamma1.states.front().v / std::abs(gamma1.states.front().v);
  const Complex off = b.front() - a.front();
  strip.side = (strip.direction.real() * off.imag() - strip.direction.imag() * off.real()) >= 0.0 ? 1 : -1;

  const bool grid = rho.is_grid();
  const Eigen::ArrayXXd kfield = grid ? metric::curvature_field(rho) : Eigen::ArrayXXd();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!mark(i, j) || !domain.valid(i, j)) continue;
      double k = std::numeric_limits<double>::quiet_NaN();
      if (grid) {
        k = kfield(i, j);
      } else {
        try {
          k = metric::curvature(rho, g.point(i, j));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::StencilOutOfDomain) throw;
        }
      }
      if (!std::isfinite(k)) continue;
      ++strip.nodes_checked;
      if (std::abs(k) > strip.max_curvature || strip.nodes_checked == 1) {
        strip.max_curvature = std::abs(k);
        strip.witness = g.point(i, j);
      }
    }
  if (strip.max_curvature > tol) {
    const Complex w = strip.witness;
    throw Error(ErrorCode::NotFlat, "|K| = " + std::to_string(strip.max_curvature) + " at (" + std::to_string(w.real()) +
                                        ", " + std::to_string(w.imag()) + ")");
  }
  return strip;
}

}  // namespace flatstrip::geodesy
