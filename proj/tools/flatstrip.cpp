#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flatstrip/beltrami.hpp"
#include "flatstrip/count.hpp"
#include "flatstrip/develop.hpp"
#include "flatstrip/error.hpp"
#include "flatstrip/geodesy.hpp"
#include "flatstrip/io.hpp"
#include "flatstrip/isogroup.hpp"
#include "flatstrip/metric.hpp"

using namespace flatstrip;
namespace fs = std::filesystem;
using io::Json;

namespace {

const std::vector<std::string> kCommands = {"curvature", "equivariance", "beltrami", "solve",  "develop",
                                            "geodesic",  "strip",        "classify", "count", "pipeline"};

struct Job {
  std::string command;
  std::string metric;
  std::string tensor;
  std::string deck;
  std::string generators;
  std::string out = "out";
  int grid = 128;
  double tol = 1e-6;
  double step = 1e-3;
  int word_bound = 8;
  std::optional<double> flat_tol;
  std::vector<double> z0;
  std::vector<double> w0;
  int max_iters = 0;
  bool slit = false;
  std::vector<double> slit_center = {0.0, 0.0};
  double slit_angle = std::numbers::pi;
  std::vector<double> start;
  std::vector<double> direction = {1.0, 0.0};
  double duration = 1.0;
  std::vector<double> gamma1;
  std::vector<double> gamma2;
  std::optional<int> genus;
  std::optional<double> r;
  int raster = 256;
};

/// Bad options or inputs; exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json optional_json(const auto& v) { return v ? Json(*v) : Json(nullptr); }

Json effective_config(const Job& j) {
  return Json{{"command", j.command},
              {"metric", j.metric},
              {"tensor", j.tensor},
              {"deck", j.deck},
              {"generators", j.generators},
              {"out", j.out},
              {"grid", j.grid},
              {"tol", j.tol},
              {"step", j.step},
              {"word_bound", j.word_bound},
              {"flat_tol", optional_json(j.flat_tol)},
              {"z0", j.z0},
              {"w0", j.w0},
              {"max_iters", j.max_iters},
              {"slit", j.slit},
              {"slit_center", j.slit_center},
              {"slit_angle", j.slit_angle},
              {"start", j.start},
              {"direction", j.direction},
              {"duration", j.duration},
              {"gamma1", j.gamma1},
              {"gamma2", j.gamma2},
              {"genus", optional_json(j.genus)},
              {"r", optional_json(j.r)},
              {"raster", j.raster}};
}

Complex point(const std::vector<double>& v, std::size_t at = 0) { return {v[at], v[at + 1]}; }

void require_file(const std::string& path, const char* option) {
  if (path.empty()) throw ConfigError(std::string("--") + option + " is required");
  if (!fs::is_regular_file(path)) throw ConfigError(std::string("--") + option + ": no such file " + path);
}

void validate(const Job& j) {
  if (j.grid < 8) throw ConfigError("--grid must be at least 8");
  for (const auto& [name, v] : {std::pair{"--tol", j.tol}, {"--step", j.step}, {"--duration", j.duration}})
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  if (j.flat_tol && !(*j.flat_tol > 0)) throw ConfigError("--flat-tol must be positive");
  if (j.word_bound < 1) throw ConfigError("--word-bound must be at least 1");
  if (j.max_iters < 0) throw ConfigError("--max-iters must be non-negative");
  if (j.raster < 16) throw ConfigError("--raster must be at least 16");
  if (j.r && !(*j.r > 0)) throw ConfigError("--r must be positive");
  if (j.genus && *j.genus < 2) throw ConfigError("--genus must be at least 2");
}

/// Artifacts are kept in memory and written only after the job succeeds.
struct Outputs {
  std::map<std::string, std::string> files;
  Json results = Json::object();
};

ConformalDensity load_density(const Job& j) {
  require_file(j.metric, "metric");
  return io::load_metric(j.metric, j.grid);
}

Complex base_point(const Job& j, const Domain& domain) {
  if (!j.z0.empty()) {
    const Complex z = point(j.z0);
    if (!domain.contains(z)) throw ConfigError("--z0 lies outside the domain");
    return z;
  }
  const Grid& g = domain.grid();
  const Complex mid(0.5 * (g.x0 + g.x1()), 0.5 * (g.y0 + g.y1()));
  if (!domain.contains(mid)) throw ConfigError("the domain centre is not in the domain; pass --z0");
  return mid;
}

Json pushforward_json(const develop::PushforwardIsometry& p) {
  const Json image = io::to_json(p.image);
  Json j{{"M", io::to_json(p.source)},       {"lambda", image["lambda"]}, {"a", image["a"]},
         {"lambda_fit", io::to_json(p.lambda_fit)}, {"residual", p.residual},   {"overlap", p.overlap},
         {"inliers", p.inliers}};
  if (image.contains("angle")) j["angle"] = image["angle"];
  return j;
}

Json group_json(const iso::IsometryGroupDescription& d) {
  return Json{{"case", d.case_number()},
              {"kind", iso::to_string(d.kind)},
              {"label", d.label()},
              {"parameters", Json{{"family", d.family ? Json(iso::to_string(*d.family)) : Json(nullptr)},
                                  {"image_order", d.image_order},
                                  {"alpha", d.alpha},
                                  {"a", io::to_json(d.a)},
                                  {"axis", io::to_json(d.axis)}}},
              {"conjugator", io::to_json(d.conjugator)},
              {"evidence", d.evidence},
              {"confidence", d.confidence}};
}

Json bound_json(const count::HomotopyClassBound& b) {
  Json directions = Json::array();
  for (const auto& d : b.directions)
    directions.push_back(Json{{"p", d.p}, {"q", d.q}, {"vector", io::to_json(d.vector)}, {"length", d.length}});
  return Json{{"case", b.case_number},
              {"family", b.family},
              {"lattice", Json{{"alpha", b.alpha}, {"a", io::to_json(b.a)}}},
              {"r", optional_json(b.r)},
              {"bound_radius", b.bound_radius},
              {"directions", directions},
              {"per_direction", b.per_direction},
              {"covering_factor", b.covering_factor},
              {"total", b.total},
              {"component_multiplier", b.component_multiplier},
              {"contradiction", b.contradiction}};
}

std::string directions_csv(const count::HomotopyClassBound& b) {
  io::Csv csv("p,q,x,y,length");
  for (const auto& d : b.directions)
    csv.row({double(d.p), double(d.q), d.vector.real(), d.vector.imag(), d.length});
  return csv.text();
}

std::string developing_csv(const develop::DevelopingMap& dev) {
  io::Csv csv("x,y,Re(h),Im(h)");
  const Grid& g = dev.region().grid();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (dev.region().valid(i, j)) {
        const Complex z = g.point(i, j), h = dev.values()(i, j);
        csv.row({z.real(), z.imag(), h.real(), h.imag()});
      }
  return csv.text();
}

geodesy::GeodesicPath trace(const ConformalDensity& rho, Complex z, Complex v, const Job& j, bool stop_at_boundary) {
  if (!rho.domain().contains(z)) throw ConfigError("geodesic start point lies outside the domain");
  if (v == Complex{}) throw ConfigError("geodesic direction must be non-zero");
  geodesy::IntegrateOptions options;
  options.step = j.step;
  options.stop_at_boundary = stop_at_boundary;
  return geodesy::integrate_geodesic(rho, geodesy::unit_state(rho, z, v), j.duration, options);
}

Json strip_json(const geodesy::FlatStrip& s, double tol) {
  return Json{{"alpha", s.alpha},
              {"frame", Json{{"origin", io::to_json(s.origin)}, {"direction", io::to_json(s.direction)}, {"side", s.side}}},
              {"max_curvature", s.max_curvature},
              {"witness", io::to_json(s.witness)},
              {"horizon", s.horizon},
              {"nodes_checked", s.nodes_checked},
              {"tolerance", tol}};
}

geodesy::FlatStrip run_strip_certificate(const ConformalDensity& rho, const Job& j, double tol) {
  if (j.gamma1.size() != 4 || j.gamma2.size() != 4) throw ConfigError("--gamma1 and --gamma2 take x y dx dy");
  const auto g1 = trace(rho, point(j.gamma1), point(j.gamma1, 2), j, false);
  const auto g2 = trace(rho, point(j.gamma2), point(j.gamma2, 2), j, false);
  return geodesy::certify_flat_strip(rho, g1, g2, tol);
}

std::string paths_csv(const geodesy::FlatStrip& s) {
  io::Csv csv("path,t,x,y");
  for (const auto* p : {&s.gamma1, &s.gamma2})
    for (std::size_t k = 0; k < p->size(); ++k)
      csv.row({p == &s.gamma1 ? 1.0 : 2.0, p->t[k], p->states[k].z.real(), p->states[k].z.imag()});
  return csv.text();
}

void run_curvature(const Job& j, Outputs& out) {
  const auto rho = load_density(j);
  const Grid& g = rho.domain().grid();
  Eigen::ArrayXXd k = Eigen::ArrayXXd::Constant(g.nx, g.ny, std::numeric_limits<double>::quiet_NaN());
  if (rho.is_grid()) {
    k = metric::curvature_field(rho);
  } else {
    for (int jj = 0; jj < g.ny; ++jj)
      for (int i = 0; i < g.nx; ++i) {
        if (!rho.domain().valid(i, jj)) continue;
        try {
          k(i, jj) = metric::curvature(rho, g.point(i, jj));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::StencilOutOfDomain) throw;
        }
      }
  }
  io::Csv csv("x,y,K");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  int n = 0;
  for (int jj = 0; jj < g.ny; ++jj)
    for (int i = 0; i < g.nx; ++i) {
      if (!std::isfinite(k(i, jj))) continue;
      const Complex z = g.point(i, jj);
      csv.row({z.real(), z.imag(), k(i, jj)});
      lo = std::min(lo, k(i, jj));
      hi = std::max(hi, k(i, jj));
      sum += k(i, jj);
      ++n;
    }
  if (n == 0) throw Error(ErrorCode::StencilOutOfDomain, "no node carries a full curvature stencil");
  const auto locus = metric::flat_locus(rho, j.flat_tol);
  out.files["curvature.csv"] = csv.text();
  out.results = Json{{"density", rho.describe()},
                     {"nodes", n},
                     {"K_min", lo},
                     {"K_max", hi},
                     {"K_mean", sum / n},
                     {"flat_tolerance", locus.tolerance},
                     {"flat_components", locus.components()},
                     {"flat_component_sizes", locus.component_sizes}};
}

void run_equivariance(const Job& j, Outputs& out) {
  const auto rho = load_density(j);
  require_file(j.deck, "deck");
  const auto deck = io::load_deck(j.deck);
  const auto samples = metric::sample_points(rho.domain());
  io::Csv csv("map,x,y,residual");
  Json maps = Json::array();
  bool all = true;
  for (std::size_t m = 0; m < deck.size(); ++m) {
    double worst = 0.0;
    for (const Complex z : samples) {
      const double r = metric::equivariance_residual(rho, deck[m], std::span(&z, 1));
      csv.row({double(m), z.real(), z.imag(), r});
      worst = std::max(worst, r);
    }
    const bool preserves = deck[m].preserves(rho.domain());
    all = all && preserves && worst <= j.tol;
    maps.push_back(Json{{"map", io::to_json(deck[m])},
                        {"residual", worst},
                        {"preserves_domain", preserves},
                        {"passed", preserves && worst <= j.tol}});
  }
  out.files["equivariance.csv"] = csv.text();
  out.results = Json{{"density", rho.describe()}, {"samples", samples.size()}, {"maps", maps}, {"passed", all}};
}

MetricTensorField load_tensor(const Job& j) {
  if (!j.tensor.empty()) {
    require_file(j.tensor, "tensor");
    return io::load_tensor_csv(j.tensor);
  }
  if (j.metric.empty()) throw ConfigError("--tensor or --metric is required");
  return MetricTensorField::conformal(load_density(j));
}

void run_beltrami(const Job& j, Outputs& out) {
  const auto a = load_tensor(j);
  const auto mu = beltrami::BeltramiField::from_tensor(a);
  const auto bound = beltrami::sup_norm_bound_check(a);
  io::Csv csv("x,y,Re(mu),Im(mu)");
  const Grid& g = a.domain().grid();
  for (int jj = 0; jj < g.ny; ++jj)
    for (int i = 0; i < g.nx; ++i)
      if (a.domain().valid(i, jj)) {
        const Complex z = g.point(i, jj), m = mu.at_node(i, jj);
        csv.row({z.real(), z.imag(), m.real(), m.imag()});
      }
  out.files["beltrami.csv"] = csv.text();
  const bool chain = bound.n == 0.0 ? bound.mu_max == 0.0 : bound.mu_max <= bound.bound * (1 + 1e-14) && bound.bound < bound.n;
  out.results = Json{{"sup_norm", mu.sup_norm()},
                     {"dilation_max", bound.n},
                     {"bound", bound.bound},
                     {"mu_max", bound.mu_max},
                     {"bound_chain_holds", chain}};
}

void run_solve(const Job& j, Outputs& out) {
  const auto a = load_tensor(j);
  const auto mu = beltrami::BeltramiField::from_tensor(a);
  beltrami::Normalization norm;
  norm.z0 = base_point(j, a.domain());
  if (!j.w0.empty()) norm.w0 = point(j.w0);
  beltrami::SolveOptions options;
  options.tolerance = j.tol;
  options.max_iterations = j.max_iters;
  beltrami::SolveReport report;
  const auto w = beltrami::solve_beltrami(mu, norm, options, &report);
  const auto dil = w.dilation();
  const Grid& g = a.domain().grid();
  double dilation_error = 0.0;
  io::Csv csv("x,y,Re(w),Im(w)");
  for (int jj = 0; jj < g.ny; ++jj)
    for (int i = 0; i < g.nx; ++i) {
      if (!a.domain().valid(i, jj)) continue;
      const Complex z = g.point(i, jj), v = w.at_node(i, jj);
      csv.row({z.real(), z.imag(), v.real(), v.imag()});
      if (beltrami::interior(a.domain(), i, jj)) dilation_error = std::max(dilation_error, std::abs(dil(i, jj) - mu.at_node(i, jj)));
    }
  out.files["solution.csv"] = csv.text();
  out.results = Json{{"iterations", report.iterations},
                     {"residual", report.residual},
                     {"unknowns", report.unknowns},
                     {"min_jacobian", w.min_jacobian()},
                     {"dilation_error", dilation_error},
                     {"z0", io::to_json(norm.z0)},
                     {"w0", io::to_json(norm.w0)}};
}

Domain maybe_slit(const Job& j, const Domain& region) {
  return j.slit ? develop::slit(region, point(j.slit_center), j.slit_angle) : region;
}

void run_develop(const Job& j, Outputs& out) {
  const auto rho = load_density(j);
  const Complex z0 = base_point(j, rho.domain());
  const Domain region = maybe_slit(j, rho.domain());
  const auto dev = develop::DevelopingMap::build(rho, region, z0, j.tol);
  Json pushed = Json::array();
  if (!j.deck.empty()) {
    require_file(j.deck, "deck");
    for (const auto& m : io::load_deck(j.deck)) pushed.push_back(pushforward_json(develop::pushforward(dev, m)));
  }
  out.files["developing.csv"] = developing_csv(dev);
  out.results = Json{{"density", rho.describe()},
                     {"z0", io::to_json(z0)},
                     {"path_residual", dev.path_residual()},
                     {"cr_residual", dev.cr_residual()},
                     {"metric_residual", dev.metric_residual()},
                     {"pushforwards", pushed}};
}

void run_geodesic(const Job& j, Outputs& out) {
  const auto rho = load_density(j);
  if (j.start.size() != 2) throw ConfigError("--start takes x y");
  if (j.direction.size() != 2) throw ConfigError("--direction takes dx dy");
  const auto path = trace(rho, point(j.start), point(j.direction), j, true);
  io::Csv csv("t,x,y,vx,vy");
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& s = path.states[k];
    csv.row({path.t[k], s.z.real(), s.z.imag(), s.v.real(), s.v.imag()});
  }
  Json closed = Json::array();
  if (!j.deck.empty()) {
    require_file(j.deck, "deck");
    for (const auto& m : io::load_deck(j.deck)) {
      Json entry{{"map", io::to_json(m)}};
      try {
        const auto c = geodesy::closed_geodesic_check(rho, m, path, j.tol);
        entry.update(Json{{"invariant", c.invariant}, {"c", c.c}, {"deviation", c.deviation}});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PathTooShort) throw;
        entry.update(Json{{"invariant", false}, {"error", to_string(e.code())}, {"module", e.module()}});
      }
      closed.push_back(entry);
    }
  }
  out.files["geodesic.csv"] = csv.text();
  out.results = Json{{"samples", path.size()},
                     {"t_end", path.t_end()},
                     {"left_domain", path.left_domain},
                     {"speed_residual", path.speed_residual(rho)},
                     {"closed", closed}};
}

void run_strip(const Job& j, Outputs& out) {
  const auto rho = load_density(j);
  const double tol = j.flat_tol ? *j.flat_tol : metric::default_flat_tolerance(rho);
  const auto strip = run_strip_certificate(rho, j, tol);
  out.files["strip.csv"] = paths_csv(strip);
  out.results = strip_json(strip, tol);
}

std::vector<iso::PlaneIsometry> load_group(const Job& j) {
  require_file(j.generators, "generators");
  return io::load_generators(j.generators);
}

void run_classify(const Job& j, Outputs& out) {
  const auto gens = load_group(j);
  Json listed = Json::array();
  for (const auto& g : gens) listed.push_back(io::to_json(g));
  out.results = Json{{"generators", listed}, {"group", group_json(iso::classify(gens, j.word_bound))}};
}

int required_genus(const Job& j) {
  if (!j.genus) throw ConfigError("--genus is required");
  return *j.genus;
}

void run_count(const Job& j, Outputs& out) {
  const auto gens = load_group(j);
  const int genus = required_genus(j);
  const auto group = iso::classify(gens, j.word_bound);
  const auto bound = count::class_bound(group, genus, j.r);
  out.files["directions.csv"] = directions_csv(bound);
  out.results = Json{{"group", group_json(group)}, {"genus", genus}, {"bound", bound_json(bound)}};
}

/// Stage results land in `out.results` as they finish, so a failing stage
/// leaves the earlier ones in the error report.
void run_pipeline(const Job& j, Outputs& out) {
  const auto rho = load_density(j);
  require_file(j.deck, "deck");
  const auto deck = io::load_deck(j.deck);
  const int genus = required_genus(j);
  const Complex z0 = base_point(j, rho.domain());
  auto& r = out.results;
  r["density"] = rho.describe();
  r["z0"] = io::to_json(z0);

  const auto locus = metric::flat_locus(rho, j.flat_tol);
  const int component = locus.component_at(z0);
  r["flat_locus"] = Json{{"tolerance", locus.tolerance},
                         {"components", locus.components()},
                         {"component_sizes", locus.component_sizes},
                         {"base_component", component}};
  if (component == 0) throw Error(ErrorCode::NotFlat, "the base point is not in the flat locus");
  const Domain flat = develop::restrict(rho.domain(), [&](Complex z) { return locus.component_at(z) == component; });
  {
    io::Csv csv("x,y,component");
    const Grid& g = locus.domain.grid();
    for (int jj = 0; jj < g.ny; ++jj)
      for (int i = 0; i < g.nx; ++i)
        if (locus.labels(i, jj) > 0) csv.row({g.point(i, jj).real(), g.point(i, jj).imag(), double(locus.labels(i, jj))});
    out.files["flat_locus.csv"] = csv.text();
  }

  if (!j.gamma1.empty() || !j.gamma2.empty()) {
    const auto strip = run_strip_certificate(rho, j, locus.tolerance);
    r["strip"] = strip_json(strip, locus.tolerance);
    out.files["strip.csv"] = paths_csv(strip);
  } else {
    r["strip"] = nullptr;
  }

  const Domain region = maybe_slit(j, flat);
  const auto report = develop::pipeline_classify(rho, region, z0, deck, j.word_bound, j.tol);
  Json pushed = Json::array();
  for (const auto& p : report.pushforwards) pushed.push_back(pushforward_json(p));
  r["develop"] = Json{{"harmonicity", Json{{"max_laplacian", report.harmonicity.max_laplacian},
                                           {"nodes", report.harmonicity.nodes}}},
                      {"path_residual", report.path_residual},
                      {"cr_residual", report.cr_residual},
                      {"metric_residual", report.metric_residual}};
  r["pushforwards"] = pushed;
  r["group"] = group_json(report.group);
  r["surface_case"] = report.surface_case;

  const auto dev = develop::DevelopingMap::build(rho, region, z0, j.tol);
  out.files["developing.csv"] = developing_csv(dev);

  std::optional<double> radius = j.r;
  const bool lattice = report.group.case_number() >= 6 && report.group.a.imag() > 0;
  if (lattice && !radius) {
    const auto disc = count::complement_disc(dev, report.group.alpha, report.group.a, j.raster);
    r["complement_disc"] = Json{{"center", io::to_json(disc.center)}, {"r", disc.r}, {"clearance", disc.clearance}};
    radius = disc.r;
  }
  const auto bound = count::class_bound(report.group, genus, radius);
  r["bound"] = bound_json(bound);
  r["genus"] = genus;
  out.files["directions.csv"] = directions_csv(bound);
}

void dispatch(const Job& j, Outputs& out) {
  const std::string& c = j.command;
  if (c == "curvature") return run_curvature(j, out);
  if (c == "equivariance") return run_equivariance(j, out);
  if (c == "beltrami") return run_beltrami(j, out);
  if (c == "solve") return run_solve(j, out);
  if (c == "develop") return run_develop(j, out);
  if (c == "geodesic") return run_geodesic(j, out);
  if (c == "strip") return run_strip(j, out);
  if (c == "classify") return run_classify(j, out);
  if (c == "count") return run_count(j, out);
  return run_pipeline(j, out);
}

bool is_config_code(ErrorCode code) {
  return code == ErrorCode::ParseError || code == ErrorCode::InvalidFormula || code == ErrorCode::InvalidDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flat strips and flat cylinders on conformal surfaces"};
  app.set_config("--config", "", "TOML or INI file with option values")->check(CLI::ExistingFile);
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Job job;
  app.add_option("--command", job.command, "Job to run when no subcommand is given (config files)")
      ->check(CLI::IsMember(kCommands));
  app.add_option("--metric", job.metric, "Metric definition (JSON)");
  app.add_option("--tensor", job.tensor, "Tensor field CSV x,y,E,F,G");
  app.add_option("--deck", job.deck, "Deck transformations, one per line");
  app.add_option("--generators", job.generators, "Plane isometries, one per line");
  app.add_option("--out", job.out, "Output directory")->capture_default_str();
  app.add_option("--grid", job.grid, "Grid nodes along the longer side")->capture_default_str();
  app.add_option("--tol,--tolerance", job.tol, "Solver and integration tolerance")->capture_default_str();
  app.add_option("--step", job.step, "Geodesic step")->capture_default_str();
  app.add_option("--word-bound", job.word_bound, "Word length searched by the classifier")->capture_default_str();
  app.add_option("--flat-tol", job.flat_tol, "Curvature tolerance of the flat locus (default: from the grid)");
  app.add_option("--z0", job.z0, "Base point x y")->expected(2);
  app.add_option("--w0", job.w0, "Image of the base point x y (solve)")->expected(2);
  std::vector<double> normalize;
  app.add_option("--normalize", normalize, "z0 and w0 as x0,y0,u0,v0 (solve)")->expected(4)->delimiter(',');
  app.add_option("--max-iters", job.max_iters, "Solver iteration cap, 0 for automatic")->capture_default_str();
  app.add_flag("--slit", job.slit, "Cut the region along a ray before developing");
  app.add_option("--slit-center", job.slit_center, "Slit origin x y")->expected(2)->capture_default_str();
  app.add_option("--slit-angle", job.slit_angle, "Slit direction in radians")->capture_default_str();
  app.add_option("--start", job.start, "Geodesic start x y")->expected(2);
  app.add_option("--direction", job.direction, "Geodesic direction dx dy")->expected(2)->capture_default_str();
  app.add_option("--duration", job.duration, "Geodesic length")->capture_default_str();
  app.add_option("--gamma1", job.gamma1, "First strip geodesic x y dx dy")->expected(4);
  app.add_option("--gamma2", job.gamma2, "Second strip geodesic x y dx dy")->expected(4);
  app.add_option("--genus", job.genus, "Genus of the surface");
  app.add_option("--r", job.r, "Radius of a disc missed by the developed image");
  app.add_option("--raster", job.raster, "Raster size for the complement disc")->capture_default_str();

  const std::map<std::string, std::string> help = {
      {"curvature", "Curvature grid and flat locus"},
      {"equivariance", "Deck-map equivariance residuals"},
      {"beltrami", "Beltrami coefficient of a tensor field"},
      {"solve", "Solve the Beltrami equation"},
      {"develop", "Developing map and pushforward isometries"},
      {"geodesic", "Integrate a geodesic"},
      {"strip", "Certify a flat strip between two geodesics"},
      {"classify", "Classify a group of plane isometries"},
      {"count", "Bound the homotopy classes of flat-cylinder geodesics"},
      {"pipeline", "Flat locus to class bound in one report"}};
  for (const auto& name : kCommands)
    app.add_subcommand(name, help.at(name))->callback([&job, name] { job.command = name; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (!normalize.empty()) {
    job.z0 = {normalize[0], normalize[1]};
    job.w0 = {normalize[2], normalize[3]};
  }
  if (job.command.empty()) {
    std::cerr << "flatstrip: no command given\n" << app.help();
    return 1;
  }

  Json report{{"command", job.command}, {"config", effective_config(job)}};
  Outputs out;
  int status = 0;
  try {
    validate(job);
    fs::create_directories(job.out);
    if (!fs::is_directory(job.out)) throw ConfigError("cannot create output directory " + job.out);
    dispatch(job, out);
  } catch (const ConfigError& e) {
    report["error"] = Json{{"code", "ConfigError"}, {"module", "cli"}, {"message", e.what()}};
    status = 1;
  } catch (const Error& e) {
    report["error"] = Json{{"code", to_string(e.code())}, {"module", e.module()}, {"message", e.what()}};
    status = is_config_code(e.code()) ? 1 : 2;
  } catch (const std::filesystem::filesystem_error& e) {
    report["error"] = Json{{"code", "ConfigError"}, {"module", "cli"}, {"message", e.what()}};
    status = 1;
  }

  report["results"] = out.results;
  report["status"] = status == 0 ? "ok" : "error";
  Json artifacts = Json::array();
  if (status == 0)
    for (const auto& [name, text] : out.files) artifacts.push_back(name);
  report["artifacts"] = artifacts;

  try {
    if (fs::is_directory(job.out)) {
      for (const auto& [name, text] : out.files) fs::remove(fs::path(job.out) / name);
      if (status == 0)
        for (const auto& [name, text] : out.files) io::write_text(fs::path(job.out) / name, text);
      io::write_text(fs::path(job.out) / "report.json", io::json_text(report));
    }
  } catch (const std::exception& e) {
    std::cerr << "flatstrip: " << e.what() << "\n";
    return 1;
  }

  if (status == 0) {
    std::cout << job.command << ": ok, report in " << (fs::path(job.out) / "report.json").string() << "\n";
  } else {
    std::cerr << job.command << ": " << report["error"]["code"].get<std::string>() << " ("
              << report["error"]["module"].get<std::string>() << "): " << report["error"]["message"].get<std::string>()
              << "\n";
  }
  return status;
}
