#include "flatstrip/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "flatstrip/error.hpp"
#include "flatstrip/expression.hpp"

namespace flatstrip::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

double get_number(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) parse_error(where + ": missing number \"" + key + "\"");
  return j[key].get<double>();
}

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file);
  if (!in) parse_error("cannot open " + file.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, sep)) out.push_back(cell);
  return out;
}

double to_double(const std::string& text, const std::string& where) {
  std::string t = text;
  t.erase(0, t.find_first_not_of(" \t\r"));
  t.erase(t.find_last_not_of(" \t\r") + 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) parse_error(where + ": not a number: '" + text + "'");
  return v;
}

/// Whitespace-separated tokens of the non-comment part of each line, with line numbers.
std::vector<std::pair<int, std::vector<std::string>>> token_lines(std::istream& in) {
  std::vector<std::pair<int, std::vector<std::string>>> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream s(line);
    std::vector<std::string> tokens;
    for (std::string t; s >> t;) tokens.push_back(t);
    if (!tokens.empty()) out.emplace_back(number, std::move(tokens));
  }
  return out;
}

std::pair<std::int64_t, std::int64_t> fraction(const std::string& text, const std::string& where) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) parse_error(where + ": expected k/n, got '" + text + "'");
  std::int64_t k = 0, n = 0;
  const auto r1 = std::from_chars(text.data(), text.data() + slash, k);
  const auto r2 = std::from_chars(text.data() + slash + 1, text.data() + text.size(), n);
  if (r1.ec != std::errc() || r1.ptr != text.data() + slash || r2.ec != std::errc() ||
      r2.ptr != text.data() + text.size() || n <= 0) {
    parse_error(where + ": expected k/n with n > 0, got '" + text + "'");
  }
  return {k, n};
}

}  // namespace

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

Domain domain_from_json(const Json& spec, int n) {
  if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string()) parse_error("domain: missing \"type\"");
  const std::string type = spec["type"];
  if (spec.contains("n")) n = spec["n"].get<int>();
  if (type == "disc") return Domain::disc(get_number(spec, "radius", "disc"), n);
  if (type == "annulus") return Domain::annulus(get_number(spec, "r_in", "annulus"), get_number(spec, "r_out", "annulus"), n);
  const bool rect = type == "rectangle";
  if (!rect && type != "upper_half_plane") parse_error("domain: unknown type \"" + type + "\"");
  const double x0 = get_number(spec, "x0", type), x1 = get_number(spec, "x1", type);
  const double y0 = rect ? get_number(spec, "y0", type) : 0.0, y1 = get_number(spec, "y1", type);
  int nx = n, ny = n;
  if (spec.contains("nx") && spec.contains("ny")) {
    nx = spec["nx"].get<int>();
    ny = spec["ny"].get<int>();
  } else {
    const double w = x1 - x0, hgt = y1 - y0;
    const double h = std::max(w, hgt) / (n - 1);
    nx = static_cast<int>(std::lround(w / h)) + 1;
    ny = static_cast<int>(std::lround(hgt / h)) + 1;
    if (rect && std::abs((nx - 1) * h - w) > 1e-9 * w) {
      throw Error(ErrorCode::InvalidDomain, "rectangle sides are not commensurate with the grid; give nx and ny");
    }
  }
  return rect ? Domain::rectangle(x0, x1, y0, y1, nx, ny) : Domain::upper_half_plane(x0, x1, y1, nx, ny);
}

ConformalDensity metric_from_json(const Json& spec, const fs::path& base, int n) {
  if (!spec.is_object() || !spec.contains("kind")) parse_error("metric: missing \"kind\"");
  const std::string kind = spec["kind"];
  if (kind == "expression") {
    if (!spec.contains("formula") || !spec["formula"].is_string()) parse_error("metric: missing \"formula\"");
    if (!spec.contains("domain")) parse_error("metric: missing \"domain\"");
    return ConformalDensity::from_expression(domain_from_json(spec["domain"], n),
                                             Expression::parse(spec["formula"].get<std::string>()));
  }
  if (kind != "grid") parse_error("metric: unknown kind \"" + kind + "\"");
  if (!spec.contains("samples") || !spec["samples"].is_string()) parse_error("metric: missing \"samples\"");
  const fs::path file = base / spec["samples"].get<std::string>();
  auto in = open_input(file);
  std::string line;
  std::getline(in, line);
  if (line.rfind("nx,ny,x0,y0,h", 0) != 0) parse_error(file.string() + ": expected header nx,ny,x0,y0,h");
  std::getline(in, line);
  const auto head = split(line, ',');
  if (head.size() != 5) parse_error(file.string() + ": bad grid header values");
  Grid g;
  g.nx = static_cast<int>(to_double(head[0], file.string()));
  g.ny = static_cast<int>(to_double(head[1], file.string()));
  g.x0 = to_double(head[2], file.string());
  g.y0 = to_double(head[3], file.string());
  g.h = to_double(head[4], file.string());
  if (g.nx < 8 || g.ny < 8 || !(g.h > 0)) throw Error(ErrorCode::InvalidDomain, file.string() + ": degenerate grid header");
  std::getline(in, line);
  if (line.rfind("i,j,log_rho", 0) != 0) parse_error(file.string() + ": expected header i,j,log_rho");
  Eigen::ArrayXXd lr = Eigen::ArrayXXd::Constant(g.nx, g.ny, std::numeric_limits<double>::quiet_NaN());
  NodeMask mask = NodeMask::Constant(g.nx, g.ny, false);
  int row = 3;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    const std::string where = file.string() + ":" + std::to_string(row);
    if (cells.size() != 3) parse_error(where + ": expected i,j,log_rho");
    const int i = static_cast<int>(to_double(cells[0], where)), j = static_cast<int>(to_double(cells[1], where));
    if (!g.in_range(i, j)) parse_error(where + ": node outside the grid");
    lr(i, j) = to_double(cells[2], where);
    mask(i, j) = std::isfinite(lr(i, j));
  }
  return ConformalDensity::from_log_grid(Domain::masked(g, std::move(mask)), std::move(lr));
}

ConformalDensity load_metric(const fs::path& file, int n) {
  auto in = open_input(file);
  Json spec;
  try {
    spec = Json::parse(in);
  } catch (const Json::exception& e) {
    parse_error(file.string() + ": " + e.what());
  }
  return metric_from_json(spec, file.parent_path(), n);
}

void write_log_grid(const fs::path& file, const ConformalDensity& rho) {
  const ConformalDensity grid = rho.is_grid() ? rho : rho.sampled();
  const Grid& g = grid.domain().grid();
  std::ofstream out(file);
  if (!out) parse_error("cannot write " + file.string());
  out << "nx,ny,x0,y0,h\n"
      << g.nx << ',' << g.ny << ',' << number(g.x0) << ',' << number(g.y0) << ',' << number(g.h) << "\ni,j,log_rho\n";
  const auto& lr = grid.log_samples();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (std::isfinite(lr(i, j))) out << i << ',' << j << ',' << number(lr(i, j)) << '\n';
}

std::vector<iso::PlaneIsometry> parse_generators(std::istream& in) {
  std::vector<iso::PlaneIsometry> out;
  for (const auto& [line, t] : token_lines(in)) {
    const std::string where = "generators line " + std::to_string(line);
    if (t[0] == "rot") {
      if (t.size() != 2 && t.size() != 4) parse_error(where + ": expected rot k/n [a_re a_im]");
      const auto [k, n] = fraction(t[1], where);
      const Complex a = t.size() == 4 ? Complex(to_double(t[2], where), to_double(t[3], where)) : Complex{};
      out.push_back(iso::PlaneIsometry::rotation(k, n, a));
    } else if (t[0] == "trans") {
      if (t.size() != 3) parse_error(where + ": expected trans a_re a_im");
      out.push_back(iso::PlaneIsometry::translation({to_double(t[1], where), to_double(t[2], where)}));
    } else {
      if (t.size() != 4) parse_error(where + ": expected lambda_re lambda_im a_re a_im");
      out.push_back(iso::PlaneIsometry::make({to_double(t[0], where), to_double(t[1], where)},
                                             {to_double(t[2], where), to_double(t[3], where)}));
    }
  }
  if (out.empty()) parse_error("generator list is empty");
  return out;
}

std::vector<iso::PlaneIsometry> load_generators(const fs::path& file) {
  auto in = open_input(file);
  return parse_generators(in);
}

std::vector<MoebiusMap> parse_deck(std::istream& in) {
  std::vector<MoebiusMap> out;
  for (const auto& [line, t] : token_lines(in)) {
    const std::string where = "deck line " + std::to_string(line);
    if (t[0] == "rot") {
      if (t.size() != 2) parse_error(where + ": expected rot k/n");
      const auto [k, n] = fraction(t[1], where);
      out.push_back(MoebiusMap::rotation(2.0 * std::numbers::pi * double(k) / double(n)));
    } else if (t[0] == "rotation") {
      if (t.size() != 2) parse_error(where + ": expected rotation theta");
      out.push_back(MoebiusMap::rotation(to_double(t[1], where)));
    } else if (t[0] == "trans") {
      if (t.size() != 3) parse_error(where + ": expected trans x y");
      out.push_back(MoebiusMap::translation({to_double(t[1], where), to_double(t[2], where)}));
    } else if (t[0] == "scale") {
      if (t.size() != 2) parse_error(where + ": expected scale r");
      out.push_back(MoebiusMap::scaling(to_double(t[1], where)));
    } else {
      if (t.size() != 8) parse_error(where + ": expected eight numbers a b c d");
      double v[8];
      for (int k = 0; k < 8; ++k) v[k] = to_double(t[k], where);
      out.push_back(MoebiusMap::make({v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]}));
    }
  }
  if (out.empty()) parse_error("deck list is empty");
  return out;
}

std::vector<MoebiusMap> load_deck(const fs::path& file) {
  auto in = open_input(file);
  return parse_deck(in);
}

MetricTensorField load_tensor_csv(const fs::path& file) {
  auto in = open_input(file);
  std::string line;
  std::getline(in, line);
  if (line.rfind("x,y,E,F,G", 0) != 0) parse_error(file.string() + ": expected header x,y,E,F,G");
  struct Row {
    double x, y, e, f, g;
  };
  std::vector<Row> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto c = split(line, ',');
    const std::string where = file.string() + ":" + std::to_string(number);
    if (c.size() != 5) parse_error(where + ": expected five columns");
    rows.push_back({to_double(c[0], where), to_double(c[1], where), to_double(c[2], where), to_double(c[3], where),
                    to_double(c[4], where)});
  }
  if (rows.size() < 64) parse_error(file.string() + ": too few rows for a grid");
  std::set<double> xs, ys;
  for (const auto& r : rows) {
    xs.insert(r.x);
    ys.insert(r.y);
  }
  double h = std::numeric_limits<double>::infinity();
  for (const auto* s : {&xs, &ys})
    for (auto it = std::next(s->begin()); it != s->end(); ++it) h = std::min(h, *it - *std::prev(it));
  Grid g;
  g.h = h;
  g.x0 = *xs.begin();
  g.y0 = *ys.begin();
  g.nx = static_cast<int>(std::lround((*xs.rbegin() - g.x0) / h)) + 1;
  g.ny = static_cast<int>(std::lround((*ys.rbegin() - g.y0) / h)) + 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::ArrayXXd e = Eigen::ArrayXXd::Constant(g.nx, g.ny, nan), f = e, gg = e;
  NodeMask mask = NodeMask::Constant(g.nx, g.ny, false);
  for (const auto& r : rows) {
    const double fi = (r.x - g.x0) / h, fj = (r.y - g.y0) / h;
    const int i = static_cast<int>(std::lround(fi)), j = static_cast<int>(std::lround(fj));
    if (std::abs(fi - i) > 1e-6 || std::abs(fj - j) > 1e-6) {
      parse_error(file.string() + ": point (" + io::number(r.x) + ", " + io::number(r.y) + ") is off the grid");
    }
    e(i, j) = r.e;
    f(i, j) = r.f;
    gg(i, j) = r.g;
    mask(i, j) = true;
  }
  return MetricTensorField::from_grid(Domain::masked(g, std::move(mask)), std::move(e), std::move(f), std::move(gg));
}

void Csv::row(std::initializer_list<double> values) {
  bool first = true;
  for (const double v : values) {
    if (!first) text_ += ',';
    text_ += number(v);
    first = false;
  }
  text_ += '\n';
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) parse_error("cannot write " + file.string());
  out << text;
  if (!out) parse_error("failed writing " + file.string());
}

std::string json_text(const Json& doc) { return doc.dump(2) + "\n"; }

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const iso::PlaneIsometry& t) {
  Json j{{"lambda", to_json(t.lambda())}, {"a", to_json(t.a())}};
  if (const auto angle = t.angle()) j["angle"] = std::to_string(angle->k) + "/" + std::to_string(angle->n);
  return j;
}

Json to_json(const MoebiusMap& m) {
  return Json{{"a", to_json(m.a)}, {"b", to_json(m.b)}, {"c", to_json(m.c)}, {"d", to_json(m.d)}};
}

}  // namespace flatstrip::io
