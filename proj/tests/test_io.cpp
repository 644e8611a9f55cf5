#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "flatstrip/error.hpp"
#include "flatstrip/io.hpp"
#include "support.hpp"

using namespace flatstrip;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flatstrip_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    FAIL("no error raised");
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("number round-trips doubles") {
  test::Rng rng(11);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), rng.integer(-60, 60));
    CHECK(std::stod(io::number(v)) == v);
  }
  CHECK(io::number(0.5) == "0.5");
  CHECK(io::number(-3.0) == "-3");
}

TEST_CASE("generator files") {
  std::istringstream in(
      "# exceptional Z2i\n"
      "rot 1/4\n"
      "trans 1 0   # unit translation\n"
      "\n"
      "0.6 0.8 0.25 -1\n"
      "rot 2/4 0.5 0.5\n");
  const auto g = io::parse_generators(in);
  REQUIRE(g.size() == 4);
  REQUIRE(g[0].angle());
  CHECK(g[0].angle()->k == 1);
  CHECK(g[0].angle()->n == 4);
  CHECK(std::abs(g[0].lambda() - Complex(0, 1)) < 1e-15);
  CHECK(g[1].is_translation());
  CHECK(g[1].a() == Complex(1, 0));
  CHECK(std::abs(g[2].lambda() - Complex(0.6, 0.8)) < 1e-15);
  CHECK(g[2].a() == Complex(0.25, -1));
  REQUIRE(g[3].angle());
  CHECK(g[3].angle()->n == 2);
  CHECK(g[3].a() == Complex(0.5, 0.5));

  for (const char* bad : {"", "rot 1/0\n", "rot x\n", "trans 1\n", "1 0 0 zero\n"}) {
    std::istringstream s(bad);
    expect_code(ErrorCode::ParseError, [&] { io::parse_generators(s); });
  }
  std::istringstream scaled("2 0 0 0\n");
  expect_code(ErrorCode::BadParameters, [&] { io::parse_generators(scaled); });
}

TEST_CASE("deck files") {
  std::istringstream in("rot 1/5\nrotation 0.5\ntrans 2 0\nscale 3\n1 0 1 0 0 0 1 0\n");
  const auto d = io::parse_deck(in);
  REQUIRE(d.size() == 5);
  const Complex z(0.3, -0.7);
  CHECK(std::abs(d[0](z) - std::polar(1.0, 2 * std::numbers::pi / 5) * z) < 1e-15);
  CHECK(std::abs(d[1](z) - std::polar(1.0, 0.5) * z) < 1e-15);
  CHECK(std::abs(d[2](z) - (z + 2.0)) < 1e-15);
  CHECK(std::abs(d[3](z) - 3.0 * z) < 1e-15);
  CHECK(std::abs(d[4](z) - (z + 1.0)) < 1e-15);

  std::istringstream singular("1 0 1 0 1 0 1 0\n");
  expect_code(ErrorCode::SingularMap, [&] { io::parse_deck(singular); });
  std::istringstream short_line("1 0 1 0\n");
  expect_code(ErrorCode::ParseError, [&] { io::parse_deck(short_line); });
}

TEST_CASE("expression metrics") {
  const auto spec = io::Json::parse(R"j({"kind": "expression", "formula": "2/(1-abs(z)^2)",
                                       "domain": {"type": "disc", "radius": 1}})j");
  const auto rho = io::metric_from_json(spec, ".", 65);
  CHECK(rho.domain().kind() == DomainKind::Disc);
  CHECK(rho.domain().grid().nx == 65);
  CHECK(rho.rho({0.5, 0.0}) == doctest::Approx(2 / 0.75).epsilon(1e-14));

  const auto rect = io::domain_from_json(io::Json::parse(R"j({"type": "rectangle", "x0": -1, "x1": 1, "y0": 0, "y1": 0.5})j"), 65);
  CHECK(rect.grid().nx == 65);
  CHECK(rect.grid().ny == 17);
  expect_code(ErrorCode::InvalidDomain, [] {
    io::domain_from_json(io::Json::parse(R"j({"type": "rectangle", "x0": 0, "x1": 1, "y0": 0, "y1": 0.3})j"), 64);
  });
  expect_code(ErrorCode::ParseError, [] { io::domain_from_json(io::Json::parse(R"j({"type": "torus"})j"), 64); });
  expect_code(ErrorCode::ParseError, [] { io::metric_from_json(io::Json::parse(R"j({"kind": "expression"})j"), ".", 64); });
  expect_code(ErrorCode::InvalidFormula, [] {
    io::metric_from_json(io::Json::parse(R"j({"kind": "expression", "formula": "1/(",
                                             "domain": {"type": "disc", "radius": 1}})j"),
                         ".", 64);
  });
}

TEST_CASE("grid metrics round-trip") {
  const fs::path dir = scratch_dir("grid");
  const auto rho = ConformalDensity::from_expression(Domain::annulus(0.5, 2.0, 41), Expression::parse("1/abs(z)"));
  io::write_log_grid(dir / "samples.csv", rho);
  {
    std::ofstream(dir / "metric.json") << R"j({"kind": "grid", "samples": "samples.csv"})j";
  }
  const auto back = io::load_metric(dir / "metric.json", 0);
  REQUIRE(back.is_grid());
  const auto& grid = back.domain().grid();
  CHECK(grid.nx == 41);
  const auto original = rho.sampled();
  int compared = 0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      CHECK(back.domain().valid(i, j) == rho.domain().valid(i, j));
      if (!back.domain().valid(i, j)) continue;
      CHECK(back.log_samples()(i, j) == original.log_samples()(i, j));
      ++compared;
    }
  CHECK(compared > 500);

  {
    std::ofstream(dir / "bad.csv") << "nx,ny,x0,y0,h\n16,16,0,0,0.1\ni,j,log_rho\n3,40,1\n";
    std::ofstream(dir / "bad.json") << R"j({"kind": "grid", "samples": "bad.csv"})j";
  }
  expect_code(ErrorCode::ParseError, [&] { io::load_metric(dir / "bad.json", 0); });
  expect_code(ErrorCode::ParseError, [&] { io::load_metric(dir / "missing.json", 0); });
}

TEST_CASE("tensor csv") {
  const fs::path dir = scratch_dir("tensor");
  {
    std::ofstream out(dir / "a.csv");
    out << "x,y,E,F,G\n";
    // rows in reverse order, with a hole at (3, 4)
    for (int j = 11; j >= 0; --j)
      for (int i = 9; i >= 0; --i) {
        if (i == 3 && j == 4) continue;
        const double x = -1 + 0.25 * i, y = 0.5 + 0.25 * j;
        out << io::number(x) << ',' << io::number(y) << ",2," << io::number(0.1 * x) << ",1\n";
      }
  }
  const auto a = io::load_tensor_csv(dir / "a.csv");
  const auto& g = a.domain().grid();
  CHECK(g.nx == 10);
  CHECK(g.ny == 12);
  CHECK(g.h == doctest::Approx(0.25));
  CHECK(!a.domain().valid(3, 4));
  CHECK(a.domain().valid(3, 5));
  const auto m = a.at_node(6, 2);
  CHECK(m(0, 0) == 2.0);
  CHECK(m(0, 1) == doctest::Approx(0.05));
  CHECK(m(1, 1) == 1.0);
}

TEST_CASE("csv and json text") {
  io::Csv csv("x,y");
  csv.row({1.0, 0.1});
  csv.row({-2.5, 1e-300});
  CHECK(csv.text() == "x,y\n1,0.1\n-2.5,1e-300\n");

  io::Json doc{{"zeta", 1}, {"alpha", io::to_json(Complex(0.5, -1))}};
  doc["mid"] = io::to_json(iso::PlaneIsometry::rotation(1, 4, {1, 0}));
  const std::string text = io::json_text(doc);
  CHECK(text.find("\"alpha\"") < text.find("\"mid\""));
  CHECK(text.find("\"mid\"") < text.find("\"zeta\""));
  CHECK(text.find("\"1/4\"") != std::string::npos);
  CHECK(text.back() == '\n');
}

}
