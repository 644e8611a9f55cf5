#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "flatstrip/density.hpp"
#include "flatstrip/isogroup.hpp"
#include "json.hpp"

namespace flatstrip::io {

using Json = nlohmann::json;

/// Shortest text that reads back to the same double.
std::string number(double v);

/// Domain from {"type": "disc", "radius"} | {"type": "annulus", "r_in", "r_out"} |
/// {"type": "rectangle", "x0", "x1", "y0", "y1"} | {"type": "upper_half_plane", "x0", "x1", "y1"},
/// with `n` grid nodes along the longer side unless "nx" and "ny" are given.
Domain domain_from_json(const Json& spec, int n);

/// Metric definition: {"kind": "expression", "formula", "domain"} or
/// {"kind": "grid", "samples": csv path relative to `base`}. The grid CSV starts
/// with the header "nx,ny,x0,y0,h" and its values, then "i,j,log_rho" rows.
ConformalDensity metric_from_json(const Json& spec, const std::filesystem::path& base, int n);
ConformalDensity load_metric(const std::filesystem::path& file, int n);

/// Writes `rho`'s samples in the grid CSV layout read by metric_from_json.
void write_log_grid(const std::filesystem::path& file, const ConformalDensity& rho);

/// One isometry per line: "lambda_re lambda_im a_re a_im", "rot k/n [a_re a_im]"
/// or "trans a_re a_im". '#' starts a comment.
std::vector<iso::PlaneIsometry> parse_generators(std::istream& in);
std::vector<iso::PlaneIsometry> load_generators(const std::filesystem::path& file);

/// One Moebius map per line: eight numbers (a, b, c, d as re im pairs),
/// "rot k/n", "rotation theta", "trans x y" or "scale r".
std::vector<MoebiusMap> parse_deck(std::istream& in);
std::vector<MoebiusMap> load_deck(const std::filesystem::path& file);

/// Tensor field CSV "x,y,E,F,G" on a regular grid (any row order). Missing
/// nodes are outside the domain.
MetricTensorField load_tensor_csv(const std::filesystem::path& file);

/// Comma-separated rows under a header line; numbers written with number().
class Csv {
 public:
  explicit Csv(const std::string& header) : text_(header + "\n") {}
  void row(std::initializer_list<double> values);
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

void write_text(const std::filesystem::path& file, const std::string& text);
/// Two-space indented JSON with sorted keys and a trailing newline.
std::string json_text(const Json& doc);

Json to_json(Complex z);
Json to_json(const iso::PlaneIsometry& t);
Json to_json(const MoebiusMap& m);

}  // namespace flatstrip::io
