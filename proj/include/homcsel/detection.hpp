#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "homcsel/binary_io.hpp"
#include "homcsel/data_matrix.hpp"
#include "homcsel/types.hpp"

namespace homcsel {

template <typename Scalar = double>
struct Signature {
  VectorX<Scalar> values;
  std::vector<int> band_ids;
  std::string name;
};

using Signatured = Signature<double>;

// Per-pixel spectral angles in raster order (row y, then column x; same order
// as the unfolded cube rows). Pixels with zero norm get angle pi and are
// listed in degenerate_pixels.
struct ScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> angles;
  std::vector<std::size_t> degenerate_pixels;

  double at(int x, int y) const {
    return angles[static_cast<std::size_t>(y - 1) * width +
                  static_cast<std::size_t>(x - 1)];
  }
};

struct DetectionMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> target;
};

// Spectral angle between two spectra: arccos of their cosine similarity,
// clamped into [-1, 1] before the arccos.
template <typename Scalar>
double sam_angle(const VectorX<Scalar>& x, const VectorX<Scalar>& s) {
  if (x.size() != s.size())
    throw ValidationError("sam_angle: spectra have different lengths");
  if (x.size() == 0) throw ValidationError("sam_angle: empty spectra");
  const double nx = x.template cast<double>().norm();
  const double ns = s.template cast<double>().norm();
  if (nx == 0.0 || ns == 0.0)
    throw ValidationError("sam_angle: zero-norm spectrum");
  const double c = x.template cast<double>().dot(s.template cast<double>()) / (nx * ns);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

template <typename Scalar>
ScoreMap detect_map(const DataMatrix<Scalar>& data, const Signature<Scalar>& sig,
                    int width, int height) {
  if (width < 1 || height < 1)
    throw ValidationError("detect_map: width and height must be >= 1");
  if (static_cast<Index>(width) * height != data.t())
    throw ValidationError("detect_map: width*height = " +
                          std::to_string(static_cast<long long>(width) * height) +
                          " does not match pixel count " + std::to_string(data.t()));
  if (sig.band_ids != data.band_ids) {
    std::ostringstream os;
    os << "detect_map: signature bands do not match data bands; signature has [";
    for (std::size_t k = 0; k < sig.band_ids.size(); ++k)
      os << (k ? "," : "") << sig.band_ids[k];
    os << "], data has [";
    for (std::size_t k = 0; k < data.band_ids.size(); ++k)
      os << (k ? "," : "") << data.band_ids[k];
    os << "]";
    throw ValidationError(os.str());
  }
  const VectorX<double> s = sig.values.template cast<double>();
  const double ns = s.norm();
  if (ns == 0.0) throw ValidationError("detect_map: zero-norm signature");

  ScoreMap map;
  map.width = width;
  map.height = height;
  map.angles.resize(static_cast<std::size_t>(data.t()));
  const MatrixX<double> x = data.values.template cast<double>();
  const VectorX<double> dots = x * s;
  const VectorX<double> norms = x.rowwise().norm();
  for (Index j = 0; j < data.t(); ++j) {
    if (norms(j) == 0.0) {
      map.angles[static_cast<std::size_t>(j)] = std::numbers::pi;
      map.degenerate_pixels.push_back(static_cast<std::size_t>(j));
    } else {
      map.angles[static_cast<std::size_t>(j)] =
          std::acos(std::clamp(dots(j) / (norms(j) * ns), -1.0, 1.0));
    }
  }
  return map;
}

// Targets are pixels at angle <= tau (small angle = close to the signature).
inline DetectionMask threshold(const ScoreMap& map, double tau) {
  if (!(tau >= 0.0 && tau <= std::numbers::pi))
    throw ValidationError("threshold: tau must lie in [0, pi]");
  DetectionMask out;
  out.width = map.width;
  out.height = map.height;
  out.target.resize(map.angles.size());
  for (std::size_t j = 0; j < map.angles.size(); ++j)
    out.target[j] = map.angles[j] <= tau ? 1 : 0;
  return out;
}

// CSV export: header x,y,angle with 1-based pixel coordinates in raster order.
inline void write_score_csv(const ScoreMap& map, const std::string& path) {
  std::ostringstream os;
  os << "x,y,angle\n";
  os.precision(17);
  for (int y = 1; y <= map.height; ++y)
    for (int x = 1; x <= map.width; ++x)
      os << x << "," << y << "," << map.at(x, y) << "\n";
  detail::write_file_text(path, os.str());
}

// Raw export: float32 little-endian raster grid, plus "<width> <height>" in a
// .dims sidecar next to it.
inline void write_score_raw(const ScoreMap& map, const std::string& path) {
  std::vector<std::uint8_t> bytes(map.angles.size() * 4);
  for (std::size_t j = 0; j < map.angles.size(); ++j)
    detail::put_f32(bytes.data() + 4 * j, static_cast<float>(map.angles[j]), 0);
  detail::write_file_bytes(path, bytes.data(), bytes.size());
  detail::write_file_text(path + ".dims", std::to_string(map.width) + " " +
                                              std::to_string(map.height) + "\n");
}

inline ScoreMap read_score_raw(const std::string& path) {
  const std::string dims = detail::read_file_text(path + ".dims");
  std::istringstream is(dims);
  ScoreMap map;
  if (!(is >> map.width >> map.height) || map.width < 1 || map.height < 1)
    throw ValidationError("malformed dims sidecar: " + path + ".dims");
  const auto bytes = detail::read_file_bytes(path);
  const std::size_t count =
      static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height);
  if (bytes.size() != count * 4)
    throw ValidationError("score grid size " + std::to_string(bytes.size()) +
                          " does not match dims " + std::to_string(map.width) +
                          "x" + std::to_string(map.height));
  map.angles.resize(count);
  for (std::size_t j = 0; j < count; ++j)
    map.angles[j] = detail::get_f32(bytes.data() + 4 * j, 0);
  return map;
}

inline ScoreMap read_score_csv(const std::string& path) {
  std::istringstream is(detail::read_file_text(path));
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,angle", 0) != 0)
    throw ValidationError("malformed score CSV header in " + path);
  struct Cell { int x, y; double a; };
  std::vector<Cell> cells;
  int w = 0, h = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Cell c;
    char c1, c2;
    std::istringstream row(line);
    if (!(row >> c.x >> c1 >> c.y >> c2 >> c.a) || c1 != ',' || c2 != ',')
      throw ValidationError("malformed score CSV row in " + path + ": " + line);
    cells.push_back(c);
    w = std::max(w, c.x);
    h = std::max(h, c.y);
  }
  if (w < 1 || h < 1 || cells.size() != static_cast<std::size_t>(w) * h)
    throw ValidationError("score CSV does not cover a full grid: " + path);
  ScoreMap map;
  map.width = w;
  map.height = h;
  map.angles.assign(cells.size(), 0.0);
  for (const auto& c : cells)
    map.angles[static_cast<std::size_t>(c.y - 1) * w + (c.x - 1)] = c.a;
  return map;
}

}  // namespace homcsel
