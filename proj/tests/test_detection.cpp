#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "homcsel/detection.hpp"

using namespace homcsel;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("homcsel_det_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("spectral angle basics") {
  VectorX<double> a(3), b(3);
  a << 1, 0, 0;
  b << 0, 1, 0;
  CHECK(sam_angle(a, b) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  CHECK(sam_angle(a, a) == doctest::Approx(0.0).epsilon(1e-14));
  VectorX<double> c = 5.0 * a;
  CHECK(sam_angle(a, c) == doctest::Approx(0.0).epsilon(1e-14));  // scale free
  VectorX<double> d = -a;
  CHECK(sam_angle(a, d) == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  VectorX<double> close = a;
  close(1) = 1e-9;
  CHECK(sam_angle(a, close) < 1e-6);  // cosine clamped, never NaN
  CHECK(std::isfinite(sam_angle(a, close)));
}

TEST_CASE("spectral angle validation") {
  VectorX<double> a(3), zero(3), shorter(2);
  a << 1, 2, 3;
  zero.setZero();
  shorter << 1, 2;
  CHECK_THROWS_AS(sam_angle(a, zero), ValidationError);
  CHECK_THROWS_AS(sam_angle(zero, a), ValidationError);
  CHECK_THROWS_AS(sam_angle(a, shorter), ValidationError);
}

TEST_CASE("detect map scores every pixel in raster order") {
  // 2x2 scene, 2 bands; pixel (2,1) matches the signature direction exactly
  MatrixX<double> x(4, 2);
  x << 1, 0,
       2, 2,
       0, 1,
       1, 1;
  DataMatrix<double> data(x);
  Signature<double> sig;
  sig.values = VectorX<double>(2);
  sig.values << 1, 1;
  sig.band_ids = {1, 2};
  ScoreMap map = detect_map(data, sig, 2, 2);
  CHECK(map.width == 2);
  CHECK(map.height == 2);
  CHECK(map.at(1, 1) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
  CHECK(map.at(2, 1) < 1e-7);  // acos near cosine 1 amplifies rounding
  CHECK(map.at(1, 2) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
  CHECK(map.at(2, 2) < 1e-7);
  CHECK(map.degenerate_pixels.empty());
  for (std::size_t j = 0; j < 4; ++j) {
    VectorX<double> px = x.row(static_cast<Index>(j)).transpose();
    CHECK(map.angles[j] == doctest::Approx(sam_angle(px, sig.values)).epsilon(1e-14));
  }
}

TEST_CASE("zero-norm pixels get angle pi and are flagged") {
  MatrixX<double> x(4, 2);
  x << 1, 0,
       0, 0,
       0, 1,
       1, 1;
  DataMatrix<double> data(x);
  Signature<double> sig;
  sig.values = VectorX<double>(2);
  sig.values << 1, 0;
  sig.band_ids = {1, 2};
  ScoreMap map = detect_map(data, sig, 2, 2);
  REQUIRE(map.degenerate_pixels.size() == 1);
  CHECK(map.degenerate_pixels[0] == 1);
  CHECK(map.angles[1] == doctest::Approx(std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("detect map validates shape and band alignment") {
  MatrixX<double> x(4, 2);
  x.setOnes();
  DataMatrix<double> data(x, {4, 9});
  Signature<double> sig;
  sig.values = VectorX<double>(2);
  sig.values << 1, 1;
  sig.band_ids = {4, 9};
  CHECK_NOTHROW(detect_map(data, sig, 2, 2));
  CHECK_THROWS_AS(detect_map(data, sig, 3, 2), ValidationError);
  sig.band_ids = {4, 10};
  try {
    detect_map(data, sig, 2, 2);
    CHECK(false);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("10") != std::string::npos);
    CHECK(msg.find("9") != std::string::npos);
  }
  sig.band_ids = {4, 9};
  sig.values.setZero();
  CHECK_THROWS_AS(detect_map(data, sig, 2, 2), ValidationError);
}

TEST_CASE("threshold splits pixels at tau inclusively") {
  ScoreMap map;
  map.width = 2;
  map.height = 2;
  map.angles = {0.2, 0.4, 0.400000001, 1.5};
  DetectionMask m = threshold(map, 0.4);
  CHECK(m.target == std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK_THROWS_AS(threshold(map, -0.1), ValidationError);
  CHECK_THROWS_AS(threshold(map, 3.5), ValidationError);
}

TEST_CASE("score map exports round trip") {
  TempDir tmp;
  ScoreMap map;
  map.width = 3;
  map.height = 2;
  map.angles = {0.1, 0.2, 0.3, 1.1, 1.2, 1.3};

  write_score_csv(map, tmp.file("scores.csv"));
  ScoreMap from_csv = read_score_csv(tmp.file("scores.csv"));
  CHECK(from_csv.width == 3);
  CHECK(from_csv.height == 2);
  for (std::size_t j = 0; j < 6; ++j)
    CHECK(from_csv.angles[j] == map.angles[j]);  // full precision in CSV

  write_score_raw(map, tmp.file("scores.raw"));
  ScoreMap from_raw = read_score_raw(tmp.file("scores.raw"));
  CHECK(from_raw.width == 3);
  CHECK(from_raw.height == 2);
  for (std::size_t j = 0; j < 6; ++j)
    CHECK(from_raw.angles[j] ==
          doctest::Approx(map.angles[j]).epsilon(1e-6));  // float32 grid

  CHECK_THROWS_AS(read_score_raw(tmp.file("missing.raw")), IoError);
}
