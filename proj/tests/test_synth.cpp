#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <vector>

#include "homcsel/cumulants.hpp"
#include "homcsel/synth.hpp"

using namespace homcsel;

namespace {

SceneSpec small_spec() {
  SceneSpec s;
  s.width = 8;
  s.height = 6;
  s.bands = 4;
  s.seed = 42;
  s.diagonal = {0.5, 1.0, 2.0, 0.25};
  s.rho = 0.3;
  s.target_count = 2;
  s.informative_bands = {2, 4};
  s.model = TargetModel::MeanShift;
  s.contrast = 0.7;
  return s;
}

std::size_t label_count(const GroundTruthMask& m) {
  std::size_t k = 0;
  for (auto v : m.labels) k += v != 0;
  return k;
}

}  // namespace

TEST_CASE("same seed reproduces the scene bitwise") {
  const SceneSpec spec = small_spec();
  const SynthScene a = generate(spec);
  const SynthScene b = generate(spec, 3);  // worker count must not matter
  REQUIRE(a.cube.values.size() == b.cube.values.size());
  CHECK(std::memcmp(a.cube.values.data(), b.cube.values.data(),
                    a.cube.values.size() * sizeof(double)) == 0);
  CHECK(a.mask.labels == b.mask.labels);
  CHECK(a.signature.values == b.signature.values);
}

TEST_CASE("different seed changes the background") {
  SceneSpec spec = small_spec();
  const SynthScene a = generate(spec);
  spec.seed = 43;
  const SynthScene b = generate(spec);
  CHECK(a.cube.values != b.cube.values);
}

TEST_CASE("target placement and deviations leave the background stream alone") {
  SceneSpec spec = small_spec();
  const SynthScene with = generate(spec);
  spec.target_count = 0;
  spec.informative_bands.clear();
  const SynthScene without = generate(spec);

  const int n = spec.bands;
  const std::set<int> informative = {2, 4};
  std::size_t touched = 0;
  for (std::size_t p = 0; p < with.mask.labels.size(); ++p) {
    for (int b = 1; b <= n; ++b) {
      const double va = with.cube.values[p * n + (b - 1)];
      const double vb = without.cube.values[p * n + (b - 1)];
      if (with.mask.labels[p] && informative.count(b)) {
        // mean-shift adds exactly the contrast
        CHECK(va == vb + 0.7);
        ++touched;
      } else {
        CHECK(va == vb);
      }
    }
  }
  CHECK(touched == 2 * informative.size());
  CHECK(label_count(without.mask) == 0);
}

TEST_CASE("mask marks exactly target_count distinct pixels") {
  SceneSpec spec = small_spec();
  spec.target_count = 2;
  const SynthScene scene = generate(spec);
  CHECK(label_count(scene.mask) == 2);
  CHECK(scene.mask.width == spec.width);
  CHECK(scene.mask.height == spec.height);
  CHECK(std::all_of(scene.mask.ignore.begin(), scene.mask.ignore.end(),
                    [](std::uint8_t v) { return v == 0; }));
}

TEST_CASE("signature is the flat background plus contrast on informative bands") {
  const SceneSpec spec = small_spec();
  const SynthScene scene = generate(spec);
  REQUIRE(scene.signature.values.size() == 4);
  CHECK(scene.signature.values(0) == 1.0);
  CHECK(scene.signature.values(1) == 1.7);
  CHECK(scene.signature.values(2) == 1.0);
  CHECK(scene.signature.values(3) == 1.7);
  CHECK(scene.signature.band_ids == std::vector<int>{1, 2, 3, 4});
  CHECK(scene.cube.wavelengths == std::vector<double>{400, 410, 420, 430});
}

TEST_CASE("background matches the requested covariance and mean") {
  SceneSpec spec;
  spec.width = 200;
  spec.height = 200;
  spec.bands = 3;
  spec.seed = 7;
  spec.diagonal = {1.0, 4.0, 0.25};
  spec.rho = 0.4;
  spec.target_count = 0;
  const SynthScene scene = generate(spec);

  const std::size_t t = scene.cube.pixel_count();
  DataMatrixd data;
  data.values.resize(static_cast<Index>(t), 3);
  for (std::size_t p = 0; p < t; ++p)
    for (int b = 0; b < 3; ++b)
      data.values(static_cast<Index>(p), b) = scene.cube.values[p * 3 + b];
  data.band_ids = {1, 2, 3};

  const VectorX<double> mean = data.values.colwise().mean();
  for (int b = 0; b < 3; ++b) CHECK(mean(b) == doctest::Approx(1.0).epsilon(0.02));

  const SymTensord c2 = cumulant(data, 2);
  CHECK(c2.at({1, 1}) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(c2.at({2, 2}) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(c2.at({3, 3}) == doctest::Approx(0.25).epsilon(0.05));
  CHECK(c2.at({1, 2}) == doctest::Approx(0.4 * 2.0).epsilon(0.08));
  CHECK(c2.at({1, 3}) == doctest::Approx(0.4 * 0.5).epsilon(0.08));
  CHECK(c2.at({2, 3}) == doctest::Approx(0.4 * 1.0).epsilon(0.08));
}

TEST_CASE("skewed targets skew the informative band only") {
  SceneSpec spec;
  spec.width = 100;
  spec.height = 100;
  spec.bands = 2;
  spec.seed = 11;
  spec.diagonal = {1.0};
  spec.rho = 0.0;
  spec.target_count = 400;  // 4% of pixels
  spec.informative_bands = {2};
  spec.model = TargetModel::Skewed;
  spec.contrast = 3.0;
  const SynthScene scene = generate(spec);

  const std::size_t t = scene.cube.pixel_count();
  DataMatrixd data;
  data.values.resize(static_cast<Index>(t), 2);
  for (std::size_t p = 0; p < t; ++p)
    for (int b = 0; b < 2; ++b)
      data.values(static_cast<Index>(p), b) = scene.cube.values[p * 2 + b];
  data.band_ids = {1, 2};

  const SymTensord c3 = cumulant(data, 3);
  CHECK(std::abs(c3.at({1, 1, 1})) < 0.1);
  CHECK(c3.at({2, 2, 2}) > 0.5);
}

TEST_CASE("spec validation") {
  SceneSpec spec = small_spec();
  spec.width = 0;
  CHECK_THROWS_AS(generate(spec), ValidationError);

  spec = small_spec();
  spec.target_count = -1;
  CHECK_THROWS_AS(generate(spec), ValidationError);

  spec = small_spec();
  spec.target_count = 3;  // 3 >= 0.05 * 48
  CHECK_THROWS_AS(generate(spec), ValidationError);

  spec = small_spec();
  spec.diagonal = {1.0, 2.0};
  CHECK_THROWS_AS(generate(spec), ValidationError);

  spec = small_spec();
  spec.diagonal = {1.0, 1.0, -1.0, 1.0};
  CHECK_THROWS_AS(generate(spec), ValidationError);

  spec = small_spec();
  spec.rho = 1.0;
  CHECK_THROWS_AS(generate(spec), ValidationError);
  spec.rho = -0.5;  // below -1/(n-1) = -1/3
  CHECK_THROWS_AS(generate(spec), ValidationError);

  spec = small_spec();
  spec.informative_bands = {2, 2};
  CHECK_THROWS_AS(generate(spec), ValidationError);
  spec.informative_bands = {5};
  CHECK_THROWS_AS(generate(spec), ValidationError);
  spec.informative_bands = {};
  CHECK_THROWS_AS(generate(spec), ValidationError);  // targets need a band

  spec = small_spec();
  spec.contrast = std::nan("");
  CHECK_THROWS_AS(generate(spec), ValidationError);

  CHECK_THROWS_AS(target_model_from_string("gaussian"), ValidationError);
}

TEST_CASE("scene spec json round trip") {
  const SceneSpec spec = small_spec();
  const nlohmann::json j = scene_spec_to_json(spec);
  CHECK(j.at("model") == "mean-shift");
  CHECK(j.at("diagonal").is_array());
  const SceneSpec back = scene_spec_from_json(j);
  CHECK(back.width == spec.width);
  CHECK(back.height == spec.height);
  CHECK(back.bands == spec.bands);
  CHECK(back.seed == spec.seed);
  CHECK(back.diagonal == spec.diagonal);
  CHECK(back.rho == spec.rho);
  CHECK(back.target_count == spec.target_count);
  CHECK(back.informative_bands == spec.informative_bands);
  CHECK(back.model == spec.model);
  CHECK(back.contrast == spec.contrast);

  // scalar diagonal broadcasts, missing keys keep defaults
  const SceneSpec partial =
      scene_spec_from_json({{"bands", 9}, {"diagonal", 2.5}, {"model", "heavy-tail"}});
  CHECK(partial.bands == 9);
  CHECK(partial.diagonal == std::vector<double>{2.5});
  CHECK(partial.model == TargetModel::HeavyTail);
  CHECK(partial.width == 64);
}
