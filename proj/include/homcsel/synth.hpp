#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "homcsel/evaluation.hpp"
#include "homcsel/ingest.hpp"
#include "homcsel/parallel.hpp"
#include "homcsel/rng.hpp"
#include "homcsel/types.hpp"

namespace homcsel {

inline constexpr double kBackgroundMean = 1.0;

enum class TargetModel { MeanShift, Skewed, HeavyTail };

inline const char* to_string(TargetModel m) {
  switch (m) {
    case TargetModel::MeanShift: return "mean-shift";
    case TargetModel::Skewed: return "skewed";
    case TargetModel::HeavyTail: return "heavy-tail";
  }
  return "?";
}

inline TargetModel target_model_from_string(const std::string& s) {
  if (s == "mean-shift") return TargetModel::MeanShift;
  if (s == "skewed") return TargetModel::Skewed;
  if (s == "heavy-tail") return TargetModel::HeavyTail;
  throw ValidationError("unknown target model '" + s +
                        "' (mean-shift, skewed, heavy-tail)");
}

struct SceneSpec {
  int width = 64;
  int height = 64;
  int bands = 16;
  std::uint64_t seed = 0;
  std::vector<double> diagonal{1.0};  // one entry broadcasts to every band
  double rho = 0.0;
  int target_count = 0;
  std::vector<int> informative_bands;
  TargetModel model = TargetModel::MeanShift;
  double contrast = 0.5;
};

inline nlohmann::json scene_spec_to_json(const SceneSpec& s) {
  return {{"width", s.width},
          {"height", s.height},
          {"bands", s.bands},
          {"seed", s.seed},
          {"diagonal", s.diagonal},
          {"rho", s.rho},
          {"target_count", s.target_count},
          {"informative_bands", s.informative_bands},
          {"model", to_string(s.model)},
          {"contrast", s.contrast}};
}

inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  SceneSpec s;
  if (j.contains("width")) s.width = j.at("width").get<int>();
  if (j.contains("height")) s.height = j.at("height").get<int>();
  if (j.contains("bands")) s.bands = j.at("bands").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("diagonal")) {
    if (j.at("diagonal").is_number())
      s.diagonal = {j.at("diagonal").get<double>()};
    else
      s.diagonal = j.at("diagonal").get<std::vector<double>>();
  }
  if (j.contains("rho")) s.rho = j.at("rho").get<double>();
  if (j.contains("target_count")) s.target_count = j.at("target_count").get<int>();
  if (j.contains("informative_bands"))
    s.informative_bands = j.at("informative_bands").get<std::vector<int>>();
  if (j.contains("model"))
    s.model = target_model_from_string(j.at("model").get<std::string>());
  if (j.contains("contrast")) s.contrast = j.at("contrast").get<double>();
  return s;
}

struct SynthScene {
  HsiCube cube;
  GroundTruthMask mask;
  Signatured signature;
};

// Equicorrelated Gaussian background around a flat mean of 1, plus
// target_count pixels deviating in the informative bands only. The signature
// is the target-model mean spectrum: background + contrast on informative
// bands (all three models have mean deviation equal to the contrast).
inline SynthScene generate(const SceneSpec& spec, unsigned workers = 0) {
  const int n = spec.bands;
  if (spec.width < 1 || spec.height < 1)
    throw ValidationError("synth: scene dimensions must be >= 1");
  if (n < 1) throw ValidationError("synth: need at least one band");
  const std::size_t px =
      static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);
  if (spec.target_count < 0)
    throw ValidationError("synth: target_count must be >= 0");
  if (spec.target_count > 0 &&
      static_cast<double>(spec.target_count) >= 0.05 * static_cast<double>(px))
    throw ValidationError("synth: target_count " +
                          std::to_string(spec.target_count) +
                          " is not below 5% of " + std::to_string(px) +
                          " pixels; targets must stay rare");
  if (spec.diagonal.size() != 1 &&
      spec.diagonal.size() != static_cast<std::size_t>(n))
    throw ValidationError("synth: diagonal needs 1 or bands entries");
  for (double d : spec.diagonal)
    if (!(d > 0)) throw ValidationError("synth: diagonal entries must be > 0");
  if (n > 1) {
    const double lo = -1.0 / (n - 1);
    if (!(spec.rho > lo && spec.rho < 1.0))
      throw ValidationError("synth: rho must lie in (" + std::to_string(lo) +
                            ", 1) for " + std::to_string(n) + " bands");
  }
  std::set<int> informative(spec.informative_bands.begin(),
                            spec.informative_bands.end());
  if (informative.size() != spec.informative_bands.size())
    throw ValidationError("synth: informative_bands must be unique");
  for (int b : informative)
    if (b < 1 || b > n)
      throw ValidationError("synth: informative band " + std::to_string(b) +
                            " out of range [1.." + std::to_string(n) + "]");
  if (spec.target_count > 0 && informative.empty())
    throw ValidationError("synth: targets need at least one informative band");
  if (!std::isfinite(spec.contrast))
    throw ValidationError("synth: contrast must be finite");

  // sigma = D^1/2 ((1-rho) I + rho J) D^1/2, positive definite by the rho check
  VectorX<double> sd(n);
  for (int b = 0; b < n; ++b)
    sd(b) = std::sqrt(spec.diagonal.size() == 1
                          ? spec.diagonal[0]
                          : spec.diagonal[static_cast<std::size_t>(b)]);
  MatrixX<double> sigma(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sigma(i, j) = sd(i) * sd(j) * (i == j ? 1.0 : spec.rho);
  Eigen::LLT<MatrixX<double>> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw ValidationError("synth: background covariance is not positive definite");
  const MatrixX<double> chol = llt.matrixL();

  const CounterRng rng(spec.seed);
  constexpr std::uint64_t kStreamBackground = 0;
  constexpr std::uint64_t kStreamPlacement = 1;
  constexpr std::uint64_t kStreamTargets = 2;

  SynthScene scene;
  scene.cube.width = spec.width;
  scene.cube.height = spec.height;
  scene.cube.bands = n;
  scene.cube.values.resize(px * static_cast<std::size_t>(n));
  for (int b = 1; b <= n; ++b)
    scene.cube.wavelengths.push_back(400.0 + 10.0 * (b - 1));

  parallel_for(px, [&](std::size_t p) {
    VectorX<double> z(n);
    for (int b = 0; b < n; ++b)
      z(b) = rng.normal(kStreamBackground, p, static_cast<std::uint64_t>(b));
    const VectorX<double> x = chol * z;
    double* out = scene.cube.values.data() + p * static_cast<std::size_t>(n);
    for (int b = 0; b < n; ++b) out[b] = kBackgroundMean + x(b);
  }, workers);

  // partial Fisher-Yates: the first target_count slots become the target set
  scene.mask = GroundTruthMask(spec.width, spec.height);
  std::vector<std::uint32_t> slots(px);
  std::iota(slots.begin(), slots.end(), 0u);
  for (int i = 0; i < spec.target_count; ++i) {
    const std::size_t j =
        i + rng.below(px - static_cast<std::size_t>(i), kStreamPlacement,
                      static_cast<std::uint64_t>(i));
    std::swap(slots[static_cast<std::size_t>(i)], slots[j]);
  }
  for (int i = 0; i < spec.target_count; ++i) {
    const std::size_t p = slots[static_cast<std::size_t>(i)];
    scene.mask.labels[p] = 1;
    double* row = scene.cube.values.data() + p * static_cast<std::size_t>(n);
    for (int b : informative) {
      double dev;
      switch (spec.model) {
        case TargetModel::MeanShift:
          dev = spec.contrast;
          break;
        case TargetModel::Skewed:
          dev = spec.contrast *
                rng.exponential(kStreamTargets, p, static_cast<std::uint64_t>(b));
          break;
        case TargetModel::HeavyTail:
        default:
          dev = spec.contrast *
                (1.0 + rng.laplace(kStreamTargets, p, static_cast<std::uint64_t>(b)));
          break;
      }
      row[b - 1] += dev;
    }
  }

  scene.signature.values = VectorX<double>::Constant(n, kBackgroundMean);
  for (int b : informative) scene.signature.values(b - 1) += spec.contrast;
  scene.signature.band_ids.resize(static_cast<std::size_t>(n));
  std::iota(scene.signature.band_ids.begin(), scene.signature.band_ids.end(), 1);
  scene.signature.name = std::string(to_string(spec.model)) + "-target";
  return scene;
}

}  // namespace homcsel
