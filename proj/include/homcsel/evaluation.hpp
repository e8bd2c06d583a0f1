#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "homcsel/binary_io.hpp"
#include "homcsel/detection.hpp"

namespace homcsel {

// Raster-ordered labels; ignored pixels take part in neither counts nor ROC.
struct GroundTruthMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> ignore;

  GroundTruthMask() = default;
  GroundTruthMask(int w, int h)
      : width(w), height(h),
        labels(static_cast<std::size_t>(w) * h, 0),
        ignore(static_cast<std::size_t>(w) * h, 0) {
    if (w < 1 || h < 1)
      throw ValidationError("GroundTruthMask: dimensions must be >= 1");
  }
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  Index n_target = 0;
  Index n_background = 0;
  double convexity_deficit = 0.0;
};

struct Confusion {
  Index tp = 0, fp = 0, tn = 0, fn = 0;
  double tpr = 0.0, fpr = 0.0, precision = 0.0, accuracy = 0.0;
};

namespace detail {

inline void check_mask_shape(const ScoreMap& map, const GroundTruthMask& mask) {
  if (map.width != mask.width || map.height != mask.height)
    throw ValidationError("score map is " + std::to_string(map.width) + "x" +
                          std::to_string(map.height) + " but mask is " +
                          std::to_string(mask.width) + "x" +
                          std::to_string(mask.height));
  const std::size_t px = map.angles.size();
  if (mask.labels.size() != px || mask.ignore.size() != px)
    throw ValidationError("mask label count does not match its dimensions");
}

inline double trapezoid_auc(const std::vector<RocPoint>& pts) {
  double a = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k)
    a += (pts[k].fpr - pts[k - 1].fpr) * (pts[k].tpr + pts[k - 1].tpr) * 0.5;
  return a;
}

}  // namespace detail

// ROC of "target iff angle <= threshold" swept over every distinct score.
// Starts at (0,0); ties share one point, which gives the trapezoid AUC its
// half-weight-tie (Mann-Whitney) reading.
inline RocCurve roc(const ScoreMap& map, const GroundTruthMask& mask) {
  detail::check_mask_shape(map, mask);
  std::vector<std::pair<double, bool>> samples;
  samples.reserve(map.angles.size());
  for (std::size_t j = 0; j < map.angles.size(); ++j) {
    if (mask.ignore[j]) continue;
    samples.emplace_back(map.angles[j], mask.labels[j] != 0);
  }
  RocCurve curve;
  for (const auto& s : samples) (s.second ? curve.n_target : curve.n_background)++;
  if (curve.n_target == 0 || curve.n_background == 0)
    throw ValidationError(
        "ROC undefined: need at least one target and one background pixel "
        "outside the ignore region (have " + std::to_string(curve.n_target) +
        " targets, " + std::to_string(curve.n_background) + " background)");
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  curve.points.push_back({-std::numeric_limits<double>::infinity(), 0.0, 0.0});
  const double nt = static_cast<double>(curve.n_target);
  const double nb = static_cast<double>(curve.n_background);
  Index cum_t = 0, cum_b = 0;
  std::size_t k = 0;
  while (k < samples.size()) {
    const double a = samples[k].first;
    while (k < samples.size() && samples[k].first == a) {
      (samples[k].second ? cum_t : cum_b)++;
      ++k;
    }
    curve.points.push_back({a, cum_b / nb, cum_t / nt});
  }
  curve.auc = detail::trapezoid_auc(curve.points);

  // upper concave hull over (fpr, tpr); its AUC bounds the curve's from above
  std::vector<RocPoint> hull;
  for (const auto& p : curve.points) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull[hull.size() - 1];
      const double cross = (b.fpr - a.fpr) * (p.tpr - a.tpr) -
                           (b.tpr - a.tpr) * (p.fpr - a.fpr);
      if (cross >= 0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }
  curve.convexity_deficit = detail::trapezoid_auc(hull) - curve.auc;
  return curve;
}

inline Confusion confusion_at(const ScoreMap& map, const GroundTruthMask& mask,
                              double tau) {
  detail::check_mask_shape(map, mask);
  if (!(tau >= 0.0 && tau <= std::numbers::pi))
    throw ValidationError("confusion_at: tau must lie in [0, pi]");
  Confusion c;
  for (std::size_t j = 0; j < map.angles.size(); ++j) {
    if (mask.ignore[j]) continue;
    const bool predicted = map.angles[j] <= tau;
    const bool actual = mask.labels[j] != 0;
    if (predicted && actual) c.tp++;
    else if (predicted && !actual) c.fp++;
    else if (!predicted && actual) c.fn++;
    else c.tn++;
  }
  const auto rate = [](Index num, Index den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  c.tpr = rate(c.tp, c.tp + c.fn);
  c.fpr = rate(c.fp, c.fp + c.tn);
  c.precision = rate(c.tp, c.tp + c.fp);
  c.accuracy = rate(c.tp + c.tn, c.tp + c.fp + c.tn + c.fn);
  return c;
}

inline void write_roc_csv(const RocCurve& curve, const std::string& path) {
  std::ostringstream os;
  os << "threshold,fpr,tpr\n";
  os.precision(17);
  for (const auto& p : curve.points)
    os << p.threshold << "," << p.fpr << "," << p.tpr << "\n";
  detail::write_file_text(path, os.str());
}

inline nlohmann::json roc_summary_json(const RocCurve& curve) {
  return {{"auc", curve.auc},
          {"n_target", curve.n_target},
          {"n_background", curve.n_background},
          {"convexity_deficit", curve.convexity_deficit}};
}

inline nlohmann::json confusion_json(const Confusion& c, double tau) {
  return {{"tau", tau},         {"tp", c.tp},
          {"fp", c.fp},         {"tn", c.tn},
          {"fn", c.fn},         {"tpr", c.tpr},
          {"fpr", c.fpr},       {"precision", c.precision},
          {"accuracy", c.accuracy}};
}

}  // namespace homcsel
