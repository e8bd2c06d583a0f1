#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "homcsel/cumulants.hpp"
#include "homcsel/selection.hpp"

using namespace homcsel;

namespace {

SymTensord random_tensor(int d, int n, unsigned seed) {
  SymTensord t(d, n);
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (std::uint64_t r = 0; r < t.entry_count(); ++r) t[r] = dist(gen);
  return t;
}

DataMatrixd make_data(Index t, Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> expd(1.0);
  MatrixX<double> x(t, n);
  for (Index j = 0; j < t; ++j)
    for (Index b = 0; b < n; ++b)
      x(j, b) = gauss(gen) + 0.3 * (b % 2 == 0 ? expd(gen) : 0.0);
  return DataMatrixd(std::move(x));
}

// Reference target evaluated from first principles: materialise the mode-1
// unfolding entry by entry via at(), then plain determinants.
double reference_log_target(const SymTensord& c2, const SymTensord& cd) {
  const int n = cd.dim();
  const int d = cd.order();
  std::uint64_t cols = 1;
  for (int k = 1; k < d; ++k) cols *= static_cast<std::uint64_t>(n);
  MatrixX<double> u(n, static_cast<Index>(cols));
  MultiIndex idx(d);
  for (std::uint64_t j = 0; j < cols; ++j) {
    std::uint64_t rem = j;
    for (int l = 1; l < d; ++l) {
      idx[l] = static_cast<int>(rem % n) + 1;
      rem /= n;
    }
    for (int i = 1; i <= n; ++i) {
      idx[0] = i;
      u(i - 1, static_cast<Index>(j)) = cd.at(idx);
    }
  }
  MatrixX<double> c2m(n, n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) c2m(i - 1, j - 1) = c2.at(MultiIndex{i, j});
  const double det_m = (u * u.transpose()).determinant();
  const double det_c2 = c2m.determinant();
  if (det_m <= 0) return kMinusInf;
  return 0.5 * std::log(det_m) - 0.5 * d * std::log(det_c2);
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("dependency matrix equals the literal unfolding product") {
  for (int d : {2, 3, 4}) {
    for (int n : {2, 3, 4}) {
      SymTensord t = random_tensor(d, n, static_cast<unsigned>(31 + 10 * d + n));
      MatrixX<double> u = unfold_mode1(t);
      MatrixX<double> direct = u * u.transpose();
      MatrixX<double> fast = dependency_matrix(t);
      CHECK((fast - direct).cwiseAbs().maxCoeff() <
            1e-12 * std::max(1.0, direct.cwiseAbs().maxCoeff()));
    }
  }
  SymTensord t5 = random_tensor(5, 3, 99);
  MatrixX<double> u5 = unfold_mode1(t5);
  CHECK((dependency_matrix(t5) - u5 * u5.transpose()).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("dependency matrix of the worked order-3 example") {
  SymTensord t(3, 2);
  t.set(MultiIndex{1, 1, 1}, 1.0);
  t.set(MultiIndex{1, 1, 2}, 2.0);
  t.set(MultiIndex{1, 2, 2}, 3.0);
  t.set(MultiIndex{2, 2, 2}, 4.0);
  MatrixX<double> m = dependency_matrix(t);
  // rows of the unfolding are [1 2 2 3] and [2 3 3 4]
  CHECK(m(0, 0) == doctest::Approx(18.0).epsilon(1e-14));
  CHECK(m(0, 1) == doctest::Approx(26.0).epsilon(1e-14));
  CHECK(m(1, 0) == doctest::Approx(26.0).epsilon(1e-14));
  CHECK(m(1, 1) == doctest::Approx(38.0).epsilon(1e-14));
}

TEST_CASE("order-2 dependency matrix is the squared covariance") {
  DataMatrixd data = make_data(200, 3, 5);
  SymTensord c2 = cumulant(data, 2);
  MatrixX<double> c2m = unfold_mode1(c2);
  CHECK((dependency_matrix(c2) - c2m * c2m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("log target matches the reference on random tensors") {
  DataMatrixd data = make_data(300, 4, 17);
  SymTensord c2 = cumulant(data, 2);
  for (int d : {3, 4}) {
    SymTensord cd = cumulant(data, d);
    CHECK(rel_diff(log_target_f(c2, cd, d), reference_log_target(c2, cd)) < 1e-9);
  }
}

TEST_CASE("target is invariant to rescaling the data") {
  DataMatrixd data = make_data(400, 3, 23);
  DataMatrixd scaled(data.values * 3.7);
  for (int d : {3, 4}) {
    const double a = log_target_f(cumulant(data, 2), cumulant(data, d), d);
    const double b = log_target_f(cumulant(scaled, 2), cumulant(scaled, d), d);
    CHECK(rel_diff(a, b) < 1e-8);
  }
}

TEST_CASE("univariate targets reduce to skewness and excess kurtosis") {
  DataMatrixd data = make_data(500, 1, 29);
  SymTensord c2 = cumulant(data, 2);
  const double var = c2[0];
  const double m3 = central_moment(data, MultiIndex{1, 1, 1});
  const double m4 = central_moment(data, MultiIndex{1, 1, 1, 1});
  const double skew = m3 / std::pow(var, 1.5);
  const double exkurt = m4 / (var * var) - 3.0;
  CHECK(rel_diff(std::exp(log_target_f(c2, cumulant(data, 3), 3)), std::abs(skew)) < 1e-9);
  CHECK(rel_diff(std::exp(log_target_f(c2, cumulant(data, 4), 4)), std::abs(exkurt)) < 1e-9);
}

TEST_CASE("order-2 target f is identically one") {
  DataMatrixd data = make_data(150, 3, 41);
  SymTensord c2 = cumulant(data, 2);
  CHECK(std::abs(log_target_f(c2, c2, 2)) < 1e-10);
}

TEST_CASE("maximum ellipsoid volume target on a diagonal covariance") {
  SymTensord c2(2, 2);
  c2.set(MultiIndex{1, 1}, 2.0);
  c2.set(MultiIndex{2, 2}, 3.0);
  CHECK(log_target_mev(c2) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
}

TEST_CASE("singular covariance raises a numerical error naming the bands") {
  SymTensord c2(2, 2);
  c2.set(MultiIndex{1, 1}, 1.0);
  c2.set(MultiIndex{1, 2}, 1.0);
  c2.set(MultiIndex{2, 2}, 1.0);
  CHECK_THROWS_AS(log_target_mev(c2), NumericalError);
  try {
    log_target_mev(c2);
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("collinear") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
  // a ridge restores positive definiteness
  CHECK(std::isfinite(log_target_mev(c2, 0.1)));
  SymTensord dead(2, 2);
  dead.set(MultiIndex{1, 1}, 1.0);  // band 2 has zero variance
  try {
    log_target_mev(dead);
    CHECK(false);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("zero variance") != std::string::npos);
  }
}

TEST_CASE("breaking point limits per order") {
  CHECK(breaking_point_limit(3) == 4);
  CHECK(breaking_point_limit(4) == 7);
  CHECK(breaking_point_limit(5) == 11);
  CHECK(breaking_point_limit(6) == 16);
  CHECK_THROWS_AS(breaking_point_limit(2), ValidationError);
  CHECK_THROWS_AS(breaking_point_limit(7), ValidationError);
}

TEST_CASE("greedy elimination matches an independent reimplementation") {
  DataMatrixd data = make_data(250, 5, 71);
  SymTensord c2 = cumulant(data, 2);
  SymTensord c3 = cumulant(data, 3);
  SelectionConfig cfg;
  cfg.order = 3;
  cfg.n_left = 2;
  SelectionResult got = select_bands(c2, c3, cfg);

  // reference: re-estimate cumulants of the surviving columns at every step
  std::vector<int> ids{1, 2, 3, 4, 5};
  std::vector<RemovalStep> ref_trace;
  MatrixX<double> cur = data.values;
  while (static_cast<int>(ids.size()) > cfg.n_left) {
    double best = kMinusInf;
    int best_pos = -1;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      MatrixX<double> sub(cur.rows(), cur.cols() - 1);
      Index c = 0;
      for (Index j = 0; j < cur.cols(); ++j)
        if (j != static_cast<Index>(i)) sub.col(c++) = cur.col(j);
      DataMatrixd d_sub(sub);
      const double v =
          reference_log_target(cumulant(d_sub, 2), cumulant(d_sub, 3));
      if (v > best + 1e-12) {
        best = v;
        best_pos = static_cast<int>(i);
      }
    }
    REQUIRE(best_pos >= 0);
    ref_trace.push_back({ids[static_cast<std::size_t>(best_pos)], best});
    MatrixX<double> sub(cur.rows(), cur.cols() - 1);
    Index c = 0;
    for (Index j = 0; j < cur.cols(); ++j)
      if (j != best_pos) sub.col(c++) = cur.col(j);
    cur = std::move(sub);
    ids.erase(ids.begin() + best_pos);
  }
  REQUIRE(got.removal_trace.size() == ref_trace.size());
  for (std::size_t k = 0; k < ref_trace.size(); ++k) {
    CHECK(got.removal_trace[k].band_id == ref_trace[k].band_id);
    CHECK(rel_diff(got.removal_trace[k].log_target, ref_trace[k].log_target) < 1e-8);
  }
  CHECK(got.retained == ids);
  // retained and removed ids partition the input
  std::vector<int> all = got.retained;
  for (const auto& s : got.removal_trace) all.push_back(s.band_id);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("greedy keeps nested band subsets as n_left decreases") {
  DataMatrixd data = make_data(250, 5, 83);
  SymTensord c2 = cumulant(data, 2);
  SymTensord c3 = cumulant(data, 3);
  SelectionConfig cfg;
  cfg.order = 3;
  std::vector<int> prev;
  for (int k = 5; k >= 1; --k) {
    cfg.n_left = k;
    cfg.warn_below_limit = false;
    SelectionResult r = select_bands(c2, c3, cfg);
    CHECK(static_cast<int>(r.retained.size()) == k);
    if (!prev.empty()) {
      for (int id : r.retained)
        CHECK(std::find(prev.begin(), prev.end(), id) != prev.end());
    }
    prev = r.retained;
  }
}

TEST_CASE("exact ties are broken towards the lowest band id") {
  SymTensord c2(2, 3);
  for (int i = 1; i <= 3; ++i) c2.set(MultiIndex{i, i}, 1.0);
  SymTensord c3(3, 3);
  c3.set(MultiIndex{1, 1, 1}, 0.5);
  c3.set(MultiIndex{2, 2, 2}, 0.5);  // bands 1 and 2 interchangeable
  c3.set(MultiIndex{3, 3, 3}, 2.0);
  SelectionConfig cfg;
  cfg.order = 3;
  cfg.n_left = 2;
  cfg.warn_below_limit = false;
  SelectionResult r = select_bands(c2, c3, cfg);
  REQUIRE(r.removal_trace.size() == 1);
  CHECK(r.removal_trace[0].band_id == 1);
  CHECK(r.retained == std::vector<int>{2, 3});
}

TEST_CASE("a zero tensor degenerates selection and carries the partial state") {
  SymTensord c2(2, 4);
  for (int i = 1; i <= 4; ++i) c2.set(MultiIndex{i, i}, 1.0);
  SymTensord c3(3, 4);  // all zero: every candidate target is singular
  SelectionConfig cfg;
  cfg.order = 3;
  cfg.n_left = 2;
  cfg.warn_below_limit = false;
  try {
    select_bands(c2, c3, cfg);
    CHECK(false);
  } catch (const DegenerateSelectionError& e) {
    CHECK(e.partial.removal_trace.empty());
    CHECK(e.partial.retained == std::vector<int>{1, 2, 3, 4});
    CHECK(std::string(e.what()).find("degenerate") != std::string::npos);
  }
}

TEST_CASE("selection below the reliability limit warns but proceeds") {
  DataMatrixd data = make_data(200, 5, 55);
  SymTensord c2 = cumulant(data, 2);
  SymTensord c3 = cumulant(data, 3);
  SelectionConfig cfg;
  cfg.order = 3;
  cfg.n_left = 3;  // below the order-3 limit of 4
  SelectionResult r = select_bands(c2, c3, cfg);
  REQUIRE(r.limit_warning.has_value());
  CHECK(r.limit_warning->find("limit") != std::string::npos);
  CHECK(static_cast<int>(r.retained.size()) == 3);
  cfg.n_left = 4;
  CHECK_FALSE(select_bands(c2, c3, cfg).limit_warning.has_value());
  cfg.n_left = 3;
  cfg.warn_below_limit = false;
  CHECK_FALSE(select_bands(c2, c3, cfg).limit_warning.has_value());
}

TEST_CASE("selection with the order-2 target uses the ellipsoid volume") {
  DataMatrixd data = make_data(200, 4, 61);
  SymTensord c2 = cumulant(data, 2);
  SelectionConfig cfg;
  cfg.order = 2;
  cfg.n_left = 3;
  SelectionResult r = select_bands(c2, c2, cfg);
  REQUIRE(r.removal_trace.size() == 1);
  // the removed band is the argmax of the post-removal covariance log det
  double best = kMinusInf;
  int best_id = 0;
  for (int rpos = 1; rpos <= 4; ++rpos) {
    const double v = log_target_mev(fiber_cut(c2, rpos));
    if (v > best) {
      best = v;
      best_id = rpos;
    }
  }
  CHECK(r.removal_trace[0].band_id == best_id);
  CHECK(r.removal_trace[0].log_target == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("custom band ids flow through trace and retained lists") {
  DataMatrixd data = make_data(200, 4, 67);
  SymTensord c2 = cumulant(data, 2);
  SymTensord c3 = cumulant(data, 3);
  SelectionConfig cfg;
  cfg.order = 3;
  cfg.n_left = 2;
  cfg.warn_below_limit = false;
  std::vector<int> labels{101, 107, 113, 119};
  SelectionResult r = select_bands(c2, c3, cfg, labels);
  std::vector<int> seen = r.retained;
  for (const auto& s : r.removal_trace) seen.push_back(s.band_id);
  std::sort(seen.begin(), seen.end());
  CHECK(seen == labels);
}

TEST_CASE("selection argument validation") {
  DataMatrixd data = make_data(100, 3, 77);
  SymTensord c2 = cumulant(data, 2);
  SymTensord c3 = cumulant(data, 3);
  SelectionConfig cfg;
  cfg.order = 3;
  cfg.n_left = 0;
  CHECK_THROWS_AS(select_bands(c2, c3, cfg), ValidationError);
  cfg.n_left = 4;
  CHECK_THROWS_AS(select_bands(c2, c3, cfg), ValidationError);
  cfg.n_left = 2;
  cfg.order = 4;
  CHECK_THROWS_AS(select_bands(c2, c3, cfg), ValidationError);  // order mismatch
  cfg.order = 6;
  CHECK_THROWS_AS(select_bands(c2, c3, cfg), ValidationError);
  cfg.order = 3;
  cfg.ridge = -0.5;
  CHECK_THROWS_AS(select_bands(c2, c3, cfg), ValidationError);
  cfg.ridge = 0.0;
  CHECK_THROWS_AS(select_bands(c2, c3, cfg, {1, 2}), ValidationError);
  CHECK_THROWS_AS(log_target_f(c3, c3, 3), ValidationError);
  CHECK_THROWS_AS(log_target_f(c2, c3, 4), ValidationError);
  CHECK_THROWS_AS(dependency_matrix(cumulant(data, 1)), ValidationError);
}

TEST_CASE("n_left equal to n returns every band untouched") {
  DataMatrixd data = make_data(100, 3, 88);
  SymTensord c2 = cumulant(data, 2);
  SymTensord c3 = cumulant(data, 3);
  SelectionConfig cfg;
  cfg.order = 3;
  cfg.n_left = 3;
  SelectionResult r = select_bands(c2, c3, cfg);
  CHECK(r.retained == std::vector<int>{1, 2, 3});
  CHECK(r.removal_trace.empty());
}

TEST_CASE("selection result json round trip") {
  SelectionResult r;
  r.order = 4;
  r.n_left = 2;
  r.retained = {3, 9};
  r.removal_trace = {{7, -1.25}, {1, 0.5}};
  r.limit_warning = "below limit";
  nlohmann::json j = selection_to_json(r);
  SelectionResult back = selection_from_json(j);
  CHECK(back.order == 4);
  CHECK(back.n_left == 2);
  CHECK(back.retained == r.retained);
  REQUIRE(back.removal_trace.size() == 2);
  CHECK(back.removal_trace[1].band_id == 1);
  CHECK(back.removal_trace[1].log_target == 0.5);
  CHECK(back.limit_warning == r.limit_warning);
  r.limit_warning.reset();
  CHECK(selection_to_json(r)["limit_warning"].is_null());
  CHECK_FALSE(selection_from_json(selection_to_json(r)).limit_warning.has_value());
}
