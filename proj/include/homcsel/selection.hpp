#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homcsel/multi_index.hpp"
#include "homcsel/parallel.hpp"
#include "homcsel/sym_tensor.hpp"
#include "homcsel/types.hpp"

namespace homcsel {

inline constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

template <typename Scalar>
using DependencyMatrix = MatrixX<Scalar>;

namespace detail {

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Multiset permutation count of a sorted index: k! / prod(multiplicities!).
inline double multiset_weight(std::span<const int> sorted_idx) {
  double w = factorial(static_cast<int>(sorted_idx.size()));
  int run = 1;
  for (std::size_t k = 1; k <= sorted_idx.size(); ++k) {
    if (k < sorted_idx.size() && sorted_idx[k] == sorted_idx[k - 1]) {
      ++run;
    } else {
      w /= factorial(run);
      run = 1;
    }
  }
  return w;
}

// Insert value v into sorted src, writing the still-sorted result to dst.
inline void insert_sorted(std::span<const int> src, int v, std::span<int> dst) {
  std::size_t k = 0;
  while (k < src.size() && src[k] <= v) {
    dst[k] = src[k];
    ++k;
  }
  dst[k] = v;
  for (; k < src.size(); ++k) dst[k + 1] = src[k];
}

// log det of a symmetric PSD matrix via its eigenvalues; -inf when any
// eigenvalue sits at (or below) numerical zero relative to the largest.
inline double logdet_psd_or_minus_inf(const MatrixX<double>& m) {
  Eigen::SelfAdjointEigenSolver<MatrixX<double>> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lmax = ev(ev.size() - 1);
  if (!(lmax > 0)) return kMinusInf;
  const double tol =
      lmax * static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon();
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) <= tol) return kMinusInf;
    s += std::log(ev(i));
  }
  return s;
}

// Describes why a covariance failed its Cholesky factorisation: zero-variance
// bands first, otherwise the most collinear pair. ids map matrix positions to
// band ids (1..n when empty).
inline std::string describe_covariance_failure(const MatrixX<double>& c2,
                                               const std::vector<int>& ids) {
  auto id_of = [&](Index i) {
    return ids.empty() ? static_cast<int>(i) + 1 : ids[static_cast<std::size_t>(i)];
  };
  const Index n = c2.rows();
  std::string zero;
  for (Index i = 0; i < n; ++i) {
    if (c2(i, i) <= 0) {
      if (!zero.empty()) zero += ", ";
      zero += std::to_string(id_of(i));
    }
  }
  if (!zero.empty())
    return "covariance is not positive definite: zero variance in band(s) " + zero;
  double best = -1.0;
  Index bi = 0, bj = 1;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double c = std::abs(c2(i, j)) / std::sqrt(c2(i, i) * c2(j, j));
      if (c > best) {
        best = c;
        bi = i;
        bj = j;
      }
    }
  }
  return "covariance is not positive definite: bands " + std::to_string(id_of(bi)) +
         " and " + std::to_string(id_of(bj)) +
         " are nearly collinear (|corr| = " + std::to_string(best) + ")";
}

// log det of covariance + ridge*I via Cholesky; throws NumericalError naming
// the offending band(s) when the factorisation fails.
inline double logdet_covariance(const MatrixX<double>& c2, double ridge,
                                const std::vector<int>& ids) {
  MatrixX<double> m = c2;
  if (ridge != 0.0) m.diagonal().array() += ridge;
  Eigen::LLT<MatrixX<double>> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError(describe_covariance_failure(c2, ids));
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace detail

// Gram matrix U U^T of the mode-1 unfolding, built without materialising the
// n x n^(d-1) unfolding. Each canonical (d-1)-multiset column appears in the
// unfolding as many times as it has distinct permutations, so accumulating
// sqrt(weight)-scaled canonical columns gives the same product.
template <typename Scalar>
DependencyMatrix<Scalar> dependency_matrix(const SymTensor<Scalar>& cd) {
  const int n = cd.dim();
  const int d = cd.order();
  if (d < 2) throw ValidationError("dependency_matrix: tensor order must be >= 2");
  CanonicalSpace cols(n, d - 1);
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n, n);
  const Index block = static_cast<Index>(
      std::min<std::uint64_t>(cols.size(), 4096));
  MatrixX<Scalar> blk(n, block);
  MultiIndex mu(d - 1, 1), full(d);
  Index filled = 0;
  auto flush = [&] {
    if (filled == 0) return;
    m.template selfadjointView<Eigen::Lower>().rankUpdate(blk.leftCols(filled));
    filled = 0;
  };
  do {
    const Scalar sw =
        static_cast<Scalar>(std::sqrt(detail::multiset_weight(mu)));
    for (int i = 1; i <= n; ++i) {
      detail::insert_sorted(mu, i, full);
      blk(i - 1, filled) = sw * cd[cd.space().rank(full)];
    }
    if (++filled == block) flush();
  } while (CanonicalSpace::next(mu, n));
  flush();
  return m.template selfadjointView<Eigen::Lower>();
}

// log f_d = 0.5 log det(M_d) - (d/2) log det(C_2 + ridge I). Returns -inf when
// M_d is singular; throws NumericalError when the covariance is.
template <typename Scalar>
double log_target_f(const SymTensor<Scalar>& c2, const SymTensor<Scalar>& cd,
                    int d, double ridge = 0.0,
                    const std::vector<int>& band_ids = {}) {
  if (c2.order() != 2)
    throw ValidationError("log_target_f: c2 must have order 2");
  if (cd.order() != d)
    throw ValidationError("log_target_f: tensor order " +
                          std::to_string(cd.order()) + " does not match d = " +
                          std::to_string(d));
  if (d < 2) throw ValidationError("log_target_f: d must be >= 2");
  if (cd.dim() != c2.dim())
    throw ValidationError("log_target_f: tensors disagree on band count");
  if (ridge < 0) throw ValidationError("log_target_f: ridge must be >= 0");
  const MatrixX<double> c2m = unfold_mode1(c2).template cast<double>();
  const double ld_c2 = detail::logdet_covariance(c2m, ridge, band_ids);
  const MatrixX<double> md = dependency_matrix(cd).template cast<double>();
  const double ld_md = detail::logdet_psd_or_minus_inf(md);
  if (ld_md == kMinusInf) return kMinusInf;
  return 0.5 * ld_md - 0.5 * d * ld_c2;
}

// Maximum ellipsoid volume target: log det(C_2 + ridge I). The order-2
// analogue of log_target_f, which is identically zero at d = 2.
template <typename Scalar>
double log_target_mev(const SymTensor<Scalar>& c2, double ridge = 0.0,
                      const std::vector<int>& band_ids = {}) {
  if (c2.order() != 2)
    throw ValidationError("log_target_mev: c2 must have order 2");
  if (ridge < 0) throw ValidationError("log_target_mev: ridge must be >= 0");
  const MatrixX<double> c2m = unfold_mode1(c2).template cast<double>();
  return detail::logdet_covariance(c2m, ridge, band_ids);
}

// Smallest band count at which at least a third of tensor elements are
// off-diagonal; selecting below it leaves the target dominated by diagonal
// (variance-like) entries.
inline int breaking_point_limit(int d) {
  if (d < 3 || d > 6)
    throw ValidationError("breaking_point_limit: order must be in [3..6]");
  int n = 1;
  while (off_diag_ratio(n, d) < 1.0 / 3.0) ++n;
  return n;
}

struct SelectionConfig {
  int order = 3;        // 2 selects with the MEV target
  int n_left = 1;
  double ridge = 0.0;
  bool warn_below_limit = true;
  unsigned workers = 0;
};

struct RemovalStep {
  int band_id;
  double log_target;  // target value after this band was removed
};

struct SelectionResult {
  int order = 0;
  int n_left = 0;
  std::vector<int> retained;
  std::vector<RemovalStep> removal_trace;
  std::optional<std::string> limit_warning;
};

struct DegenerateSelectionError : DegenerateError {
  DegenerateSelectionError(const std::string& msg, SelectionResult partial_result)
      : DegenerateError(msg), partial(std::move(partial_result)) {}
  SelectionResult partial;
};

// Greedy backward elimination: at each step removes the band whose removal
// maximises the log target of the remaining bands, tie-broken towards the
// lowest band id. band_ids defaults to 1..n.
template <typename Scalar>
SelectionResult select_bands(const SymTensor<Scalar>& c2,
                             const SymTensor<Scalar>& cd,
                             const SelectionConfig& config,
                             std::vector<int> band_ids = {}) {
  const int n = c2.dim();
  const int d = config.order;
  if (c2.order() != 2)
    throw ValidationError("select_bands: c2 must have order 2");
  if (d < 2 || d > 5)
    throw ValidationError("select_bands: order must be in [2..5]");
  if (cd.order() != d)
    throw ValidationError("select_bands: tensor order does not match config.order");
  if (cd.dim() != n)
    throw ValidationError("select_bands: tensors disagree on band count");
  if (config.n_left < 1 || config.n_left > n)
    throw ValidationError("select_bands: n_left must be in [1.." +
                          std::to_string(n) + "]");
  if (config.ridge < 0)
    throw ValidationError("select_bands: ridge must be >= 0");
  if (band_ids.empty()) {
    band_ids.resize(n);
    for (int i = 0; i < n; ++i) band_ids[static_cast<std::size_t>(i)] = i + 1;
  }
  if (static_cast<int>(band_ids.size()) != n)
    throw ValidationError("select_bands: band_ids length does not match tensors");

  SelectionResult result;
  result.order = d;
  result.n_left = config.n_left;
  if (d >= 3 && config.warn_below_limit) {
    const int limit = breaking_point_limit(d);
    if (config.n_left < limit)
      result.limit_warning = "n_left = " + std::to_string(config.n_left) +
                             " is below the order-" + std::to_string(d) +
                             " reliability limit of " + std::to_string(limit) +
                             " bands; diagonal elements dominate the target";
  }

  // Fail on a singular covariance up front, with real band ids in the message.
  detail::logdet_covariance(unfold_mode1(c2).template cast<double>(),
                            config.ridge, band_ids);

  SymTensor<Scalar> cur2 = c2;
  SymTensor<Scalar> curd = cd;
  std::vector<int> ids = band_ids;
  const bool mev = (d == 2);

  for (int remaining = n; remaining > config.n_left; --remaining) {
    std::vector<double> score(static_cast<std::size_t>(remaining));
    parallel_for(static_cast<std::size_t>(remaining), [&](std::size_t i) {
      const int r = static_cast<int>(i) + 1;
      SymTensor<Scalar> cut2 = fiber_cut(cur2, r);
      if (mev) {
        score[i] = log_target_mev(cut2, config.ridge, ids);
      } else {
        SymTensor<Scalar> cutd = fiber_cut(curd, r);
        score[i] = log_target_f(cut2, cutd, d, config.ridge, ids);
      }
    }, config.workers);

    int best = -1;
    for (int i = 0; i < remaining; ++i) {
      const std::size_t k = static_cast<std::size_t>(i);
      if (score[k] == kMinusInf) continue;
      if (best < 0 || score[k] > score[static_cast<std::size_t>(best)] ||
          (score[k] == score[static_cast<std::size_t>(best)] &&
           ids[k] < ids[static_cast<std::size_t>(best)]))
        best = i;
    }
    if (best < 0) {
      result.retained = ids;
      throw DegenerateSelectionError(
          "selection degenerate at " + std::to_string(remaining) +
              " bands: every candidate removal leaves a singular target",
          result);
    }
    const int r = best + 1;
    result.removal_trace.push_back(
        {ids[static_cast<std::size_t>(best)], score[static_cast<std::size_t>(best)]});
    cur2 = fiber_cut(cur2, r);
    if (!mev) curd = fiber_cut(curd, r);
    ids.erase(ids.begin() + best);
  }
  result.retained = ids;
  return result;
}

inline nlohmann::json selection_to_json(const SelectionResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& step : r.removal_trace)
    trace.push_back({{"removed", step.band_id}, {"log_target", step.log_target}});
  nlohmann::json j{{"order", r.order},
                   {"n_left", r.n_left},
                   {"retained", r.retained},
                   {"trace", std::move(trace)}};
  j["limit_warning"] = r.limit_warning ? nlohmann::json(*r.limit_warning)
                                       : nlohmann::json(nullptr);
  return j;
}

inline SelectionResult selection_from_json(const nlohmann::json& j) {
  SelectionResult r;
  r.order = j.at("order").get<int>();
  r.n_left = j.at("n_left").get<int>();
  r.retained = j.at("retained").get<std::vector<int>>();
  for (const auto& step : j.at("trace"))
    r.removal_trace.push_back({step.at("removed").get<int>(),
                               step.at("log_target").get<double>()});
  if (j.contains("limit_warning") && !j.at("limit_warning").is_null())
    r.limit_warning = j.at("limit_warning").get<std::string>();
  return r;
}

}  // namespace homcsel
