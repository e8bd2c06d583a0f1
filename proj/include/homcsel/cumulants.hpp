#pragma once

#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "homcsel/data_matrix.hpp"
#include "homcsel/multi_index.hpp"
#include "homcsel/parallel.hpp"
#include "homcsel/sym_tensor.hpp"

namespace homcsel {

inline constexpr int kMaxCumulantOrder = 5;

namespace detail {

struct Partition {
  double coeff;  // (-1)^(b-1) * (b-1)! for b blocks
  std::vector<std::vector<int>> blocks;
};

// All set partitions of {0..d-1}, grown element by element.
inline std::vector<Partition> set_partitions(int d) {
  std::vector<Partition> out;
  std::vector<std::vector<int>> blocks;
  auto rec = [&](auto&& self, int k) -> void {
    if (k == d) {
      double c = 1.0;
      for (std::size_t b = 2; b <= blocks.size(); ++b) c *= -static_cast<double>(b - 1);
      out.push_back({c, blocks});
      return;
    }
    // index loop: the recursive call grows and shrinks `blocks`, which can
    // reallocate and would invalidate range-for iterators
    const std::size_t nb = blocks.size();
    for (std::size_t i = 0; i < nb; ++i) {
      blocks[i].push_back(k);
      self(self, k + 1);
      blocks[i].pop_back();
    }
    blocks.push_back({k});
    self(self, k + 1);
    blocks.pop_back();
  };
  rec(rec, 0);
  return out;
}

// Partitions with no singleton block. On mean-centered data every partition
// containing a singleton contributes nothing, so these are the only terms in
// the moment-to-cumulant formula.
inline std::vector<Partition> singleton_free_partitions(int d) {
  std::vector<Partition> out;
  for (auto& p : set_partitions(d)) {
    bool ok = true;
    for (const auto& b : p.blocks)
      if (b.size() < 2) { ok = false; break; }
    if (ok) out.push_back(std::move(p));
  }
  return out;
}

// Rank of the sub-multi-index formed by the given positions of idx (idx
// non-decreasing, positions increasing, so the sub-index stays sorted).
template <typename ScalarT>
ScalarT partition_product(const MultiIndex& idx,
                          const std::vector<std::vector<int>>& blocks,
                          const std::map<int, SymTensor<ScalarT>>& moments,
                          MultiIndex& scratch) {
  ScalarT prod = 1;
  for (const auto& block : blocks) {
    scratch.resize(block.size());
    for (std::size_t k = 0; k < block.size(); ++k) scratch[k] = idx[block[k]];
    const auto& m = moments.at(static_cast<int>(block.size()));
    prod *= m[m.space().rank(scratch)];
  }
  return prod;
}

// Order-k central moment tensor of pre-centered columns xc (t x n). Fills the
// canonical block by depth-first extension of the running product, so each
// leaf costs one elementwise multiply and one reduction over t.
template <typename ScalarT>
SymTensor<ScalarT> central_moment_tensor(const MatrixX<ScalarT>& xc, int k,
                                         unsigned workers = 0) {
  const int n = static_cast<int>(xc.cols());
  const ScalarT inv_t = ScalarT(1) / static_cast<ScalarT>(xc.rows());
  SymTensor<ScalarT> out(k, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i0) {
    const int i1 = static_cast<int>(i0) + 1;
    std::vector<VectorX<ScalarT>> prod(static_cast<std::size_t>(k));
    prod[0] = xc.col(i1 - 1);
    MultiIndex start(static_cast<std::size_t>(k), i1);
    std::uint64_t rank = out.space().rank(start);
    auto rec = [&](auto&& self, int depth, int lo) -> void {
      if (depth == k) {
        out[rank++] = prod[depth - 1].sum() * inv_t;
        return;
      }
      for (int v = lo; v <= n; ++v) {
        prod[depth] = prod[depth - 1].cwiseProduct(xc.col(v - 1));
        self(self, depth + 1, v);
      }
    };
    if (k == 1) {
      out[rank] = prod[0].sum() * inv_t;
    } else {
      rec(rec, 1, i1);
    }
  }, workers);
  return out;
}

}  // namespace detail

// Mean of the product of the raw columns named by idx.
template <typename Scalar>
acc_t<Scalar> expected_value(const DataMatrix<Scalar>& data,
                             std::span<const int> idx) {
  using Acc = acc_t<Scalar>;
  if (idx.empty()) throw ValidationError("expected_value: empty multi-index");
  for (int i : idx)
    if (i < 1 || i > data.n())
      throw ValidationError("expected_value: band position " + std::to_string(i) +
                            " out of range");
  VectorX<Acc> p = data.values.col(idx[0] - 1).template cast<Acc>();
  for (std::size_t k = 1; k < idx.size(); ++k)
    p = p.cwiseProduct(data.values.col(idx[k] - 1).template cast<Acc>());
  return p.sum() / static_cast<Acc>(data.t());
}

// Same, on mean-subtracted columns.
template <typename Scalar>
acc_t<Scalar> central_moment(const DataMatrix<Scalar>& data,
                             std::span<const int> idx) {
  using Acc = acc_t<Scalar>;
  if (idx.empty()) throw ValidationError("central_moment: empty multi-index");
  for (int i : idx)
    if (i < 1 || i > data.n())
      throw ValidationError("central_moment: band position " + std::to_string(i) +
                            " out of range");
  const Acc t = static_cast<Acc>(data.t());
  VectorX<Acc> p;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    VectorX<Acc> c = data.values.col(idx[k] - 1).template cast<Acc>();
    c.array() -= c.sum() / t;
    if (k == 0) p = std::move(c);
    else p = p.cwiseProduct(c);
  }
  return p.sum() / t;
}

// Order-d joint cumulant tensor with 1/t moment normalisation. Orders 2 and 3
// coincide with the central moment tensors; 4 and 5 subtract the covariance
// pairing terms via singleton-free set partitions.
template <typename Scalar>
SymTensor<Scalar> cumulant(const DataMatrix<Scalar>& data, int d,
                           unsigned workers = 0) {
  using Acc = acc_t<Scalar>;
  if (d < 1) throw ValidationError("cumulant: order must be >= 1");
  if (d > kMaxCumulantOrder)
    throw ValidationError("cumulant: order " + std::to_string(d) +
                          " not supported (max " +
                          std::to_string(kMaxCumulantOrder) + ")");
  const int n = static_cast<int>(data.n());
  const Acc t = static_cast<Acc>(data.t());

  VectorX<Acc> mean =
      (data.values.template cast<Acc>().colwise().sum() / t).transpose();
  if (d == 1) {
    SymTensor<Scalar> m1(1, n);
    for (int i = 0; i < n; ++i) m1[i] = static_cast<Scalar>(mean[i]);
    return m1;
  }

  MatrixX<Acc> xc = data.values.template cast<Acc>();
  xc.rowwise() -= mean.transpose();

  const auto parts = detail::singleton_free_partitions(d);
  std::set<int> needed;
  for (const auto& p : parts)
    for (const auto& b : p.blocks) needed.insert(static_cast<int>(b.size()));

  std::map<int, SymTensor<Acc>> moments;
  for (int k : needed)
    moments.emplace(k, detail::central_moment_tensor(xc, k, workers));

  SymTensor<Scalar> out(d, n);
  if (parts.size() == 1) {  // orders 2 and 3: cumulant == central moment
    const auto& m = moments.at(d);
    for (std::uint64_t r = 0; r < out.entry_count(); ++r)
      out[r] = static_cast<Scalar>(m[r]);
    return out;
  }

  const std::uint64_t total = out.entry_count();
  const std::size_t chunks = std::min<std::uint64_t>(total, 64);
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t lo = total * c / chunks;
    const std::uint64_t hi = total * (c + 1) / chunks;
    if (lo >= hi) return;
    MultiIndex idx(static_cast<std::size_t>(d)), scratch;
    out.space().unrank(lo, idx);
    for (std::uint64_t r = lo; r < hi; ++r) {
      Acc v = 0;
      for (const auto& p : parts)
        v += static_cast<Acc>(p.coeff) *
             detail::partition_product(idx, p.blocks, moments, scratch);
      out[r] = static_cast<Scalar>(v);
      CanonicalSpace::next(idx, n);
    }
  }, workers);
  return out;
}

// Cumulant tensors for all orders 1..max_order off one shared centering pass.
template <typename Scalar>
struct CumulantSet {
  Index source_t = 0;
  std::map<int, SymTensor<Scalar>> tensors;

  const SymTensor<Scalar>& order(int d) const {
    auto it = tensors.find(d);
    if (it == tensors.end())
      throw ValidationError("CumulantSet: order " + std::to_string(d) +
                            " not estimated");
    return it->second;
  }
};

template <typename Scalar>
CumulantSet<Scalar> estimate_cumulants(const DataMatrix<Scalar>& data,
                                       int max_order, unsigned workers = 0) {
  if (max_order < 1 || max_order > kMaxCumulantOrder)
    throw ValidationError("estimate_cumulants: max_order out of range [1.." +
                          std::to_string(kMaxCumulantOrder) + "]");
  CumulantSet<Scalar> set;
  set.source_t = data.t();
  for (int d = 1; d <= max_order; ++d)
    set.tensors.emplace(d, cumulant(data, d, workers));
  return set;
}

// Band ids whose sample variance is numerically zero (constant columns).
template <typename Scalar>
std::vector<int> zero_variance_bands(const DataMatrix<Scalar>& data) {
  using Acc = acc_t<Scalar>;
  std::vector<int> out;
  const Acc t = static_cast<Acc>(data.t());
  for (Index j = 0; j < data.n(); ++j) {
    VectorX<Acc> c = data.values.col(j).template cast<Acc>();
    const Acc mu = c.sum() / t;
    c.array() -= mu;
    const Acc var = c.squaredNorm() / t;
    const Acc floor = Acc(1e-28) * std::max<Acc>(Acc(1), mu * mu);
    if (var <= floor) out.push_back(data.band_ids[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace homcsel
