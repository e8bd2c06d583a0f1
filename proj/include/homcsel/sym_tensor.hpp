#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "homcsel/multi_index.hpp"
#include "homcsel/types.hpp"

namespace homcsel {

// Super-symmetric tensor of a given order over dim bands. Only the canonical
// block is stored: one value per non-decreasing multi-index, in lexicographic
// order. at()/set() accept any permutation of a multi-index.
template <typename Scalar = double>
class SymTensor {
 public:
  SymTensor(int order, int dim)
      : space_(dim, order), values_(space_.size(), Scalar(0)) {}

  int order() const { return space_.order(); }
  int dim() const { return space_.dim(); }
  std::uint64_t entry_count() const { return space_.size(); }
  const CanonicalSpace& space() const { return space_; }

  Scalar at(std::span<const int> idx) const { return values_[checked_rank(idx)]; }
  Scalar at(const MultiIndex& idx) const { return at(std::span<const int>(idx)); }
  void set(std::span<const int> idx, Scalar v) { values_[checked_rank(idx)] = v; }
  void set(const MultiIndex& idx, Scalar v) { set(std::span<const int>(idx), v); }

  // Canonical-rank access, no bounds or ordering checks.
  Scalar& operator[](std::uint64_t r) { return values_[r]; }
  Scalar operator[](std::uint64_t r) const { return values_[r]; }
  const std::vector<Scalar>& values() const { return values_; }
  std::vector<Scalar>& values() { return values_; }

 private:
  std::uint64_t checked_rank(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != order())
      throw ValidationError("SymTensor: multi-index length " +
                            std::to_string(idx.size()) + " does not match order " +
                            std::to_string(order()));
    MultiIndex sorted(idx.begin(), idx.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 1 || sorted.back() > dim())
      throw ValidationError("SymTensor: index entry out of range [1.." +
                            std::to_string(dim()) + "]");
    return space_.rank(sorted);
  }

  CanonicalSpace space_;
  std::vector<Scalar> values_;
};

using SymTensord = SymTensor<double>;
using SymTensorf = SymTensor<float>;

// Mode-1 unfolding: dim x dim^(order-1) matrix, column index built from the
// trailing entries with the second index varying fastest.
template <typename Scalar>
MatrixX<Scalar> unfold_mode1(const SymTensor<Scalar>& t) {
  const int n = t.dim();
  const int d = t.order();
  if (d < 2) throw ValidationError("unfold_mode1: order must be >= 2");
  std::uint64_t cols = 1;
  for (int k = 1; k < d; ++k) {
    cols *= static_cast<std::uint64_t>(n);
    if (cols > (std::uint64_t(1) << 33))
      throw ValidationError("unfold_mode1: unfolded matrix too large");
  }
  MatrixX<Scalar> u(n, static_cast<Index>(cols));
  MultiIndex tail(d - 1), full(d);
  for (std::uint64_t j = 0; j < cols; ++j) {
    std::uint64_t rem = j;
    for (int k = 0; k < d - 1; ++k) {
      tail[k] = static_cast<int>(rem % n) + 1;
      rem /= n;
    }
    std::sort(tail.begin(), tail.end());
    for (int i = 1; i <= n; ++i) {
      auto pos = std::upper_bound(tail.begin(), tail.end(), i);
      std::size_t cut = static_cast<std::size_t>(pos - tail.begin());
      for (std::size_t k = 0; k < cut; ++k) full[k] = tail[k];
      full[cut] = i;
      for (std::size_t k = cut; k + 1 < static_cast<std::size_t>(d); ++k)
        full[k + 1] = tail[k];
      u(i - 1, static_cast<Index>(j)) = t[t.space().rank(full)];
    }
  }
  return u;
}

// Removes band position r (1-based): keeps every entry whose multi-index
// avoids r and shifts positions above r down by one.
template <typename Scalar>
SymTensor<Scalar> fiber_cut(const SymTensor<Scalar>& t, int r) {
  const int n = t.dim();
  if (n < 2) throw ValidationError("fiber_cut: tensor has a single band");
  if (r < 1 || r > n)
    throw ValidationError("fiber_cut: position " + std::to_string(r) +
                          " out of range [1.." + std::to_string(n) + "]");
  const int d = t.order();
  SymTensor<Scalar> out(d, n - 1);
  MultiIndex idx(d, 1), parent(d);
  std::uint64_t rr = 0;
  do {
    for (int k = 0; k < d; ++k) parent[k] = idx[k] < r ? idx[k] : idx[k] + 1;
    out[rr++] = t[t.space().rank(parent)];
  } while (CanonicalSpace::next(idx, n - 1));
  return out;
}

template <typename Scalar>
nlohmann::json tensor_to_json(const SymTensor<Scalar>& t) {
  nlohmann::json entries = nlohmann::json::array();
  MultiIndex idx(t.order(), 1);
  std::uint64_t r = 0;
  do {
    entries.push_back({idx, static_cast<double>(t[r++])});
  } while (CanonicalSpace::next(idx, t.dim()));
  return {{"order", t.order()}, {"dim", t.dim()}, {"entries", std::move(entries)}};
}

template <typename Scalar>
SymTensor<Scalar> tensor_from_json(const nlohmann::json& j) {
  SymTensor<Scalar> t(j.at("order").get<int>(), j.at("dim").get<int>());
  for (const auto& e : j.at("entries")) {
    MultiIndex idx = e.at(0).get<MultiIndex>();
    t.set(idx, static_cast<Scalar>(e.at(1).get<double>()));
  }
  return t;
}

}  // namespace homcsel
