#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "homcsel/errors.hpp"

namespace homcsel {

// Multi-indices are 1-based band positions, order entries long.
using MultiIndex = std::vector<int>;

enum class ElementArea { Diagonal, PartiallyDiagonal, OffDiagonal };

inline const char* to_string(ElementArea a) {
  switch (a) {
    case ElementArea::Diagonal: return "diagonal";
    case ElementArea::PartiallyDiagonal: return "partially_diagonal";
    case ElementArea::OffDiagonal: return "off_diagonal";
  }
  return "?";
}

inline ElementArea element_area(std::span<const int> idx) {
  if (idx.empty()) throw ValidationError("element_area: empty multi-index");
  bool all_equal = true;
  bool any_repeat = false;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      if (idx[a] == idx[b]) any_repeat = true;
      else all_equal = false;
    }
  }
  if (all_equal) return ElementArea::Diagonal;
  if (!any_repeat) return ElementArea::OffDiagonal;
  return ElementArea::PartiallyDiagonal;
}

// Fraction of the n^d elements of an order-d tensor whose multi-index has no
// repeated entry; 0 whenever n < d.
inline double off_diag_ratio(int n, int d) {
  if (n < 1) throw ValidationError("off_diag_ratio: n must be >= 1");
  if (d < 2) throw ValidationError("off_diag_ratio: d must be >= 2");
  if (n < d) return 0.0;
  double r = 1.0;
  for (int k = 0; k < d; ++k) r *= static_cast<double>(n - k) / n;
  return r;
}

// Non-decreasing multi-indices over [1..n]^d in lexicographic order, with
// rank/unrank through the usual bijection onto strictly increasing d-subsets
// of [1..n+d-1] (j_k = i_k + k - 1).
class CanonicalSpace {
 public:
  CanonicalSpace(int n, int d) : n_(n), d_(d) {
    if (n < 1) throw ValidationError("CanonicalSpace: dim must be >= 1");
    if (d < 1) throw ValidationError("CanonicalSpace: order must be >= 1");
    const int rows = n + d;  // C(a, b) for a in [0, n+d-1], b in [0, d]
    binom_.assign(static_cast<std::size_t>(rows) * (d + 1), 0);
    for (int a = 0; a < rows; ++a) {
      at(a, 0) = 1;
      for (int b = 1; b <= d && b <= a; ++b)
        at(a, b) = at(a - 1, b - 1) + (a - 1 >= b ? at(a - 1, b) : 0);
    }
    size_ = at(n + d - 1, d);
  }

  int dim() const { return n_; }
  int order() const { return d_; }
  std::uint64_t size() const { return size_; }

  // idx must be non-decreasing with entries in [1..n]; not re-checked here.
  std::uint64_t rank(std::span<const int> idx) const {
    const int N = n_ + d_ - 1;
    std::uint64_t r = 0;
    int prev = 0;
    for (int l = 0; l < d_; ++l) {
      const int j = idx[l] + l;
      r += at(N - prev, d_ - l) - at(N - j + 1, d_ - l);
      prev = j;
    }
    return r;
  }

  void unrank(std::uint64_t r, std::span<int> out) const {
    int lo = 1;
    for (int l = 0; l < d_; ++l) {
      for (int v = lo; v <= n_; ++v) {
        const std::uint64_t cnt = at(n_ - v + d_ - l - 1, d_ - l - 1);
        if (r < cnt) {
          out[l] = v;
          lo = v;
          break;
        }
        r -= cnt;
      }
    }
  }

  // Lexicographic successor; idx must be canonical. Returns false at the end.
  static bool next(std::span<int> idx, int n) {
    for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
      if (idx[k] < n) {
        const int v = idx[k] + 1;
        for (std::size_t j = k; j < idx.size(); ++j) idx[j] = v;
        return true;
      }
    }
    return false;
  }

 private:
  std::uint64_t& at(int a, int b) {
    return binom_[static_cast<std::size_t>(a) * (d_ + 1) + b];
  }
  std::uint64_t at(int a, int b) const {
    return binom_[static_cast<std::size_t>(a) * (d_ + 1) + b];
  }

  int n_, d_;
  std::uint64_t size_;
  std::vector<std::uint64_t> binom_;
};

inline std::uint64_t canonical_count(int n, int d) {
  return CanonicalSpace(n, d).size();
}

}  // namespace homcsel
