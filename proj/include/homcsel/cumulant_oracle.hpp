#pragma once

#include <string>
#include <vector>

#include "homcsel/cumulants.hpp"
#include "homcsel/data_matrix.hpp"
#include "homcsel/sym_tensor.hpp"

namespace homcsel {

// Reference cumulant estimator used to cross-check cumulant(). Evaluates the
// full moment-to-cumulant formula over all set partitions with raw (uncentered)
// moments and plain per-element loops; no centering pass, no shared moment
// tensors. Deliberately slow, hence the small-instance limits.
template <typename Scalar>
SymTensor<double> cumulant_oracle(const DataMatrix<Scalar>& data, int d) {
  if (d < 1) throw ValidationError("cumulant_oracle: order must be >= 1");
  if (d > kMaxCumulantOrder)
    throw ValidationError("cumulant_oracle: order " + std::to_string(d) +
                          " not supported (max " +
                          std::to_string(kMaxCumulantOrder) + ")");
  const int n = static_cast<int>(data.n());
  const Index t = data.t();
  if (n > 6 || t > 10000)
    throw ValidationError("cumulant_oracle: limited to n <= 6, t <= 10000");

  auto raw_moment = [&](const std::vector<int>& bands) {
    double s = 0.0;
    for (Index j = 0; j < t; ++j) {
      double p = 1.0;
      for (int b : bands) p *= static_cast<double>(data.values(j, b - 1));
      s += p;
    }
    return s / static_cast<double>(t);
  };

  const auto parts = detail::set_partitions(d);
  SymTensor<double> out(d, n);
  MultiIndex idx(static_cast<std::size_t>(d), 1);
  std::uint64_t r = 0;
  std::vector<int> sub;
  do {
    double v = 0.0;
    for (const auto& p : parts) {
      double prod = p.coeff;
      for (const auto& block : p.blocks) {
        sub.clear();
        for (int pos : block) sub.push_back(idx[static_cast<std::size_t>(pos)]);
        prod *= raw_moment(sub);
      }
      v += prod;
    }
    out[r++] = v;
  } while (CanonicalSpace::next(idx, n));
  return out;
}

}  // namespace homcsel
