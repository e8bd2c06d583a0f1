#pragma once

#include <set>
#include <string>
#include <vector>

#include "homcsel/errors.hpp"
#include "homcsel/types.hpp"

namespace homcsel {

// Observations in rows (pixels), bands in columns. band_ids are stable
// labels that survive band subsetting; wavelengths, when present, are in nm
// and aligned with the columns.
template <typename Scalar = double>
struct DataMatrix {
  MatrixX<Scalar> values;
  std::vector<int> band_ids;
  std::vector<double> wavelengths;

  DataMatrix() = default;
  DataMatrix(MatrixX<Scalar> v, std::vector<int> ids = {},
             std::vector<double> wl = {})
      : values(std::move(v)), band_ids(std::move(ids)), wavelengths(std::move(wl)) {
    if (values.rows() < 2)
      throw ValidationError("DataMatrix: need at least 2 observations, got " +
                            std::to_string(values.rows()));
    if (values.cols() < 1)
      throw ValidationError("DataMatrix: need at least 1 band");
    if (band_ids.empty()) {
      band_ids.resize(values.cols());
      for (Index i = 0; i < values.cols(); ++i) band_ids[i] = static_cast<int>(i) + 1;
    }
    if (static_cast<Index>(band_ids.size()) != values.cols())
      throw ValidationError("DataMatrix: band_ids length does not match column count");
    std::set<int> seen(band_ids.begin(), band_ids.end());
    if (seen.size() != band_ids.size())
      throw ValidationError("DataMatrix: band_ids must be unique");
    if (!wavelengths.empty() &&
        static_cast<Index>(wavelengths.size()) != values.cols())
      throw ValidationError("DataMatrix: wavelengths length does not match column count");
  }

  Index t() const { return values.rows(); }
  Index n() const { return values.cols(); }
};

using DataMatrixd = DataMatrix<double>;
using DataMatrixf = DataMatrix<float>;

}  // namespace homcsel
