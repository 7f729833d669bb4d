#pragma once

#include <string>
#include <vector>

#include "lrcf/errors.hpp"
#include "lrcf/types.hpp"

namespace lrcf {

//! M observations of N real variables with an explicit missingness mask
//! (true = observed). Masked-out cells are ignored by every consumer.
struct Dataset {
  RMatrix values; // M x N
  BoolArray mask; // M x N

  Dataset() = default;
  Dataset(RMatrix v, BoolArray m) : values(std::move(v)), mask(std::move(m)) {
    if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
      throw invalid_argument("Dataset: values and mask shapes differ");
    }
  }

  //! Fully observed dataset.
  static Dataset complete(RMatrix v) {
    BoolArray m = BoolArray::Constant(v.rows(), v.cols(), true);
    return Dataset(std::move(v), std::move(m));
  }

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  //! Observed values of one column, in row order.
  RVector observed_column(Index n) const;
};

//! Per-dimension affine map taking raw values into the unit interval:
//! unit = scale[n] * raw + shift[n]. The inverse is exact.
struct ScalingRecord {
  RVector shift;
  RVector scale;

  static ScalingRecord identity(Index n) {
    ScalingRecord s;
    s.shift = RVector::Zero(n);
    s.scale = RVector::Ones(n);
    return s;
  }

  Index dims() const { return scale.size(); }
  double to_unit(Index n, double raw) const { return scale[n] * raw + shift[n]; }
  double to_raw(Index n, double unit) const { return (unit - shift[n]) / scale[n]; }

  //! Density Jacobian of the raw -> unit map, prod_n scale[n].
  double jacobian() const { return scale.prod(); }

  //! Record restricted to a subset of dimensions, in the given order.
  ScalingRecord subset(const std::vector<int>& keep) const;
};

struct NormalizeResult {
  Dataset data;
  ScalingRecord scaling;
};

//! Affinely map each column so its observed range occupies [pad, 1-pad].
//! Throws data_error (naming the column) when a column is constant.
NormalizeResult normalize(const Dataset& data, double pad);

//! Apply a scaling record to raw data (used to place held-out data in the
//! coordinates of a trained model). Values are not clamped here.
Dataset apply_scaling(const Dataset& raw, const ScalingRecord& scaling);

} // namespace lrcf
