#include "lrcf/dataset.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lrcf {

RVector Dataset::observed_column(Index n) const {
  const Index m = rows();
  RVector out(mask.col(n).count());
  Index w = 0;
  for (Index r = 0; r < m; ++r) {
    if (mask(r, n)) out[w++] = values(r, n);
  }
  return out;
}

ScalingRecord ScalingRecord::subset(const std::vector<int>& keep) const {
  ScalingRecord out;
  out.shift.resize(static_cast<Index>(keep.size()));
  out.scale.resize(static_cast<Index>(keep.size()));
  for (std::size_t q = 0; q < keep.size(); ++q) {
    if (keep[q] < 0 || keep[q] >= dims()) throw invalid_argument("subset: index out of range");
    out.shift[static_cast<Index>(q)] = shift[keep[q]];
    out.scale[static_cast<Index>(q)] = scale[keep[q]];
  }
  return out;
}

NormalizeResult normalize(const Dataset& data, double pad) {
  if (pad < 0.0 || pad >= 0.5) throw invalid_argument("normalize: pad must lie in [0, 0.5)");
  const Index m = data.rows();
  const Index n = data.cols();

  ScalingRecord scaling;
  scaling.shift.resize(n);
  scaling.scale.resize(n);

  RMatrix out = data.values;
  for (Index c = 0; c < n; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    Index seen = 0;
    for (Index r = 0; r < m; ++r) {
      if (!data.mask(r, c)) continue;
      const double v = data.values(r, c);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "normalize: non-finite observed value in column " << c;
        throw data_error(msg.str());
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++seen;
    }
    if (seen == 0) {
      std::ostringstream msg;
      msg << "normalize: column " << c << " has no observed values";
      throw data_error(msg.str());
    }
    if (!(lo < hi)) {
      std::ostringstream msg;
      msg << "normalize: column " << c << " is constant (value " << lo << ")";
      throw data_error(msg.str());
    }
    const double s = (1.0 - 2.0 * pad) / (hi - lo);
    const double c0 = pad - s * lo;
    scaling.scale[c] = s;
    scaling.shift[c] = c0;
    for (Index r = 0; r < m; ++r) {
      if (data.mask(r, c)) out(r, c) = s * data.values(r, c) + c0;
    }
  }
  return NormalizeResult{Dataset(std::move(out), data.mask), std::move(scaling)};
}

Dataset apply_scaling(const Dataset& raw, const ScalingRecord& scaling) {
  if (raw.cols() != scaling.dims()) {
    throw invalid_argument("apply_scaling: dimension mismatch");
  }
  RMatrix out = raw.values;
  for (Index c = 0; c < raw.cols(); ++c) {
    for (Index r = 0; r < raw.rows(); ++r) {
      if (raw.mask(r, c)) out(r, c) = scaling.to_unit(c, raw.values(r, c));
    }
  }
  return Dataset(std::move(out), raw.mask);
}

} // namespace lrcf
