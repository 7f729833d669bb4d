#pragma once

#include <cstdint>
#include <vector>

#include "lrcf/model.hpp"

namespace lrcf {

enum class Space { raw, normalized };

//! Counters surfaced by evaluation paths: coordinates clamped into the unit
//! interval and density values floored inside logarithms.
struct EvalDiagnostics {
  std::int64_t clamped_coords = 0;
  std::int64_t floored_logs = 0;
};

//! Complex value of the model's Fourier sum at a unit-hypercube point.
Complex pdf_complex(const CpdModel& model, const RVector& x_unit);

//! Real part of the Fourier sum, before clamping. Can be negative.
double pdf_signed(const CpdModel& model, const RVector& x_unit);

//! Density estimate at x: real part, clamped at zero. Raw-space queries are
//! normalized first (out-of-range coordinates clamped and counted) and
//! multiplied by the Jacobian of the normalization.
double pdf_eval(const CpdModel& model, const RVector& x, Space space,
                EvalDiagnostics* diag = nullptr);

struct LogLikelihoodReport {
  double mean_log_likelihood = 0.0;
  std::int64_t rows_scored = 0;
  std::int64_t rows_marginal = 0; // scored on an observed-subset marginal
  std::int64_t rows_skipped = 0;  // rows with no observed cells
  EvalDiagnostics diagnostics;
};

//! Average log density over a raw-space dataset. Rows with missing cells are
//! scored under the marginal over their observed variables; density values
//! are floored at 1e-12 inside the logarithm.
LogLikelihoodReport log_likelihood(const CpdModel& model, const Dataset& raw);

//! Marginal over a subset of variables: kept factors, unchanged weights.
CpdModel marginal_model(const CpdModel& model, const std::vector<int>& keep);

//! Point query for regression or imputation: observed variables with their
//! raw-space values, and the variables to predict.
struct DensityQuery {
  std::vector<int> observed;
  RVector values; // raw units, aligned with `observed`
  std::vector<int> targets;
};

struct ConditionalMean {
  double value = 0.0;      // raw units
  bool low_evidence = false; // conditioning density fell below the floor
};

//! Conditional expectation of `target` given the observed variables, via the
//! closed-form integral of the model density. Any variables absent from
//! `observed` other than the target are marginalized out.
ConditionalMean conditional_mean(const CpdModel& model, const std::vector<int>& observed,
                                 const RVector& observed_raw, int target);

//! Conditional means of all targets given the observed variables; other
//! targets are marginalized out of each prediction.
std::vector<ConditionalMean> impute(const CpdModel& model, const DensityQuery& query);

} // namespace lrcf
