#include "lrcf/density.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace lrcf {

namespace {

constexpr double log_floor = 1e-12;

//! Per-dimension inner sum sum_k A_n(k+K, h) e^{-j*2*pi*k*x}: a row of F
//! conditional density values in the Fourier representation.
CRowVector dimension_sum(const CMatrix& factor, int harmonics, double x) {
  const Index dim = factor.rows();
  CRowVector phases(dim);
  phases[harmonics] = Complex(1.0, 0.0);
  for (int k = 1; k <= harmonics; ++k) {
    const double theta = two_pi * k * x;
    const Complex v(std::cos(theta), -std::sin(theta)); // e^{-j 2 pi k x}
    phases[harmonics + k] = v;
    phases[harmonics - k] = std::conj(v);
  }
  return phases * factor;
}

RVector clamp_to_unit(const RVector& x, EvalDiagnostics* diag) {
  RVector out = x;
  for (Index n = 0; n < out.size(); ++n) {
    if (out[n] < 0.0 || out[n] > 1.0) {
      out[n] = std::clamp(out[n], 0.0, 1.0);
      if (diag) ++diag->clamped_coords;
    }
  }
  return out;
}

RVector normalize_point(const CpdModel& model, const RVector& raw, EvalDiagnostics* diag) {
  RVector unit(raw.size());
  for (Index n = 0; n < raw.size(); ++n) unit[n] = model.scaling.to_unit(n, raw[n]);
  return clamp_to_unit(unit, diag);
}

} // namespace

Complex pdf_complex(const CpdModel& model, const RVector& x_unit) {
  if (x_unit.size() != model.num_vars) throw invalid_argument("pdf: point dimension mismatch");
  CRowVector acc = CRowVector::Ones(model.rank);
  for (int n = 0; n < model.num_vars; ++n) {
    acc.array() *=
        dimension_sum(model.factors[static_cast<std::size_t>(n)], model.harmonics, x_unit[n])
            .array();
  }
  return (acc.array() * model.lambda.transpose().cast<Complex>().array()).sum();
}

double pdf_signed(const CpdModel& model, const RVector& x_unit) {
  return pdf_complex(model, x_unit).real();
}

double pdf_eval(const CpdModel& model, const RVector& x, Space space, EvalDiagnostics* diag) {
  if (!x.allFinite()) throw invalid_argument("pdf: non-finite point");
  if (space == Space::normalized) {
    return std::max(pdf_signed(model, clamp_to_unit(x, diag)), 0.0);
  }
  const RVector unit = normalize_point(model, x, diag);
  return std::max(pdf_signed(model, unit), 0.0) * model.scaling.jacobian();
}

CpdModel marginal_model(const CpdModel& model, const std::vector<int>& keep) {
  if (keep.empty()) throw invalid_argument("marginal_model: keep set is empty");
  CpdModel out;
  out.num_vars = static_cast<int>(keep.size());
  out.rank = model.rank;
  out.harmonics = model.harmonics;
  out.lambda = model.lambda;
  out.factors.reserve(keep.size());
  for (int n : keep) {
    if (n < 0 || n >= model.num_vars) throw invalid_argument("marginal_model: index out of range");
    out.factors.push_back(model.factors[static_cast<std::size_t>(n)]);
  }
  out.scaling = model.scaling.subset(keep);
  return out;
}

LogLikelihoodReport log_likelihood(const CpdModel& model, const Dataset& raw) {
  if (raw.rows() == 0) throw data_error("log_likelihood: empty dataset");
  if (raw.cols() != model.num_vars) throw invalid_argument("log_likelihood: column count mismatch");

  LogLikelihoodReport report;
  // Marginal models per missingness pattern, built on demand.
  std::map<std::vector<int>, CpdModel> marginals;

  double total = 0.0;
  for (Index r = 0; r < raw.rows(); ++r) {
    std::vector<int> observed;
    for (Index c = 0; c < raw.cols(); ++c) {
      if (raw.mask(r, c)) observed.push_back(static_cast<int>(c));
    }
    if (observed.empty()) {
      ++report.rows_skipped;
      continue;
    }
    const bool complete = static_cast<Index>(observed.size()) == raw.cols();
    const CpdModel* scoring = &model;
    if (!complete) {
      auto it = marginals.find(observed);
      if (it == marginals.end()) {
        it = marginals.emplace(observed, marginal_model(model, observed)).first;
      }
      scoring = &it->second;
      ++report.rows_marginal;
    }
    RVector point(static_cast<Index>(observed.size()));
    for (std::size_t q = 0; q < observed.size(); ++q) {
      point[static_cast<Index>(q)] = raw.values(r, observed[q]);
    }
    double density = pdf_eval(*scoring, point, Space::raw, &report.diagnostics);
    if (density < log_floor) {
      density = log_floor;
      ++report.diagnostics.floored_logs;
    }
    total += std::log(density);
    ++report.rows_scored;
  }
  if (report.rows_scored == 0) throw data_error("log_likelihood: no scorable rows");
  report.mean_log_likelihood = total / static_cast<double>(report.rows_scored);
  return report;
}

namespace {

//! Closed form of int_0^1 x e^{-j*2*pi*k*x} dx; the zero-frequency limit
//! is 1/2.
Complex target_moment_coeff(int k) {
  if (k == 0) return Complex(0.5, 0.0);
  const Complex denom(0.0, -two_pi * k);
  const double theta = two_pi * k;
  const Complex expo(std::cos(theta), -std::sin(theta)); // e^{-j 2 pi k}
  return expo / denom + (Complex(1.0, 0.0) - expo) / (denom * denom);
}

} // namespace

ConditionalMean conditional_mean(const CpdModel& model, const std::vector<int>& observed,
                                 const RVector& observed_raw, int target) {
  if (target < 0 || target >= model.num_vars) {
    throw invalid_argument("conditional_mean: target out of range");
  }
  if (static_cast<Index>(observed.size()) != observed_raw.size()) {
    throw invalid_argument("conditional_mean: observed values misaligned");
  }
  for (int n : observed) {
    if (n == target) throw invalid_argument("conditional_mean: target cannot be observed");
  }

  // Work in the marginal over observed + target, target last.
  std::vector<int> keep = observed;
  keep.push_back(target);
  const CpdModel sub = marginal_model(model, keep);
  const Index t_pos = static_cast<Index>(keep.size()) - 1;

  CRowVector acc = CRowVector::Ones(sub.rank);
  for (Index q = 0; q < static_cast<Index>(observed.size()); ++q) {
    const double unit = std::clamp(sub.scaling.to_unit(q, observed_raw[q]), 0.0, 1.0);
    acc.array() *=
        dimension_sum(sub.factors[static_cast<std::size_t>(q)], sub.harmonics, unit).array();
  }

  CRowVector moment(sub.rank);
  {
    CRowVector coeffs(sub.freq_dim());
    for (Index r = 0; r < sub.freq_dim(); ++r) {
      coeffs[r] = target_moment_coeff(offset_freq(r, sub.harmonics));
    }
    moment = coeffs * sub.factors[static_cast<std::size_t>(t_pos)];
  }

  const CVector lambda_c = sub.lambda.cast<Complex>();
  const Complex numerator = (acc.array() * moment.array() * lambda_c.transpose().array()).sum();
  const Complex denominator = (acc.array() * lambda_c.transpose().array()).sum();

  ConditionalMean out;
  double den = denominator.real();
  if (den < log_floor) {
    den = log_floor;
    out.low_evidence = true;
  }
  const double unit_mean = numerator.real() / den;
  out.value = sub.scaling.to_raw(t_pos, unit_mean);
  return out;
}

std::vector<ConditionalMean> impute(const CpdModel& model, const DensityQuery& query) {
  if (query.targets.empty()) throw invalid_argument("impute: no targets");
  for (int t : query.targets) {
    for (int o : query.observed) {
      if (t == o) throw invalid_argument("impute: observed and target sets overlap");
    }
  }
  std::vector<ConditionalMean> out;
  out.reserve(query.targets.size());
  for (int t : query.targets) {
    out.push_back(conditional_mean(model, query.observed, query.values, t));
  }
  return out;
}

} // namespace lrcf
