#include "lrcf/model.hpp"

#include <cmath>
#include <sstream>

namespace lrcf {

CpdModel CpdModel::uniform(int num_vars, int harmonics) {
  CpdModel m;
  m.num_vars = num_vars;
  m.rank = 1;
  m.harmonics = harmonics;
  m.lambda = RVector::Ones(1);
  CMatrix factor = CMatrix::Zero(2 * harmonics + 1, 1);
  factor(harmonics, 0) = Complex(1.0, 0.0);
  m.factors.assign(static_cast<std::size_t>(num_vars), factor);
  m.scaling = ScalingRecord::identity(num_vars);
  return m;
}

void validate_model(const CpdModel& model) {
  if (model.num_vars < 1 || model.rank < 1 || model.harmonics < 0) {
    throw invalid_argument("model: N, F must be positive and K nonnegative");
  }
  if (model.lambda.size() != model.rank) throw invalid_argument("model: lambda length != rank");
  if (static_cast<int>(model.factors.size()) != model.num_vars) {
    throw invalid_argument("model: factor count != variable count");
  }
  if (model.scaling.dims() != model.num_vars) {
    throw invalid_argument("model: scaling record size != variable count");
  }
  if (!model.lambda.allFinite() || (model.lambda.array() < 0.0).any()) {
    throw numerical_error("model: mixture weights must be finite and nonnegative");
  }
  if (std::abs(model.lambda.sum() - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "model: mixture weights sum to " << model.lambda.sum() << ", expected 1";
    throw numerical_error(msg.str());
  }
  for (int n = 0; n < model.num_vars; ++n) {
    const CMatrix& a = model.factors[static_cast<std::size_t>(n)];
    if (a.rows() != model.freq_dim() || a.cols() != model.rank) {
      throw invalid_argument("model: factor shape mismatch");
    }
    if (!a.allFinite()) throw numerical_error("model: non-finite factor entries");
    for (int h = 0; h < model.rank; ++h) {
      if (a(model.harmonics, h) != Complex(1.0, 0.0)) {
        std::ostringstream msg;
        msg << "model: zero-frequency row of factor " << n << " is not exactly one";
        throw numerical_error(msg.str());
      }
    }
  }
}

CTensor3 cpd_synthesize_triple(const CpdModel& model, int i, int j, int l) {
  if (!(0 <= i && i < j && j < l && l < model.num_vars)) {
    throw invalid_argument("cpd_synthesize_triple: indices must be strictly increasing and in range");
  }
  return cpd_synthesize(model.lambda, model.factors[static_cast<std::size_t>(i)],
                        model.factors[static_cast<std::size_t>(j)],
                        model.factors[static_cast<std::size_t>(l)]);
}

} // namespace lrcf
