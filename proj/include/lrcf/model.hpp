#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrcf/dataset.hpp"
#include "lrcf/tensor.hpp"

namespace lrcf {

//! Rank-F factorization of the truncated characteristic tensor.
//!
//! lambda holds the mixture weights (nonnegative, summing to one) and
//! factors[n] the per-variable Fourier coefficient matrices of shape
//! (2K+1) x F, frequency ascending from -K. The row at offset K (zero
//! frequency) is pinned to ones, which fixes the scaling indeterminacy
//! of the decomposition.
struct CpdModel {
  int num_vars = 0;  // N
  int rank = 0;      // F
  int harmonics = 0; // K
  RVector lambda;
  std::vector<CMatrix> factors;
  ScalingRecord scaling;

  Index freq_dim() const { return 2 * static_cast<Index>(harmonics) + 1; }

  //! Model with a single component whose conditionals are all uniform on
  //! the unit interval (only the zero-frequency coefficient is nonzero).
  static CpdModel uniform(int num_vars, int harmonics);
};

//! Check every structural invariant (shapes, simplex weights to 1e-12,
//! zero-frequency rows exactly one, finite entries). Throws on violation.
void validate_model(const CpdModel& model);

//! Characteristic tensor of the variable triple (i, j, l) under the model.
CTensor3 cpd_synthesize_triple(const CpdModel& model, int i, int j, int l);

struct FitOptions {
  int rank = 2;                    // F
  int harmonics = 3;               // K
  int max_outer_iters = 200;
  double rel_tol = 1e-6;           // relative objective decrease per sweep
  int admm_iters = 50;
  double admm_rho = 0.0;           // 0 = trace-scaled default
  double ridge = 1e-10;            // scaled by trace(G)/F in every solve
  std::int64_t triple_budget = -1; // -1 = all triples
  std::int64_t min_count = 30;     // joint observations per retained triple
  int min_cover = 3;
  double pad = 0.025;
  std::uint64_t seed = 0;
  int restarts = 3;
  bool weight_by_count = false;    // weight triples by observation count
  bool record_step_objectives = false;
};

struct TripleDiagnostics {
  std::array<int, 3> vars{};
  std::int64_t count = 0;
  double residual = 0.0; // squared Frobenius residual at exit
};

struct FitReport {
  std::vector<double> trajectory;       // objective after each outer sweep
  std::vector<double> step_objectives;  // after each factor update (optional)
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  int best_restart = 0;
  std::vector<TripleDiagnostics> triples;
  bool identifiability_ok = true;
  std::int64_t identifiability_bound = 0;
  std::vector<std::string> warnings;
};

} // namespace lrcf
