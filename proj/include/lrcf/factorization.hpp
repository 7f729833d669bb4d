#pragma once

#include <span>

#include "lrcf/ecf.hpp"
#include "lrcf/model.hpp"

namespace lrcf {

//! Coupled objective: sum over triples of the squared Frobenius distance
//! between the stored characteristic tensor and the model synthesis.
double objective(std::span<const TripleCf> triples, const CpdModel& model);
double objective(std::span<const TripleCf> triples, const CpdModel& model,
                 std::span<const double> weights);

//! Exact constrained least-squares update of factor n, holding everything
//! else fixed. The zero-frequency row is pinned to ones; the remaining rows
//! decouple and are solved from the accumulated normal equations.
CMatrix factor_update(int n, std::span<const TripleCf> triples, const CpdModel& model,
                      double ridge = 1e-10, std::span<const double> weights = {});

//! Euclidean projection of the real part onto the probability simplex
//! (sort-and-threshold). The active set is renormalized so the output sums
//! to one exactly.
RVector project_simplex(const RVector& y);
RVector project_simplex(const CVector& y);

//! ADMM solve of the simplex-constrained least-squares problem for the
//! mixture weights, warm-started at the current weights with a zero dual.
//! Returns the projected (feasible) primal iterate.
RVector lambda_update_admm(std::span<const TripleCf> triples, const CpdModel& model,
                           int admm_iters = 50, double rho = 0.0,
                           std::span<const double> weights = {});

enum class Advisory { ok, warn };

struct IdentifiabilityCheck {
  Advisory advisory = Advisory::ok;
  std::int64_t bound = 0; // largest generically identifiable rank
};

//! Generic uniqueness bound for a (2K+1)^3 tensor: with a = floor(log2(2K+1)),
//! ranks up to 2^(2a-2) are unique almost surely. Advisory only.
IdentifiabilityCheck check_generic_identifiability(int harmonics, int rank);

struct FitResult {
  CpdModel model;
  FitReport report;
};

//! Full pipeline: normalize, estimate triple characteristic tensors, and run
//! block coordinate descent (factor sweeps + ADMM weight update) from
//! `restarts` seeded initializations, keeping the lowest-objective model.
FitResult fit(const Dataset& raw, const FitOptions& opts);

//! Fit from already-estimated triples (fixed normalization). Used by the
//! standard pipeline and by tests that construct tensors directly.
FitResult fit_triples(std::vector<TripleCf> triples, int num_vars, const ScalingRecord& scaling,
                      const FitOptions& opts);

} // namespace lrcf
