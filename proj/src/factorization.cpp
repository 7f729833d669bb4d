#include "lrcf/factorization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace lrcf {

namespace {

//! Position of variable n inside a strictly increasing triple, or -1.
int triple_position(const TripleCf& t, int n) {
  for (int p = 0; p < 3; ++p) {
    if (t.vars[static_cast<std::size_t>(p)] == n) return p;
  }
  return -1;
}

void check_shapes(std::span<const TripleCf> triples, const CpdModel& model) {
  for (const TripleCf& t : triples) {
    if (t.tensor.dim0() != model.freq_dim()) {
      throw invalid_argument("triple harmonic cutoff does not match model");
    }
    if (t.vars[2] >= model.num_vars) throw invalid_argument("triple variable out of range");
  }
}

double triple_weight(std::span<const double> weights, std::size_t t) {
  return weights.empty() ? 1.0 : weights[t];
}

//! Synthesized mode-1 unfolding of one triple under the model.
CMatrix synthesize_unfold(const CpdModel& model, const TripleCf& t) {
  const CMatrix& a_i = model.factors[static_cast<std::size_t>(t.vars[0])];
  const CMatrix& a_j = model.factors[static_cast<std::size_t>(t.vars[1])];
  const CMatrix& a_l = model.factors[static_cast<std::size_t>(t.vars[2])];
  return khatri_rao(a_l, a_j) * model.lambda.cast<Complex>().asDiagonal() * a_i.transpose();
}

} // namespace

double objective(std::span<const TripleCf> triples, const CpdModel& model,
                 std::span<const double> weights) {
  check_shapes(triples, model);
  double total = 0.0;
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const double r = (triples[t].tensor.mode1() - synthesize_unfold(model, triples[t])).squaredNorm();
    total += triple_weight(weights, t) * r;
  }
  return total;
}

double objective(std::span<const TripleCf> triples, const CpdModel& model) {
  return objective(triples, model, {});
}

CMatrix factor_update(int n, std::span<const TripleCf> triples, const CpdModel& model,
                      double ridge, std::span<const double> weights) {
  check_shapes(triples, model);
  const Index rank = model.rank;
  const Index dim = model.freq_dim();

  CMatrix gram = CMatrix::Zero(rank, rank);   // sum_t Q^H Q
  CMatrix rhs = CMatrix::Zero(rank, dim);     // sum_t Q^H Phi^(1)
  bool seen = false;
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const TripleCf& triple = triples[t];
    const int pos = triple_position(triple, n);
    if (pos < 0) continue;
    seen = true;
    // Other two variables keep increasing order; Q for mode n is
    // khatri_rao(A_high, A_low).
    const int lo = triple.vars[pos == 0 ? 1 : 0];
    const int hi = triple.vars[pos == 2 ? 1 : 2];
    const CMatrix q = khatri_rao(model.factors[static_cast<std::size_t>(hi)],
                                 model.factors[static_cast<std::size_t>(lo)]);
    const double w = triple_weight(weights, t);
    gram.noalias() += w * (q.adjoint() * q);
    rhs.noalias() += w * (q.adjoint() * mode_unfold(triple.tensor, pos));
  }
  if (!seen) {
    std::ostringstream msg;
    msg << "factor_update: variable " << n << " appears in no retained triple";
    throw invalid_argument(msg.str());
  }

  const CVector lambda_c = model.lambda.cast<Complex>();
  gram = gram.cwiseProduct(lambda_c * lambda_c.adjoint()); // (lambda lambda^T) had. sum Q^H Q
  rhs = lambda_c.asDiagonal() * rhs;

  const double eps = ridge * std::max(gram.trace().real() / static_cast<double>(rank), 1e-300);
  gram.diagonal().array() += Complex(eps, 0.0);
  Eigen::LDLT<CMatrix> solver(gram);
  CMatrix solution = solver.solve(rhs); // F x (2K+1), transpose of the new factor
  if (solver.info() != Eigen::Success || !solution.allFinite()) {
    throw numerical_error("factor_update: normal equations are singular; try a smaller rank");
  }

  CMatrix updated = solution.transpose();
  updated.row(model.harmonics).setOnes(); // zero-frequency constraint
  return updated;
}

RVector project_simplex(const RVector& y) {
  if (!y.allFinite()) throw invalid_argument("project_simplex: non-finite input");
  const Index n = y.size();
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());

  double running = 0.0;
  double theta = 0.0;
  Index active = 0;
  for (Index k = 0; k < n; ++k) {
    running += sorted[static_cast<std::size_t>(k)];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) {
      theta = candidate;
      active = k + 1;
    }
  }
  (void)active;
  RVector x = (y.array() - theta).max(0.0);
  const double total = x.sum();
  if (total > 0.0) x /= total; // exact unit sum on the active set
  return x;
}

RVector project_simplex(const CVector& y) { return project_simplex(RVector(y.real())); }

RVector lambda_update_admm(std::span<const TripleCf> triples, const CpdModel& model,
                           int admm_iters, double rho, std::span<const double> weights) {
  check_shapes(triples, model);
  const Index rank = model.rank;

  // Gram and right-hand side of the vectorized least-squares problem,
  // accumulated without materializing the (2K+1)^3 x F Khatri-Rao product:
  //   Q^H Q = (A_i^H A_i) had (A_j^H A_j) had (A_l^H A_l)
  //   (Q^H vec(Phi))(h) = sum_a conj(A_i(a,h)) (B^H Phi^(1))(h,a),  B = A_l kr A_j
  CMatrix gram = CMatrix::Zero(rank, rank);
  CVector rhs = CVector::Zero(rank);
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const TripleCf& triple = triples[t];
    const CMatrix& a_i = model.factors[static_cast<std::size_t>(triple.vars[0])];
    const CMatrix& a_j = model.factors[static_cast<std::size_t>(triple.vars[1])];
    const CMatrix& a_l = model.factors[static_cast<std::size_t>(triple.vars[2])];
    const double w = triple_weight(weights, t);
    gram.noalias() += w * CMatrix((a_i.adjoint() * a_i)
                                      .cwiseProduct(a_j.adjoint() * a_j)
                                      .cwiseProduct(a_l.adjoint() * a_l));
    const CMatrix proj = khatri_rao(a_l, a_j).adjoint() * triple.tensor.mode1(); // F x (2K+1)
    rhs.noalias() += w * (proj.cwiseProduct(a_i.adjoint())).rowwise().sum();
  }

  if (rho <= 0.0) rho = std::max(gram.trace().real() / static_cast<double>(rank), 1e-12);
  CMatrix system = gram;
  system.diagonal().array() += Complex(rho, 0.0);
  Eigen::LDLT<CMatrix> solver(system);

  RVector primal = model.lambda;
  CVector dual = CVector::Zero(rank);
  for (int it = 0; it < admm_iters; ++it) {
    const CVector target = rhs + rho * (primal.cast<Complex>() + dual);
    const CVector hat = solver.solve(target);
    primal = project_simplex(CVector(hat - dual));
    dual += primal.cast<Complex>() - hat;
    if (!hat.allFinite() || !primal.allFinite()) {
      throw numerical_error("lambda update diverged; try a larger ADMM penalty");
    }
  }
  return primal;
}

IdentifiabilityCheck check_generic_identifiability(int harmonics, int rank) {
  const int dim = 2 * harmonics + 1;
  int alpha = 0;
  while ((1 << (alpha + 1)) <= dim) ++alpha;
  IdentifiabilityCheck out;
  out.bound = std::int64_t{1} << std::max(0, 2 * alpha - 2);
  out.advisory = rank <= out.bound ? Advisory::ok : Advisory::warn;
  return out;
}

namespace {

CpdModel initialize_model(int num_vars, const FitOptions& opts, const ScalingRecord& scaling,
                          std::uint64_t seed) {
  CpdModel model;
  model.num_vars = num_vars;
  model.rank = opts.rank;
  model.harmonics = opts.harmonics;
  model.lambda = RVector::Constant(opts.rank, 1.0 / opts.rank);
  model.scaling = scaling;
  Rng rng(seed);
  const Index dim = 2 * static_cast<Index>(opts.harmonics) + 1;
  model.factors.reserve(static_cast<std::size_t>(num_vars));
  for (int n = 0; n < num_vars; ++n) {
    CMatrix a(dim, opts.rank);
    for (int h = 0; h < opts.rank; ++h) {
      for (Index r = 0; r < dim; ++r) {
        const int k = offset_freq(r, opts.harmonics);
        const double mag = 1.0 / (1.0 + std::abs(k)); // decay-shaped start
        const double phase = two_pi * rng.uniform();
        a(r, h) = mag * Complex(std::cos(phase), std::sin(phase));
      }
      a(opts.harmonics, h) = Complex(1.0, 0.0);
    }
    model.factors.push_back(std::move(a));
  }
  return model;
}

struct SweepResult {
  CpdModel model;
  std::vector<double> trajectory;
  std::vector<double> step_objectives;
  int iterations = 0;
  bool converged = false;
};

SweepResult run_bcd(CpdModel model, std::span<const TripleCf> triples,
                    std::span<const double> weights, std::span<const int> active_vars,
                    const FitOptions& opts) {
  SweepResult out;
  double current = objective(triples, model, weights);
  out.trajectory.push_back(current);
  for (int sweep = 0; sweep < opts.max_outer_iters; ++sweep) {
    for (int n : active_vars) {
      model.factors[static_cast<std::size_t>(n)] =
          factor_update(n, triples, model, opts.ridge, weights);
      if (opts.record_step_objectives) {
        out.step_objectives.push_back(objective(triples, model, weights));
      }
    }
    model.lambda = lambda_update_admm(triples, model, opts.admm_iters, opts.admm_rho, weights);
    const double next = objective(triples, model, weights);
    out.trajectory.push_back(next);
    out.iterations = sweep + 1;
    const double denom = std::max(current, 1e-300);
    if (std::abs(current - next) / denom < opts.rel_tol) {
      out.converged = true;
      current = next;
      break;
    }
    current = next;
  }
  out.model = std::move(model);
  return out;
}

} // namespace

FitResult fit_triples(std::vector<TripleCf> triples, int num_vars, const ScalingRecord& scaling,
                      const FitOptions& opts) {
  if (opts.rank < 1 || opts.harmonics < 1) throw invalid_argument("fit: F and K must be >= 1");
  if (opts.rel_tol <= 0.0 || opts.ridge <= 0.0) throw invalid_argument("fit: tolerances must be positive");
  if (opts.restarts < 1 || opts.max_outer_iters < 1 || opts.admm_iters < 1) {
    throw invalid_argument("fit: iteration counts must be positive");
  }
  if (triples.empty()) throw data_error("fit: no usable triples");

  const auto start = std::chrono::steady_clock::now();
  FitReport report;

  std::vector<int> active;
  {
    std::vector<bool> covered(static_cast<std::size_t>(num_vars), false);
    for (const TripleCf& t : triples) {
      for (int v : t.vars) covered[static_cast<std::size_t>(v)] = true;
    }
    for (int n = 0; n < num_vars; ++n) {
      if (covered[static_cast<std::size_t>(n)]) {
        active.push_back(n);
      } else {
        std::ostringstream msg;
        msg << "variable " << n << " is not covered by any retained triple";
        throw data_error(msg.str());
      }
    }
  }

  std::vector<double> weights;
  if (opts.weight_by_count) {
    double mean = 0.0;
    for (const TripleCf& t : triples) mean += static_cast<double>(t.count);
    mean /= static_cast<double>(triples.size());
    for (const TripleCf& t : triples) weights.push_back(static_cast<double>(t.count) / mean);
  }

  SweepResult best;
  double best_objective = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < opts.restarts; ++restart) {
    CpdModel init = initialize_model(num_vars, opts, scaling,
                                     opts.seed + 0x9e3779b97f4a7c15ULL * restart);
    SweepResult result = run_bcd(std::move(init), triples, weights, active, opts);
    if (result.trajectory.back() < best_objective) {
      best_objective = result.trajectory.back();
      best = std::move(result);
      report.best_restart = restart;
    }
  }

  report.trajectory = std::move(best.trajectory);
  report.step_objectives = std::move(best.step_objectives);
  report.iterations = best.iterations;
  report.converged = best.converged;
  if (!best.converged) {
    report.warnings.push_back("fit did not reach the relative tolerance within the sweep budget");
  }
  const IdentifiabilityCheck ident = check_generic_identifiability(opts.harmonics, opts.rank);
  report.identifiability_ok = ident.advisory == Advisory::ok;
  report.identifiability_bound = ident.bound;
  if (!report.identifiability_ok) {
    std::ostringstream msg;
    msg << "rank " << opts.rank << " exceeds the generic uniqueness bound " << ident.bound
        << " for K=" << opts.harmonics << "; the recovered factors may not be unique";
    report.warnings.push_back(msg.str());
  }
  for (const TripleCf& t : triples) {
    TripleDiagnostics d;
    d.vars = t.vars;
    d.count = t.count;
    d.residual = (t.tensor.mode1() - synthesize_unfold(best.model, t)).squaredNorm();
    report.triples.push_back(d);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  validate_model(best.model);
  return FitResult{std::move(best.model), std::move(report)};
}

FitResult fit(const Dataset& raw, const FitOptions& opts) {
  if (raw.cols() < 3) throw invalid_argument("fit: at least 3 variables required");

  NormalizeResult normalized = normalize(raw, opts.pad);
  const int num_vars = static_cast<int>(raw.cols());
  const std::int64_t budget =
      opts.triple_budget < 0 ? std::numeric_limits<std::int64_t>::max() : opts.triple_budget;
  const std::vector<std::array<int, 3>> selection =
      select_triples(num_vars, budget, opts.seed, opts.min_cover);

  std::vector<TripleCf> triples;
  std::vector<std::string> dropped;
  triples.reserve(selection.size());
  for (const auto& idx : selection) {
    try {
      triples.push_back(
          estimate_triple(normalized.data, idx[0], idx[1], idx[2], opts.harmonics, opts.min_count));
    } catch (const data_error& e) {
      dropped.emplace_back(e.what());
    }
  }
  if (triples.empty()) {
    throw data_error("fit: every selected triple lacks joint observations");
  }

  FitResult result = fit_triples(std::move(triples), num_vars, normalized.scaling, opts);
  for (std::string& w : dropped) {
    result.report.warnings.push_back("dropped: " + std::move(w));
  }
  return result;
}

} // namespace lrcf
