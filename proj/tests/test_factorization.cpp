#include <doctest.h>

#include <numeric>

#include "lrcf/factorization.hpp"
#include "support/oracles.hpp"

using namespace lrcf;

namespace {

//! Triples synthesized exactly from a model, optionally with seeded complex
//! noise of the given scale.
std::vector<TripleCf> synthetic_triples(const CpdModel& model,
                                        const std::vector<std::array<int, 3>>& vars,
                                        double noise = 0.0, std::uint64_t seed = 0) {
  Rng rng(seed);
  std::vector<TripleCf> out;
  for (const auto& v : vars) {
    TripleCf t;
    t.vars = v;
    t.tensor = cpd_synthesize_triple(model, v[0], v[1], v[2]);
    t.count = 1000;
    if (noise > 0.0) {
      CMatrix& unfold = t.tensor.mode1();
      for (Index r = 0; r < unfold.rows(); ++r)
        for (Index c = 0; c < unfold.cols(); ++c) {
          unfold(r, c) += noise * Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::array<int, 3>> all_triples(int n) {
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int l = j + 1; l < n; ++l) out.push_back({i, j, l});
  return out;
}

} // namespace

TEST_CASE("objective") {
  const CpdModel model = oracle::planted_model(4, 2, 2, 31);
  SUBCASE("vanishes on self-synthesized triples") {
    const auto triples = synthetic_triples(model, all_triples(4));
    CHECK(objective(triples, model) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("uniform model against an all-zero triple costs exactly one") {
    const CpdModel uniform = CpdModel::uniform(3, 2);
    TripleCf zero;
    zero.vars = {0, 1, 2};
    zero.tensor = CTensor3(5, 5, 5);
    zero.count = 1;
    std::vector<TripleCf> triples{zero};
    CHECK(objective(triples, uniform) == doctest::Approx(1.0));
  }
  SUBCASE("matches the naive entrywise oracle") {
    const CpdModel truth = oracle::planted_model(4, 2, 1, 37);
    const CpdModel other = oracle::planted_model(4, 2, 1, 38);
    auto triples = synthetic_triples(truth, {{{0, 1, 2}}, {{0, 1, 3}}, {{1, 2, 3}}}, 0.05, 7);
    const double fast = objective(triples, other);
    const double slow = oracle::naive_objective(triples, other);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
  SUBCASE("harmonic mismatch throws") {
    const auto triples = synthetic_triples(model, {{{0, 1, 2}}});
    const CpdModel wrong = CpdModel::uniform(4, 3);
    CHECK_THROWS_AS(objective(triples, wrong), invalid_argument);
  }
}

TEST_CASE("factor_update") {
  SUBCASE("self-synthesized triples are a fixed point") {
    const CpdModel model = oracle::planted_model(5, 2, 3, 41);
    const auto triples = synthetic_triples(model, all_triples(5));
    for (int n = 0; n < 5; ++n) {
      const CMatrix updated = factor_update(n, triples, model);
      CHECK((updated - model.factors[static_cast<std::size_t>(n)]).norm() <= 1e-8);
    }
  }
  SUBCASE("rank-1 update matches the hand-derived ratio") {
    const CpdModel model = oracle::planted_model(3, 1, 2, 43);
    auto triples = synthetic_triples(model, {{{0, 1, 2}}}, 0.08, 11);

    CpdModel start = model;
    start.factors[0] = CpdModel::uniform(3, 2).factors[0]; // stale factor to update
    const CMatrix updated = factor_update(0, triples, start);

    // By hand: q = kr(a_2, a_1); new row t of A_0 = (q^H M)(t) / (q^H q).
    const CMatrix q = khatri_rao(start.factors[2], start.factors[1]);
    Complex denom(0.0, 0.0);
    for (Index r = 0; r < q.rows(); ++r) denom += std::conj(q(r, 0)) * q(r, 0);
    const CMatrix& m = triples[0].tensor.mode1();
    for (Index t = 0; t < 5; ++t) {
      if (t == 2) continue; // pinned zero-frequency row
      Complex numer(0.0, 0.0);
      for (Index r = 0; r < q.rows(); ++r) numer += std::conj(q(r, 0)) * m(r, t);
      CHECK(std::abs(updated(t, 0) - numer / denom) < 1e-9);
    }
    CHECK(updated(2, 0) == Complex(1.0, 0.0));
  }
  SUBCASE("objective never increases across updates, and re-updating is idle") {
    const CpdModel truth = oracle::planted_model(4, 2, 2, 47);
    const auto triples = synthetic_triples(truth, all_triples(4), 0.1, 13);
    CpdModel model = oracle::planted_model(4, 2, 2, 48); // start elsewhere
    double prev = objective(triples, model);
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (int n = 0; n < 4; ++n) {
        model.factors[static_cast<std::size_t>(n)] = factor_update(n, triples, model);
        const double cur = objective(triples, model);
        CHECK(cur <= prev * (1.0 + 1e-10));
        // Exact block minimizer: an immediate second update is a no-op.
        model.factors[static_cast<std::size_t>(n)] = factor_update(n, triples, model);
        const double again = objective(triples, model);
        CHECK(std::abs(again - cur) <= 1e-10 * std::max(cur, 1e-30));
        prev = again;
      }
    }
  }
  SUBCASE("uncovered variable is rejected") {
    const CpdModel model = oracle::planted_model(4, 2, 2, 51);
    const auto triples = synthetic_triples(model, {{{0, 1, 2}}});
    CHECK_THROWS_AS(factor_update(3, triples, model), invalid_argument);
  }
}

TEST_CASE("project_simplex") {
  SUBCASE("feasible points are fixed") {
    RVector y(2);
    y << 0.2, 0.8;
    CHECK((project_simplex(y) - y).norm() < 1e-15);
  }
  SUBCASE("clipping to a vertex") {
    RVector y(2);
    y << 2.0, 0.0;
    RVector expected(2);
    expected << 1.0, 0.0;
    CHECK((project_simplex(y) - expected).norm() < 1e-15);
  }
  SUBCASE("symmetric shift") {
    RVector y = RVector::Constant(3, 0.5);
    CHECK((project_simplex(y) - RVector::Constant(3, 1.0 / 3.0)).norm() < 1e-15);
  }
  SUBCASE("matches the brute-force active-set QP") {
    Rng rng(53);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 1 + static_cast<int>(rng.uniform() * 3);
      RVector y(n);
      for (int i = 0; i < n; ++i) y[i] = 6.0 * rng.uniform() - 3.0;
      const RVector fast = project_simplex(y);
      const RVector slow = oracle::simplex_qp_bruteforce(y);
      CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(fast.sum() == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(fast.minCoeff() >= 0.0);
    }
  }
  SUBCASE("complex input projects its real part") {
    CVector y(2);
    y << Complex(2.0, 50.0), Complex(0.0, -3.0);
    RVector expected(2);
    expected << 1.0, 0.0;
    CHECK((project_simplex(y) - expected).norm() < 1e-15);
  }
}

TEST_CASE("lambda_update_admm") {
  SUBCASE("self-synthesized triples are a fixed point") {
    const CpdModel model = oracle::planted_model(4, 3, 2, 59);
    const auto triples = synthetic_triples(model, all_triples(4));
    const RVector updated = lambda_update_admm(triples, model);
    CHECK((updated - model.lambda).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("rank one always returns the unit weight") {
    const CpdModel model = oracle::planted_model(3, 1, 2, 61);
    auto triples = synthetic_triples(model, {{{0, 1, 2}}}, 0.2, 17);
    CpdModel start = model;
    start.lambda[0] = 1.0;
    const RVector updated = lambda_update_admm(triples, start);
    CHECK(updated.size() == 1);
    CHECK(updated[0] == doctest::Approx(1.0));
  }
  SUBCASE("converges to the interior unconstrained optimum within 50 iterations") {
    const CpdModel truth = oracle::planted_model(3, 2, 2, 81);
    const auto triples = synthetic_triples(truth, {{{0, 1, 2}}});

    CpdModel start = truth;
    start.lambda << 0.9, 0.1; // far from the optimum, inside the simplex

    // Closed-form 2x2 oracle: real normal equations solved by Cramer's rule.
    const CMatrix q = khatri_rao(truth.factors[2], khatri_rao(truth.factors[1], truth.factors[0]));
    CVector vec_t(q.rows());
    const CTensor3& t = triples[0].tensor;
    for (Index c = 0; c < t.dim2(); ++c)
      for (Index b = 0; b < t.dim1(); ++b)
        for (Index a = 0; a < t.dim0(); ++a)
          vec_t[(c * t.dim1() + b) * t.dim0() + a] = t(a, b, c);
    const RMatrix g = (q.adjoint() * q).real();
    const RVector v = (q.adjoint() * vec_t).real();
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    RVector optimum(2);
    optimum << (v[0] * g(1, 1) - v[1] * g(0, 1)) / det, (g(0, 0) * v[1] - g(1, 0) * v[0]) / det;
    REQUIRE(optimum.minCoeff() > 0.0); // interior, so the projection is inactive

    const RVector updated = lambda_update_admm(triples, start, 50);
    CHECK((updated - optimum).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("check_generic_identifiability") {
  SUBCASE("seven-point grids support rank four") {
    CHECK(check_generic_identifiability(3, 4).advisory == Advisory::ok);
    CHECK(check_generic_identifiability(3, 5).advisory == Advisory::warn);
    CHECK(check_generic_identifiability(3, 4).bound == 4);
  }
  SUBCASE("fifteen-point grids support rank sixteen") {
    CHECK(check_generic_identifiability(7, 16).bound == 16);
    CHECK(check_generic_identifiability(7, 16).advisory == Advisory::ok);
    CHECK(check_generic_identifiability(7, 17).advisory == Advisory::warn);
  }
  SUBCASE("rank one is always fine") {
    CHECK(check_generic_identifiability(1, 1).advisory == Advisory::ok);
  }
}

TEST_CASE("fit") {
  SUBCASE("recovers a planted model from sampled data") {
    const CpdModel truth = oracle::planted_model(4, 2, 2, 71);
    const Dataset data = oracle::sample_planted(truth, 20000, 72);

    FitOptions opts;
    opts.rank = 2;
    opts.harmonics = 2;
    opts.seed = 5;
    opts.restarts = 2;
    opts.pad = 0.0;
    opts.record_step_objectives = true;
    const FitResult result = fit(data, opts);

    CHECK(result.report.trajectory.front() >= result.report.trajectory.back());
    for (std::size_t s = 1; s < result.report.step_objectives.size(); ++s) {
      // Factor steps are exact block minimizers; only the ADMM weight step
      // sits between sweeps and is exempt from this check.
      if (s % 4 != 0) {
        CHECK(result.report.step_objectives[s] <=
              result.report.step_objectives[s - 1] * (1.0 + 1e-10));
      }
    }
    CHECK_NOTHROW(validate_model(result.model));

    // Ground-truth objective on the same triples bounds the achievable fit.
    std::vector<TripleCf> triples;
    const NormalizeResult normalized = normalize(data, 0.0);
    for (const auto& v : all_triples(4)) {
      triples.push_back(estimate_triple(normalized.data, v[0], v[1], v[2], 2));
    }
    CpdModel reference = truth;
    reference.scaling = normalized.scaling;
    const double truth_objective = objective(triples, reference);
    CHECK(result.report.trajectory.back() <= 10.0 * truth_objective);

    CHECK(oracle::factor_match_error(result.model, truth) < 0.10);
    CHECK(oracle::total_variation(result.model.lambda, truth.lambda) < 0.05);
  }

  SUBCASE("three variables reduce to a single-tensor decomposition") {
    const CpdModel truth = oracle::planted_model(3, 2, 2, 103);
    auto triples = synthetic_triples(truth, {{{0, 1, 2}}}, 0.01, 19);

    FitOptions opts;
    opts.rank = 2;
    opts.harmonics = 2;
    opts.seed = 9;
    opts.restarts = 3;
    opts.rel_tol = 1e-12;
    opts.max_outer_iters = 600;
    opts.admm_iters = 100;
    const FitResult coupled = fit_triples(triples, 3, ScalingRecord::identity(3), opts);

    CpdModel als_start = truth;
    als_start.lambda =
        project_simplex(RVector(truth.lambda * 0.9 + RVector::Constant(2, 0.05)));
    for (auto& f : als_start.factors) {
      f *= Complex(1.01, 0.0);
      f.row(2).setOnes();
    }
    const oracle::AlsResult reference = oracle::single_tensor_als(triples[0].tensor, als_start, 800);

    CHECK(coupled.report.trajectory.back() ==
          doctest::Approx(reference.objective).epsilon(1e-4));
  }

  SUBCASE("column permutations of the components are a gauge freedom") {
    const CpdModel model = oracle::planted_model(4, 3, 2, 79);
    CpdModel permuted = model;
    const std::array<int, 3> perm{2, 0, 1};
    for (int h = 0; h < 3; ++h) {
      permuted.lambda[h] = model.lambda[perm[static_cast<std::size_t>(h)]];
      for (int n = 0; n < 4; ++n) {
        permuted.factors[static_cast<std::size_t>(n)].col(h) =
            model.factors[static_cast<std::size_t>(n)].col(perm[static_cast<std::size_t>(h)]);
      }
    }
    const auto triples = synthetic_triples(model, all_triples(4), 0.05, 23);
    CHECK(objective(triples, permuted) == doctest::Approx(objective(triples, model)).epsilon(1e-12));
    const Complex a = cpd_entry(model.lambda, {model.factors[0], model.factors[1], model.factors[2],
                                               model.factors[3]},
                                {1, -2, 0, 2});
    const Complex b = cpd_entry(permuted.lambda,
                                {permuted.factors[0], permuted.factors[1], permuted.factors[2],
                                 permuted.factors[3]},
                                {1, -2, 0, 2});
    CHECK(std::abs(a - b) < 1e-12);
  }

  SUBCASE("fits are deterministic under a fixed seed") {
    const CpdModel truth = oracle::planted_model(3, 2, 1, 83);
    const Dataset data = oracle::sample_planted(truth, 2000, 84);
    FitOptions opts;
    opts.rank = 2;
    opts.harmonics = 1;
    opts.seed = 17;
    opts.restarts = 2;
    opts.max_outer_iters = 40;
    const FitResult a = fit(data, opts);
    const FitResult b = fit(data, opts);
    CHECK(a.report.trajectory == b.report.trajectory);
    for (int n = 0; n < 3; ++n) {
      CHECK((a.model.factors[static_cast<std::size_t>(n)] -
             b.model.factors[static_cast<std::size_t>(n)])
                .norm() == 0.0);
    }
    CHECK((a.model.lambda - b.model.lambda).norm() == 0.0);
  }

  SUBCASE("invariants hold after every sweep by construction") {
    const CpdModel truth = oracle::planted_model(4, 2, 2, 89);
    auto triples = synthetic_triples(truth, all_triples(4), 0.05, 29);
    CpdModel model = oracle::planted_model(4, 2, 2, 90);
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (int n = 0; n < 4; ++n) {
        model.factors[static_cast<std::size_t>(n)] = factor_update(n, triples, model);
      }
      model.lambda = lambda_update_admm(triples, model);
      CHECK(std::abs(model.lambda.sum() - 1.0) <= 1e-12);
      CHECK(model.lambda.minCoeff() >= 0.0);
      for (int n = 0; n < 4; ++n) {
        for (int h = 0; h < 2; ++h) {
          CHECK(model.factors[static_cast<std::size_t>(n)](2, h) == Complex(1.0, 0.0));
        }
      }
    }
  }
}
