#include <doctest.h>

#include <algorithm>

#include "lrcf/ecf.hpp"
#include "support/oracles.hpp"

using namespace lrcf;

TEST_CASE("normalize") {
  SUBCASE("two-point column without padding") {
    RMatrix v(2, 1);
    v << 0.0, 10.0;
    const NormalizeResult r = normalize(Dataset::complete(v), 0.0);
    CHECK(r.data.values(0, 0) == doctest::Approx(0.0));
    CHECK(r.data.values(1, 0) == doctest::Approx(1.0));
    CHECK(r.scaling.shift[0] == doctest::Approx(0.0));
    CHECK(r.scaling.scale[0] == doctest::Approx(0.1));
  }
  SUBCASE("padding squeezes the range") {
    RMatrix v(2, 1);
    v << 0.0, 10.0;
    const NormalizeResult r = normalize(Dataset::complete(v), 0.05);
    CHECK(r.data.values(0, 0) == doctest::Approx(0.05));
    CHECK(r.data.values(1, 0) == doctest::Approx(0.95));
  }
  SUBCASE("round-trips to relative 1e-12") {
    Rng rng(41);
    RMatrix v(40, 3);
    for (Index r = 0; r < v.rows(); ++r)
      for (Index c = 0; c < v.cols(); ++c) v(r, c) = 100.0 * rng.uniform() - 50.0;
    const NormalizeResult res = normalize(Dataset::complete(v), 0.025);
    for (Index r = 0; r < v.rows(); ++r)
      for (Index c = 0; c < v.cols(); ++c) {
        const double back = res.scaling.to_raw(c, res.data.values(r, c));
        CHECK(back == doctest::Approx(v(r, c)).epsilon(1e-12));
      }
  }
  SUBCASE("constant column names the culprit") {
    RMatrix v(3, 2);
    v << 1.0, 5.0, 2.0, 5.0, 3.0, 5.0;
    CHECK_THROWS_WITH_AS(normalize(Dataset::complete(v), 0.0), doctest::Contains("column 1"),
                         data_error);
  }
  SUBCASE("masked cells do not influence the range") {
    RMatrix v(3, 1);
    v << 0.0, 10.0, 1000.0;
    BoolArray mask(3, 1);
    mask << true, true, false;
    const NormalizeResult r = normalize(Dataset(v, mask), 0.0);
    CHECK(r.scaling.scale[0] == doctest::Approx(0.1));
  }
}

TEST_CASE("ecf_point") {
  SUBCASE("zero frequency is exactly one") {
    Rng rng(5);
    RVector s(100);
    for (Index i = 0; i < s.size(); ++i) s[i] = rng.uniform();
    CHECK(ecf_point(s, 0) == Complex(1.0, 0.0));
  }
  SUBCASE("opposing phases cancel") {
    RVector s(2);
    s << 0.25, 0.75;
    CHECK(std::abs(ecf_point(s, 1)) < 1e-15);
  }
  SUBCASE("a sample at zero has unit coefficients") {
    RVector s(1);
    s << 0.0;
    CHECK(ecf_point(s, 3) == Complex(1.0, 0.0));
  }
  SUBCASE("empty input throws") { CHECK_THROWS_AS(ecf_point(RVector(), 1), data_error); }
}

TEST_CASE("estimate_triple") {
  SUBCASE("single observation at the origin gives the all-ones tensor") {
    RMatrix v = RMatrix::Zero(1, 3);
    const TripleCf t = estimate_triple(Dataset::complete(v), 0, 1, 2, 2, 1);
    for (Index a = 0; a < 5; ++a)
      for (Index b = 0; b < 5; ++b)
        for (Index c = 0; c < 5; ++c) CHECK(t.tensor(a, b, c) == Complex(1.0, 0.0));
  }
  SUBCASE("all-zero-frequency entry is exactly one") {
    Rng rng(6);
    RMatrix v(37, 4);
    for (Index r = 0; r < v.rows(); ++r)
      for (Index c = 0; c < v.cols(); ++c) v(r, c) = rng.uniform();
    const TripleCf t = estimate_triple(Dataset::complete(v), 0, 2, 3, 3, 30);
    CHECK(t.tensor(3, 3, 3) == Complex(1.0, 0.0));
    CHECK(t.count == 37);
  }
  SUBCASE("matches the naive per-entry oracle") {
    Rng rng(7);
    RMatrix v(5, 3);
    for (Index r = 0; r < v.rows(); ++r)
      for (Index c = 0; c < v.cols(); ++c) v(r, c) = rng.uniform();
    const Dataset data = Dataset::complete(v);
    const TripleCf fast = estimate_triple(data, 0, 1, 2, 1, 1);
    const CTensor3 slow = oracle::naive_ecf_triple(data, 0, 1, 2, 1);
    CHECK((fast.tensor.mode1() - slow.mode1()).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("entries never exceed unit modulus and are conjugate symmetric") {
    Rng rng(8);
    RMatrix v(64, 3);
    for (Index r = 0; r < v.rows(); ++r)
      for (Index c = 0; c < v.cols(); ++c) v(r, c) = rng.uniform();
    const TripleCf t = estimate_triple(Dataset::complete(v), 0, 1, 2, 3, 30);
    for (Index a = 0; a < 7; ++a)
      for (Index b = 0; b < 7; ++b)
        for (Index c = 0; c < 7; ++c) {
          CHECK(std::abs(t.tensor(a, b, c)) <= 1.0 + 1e-12);
          const Complex mirrored = t.tensor(6 - a, 6 - b, 6 - c);
          CHECK(std::abs(mirrored - std::conj(t.tensor(a, b, c))) < 1e-13);
        }
  }
  SUBCASE("row order does not matter and masked rows change nothing") {
    Rng rng(9);
    RMatrix v(40, 3);
    for (Index r = 0; r < v.rows(); ++r)
      for (Index c = 0; c < v.cols(); ++c) v(r, c) = rng.uniform();
    const TripleCf base = estimate_triple(Dataset::complete(v), 0, 1, 2, 2, 1);

    RMatrix shuffled = v;
    for (Index i = v.rows() - 1; i > 0; --i) {
      const Index j = std::min<Index>(i, static_cast<Index>(rng.uniform() * (i + 1)));
      shuffled.row(i).swap(shuffled.row(j));
    }
    const TripleCf permuted = estimate_triple(Dataset::complete(shuffled), 0, 1, 2, 2, 1);
    CHECK((base.tensor.mode1() - permuted.tensor.mode1()).cwiseAbs().maxCoeff() < 1e-13);

    RMatrix extended(v.rows() + 1, 3);
    extended.topRows(v.rows()) = v;
    extended.row(v.rows()).setConstant(0.123);
    BoolArray mask = BoolArray::Constant(v.rows() + 1, 3, true);
    mask(v.rows(), 1) = false; // one missing cell removes the row from the triple
    const TripleCf masked = estimate_triple(Dataset(extended, mask), 0, 1, 2, 2, 1);
    CHECK((base.tensor.mode1() - masked.tensor.mode1()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("insufficient joint overlap names the triple") {
    RMatrix v = RMatrix::Zero(10, 3);
    BoolArray mask = BoolArray::Constant(10, 3, true);
    for (Index r = 0; r < 8; ++r) mask(r, 2) = false;
    CHECK_THROWS_WITH_AS(estimate_triple(Dataset(v, mask), 0, 1, 2, 1, 5),
                         doctest::Contains("(0,1,2)"), data_error);
  }
  SUBCASE("argument validation") {
    RMatrix v = RMatrix::Zero(40, 3);
    CHECK_THROWS_AS(estimate_triple(Dataset::complete(v), 1, 0, 2, 1, 1), invalid_argument);
    CHECK_THROWS_AS(estimate_triple(Dataset::complete(v), 0, 1, 3, 1, 1), invalid_argument);
  }
}

TEST_CASE("select_triples") {
  SUBCASE("exhaustive enumeration is lexicographic") {
    const auto triples = select_triples(4, 1000, 1);
    REQUIRE(triples.size() == 4);
    CHECK(triples[0] == std::array<int, 3>{0, 1, 2});
    CHECK(triples[1] == std::array<int, 3>{0, 1, 3});
    CHECK(triples[2] == std::array<int, 3>{0, 2, 3});
    CHECK(triples[3] == std::array<int, 3>{1, 2, 3});
  }
  SUBCASE("three variables give the single triple") {
    const auto triples = select_triples(3, 1000, 99);
    REQUIRE(triples.size() == 1);
    CHECK(triples[0] == std::array<int, 3>{0, 1, 2});
  }
  SUBCASE("budgeted selection is deterministic and covers every variable") {
    const auto a = select_triples(10, 20, 1234);
    const auto b = select_triples(10, 20, 1234);
    CHECK(a == b);
    CHECK(a.size() == 20);
    std::vector<int> coverage(10, 0);
    for (const auto& t : a) {
      CHECK(t[0] < t[1]);
      CHECK(t[1] < t[2]);
      for (int v : t) ++coverage[static_cast<std::size_t>(v)];
    }
    for (int v = 0; v < 10; ++v) CHECK(coverage[static_cast<std::size_t>(v)] >= 3);
    const auto c = select_triples(10, 20, 4321);
    CHECK(a != c);
  }
  SUBCASE("unsupported dimension and impossible coverage") {
    CHECK_THROWS_AS(select_triples(2, 10, 0), invalid_argument);
    CHECK_THROWS_AS(select_triples(12, 3, 0), data_error);
  }
}

TEST_CASE("suggest_harmonics") {
  SUBCASE("uniform samples need no harmonics") {
    Rng rng(10);
    RMatrix v(10000, 1);
    for (Index r = 0; r < v.rows(); ++r) v(r, 0) = rng.uniform();
    const HarmonicSuggestion s = suggest_harmonics(Dataset::complete(v), 0.05);
    CHECK(s.recommended == 0);
    CHECK_FALSE(s.capped);
  }
  SUBCASE("a point mass never settles and hits the cap") {
    RMatrix v = RMatrix::Constant(50, 1, 0.5);
    const HarmonicSuggestion s = suggest_harmonics(Dataset::complete(v), 0.05);
    CHECK(s.recommended == HarmonicSuggestion::max_harmonics);
    CHECK(s.capped);
  }
  SUBCASE("the two-Gaussian mixture at M=500 needs nine coefficients") {
    RMatrix v(500, 1);
    v.col(0) = oracle::gaussian_mixture_samples(500, 20249);
    const HarmonicSuggestion s = suggest_harmonics(Dataset::complete(v), 0.05);
    CHECK(s.recommended == 4);
  }
}

TEST_CASE("ecf variance stays within the theoretical bound") {
  // Monte Carlo over repeated draws: Var <= (1 - |Phi|^2) / M plus slack.
  const int reps = 200;
  const Index m = 100;
  const int k = 1;
  const Complex truth = oracle::gaussian_mixture_cf(k);

  double mean_sq = 0.0;
  std::vector<double> sq(reps);
  for (int r = 0; r < reps; ++r) {
    const RVector s = oracle::gaussian_mixture_samples(m, 5000 + static_cast<std::uint64_t>(r));
    sq[static_cast<std::size_t>(r)] = std::norm(ecf_point(s, k) - truth);
    mean_sq += sq[static_cast<std::size_t>(r)];
  }
  mean_sq /= reps;
  double var_of_sq = 0.0;
  for (double v : sq) var_of_sq += (v - mean_sq) * (v - mean_sq);
  var_of_sq /= (reps - 1);
  const double stderr_sq = std::sqrt(var_of_sq / reps);

  const double bound = (1.0 - std::norm(truth)) / static_cast<double>(m);
  CHECK(mean_sq <= bound + 3.0 * stderr_sq);
}
