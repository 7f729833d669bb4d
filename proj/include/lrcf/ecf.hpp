#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lrcf/dataset.hpp"
#include "lrcf/tensor.hpp"

namespace lrcf {

//! Empirical characteristic tensor of one variable triple: entry (a, b, c)
//! holds the sample mean of exp(j*2*pi*(k_a x_i + k_b x_j + k_c x_l)) over
//! the rows where all three variables are observed.
struct TripleCf {
  std::array<int, 3> vars{}; // strictly increasing
  CTensor3 tensor;           // (2K+1)^3
  std::int64_t count = 0;    // jointly observed rows

  int harmonics() const { return static_cast<int>((tensor.dim0() - 1) / 2); }
};

//! Sample-mean estimate of the characteristic function of `samples` at
//! integer frequency k: (1/M) sum_m exp(j*2*pi*k*x_m). Samples must lie in
//! the unit interval.
Complex ecf_point(const RVector& samples, int k);

//! Estimate the characteristic tensor of triple (i, j, l) from normalized
//! data. Throws data_error when fewer than min_count rows observe all three
//! variables jointly.
TripleCf estimate_triple(const Dataset& normalized, int i, int j, int l, int harmonics,
                         std::int64_t min_count = 30);

//! Choose the variable triples entering the coupled objective. Returns all
//! C(N,3) triples in lexicographic order when the budget allows, otherwise
//! a seeded random subset in which every variable appears in at least
//! min_cover triples.
std::vector<std::array<int, 3>> select_triples(int num_vars, std::int64_t budget,
                                               std::uint64_t seed, int min_cover = 3);

struct HarmonicSuggestion {
  std::vector<int> per_dimension;
  int recommended = 0; // max over dimensions
  bool capped = false; // some dimension hit the cutoff cap
  static constexpr int max_harmonics = 30;
};

//! Per-dimension harmonic cutoffs: the smallest K such that the empirical
//! CF magnitude stays below `threshold` for the three frequencies following
//! K. Dimensions whose coefficients never settle are capped at 30.
HarmonicSuggestion suggest_harmonics(const Dataset& normalized, double threshold);

} // namespace lrcf
