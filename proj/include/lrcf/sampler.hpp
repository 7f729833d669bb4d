#pragma once

#include <optional>
#include <vector>

#include "lrcf/model.hpp"

namespace lrcf {

//! Tabulated CDF of one conditional density on a uniform unit-interval grid.
//! Grid values are clamped at zero and renormalized; sampling inverts the
//! CDF with linear interpolation between nodes.
struct GridCdf {
  RVector nodes; // ascending, 0..1
  RVector cdf;   // nondecreasing, cdf[0] = 0, cdf.back() = 1

  //! Build from density values at equispaced nodes (trapezoid accumulation).
  //! Throws numerical_error when the clamped density integrates to zero.
  static GridCdf build(const RVector& density_values);

  double sample(double u) const;
};

//! Draws from the generative form of the model: a mixture component first,
//! then each variable independently from its conditional density.
class Sampler {
public:
  explicit Sampler(const CpdModel& model, int grid_size = 1024);

  //! Categorical component draw according to the mixture weights.
  int sample_component(Rng& rng) const;

  //! Draw variable n conditioned on component h, in unit coordinates.
  //! The per-(n, h) grid is built on first use.
  double sample_conditional(int n, int h, Rng& rng);

  //! Raw-unit dataset of `count` independent draws.
  Dataset sample(Index count, Rng& rng);

private:
  const GridCdf& grid_for(int n, int h);

  const CpdModel& model_;
  int grid_size_;
  RVector lambda_cdf_;
  std::vector<std::optional<GridCdf>> grids_; // indexed n * rank + h
};

//! Convenience wrapper: seeded draws from a model.
Dataset sample(const CpdModel& model, Index count, std::uint64_t seed, int grid_size = 1024);

} // namespace lrcf
