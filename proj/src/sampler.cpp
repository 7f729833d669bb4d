#include "lrcf/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace lrcf {

GridCdf GridCdf::build(const RVector& density_values) {
  const Index g = density_values.size();
  if (g < 2) throw invalid_argument("GridCdf: need at least two grid nodes");
  RVector clamped = density_values.cwiseMax(0.0);

  GridCdf out;
  out.nodes.resize(g);
  out.cdf.resize(g);
  const double step = 1.0 / static_cast<double>(g - 1);
  out.nodes.setLinSpaced(g, 0.0, 1.0);
  out.cdf[0] = 0.0;
  for (Index i = 1; i < g; ++i) {
    out.cdf[i] = out.cdf[i - 1] + 0.5 * (clamped[i - 1] + clamped[i]) * step;
  }
  const double total = out.cdf[g - 1];
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw numerical_error("degenerate mixture component: conditional density vanishes");
  }
  out.cdf /= total;
  out.cdf[g - 1] = 1.0;
  return out;
}

double GridCdf::sample(double u) const {
  const Index g = cdf.size();
  const double* begin = cdf.data();
  const double* pos = std::upper_bound(begin, begin + g, u);
  Index hi = std::min<Index>(g - 1, std::max<Index>(1, pos - begin));
  const double lo_c = cdf[hi - 1];
  const double hi_c = cdf[hi];
  const double width = hi_c - lo_c;
  const double frac = width > 0.0 ? (u - lo_c) / width : 0.0;
  return nodes[hi - 1] + frac * (nodes[hi] - nodes[hi - 1]);
}

Sampler::Sampler(const CpdModel& model, int grid_size)
    : model_(model), grid_size_(grid_size),
      grids_(static_cast<std::size_t>(model.num_vars) * static_cast<std::size_t>(model.rank)) {
  if (grid_size_ < 2) throw invalid_argument("Sampler: grid size must be at least 2");
  validate_model(model_);
  lambda_cdf_.resize(model_.rank);
  double acc = 0.0;
  for (int h = 0; h < model_.rank; ++h) {
    acc += model_.lambda[h];
    lambda_cdf_[h] = acc;
  }
  lambda_cdf_[model_.rank - 1] = 1.0;
}

int Sampler::sample_component(Rng& rng) const {
  const double u = rng.uniform();
  const double* begin = lambda_cdf_.data();
  const double* pos = std::upper_bound(begin, begin + model_.rank, u);
  return std::min<int>(model_.rank - 1, static_cast<int>(pos - begin));
}

const GridCdf& Sampler::grid_for(int n, int h) {
  auto& slot = grids_[static_cast<std::size_t>(n) * static_cast<std::size_t>(model_.rank) +
                      static_cast<std::size_t>(h)];
  if (!slot) {
    // Conditional density on the grid: real part of the one-dimensional
    // Fourier sum for column h of factor n.
    const CMatrix& factor = model_.factors[static_cast<std::size_t>(n)];
    RVector values(grid_size_);
    for (int g = 0; g < grid_size_; ++g) {
      const double x = static_cast<double>(g) / static_cast<double>(grid_size_ - 1);
      Complex v(0.0, 0.0);
      for (Index r = 0; r < factor.rows(); ++r) {
        const int k = offset_freq(r, model_.harmonics);
        const double theta = two_pi * k * x;
        v += factor(r, h) * Complex(std::cos(theta), -std::sin(theta));
      }
      values[g] = v.real();
    }
    slot = GridCdf::build(values);
  }
  return *slot;
}

double Sampler::sample_conditional(int n, int h, Rng& rng) {
  if (n < 0 || n >= model_.num_vars || h < 0 || h >= model_.rank) {
    throw invalid_argument("sample_conditional: index out of range");
  }
  return grid_for(n, h).sample(rng.uniform());
}

Dataset Sampler::sample(Index count, Rng& rng) {
  if (count < 1) throw invalid_argument("sample: count must be positive");
  RMatrix values(count, model_.num_vars);
  for (Index m = 0; m < count; ++m) {
    const int h = sample_component(rng);
    for (int n = 0; n < model_.num_vars; ++n) {
      const double unit = sample_conditional(n, h, rng);
      values(m, n) = model_.scaling.to_raw(n, unit);
    }
  }
  return Dataset::complete(std::move(values));
}

Dataset sample(const CpdModel& model, Index count, std::uint64_t seed, int grid_size) {
  Sampler sampler(model, grid_size);
  Rng rng(seed);
  return sampler.sample(count, rng);
}

} // namespace lrcf
