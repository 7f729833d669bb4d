#include "lrcf/ecf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace lrcf {

namespace {

//! Phase matrix for one variable: row m holds exp(j*2*pi*k*x_m) for
//! k = -K..K. Negative frequencies are filled by conjugation so the
//! result is conjugate-symmetric by construction.
CMatrix phase_matrix(const RVector& x, int harmonics) {
  const Index m = x.size();
  const Index dim = 2 * harmonics + 1;
  CMatrix u(m, dim);
  u.col(harmonics).setOnes();
  for (int k = 1; k <= harmonics; ++k) {
    for (Index r = 0; r < m; ++r) {
      const double theta = two_pi * k * x[r];
      const Complex v(std::cos(theta), std::sin(theta));
      u(r, harmonics + k) = v;
      u(r, harmonics - k) = std::conj(v);
    }
  }
  return u;
}

std::int64_t triple_count(int n) {
  const std::int64_t nn = n;
  return nn * (nn - 1) * (nn - 2) / 6;
}

} // namespace

Complex ecf_point(const RVector& samples, int k) {
  if (samples.size() == 0) throw data_error("ecf_point: no samples");
  Complex acc(0.0, 0.0);
  for (Index m = 0; m < samples.size(); ++m) {
    const double theta = two_pi * k * samples[m];
    acc += Complex(std::cos(theta), std::sin(theta));
  }
  return acc / static_cast<double>(samples.size());
}

TripleCf estimate_triple(const Dataset& normalized, int i, int j, int l, int harmonics,
                         std::int64_t min_count) {
  const int n = static_cast<int>(normalized.cols());
  if (!(0 <= i && i < j && j < l && l < n)) {
    throw invalid_argument("estimate_triple: indices must be strictly increasing and in range");
  }
  if (harmonics < 1) throw invalid_argument("estimate_triple: harmonics must be >= 1");

  std::vector<Index> rows;
  rows.reserve(normalized.rows());
  for (Index r = 0; r < normalized.rows(); ++r) {
    if (normalized.mask(r, i) && normalized.mask(r, j) && normalized.mask(r, l)) {
      rows.push_back(r);
    }
  }
  const std::int64_t count = static_cast<std::int64_t>(rows.size());
  if (count < min_count) {
    std::ostringstream msg;
    msg << "triple (" << i << "," << j << "," << l << ") has only " << count
        << " joint observations (need " << min_count << ")";
    throw data_error(msg.str());
  }

  const Index dim = 2 * harmonics + 1;
  CMatrix unfold = CMatrix::Zero(dim * dim, dim);

  // Blocked rank-1 accumulation: per block, W(m, c*dim+b) = U_l(m,c)*U_j(m,b)
  // and the unfolding gains W^T * U_i. Only O(K) trig calls per row.
  constexpr Index block_rows = 2048;
  CMatrix w(std::min<Index>(block_rows, count), dim * dim);
  for (Index start = 0; start < count; start += block_rows) {
    const Index b = std::min<Index>(block_rows, count - start);
    RVector xi(b), xj(b), xl(b);
    for (Index t = 0; t < b; ++t) {
      const Index r = rows[static_cast<std::size_t>(start + t)];
      xi[t] = normalized.values(r, i);
      xj[t] = normalized.values(r, j);
      xl[t] = normalized.values(r, l);
    }
    const CMatrix ui = phase_matrix(xi, harmonics);
    const CMatrix uj = phase_matrix(xj, harmonics);
    const CMatrix ul = phase_matrix(xl, harmonics);
    for (Index c = 0; c < dim; ++c) {
      w.block(0, c * dim, b, dim) = uj.array().colwise() * ul.col(c).array();
    }
    unfold.noalias() += w.topRows(b).transpose() * ui;
  }
  unfold /= static_cast<double>(count);

  TripleCf out;
  out.vars = {i, j, l};
  out.tensor = CTensor3::from_mode1(std::move(unfold), dim, dim, dim);
  out.count = count;
  return out;
}

std::vector<std::array<int, 3>> select_triples(int num_vars, std::int64_t budget,
                                               std::uint64_t seed, int min_cover) {
  if (num_vars < 3) throw invalid_argument("select_triples: at least 3 variables required");
  if (budget < 1) throw invalid_argument("select_triples: budget must be positive");

  const std::int64_t total = triple_count(num_vars);
  if (budget >= total) {
    std::vector<std::array<int, 3>> all;
    all.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < num_vars; ++i)
      for (int j = i + 1; j < num_vars; ++j)
        for (int l = j + 1; l < num_vars; ++l) all.push_back({i, j, l});
    return all;
  }

  // One shuffled partition covers every variable once using ceil(N/3)
  // triples; min_cover rounds of partitions give the coverage guarantee.
  const std::int64_t per_var = static_cast<std::int64_t>(num_vars - 1) * (num_vars - 2) / 2;
  const int cover = static_cast<int>(std::min<std::int64_t>(min_cover, per_var));
  const std::int64_t required = static_cast<std::int64_t>(cover) * ((num_vars + 2) / 3);
  if (budget < required) {
    std::ostringstream msg;
    msg << "triple budget " << budget << " cannot cover " << num_vars << " variables " << cover
        << " times (need at least " << required << ")";
    throw data_error(msg.str());
  }

  for (std::uint64_t reseed = 0; reseed < 16; ++reseed) {
    Rng rng(seed + reseed);
    std::set<std::array<int, 3>> chosen;
    std::vector<int> coverage(static_cast<std::size_t>(num_vars), 0);

    auto add_triple = [&](std::array<int, 3> t) {
      std::sort(t.begin(), t.end());
      if (t[0] == t[1] || t[1] == t[2]) return false;
      if (!chosen.insert(t).second) return false;
      for (int v : t) ++coverage[v];
      return true;
    };
    auto random_var = [&] { return std::min(num_vars - 1, static_cast<int>(rng.uniform() * num_vars)); };

    std::vector<int> perm(static_cast<std::size_t>(num_vars));
    std::iota(perm.begin(), perm.end(), 0);
    for (int round = 0; round < cover; ++round) {
      for (int v = num_vars - 1; v > 0; --v) {
        const int w = std::min(v, static_cast<int>(rng.uniform() * (v + 1)));
        std::swap(perm[static_cast<std::size_t>(v)], perm[static_cast<std::size_t>(w)]);
      }
      for (int base = 0; base + 2 < num_vars; base += 3) {
        std::array<int, 3> t{perm[static_cast<std::size_t>(base)],
                             perm[static_cast<std::size_t>(base + 1)],
                             perm[static_cast<std::size_t>(base + 2)]};
        for (int attempt = 0; attempt < 64 && !add_triple(t); ++attempt) t[2] = random_var();
      }
      for (int rest = num_vars - num_vars % 3; rest < num_vars; ++rest) {
        std::array<int, 3> t{perm[static_cast<std::size_t>(rest)], random_var(), random_var()};
        for (int attempt = 0; attempt < 64 && !add_triple(t); ++attempt) {
          t[1] = random_var();
          t[2] = random_var();
        }
      }
    }

    // Top up under-covered variables (duplicate partitions can starve one),
    // then spend the remaining budget on random distinct triples.
    for (int v = 0; v < num_vars; ++v) {
      while (coverage[static_cast<std::size_t>(v)] < cover &&
             static_cast<std::int64_t>(chosen.size()) < budget) {
        std::array<int, 3> t{v, random_var(), random_var()};
        for (int attempt = 0; attempt < 256 && !add_triple(t); ++attempt) {
          t[1] = random_var();
          t[2] = random_var();
        }
      }
    }
    std::int64_t stale = 0;
    while (static_cast<std::int64_t>(chosen.size()) < budget && stale < 64 + 16 * budget) {
      if (!add_triple({random_var(), random_var(), random_var()})) ++stale;
    }

    bool covered = true;
    for (int v = 0; v < num_vars; ++v) covered &= coverage[static_cast<std::size_t>(v)] >= cover;
    if (covered) return {chosen.begin(), chosen.end()};
  }
  throw data_error("select_triples: could not satisfy coverage within budget");
}

HarmonicSuggestion suggest_harmonics(const Dataset& normalized, double threshold) {
  if (threshold <= 0.0) throw invalid_argument("suggest_harmonics: threshold must be positive");
  HarmonicSuggestion out;
  const int cap = HarmonicSuggestion::max_harmonics;
  for (Index c = 0; c < normalized.cols(); ++c) {
    const RVector col = normalized.observed_column(c);
    if (col.size() == 0) throw data_error("suggest_harmonics: empty column");
    std::vector<double> mags(static_cast<std::size_t>(cap + 4), 0.0);
    for (int k = 1; k <= cap + 3; ++k) mags[static_cast<std::size_t>(k)] = std::abs(ecf_point(col, k));
    int chosen = cap;
    for (int k = 0; k <= cap; ++k) {
      if (mags[static_cast<std::size_t>(k + 1)] < threshold &&
          mags[static_cast<std::size_t>(k + 2)] < threshold &&
          mags[static_cast<std::size_t>(k + 3)] < threshold) {
        chosen = k;
        break;
      }
    }
    if (chosen == cap) out.capped = true;
    out.per_dimension.push_back(chosen);
    out.recommended = std::max(out.recommended, chosen);
  }
  return out;
}

} // namespace lrcf
