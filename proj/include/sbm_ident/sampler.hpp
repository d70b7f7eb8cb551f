#pragma once

// Random graph generation: draw latent groups Z_i i.i.d. from pi, then each
// edge independently from its conditional law given (Z_i, Z_j).

#include <sbm_ident/model.hpp>
#include <sbm_ident/random.hpp>
#include <sbm_ident/truncated_poisson.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace sbm_ident {

enum class EdgeKind { Binary, Finite, Weighted };

struct SampledGraph {
  int n = 0;
  EdgeKind kind = EdgeKind::Binary;
  /// State count for finite graphs (2 for binary, unused for weighted).
  int kappa = 2;
  /// One value per edge in lexicographic order. Binary: 0/1; finite: state
  /// index 0..kappa-1; weighted: weight, with 0 meaning "absent".
  std::vector<double> values;
  /// Latent groups, only kept when requested.
  std::optional<std::vector<int>> z;

  double at(int i, int j) const { return values[edge_index(i, j, n)]; }
};

namespace detail {

inline int draw_category(const std::vector<double>& probs, Rng& gen) {
  const double u = uniform01(gen);
  double cdf = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    cdf += probs[k];
    if (u < cdf) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;
}

inline std::vector<int> draw_latent(const std::vector<double>& pi, int n, Rng& gen) {
  std::vector<int> z(static_cast<std::size_t>(n));
  for (int& zi : z) zi = draw_category(pi, gen);
  return z;
}

template <class DrawEdge>
SampledGraph sample_with(const std::vector<double>& pi, int n, EdgeKind kind, int kappa, std::uint64_t seed,
                         bool keep_latent, DrawEdge&& draw) {
  if (n < 2) throw Error(ErrorCode::DomainError, "sample_graph: need at least 2 nodes");
  Rng gen = make_rng(seed);
  SampledGraph g;
  g.n = n;
  g.kind = kind;
  g.kappa = kappa;
  auto z = draw_latent(pi, n, gen);
  g.values.reserve(edge_count(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.values.push_back(draw(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)], gen));
  if (keep_latent) g.z = std::move(z);
  return g;
}

}  // namespace detail

inline SampledGraph sample_graph(const BinaryBlockParams& p, int n, std::uint64_t seed, bool keep_latent = false) {
  require_valid(p);
  return detail::sample_with(p.pi, n, EdgeKind::Binary, 2, seed, keep_latent, [&](int q, int l, Rng& gen) {
    return uniform01(gen) < p.P(q, l) ? 1.0 : 0.0;
  });
}

inline SampledGraph sample_graph(const AffiliationParams& p, int n, std::uint64_t seed, bool keep_latent = false) {
  require_valid(p);
  return sample_graph(affiliation_to_block(p), n, seed, keep_latent);
}

inline SampledGraph sample_graph(const FiniteStateParams& p, int n, std::uint64_t seed, bool keep_latent = false) {
  require_valid(p);
  return detail::sample_with(p.pi, n, EdgeKind::Finite, p.kappa, seed, keep_latent, [&](int q, int l, Rng& gen) {
    return static_cast<double>(detail::draw_category(p.at(q, l), gen));
  });
}

inline SampledGraph sample_graph(const WeightedParams& p, int n, std::uint64_t seed, bool keep_latent = false) {
  require_valid(p);
  return detail::sample_with(p.pi, n, EdgeKind::Weighted, 0, seed, keep_latent, [&](int q, int l, Rng& gen) {
    if (uniform01(gen) >= p.sparsity(q, l)) return 0.0;
    return static_cast<double>(sample_truncated_poisson(p.theta(q, l), gen));
  });
}

}  // namespace sbm_ident
