#pragma once

// Exact law of the edge variables of K_n, by enumerating every latent
// assignment z in {0..Q-1}^n. This is the ground truth the closed-form
// moments, estimators and rank checks are tested against.

#include <sbm_ident/model.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace sbm_ident {

/// Desk-scale guard shared by the enumeration routines.
inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;

/// probs[c] for configuration c = (x_e) over lexicographic edges e, with
/// c = sum_e x_e * kappa^(E-1-e): the first edge (0,1) is the most
/// significant digit.
struct ExactDistribution {
  int n = 0;
  int kappa = 2;
  std::vector<double> probs;

  std::size_t edges() const { return edge_count(n); }

  std::vector<int> decode(std::size_t config) const {
    std::vector<int> x(edges());
    for (std::size_t e = x.size(); e-- > 0;) {
      x[e] = static_cast<int>(config % static_cast<std::size_t>(kappa));
      config /= static_cast<std::size_t>(kappa);
    }
    return x;
  }

  std::size_t encode(const std::vector<int>& x) const {
    std::size_t c = 0;
    for (int v : x) c = c * static_cast<std::size_t>(kappa) + static_cast<std::size_t>(v);
    return c;
  }
};

namespace detail {

/// base^exp, or guard+1 on overflow past the guard.
inline std::uint64_t capped_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t guard) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (r > guard / std::max<std::uint64_t>(base, 1)) return guard + 1;
    r *= base;
  }
  return r;
}

/// Calls fn(z) for every z in {0..Q-1}^n in lexicographic order.
template <class Fn>
void for_each_assignment(int Q, int n, Fn&& fn) {
  std::vector<int> z(static_cast<std::size_t>(n), 0);
  for (;;) {
    fn(static_cast<const std::vector<int>&>(z));
    int pos = n - 1;
    while (pos >= 0 && ++z[static_cast<std::size_t>(pos)] == Q) z[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) return;
  }
}

/// Row of conditional configuration probabilities given z, written into
/// `row` (size kappa^E), scaled by `weight`.
inline void conditional_row(const FiniteStateParams& p, const std::vector<int>& z, double weight,
                            std::vector<double>& row) {
  const int n = static_cast<int>(z.size());
  const auto kappa = static_cast<std::size_t>(p.kappa);
  row.assign(1, weight);
  std::vector<double> next;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto& law = p.at(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]);
      next.resize(row.size() * kappa);
      for (std::size_t c = 0; c < row.size(); ++c)
        for (std::size_t x = 0; x < kappa; ++x) next[c * kappa + x] = row[c] * law[x];
      row.swap(next);
    }
}

}  // namespace detail

inline ExactDistribution exact_distribution(const FiniteStateParams& p, int n) {
  require_valid(p);
  if (n < 2) throw Error(ErrorCode::DomainError, "exact_distribution: need at least 2 nodes");
  const auto Q = static_cast<std::uint64_t>(p.groups());
  const auto assignments = detail::capped_pow(Q, static_cast<std::uint64_t>(n), kEnumerationGuard);
  const auto configs = detail::capped_pow(static_cast<std::uint64_t>(p.kappa), edge_count(n), kEnumerationGuard);
  if (assignments > kEnumerationGuard)
    throw Error(ErrorCode::SizeGuard, "exact_distribution: Q^n exceeds 10^7 latent assignments");
  if (configs > kEnumerationGuard)
    throw Error(ErrorCode::SizeGuard, "exact_distribution: kappa^(n choose 2) exceeds 10^7 configurations");

  ExactDistribution d{n, p.kappa, std::vector<double>(configs, 0.0)};
  std::vector<double> row;
  detail::for_each_assignment(p.groups(), n, [&](const std::vector<int>& z) {
    double w = 1.0;
    for (int zi : z) w *= p.pi[static_cast<std::size_t>(zi)];
    if (w == 0.0) return;
    detail::conditional_row(p, z, w, row);
    for (std::size_t c = 0; c < row.size(); ++c) d.probs[c] += row[c];
  });
  return d;
}

inline ExactDistribution exact_distribution(const BinaryBlockParams& p, int n) {
  require_valid(p);
  return exact_distribution(as_finite_state(p), n);
}

inline ExactDistribution exact_distribution(const AffiliationParams& p, int n) {
  return exact_distribution(affiliation_to_block(p), n);
}

/// E[prod_{e in motif} X_e] for a binary distribution. Motif edges are node
/// pairs (0-based, either orientation); an empty motif gives 1.
inline double exact_motif_moment(const ExactDistribution& d, const std::vector<Edge>& motif) {
  if (d.kappa != 2) throw Error(ErrorCode::DomainError, "exact_motif_moment: binary distribution required");
  std::vector<std::size_t> idx;
  for (auto [i, j] : motif) {
    if (i < 0 || j < 0 || i >= d.n || j >= d.n || i == j)
      throw Error(ErrorCode::DomainError, "exact_motif_moment: motif edge (" + std::to_string(i) + "," +
                                              std::to_string(j) + ") is not an edge of K_" + std::to_string(d.n));
    idx.push_back(edge_index(i, j, d.n));
  }
  const std::size_t E = d.edges();
  std::size_t need = 0;
  for (std::size_t e : idx) need |= std::size_t{1} << (E - 1 - e);
  double total = 0.0;
  for (std::size_t c = 0; c < d.probs.size(); ++c)
    if ((c & need) == need) total += d.probs[c];
  return total;
}

/// E[prod_{e in S} X_e] for every subset S of the edges of K_n, indexed by
/// bitmask with bit e <-> lexicographic edge e. Binary distributions only.
inline std::vector<double> edge_product_moments(const ExactDistribution& d) {
  if (d.kappa != 2) throw Error(ErrorCode::DomainError, "edge_product_moments: binary distribution required");
  const std::size_t E = d.edges();
  std::vector<double> g(d.probs.size(), 0.0);
  for (std::size_t c = 0; c < d.probs.size(); ++c) {
    std::size_t mask = 0;
    for (std::size_t e = 0; e < E; ++e)
      if (c & (std::size_t{1} << (E - 1 - e))) mask |= std::size_t{1} << e;
    g[mask] += d.probs[c];
  }
  // superset sums: g[S] = sum over M containing S of P(present set = M)
  for (std::size_t b = 0; b < E; ++b)
    for (std::size_t s = 0; s < g.size(); ++s)
      if (!(s & (std::size_t{1} << b))) g[s] += g[s | (std::size_t{1} << b)];
  return g;
}

/// Largest absolute difference between two distributions on the same K_n.
inline double max_abs_difference(const ExactDistribution& a, const ExactDistribution& b) {
  if (a.n != b.n || a.kappa != b.kappa) return INFINITY;
  double m = 0.0;
  for (std::size_t c = 0; c < a.probs.size(); ++c) m = std::max(m, std::abs(a.probs[c] - b.probs[c]));
  return m;
}

// ---------------------------------------------------------------------------
// Brute-force identifiability probe.

namespace detail {

/// Lexicographically smallest (pi, P) over relabelings of the groups.
inline BinaryBlockParams canonical_labeling(const BinaryBlockParams& p) {
  const int Q = p.groups();
  std::vector<int> perm(static_cast<std::size_t>(Q));
  std::iota(perm.begin(), perm.end(), 0);
  BinaryBlockParams best = p;
  auto key = [Q](const BinaryBlockParams& b) {
    std::vector<double> k(b.pi);
    for (int q = 0; q < Q; ++q)
      for (int l = 0; l < Q; ++l) k.push_back(b.P(q, l));
    return k;
  };
  auto best_key = key(best);
  do {
    BinaryBlockParams cand{std::vector<double>(static_cast<std::size_t>(Q)), Matrix(Q, Q)};
    for (int q = 0; q < Q; ++q) {
      cand.pi[static_cast<std::size_t>(q)] = p.pi[static_cast<std::size_t>(perm[static_cast<std::size_t>(q)])];
      for (int l = 0; l < Q; ++l) cand.P(q, l) = p.P(perm[static_cast<std::size_t>(q)], perm[static_cast<std::size_t>(l)]);
    }
    auto k = key(cand);
    if (k < best_key) {
      best = cand;
      best_key = std::move(k);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

/// Groups grid points whose K_n distributions agree within `epsilon` in max
/// norm. Label-swapped copies are merged first via a canonical relabeling.
/// Classes are listed by smallest member index; members ascending.
inline std::vector<std::vector<std::size_t>> identifiability_scan(const std::vector<BinaryBlockParams>& grid, int n,
                                                                  double epsilon = 1e-9) {
  for (const auto& p : grid) {
    require_valid(p);
    if (p.groups() != grid.front().groups())
      throw Error(ErrorCode::InvalidParams, "identifiability_scan: grid points must share Q");
  }
  const std::size_t G = grid.size();
  detail::DisjointSets sets(G);
  std::vector<BinaryBlockParams> canon;
  canon.reserve(G);
  for (const auto& p : grid) canon.push_back(detail::canonical_labeling(p));
  for (std::size_t a = 0; a < G; ++a)
    for (std::size_t b = a + 1; b < G; ++b)
      if (canon[a].pi == canon[b].pi && canon[a].P == canon[b].P) sets.unite(a, b);

  std::vector<std::size_t> reps;
  std::vector<ExactDistribution> dists;
  for (std::size_t a = 0; a < G; ++a)
    if (sets.find(a) == a) {
      reps.push_back(a);
      dists.push_back(exact_distribution(canon[a], n));
    }
  for (std::size_t a = 0; a < reps.size(); ++a)
    for (std::size_t b = a + 1; b < reps.size(); ++b)
      if (max_abs_difference(dists[a], dists[b]) <= epsilon) sets.unite(reps[a], reps[b]);

  std::vector<std::vector<std::size_t>> classes;
  std::vector<std::ptrdiff_t> slot(G, -1);
  for (std::size_t a = 0; a < G; ++a) {
    const std::size_t root = sets.find(a);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(classes.size());
      classes.emplace_back();
    }
    classes[static_cast<std::size_t>(slot[root])].push_back(a);
  }
  return classes;
}

inline std::vector<std::vector<std::size_t>> identifiability_scan(const std::vector<AffiliationParams>& grid, int n,
                                                                  double epsilon = 1e-9) {
  std::vector<BinaryBlockParams> blocks;
  blocks.reserve(grid.size());
  for (const auto& a : grid) {
    require_valid(a);
    blocks.push_back(affiliation_to_block(a));
  }
  return identifiability_scan(blocks, n, epsilon);
}

}  // namespace sbm_ident
