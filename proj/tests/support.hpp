#pragma once

// Test-side oracles, written independently of the library code paths.

#include <sbm_ident.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace testing_support {

using namespace sbm_ident;

inline std::vector<double> random_pi(int Q, std::mt19937_64& gen, double floor = 0.05) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  std::vector<double> pi(static_cast<std::size_t>(Q));
  double t = 0.0;
  for (double& x : pi) t += (x = u(gen));
  for (double& x : pi) x /= t;
  return pi;
}

inline AffiliationParams random_affiliation(int Q, std::mt19937_64& gen, double min_gap = 0.05) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AffiliationParams p;
  p.pi = random_pi(Q, gen);
  do {
    p.alpha = u(gen);
    p.beta = u(gen);
  } while (std::abs(p.alpha - p.beta) <= min_gap);
  return p;
}

inline BinaryBlockParams random_block(int Q, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BinaryBlockParams p{random_pi(Q, gen), Matrix(Q, Q)};
  for (int q = 0; q < Q; ++q)
    for (int l = q; l < Q; ++l) p.P(q, l) = p.P(l, q) = u(gen);
  return p;
}

/// E[prod_{(i,j) in motif} X_ij] = sum_z prod_i pi_{z_i} prod_{(i,j)} P(z_i, z_j),
/// over the nodes the motif touches. Nested recursion over labels.
inline double latent_sum_moment(const BinaryBlockParams& p, const std::vector<Edge>& motif) {
  int nodes = 0;
  for (auto [i, j] : motif) nodes = std::max({nodes, i + 1, j + 1});
  std::vector<int> z(static_cast<std::size_t>(nodes));
  std::function<double(int)> rec = [&](int k) -> double {
    if (k == nodes) {
      double prod = 1.0;
      for (auto [i, j] : motif) prod *= p.P(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]);
      return prod;
    }
    double s = 0.0;
    for (int q = 0; q < p.groups(); ++q) {
      z[static_cast<std::size_t>(k)] = q;
      s += p.pi[static_cast<std::size_t>(q)] * rec(k + 1);
    }
    return s;
  };
  return rec(0);
}

/// Average of prod X_e over all injective node tuples, by direct loops.
inline double tuple_average(const SampledGraph& g, const std::vector<Edge>& motif) {
  int k = 0;
  for (auto [i, j] : motif) k = std::max({k, i + 1, j + 1});
  std::vector<int> t(static_cast<std::size_t>(k));
  double hits = 0.0, total = 0.0;
  std::function<void(int)> rec = [&](int pos) {
    if (pos == k) {
      double prod = 1.0;
      for (auto [i, j] : motif) prod *= g.at(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]);
      hits += prod;
      total += 1.0;
      return;
    }
    for (int v = 0; v < g.n; ++v) {
      bool used = false;
      for (int s = 0; s < pos; ++s) used |= t[static_cast<std::size_t>(s)] == v;
      if (used) continue;
      t[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1);
    }
  };
  rec(0);
  return hits / total;
}

/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
inline int exact_rank(std::vector<std::vector<long long>> a) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  int rank = 0;
  long long prev = 1;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = -1;
    for (int r = rank; r < rows; ++r)
      if (a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(a[static_cast<std::size_t>(piv)], a[static_cast<std::size_t>(rank)]);
    const auto& pr = a[static_cast<std::size_t>(rank)];
    for (int r = rank + 1; r < rows; ++r) {
      auto& row = a[static_cast<std::size_t>(r)];
      for (int k = c + 1; k < cols; ++k)
        row[static_cast<std::size_t>(k)] =
            (pr[static_cast<std::size_t>(c)] * row[static_cast<std::size_t>(k)] -
             row[static_cast<std::size_t>(c)] * pr[static_cast<std::size_t>(k)]) / prev;
      row[static_cast<std::size_t>(c)] = 0;
    }
    prev = pr[static_cast<std::size_t>(c)];
    ++rank;
  }
  return rank;
}

/// Kruskal rank by exhaustive subset enumeration with exact ranks.
inline int brute_kruskal_rank(const std::vector<std::vector<long long>>& m) {
  const int rows = static_cast<int>(m.size());
  int best = 0;
  for (int I = 1; I <= rows; ++I) {
    bool all = true;
    for (std::uint32_t mask = 0; mask < (1u << rows) && all; ++mask) {
      if (std::popcount(mask) != I) continue;
      std::vector<std::vector<long long>> sub;
      for (int r = 0; r < rows; ++r)
        if (mask & (1u << r)) sub.push_back(m[static_cast<std::size_t>(r)]);
      all = exact_rank(sub) == I;
    }
    if (!all) break;
    best = I;
  }
  return best;
}

/// Degree sequences realized by some simple graph on m nodes, by listing all
/// 2^(m choose 2) graphs.
inline std::vector<std::vector<int>> realizable_sequences(int m) {
  const auto edges = edge_list(m);
  std::vector<std::vector<int>> out;
  for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
    std::vector<int> d(static_cast<std::size_t>(m), 0);
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (mask & (1u << e)) {
        ++d[static_cast<std::size_t>(edges[e].first)];
        ++d[static_cast<std::size_t>(edges[e].second)];
      }
    out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace testing_support
