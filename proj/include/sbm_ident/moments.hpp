#pragma once

// Motif moments of the binary affiliation model on K_4: closed forms in
// (alpha, beta, s2, s3, s4) and plug-in estimates from one observed graph.
//
// Motifs (0-based nodes):
//   m1  edge            {01}
//   m2  two-path        {01,02}
//   m31 triangle        {01,02,12}
//   m32 three-star      {01,02,03}
//   m33 three-path      {01,12,23}
//   m41 four-cycle      {01,12,23,03}
//   m42 paw             {01,02,03,12}
//   m5  diamond         {01,12,23,03,02}
//   m6  K4              all six edges

#include <sbm_ident/model.hpp>
#include <sbm_ident/sampler.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace sbm_ident {

enum class Provenance { Theoretical, Empirical };

struct MomentSet {
  std::optional<double> m1, m2, m31, m32, m33, m41, m42, m5, m6;
  Provenance provenance = Provenance::Theoretical;
};

enum class Motif { M1, M2, M31, M32, M33, M41, M42, M5, M6 };

inline constexpr std::array<Motif, 9> kAllMotifs{Motif::M1,  Motif::M2,  Motif::M31, Motif::M32, Motif::M33,
                                                 Motif::M41, Motif::M42, Motif::M5,  Motif::M6};

constexpr std::string_view motif_name(Motif m) {
  switch (m) {
    case Motif::M1: return "m1";
    case Motif::M2: return "m2";
    case Motif::M31: return "m31";
    case Motif::M32: return "m32";
    case Motif::M33: return "m33";
    case Motif::M41: return "m41";
    case Motif::M42: return "m42";
    case Motif::M5: return "m5";
    case Motif::M6: return "m6";
  }
  return "";
}

inline std::vector<Edge> motif_edges(Motif m) {
  switch (m) {
    case Motif::M1: return {{0, 1}};
    case Motif::M2: return {{0, 1}, {0, 2}};
    case Motif::M31: return {{0, 1}, {0, 2}, {1, 2}};
    case Motif::M32: return {{0, 1}, {0, 2}, {0, 3}};
    case Motif::M33: return {{0, 1}, {1, 2}, {2, 3}};
    case Motif::M41: return {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
    case Motif::M42: return {{0, 1}, {0, 2}, {0, 3}, {1, 2}};
    case Motif::M5: return {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}};
    case Motif::M6: return {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}, {1, 3}};
  }
  return {};
}

inline std::optional<double>& moment(MomentSet& ms, Motif m) {
  switch (m) {
    case Motif::M1: return ms.m1;
    case Motif::M2: return ms.m2;
    case Motif::M31: return ms.m31;
    case Motif::M32: return ms.m32;
    case Motif::M33: return ms.m33;
    case Motif::M41: return ms.m41;
    case Motif::M42: return ms.m42;
    case Motif::M5: return ms.m5;
    case Motif::M6: return ms.m6;
  }
  return ms.m1;
}

inline const std::optional<double>& moment(const MomentSet& ms, Motif m) {
  return moment(const_cast<MomentSet&>(ms), m);
}

/// Value of a required moment, or MissingMoment.
inline double require(const std::optional<double>& v, std::string_view name) {
  if (!v) throw Error(ErrorCode::MissingMoment, "moment " + std::string(name) + " is required but absent");
  return *v;
}

// ---------------------------------------------------------------------------

inline MomentSet theoretical_moments(const AffiliationParams& p) {
  require_valid(p);
  const auto s = power_sums(p.pi, 4);
  const double s2 = s(2), s3 = s(3), s4 = s(4), s22 = s2 * s2;
  const double a = p.alpha, b = p.beta;
  const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a, a6 = a5 * a;
  const double b2 = b * b, b3 = b2 * b, b4 = b3 * b, b5 = b4 * b, b6 = b5 * b;

  MomentSet ms;
  ms.provenance = Provenance::Theoretical;
  ms.m1 = s2 * a + (1 - s2) * b;
  ms.m2 = s3 * a2 + 2 * a * b * (s2 - s3) + (1 - 2 * s2 + s3) * b2;
  ms.m31 = s3 * a3 + 3 * (s2 - s3) * a * b2 + (1 - 3 * s2 + 2 * s3) * b3;
  ms.m32 = s4 * a3 + 3 * (s3 - s4) * a2 * b + 3 * (s2 - 2 * s3 + s4) * a * b2 + (1 - 3 * s2 + 3 * s3 - s4) * b3;
  ms.m33 = s4 * a3 + (s22 + 2 * s3 - 3 * s4) * a2 * b + (3 * s2 - 2 * s22 - 4 * s3 + 3 * s4) * a * b2 +
           (1 - 3 * s2 + s22 + 2 * s3 - s4) * b3;
  ms.m41 = s4 * a4 + 2 * (s22 + 2 * s3 - 3 * s4) * a2 * b2 + 4 * (s2 - s22 - 2 * s3 + 2 * s4) * a * b3 +
           (1 - 4 * s2 + 2 * s22 + 4 * s3 - 3 * s4) * b4;
  ms.m42 = s4 * a4 + (s3 - s4) * a3 * b + (s22 + 2 * s3 - 3 * s4) * a2 * b2 +
           (4 * s2 - 2 * s22 - 7 * s3 + 5 * s4) * a * b3 + (1 - 4 * s2 + s22 + 4 * s3 - 2 * s4) * b4;
  ms.m5 = s4 * a5 + 2 * (s3 - s4) * a3 * b2 + (2 * s3 - 4 * s4 + 2 * s22) * a2 * b3 +
          (5 * s2 - 4 * s22 - 10 * s3 + 9 * s4) * a * b4 + (1 - 5 * s2 + 2 * s22 + 6 * s3 - 4 * s4) * b5;
  ms.m6 = s4 * a6 + 4 * (s3 - s4) * a3 * b3 + 3 * (s22 - s4) * a2 * b4 + 6 * (s2 - s22 - 2 * s3 + 2 * s4) * a * b5 +
          (1 - 6 * s2 + 8 * s3 - 6 * s4 + 3 * s22) * b6;
  return ms;
}

/// 2 m1^3 - 3 m1 m2 + m31; vanishes exactly when Q = 1 or alpha = beta.
inline double q1_statistic(const MomentSet& ms) {
  const double m1 = require(ms.m1, "m1"), m2 = require(ms.m2, "m2"), m31 = require(ms.m31, "m31");
  return 2 * m1 * m1 * m1 - 3 * m1 * m2 + m31;
}

// ---------------------------------------------------------------------------
// Empirical moments.

/// Number of worker threads for internal loops: SBM_IDENT_THREADS when set
/// to a positive integer, otherwise the hardware concurrency.
inline unsigned max_threads() {
  if (const char* env = std::getenv("SBM_IDENT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

/// Runs fn(begin, end, slot) over contiguous blocks of [0, n).
template <class Fn>
void parallel_blocks(std::size_t n, unsigned threads, Fn&& fn) {
  threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n)));
  if (threads == 1) {
    fn(std::size_t{0}, n, 0u);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = n * t / threads, e = n * (t + 1) / threads;
    pool.emplace_back([&fn, b, e, t] { fn(b, e, t); });
  }
  for (auto& th : pool) th.join();
}

class BitAdjacency {
 public:
  explicit BitAdjacency(const SampledGraph& g)
      : n_(g.n), words_((static_cast<std::size_t>(g.n) + 63) / 64), bits_(static_cast<std::size_t>(g.n) * words_, 0) {
    std::size_t e = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j, ++e)
        if (g.values[e] != 0.0) {
          set(i, j);
          set(j, i);
        }
  }

  std::size_t common(int u, int v) const {
    const auto* a = row(u);
    const auto* b = row(v);
    std::size_t c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
    return c;
  }
  std::size_t degree(int u) const {
    const auto* a = row(u);
    std::size_t c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += static_cast<std::size_t>(std::popcount(a[w]));
    return c;
  }
  bool has(int u, int v) const {
    return (row(u)[static_cast<std::size_t>(v) / 64] >> (static_cast<std::size_t>(v) % 64)) & 1u;
  }
  const std::uint64_t* row(int u) const { return bits_.data() + static_cast<std::size_t>(u) * words_; }
  std::size_t words() const { return words_; }

 private:
  void set(int u, int v) {
    bits_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v) / 64] |= std::uint64_t{1}
                                                                                       << (static_cast<std::size_t>(v) % 64);
  }

  int n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

inline double choose(double n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (n - i) / (i + 1);
  return r;
}

struct MotifCounts {
  std::uint64_t edges = 0, two_paths = 0, triangles3 = 0;  // triangles3 = 3 * triangles
  std::uint64_t stars3 = 0, paths3_raw = 0, cycle_pairs = 0, paws = 0, diamonds = 0, cliques4 = 0;

  MotifCounts& operator+=(const MotifCounts& o) {
    edges += o.edges;
    two_paths += o.two_paths;
    triangles3 += o.triangles3;
    stars3 += o.stars3;
    paths3_raw += o.paths3_raw;
    cycle_pairs += o.cycle_pairs;
    paws += o.paws;
    diamonds += o.diamonds;
    cliques4 += o.cliques4;
    return *this;
  }
};

}  // namespace detail

enum class MomentOrder { K3, K4 };

/// Plug-in motif moments: for each motif, the number of its copies present
/// in the graph divided by the number of copies in K_n (equivalently, the
/// average of prod X_e over all injective node tuples).
///
/// Copies are counted with degree, co-degree and bitset identities rather
/// than tuple loops. Cost is O(n^3 / 64) for K3 motifs; K4 adds the clique
/// count, roughly O(|E| d^2 / 64). Exact integer counts make the result
/// independent of the thread count.
inline MomentSet empirical_moments(const SampledGraph& g, MomentOrder upto = MomentOrder::K3,
                                   unsigned threads = max_threads()) {
  if (g.kind != EdgeKind::Binary) throw Error(ErrorCode::DomainError, "empirical_moments: binary graph required");
  const int need = upto == MomentOrder::K3 ? 3 : 4;
  if (g.n < need)
    throw Error(ErrorCode::DomainError, "empirical_moments: need at least " + std::to_string(need) + " nodes");
  const int n = g.n;
  const bool k4 = upto == MomentOrder::K4;
  const detail::BitAdjacency adj(g);
  std::vector<std::uint64_t> deg(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) deg[static_cast<std::size_t>(v)] = adj.degree(v);

  // Per-node triangle counts t_v are needed for the paw count.
  std::vector<std::uint64_t> tri_at(static_cast<std::size_t>(n), 0);
  std::vector<detail::MotifCounts> partial(threads);

  detail::parallel_blocks(static_cast<std::size_t>(n), threads, [&](std::size_t b, std::size_t e, unsigned slot) {
    detail::MotifCounts c;
    std::vector<std::uint64_t> common_bits(adj.words());
    for (std::size_t uu = b; uu < e; ++uu) {
      const int u = static_cast<int>(uu);
      const std::uint64_t du = deg[uu];
      c.two_paths += du * (du - (du > 0)) / 2;
      if (k4 && du >= 3) c.stars3 += du * (du - 1) * (du - 2) / 6;
      std::uint64_t twice_tri = 0;
      for (int v = 0; v < n; ++v) {
        if (v == u) continue;
        const bool edge = adj.has(u, v);
        if (!edge && !k4) continue;
        const std::uint64_t cuv = adj.common(u, v);
        if (edge) twice_tri += cuv;
        if (v < u) continue;
        // unordered pair {u,v}, u < v
        if (k4) c.cycle_pairs += cuv * (cuv - (cuv > 0)) / 2;
        if (!edge) continue;
        ++c.edges;
        c.triangles3 += cuv;
        if (!k4) continue;
        const std::uint64_t dv = deg[static_cast<std::size_t>(v)];
        c.paths3_raw += (du - 1) * (dv - 1);
        c.diamonds += cuv * (cuv - (cuv > 0)) / 2;
        // K4 containing edge {u,v} as its lowest pair: w, x > v, all adjacent.
        const auto* ru = adj.row(u);
        const auto* rv = adj.row(v);
        for (std::size_t w = 0; w < adj.words(); ++w) common_bits[w] = ru[w] & rv[w];
        for (int w = v + 1; w < n; ++w) {
          if (!((common_bits[static_cast<std::size_t>(w) / 64] >> (static_cast<std::size_t>(w) % 64)) & 1u)) continue;
          const auto* rw = adj.row(w);
          for (std::size_t k = static_cast<std::size_t>(w + 1) / 64; k < adj.words(); ++k) {
            std::uint64_t m = common_bits[k] & rw[k];
            if (k == static_cast<std::size_t>(w + 1) / 64) m &= ~std::uint64_t{0} << ((static_cast<std::size_t>(w) + 1) % 64);
            c.cliques4 += static_cast<std::uint64_t>(std::popcount(m));
          }
        }
      }
      tri_at[uu] = twice_tri / 2;
      if (k4 && du >= 2) c.paws += tri_at[uu] * (du - 2);
    }
    partial[slot] = c;
  });

  detail::MotifCounts total;
  for (const auto& c : partial) total += c;

  const double nd = n;
  MomentSet ms;
  ms.provenance = Provenance::Empirical;
  ms.m1 = static_cast<double>(total.edges) / detail::choose(nd, 2);
  ms.m2 = static_cast<double>(total.two_paths) / (3.0 * detail::choose(nd, 3));
  ms.m31 = static_cast<double>(total.triangles3) / 3.0 / detail::choose(nd, 3);
  if (k4) {
    const double c4 = detail::choose(nd, 4);
    const double triangles = static_cast<double>(total.triangles3) / 3.0;
    ms.m32 = static_cast<double>(total.stars3) / (4.0 * c4);
    ms.m33 = (static_cast<double>(total.paths3_raw) - 3.0 * triangles) / (12.0 * c4);
    ms.m41 = static_cast<double>(total.cycle_pairs) / 2.0 / (3.0 * c4);
    ms.m42 = static_cast<double>(total.paws) / (12.0 * c4);
    ms.m5 = static_cast<double>(total.diamonds) / (6.0 * c4);
    ms.m6 = static_cast<double>(total.cliques4) / c4;
  }
  return ms;
}

}  // namespace sbm_ident
