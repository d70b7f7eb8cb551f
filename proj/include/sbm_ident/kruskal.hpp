#pragma once

// Rank checks behind the identifiability arguments: Kruskal rank and
// condition, the conditional configuration matrix A of K_m, degree-sequence
// families and Erdos-Gallai realizability.

#include <sbm_ident/exact_oracle.hpp>
#include <sbm_ident/moments.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace sbm_ident {

/// Singular values below this multiple of the largest count as zero.
inline constexpr double kRankTol = 1e-9;

inline int numerical_rank(const Matrix& m, double rel_tol = kRankTol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

/// Largest I such that every I rows of m are linearly independent.
inline int kruskal_rank(const Matrix& m, double rel_tol = kRankTol) {
  const auto rows = static_cast<int>(m.rows());
  if (rows > 20) throw Error(ErrorCode::SizeGuard, "kruskal_rank: more than 20 rows");
  const int top = std::min(rows, static_cast<int>(m.cols()));
  // a single zero row already breaks I = 1; the scale of the whole matrix is
  // the reference for "zero"
  const double ref = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  if (ref == 0.0) return 0;
  std::vector<int> pick;
  for (int I = 1; I <= top; ++I) {
    pick.resize(static_cast<std::size_t>(I));
    std::iota(pick.begin(), pick.end(), 0);
    for (;;) {
      Matrix sub(I, m.cols());
      for (int k = 0; k < I; ++k) sub.row(k) = m.row(pick[static_cast<std::size_t>(k)]);
      if (I == 1 ? sub.cwiseAbs().maxCoeff() <= rel_tol * ref : numerical_rank(sub, rel_tol) < I) return I - 1;
      int pos = I - 1;
      while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == rows - I + pos) --pos;
      if (pos < 0) break;
      ++pick[static_cast<std::size_t>(pos)];
      for (int k = pos + 1; k < I; ++k) pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  return top;
}

/// I1 + I2 + I3 >= 2r + 2.
constexpr bool kruskal_condition(int i1, int i2, int i3, int r) { return i1 + i2 + i3 >= 2 * r + 2; }

struct KruskalReport {
  int i1 = 0, i2 = 0, i3 = 0;
  int r = 0;
  bool condition_met = false;
};

/// Kruskal ranks of three r-row factor matrices and the resulting verdict.
inline KruskalReport kruskal_report(const Matrix& m1, const Matrix& m2, const Matrix& m3) {
  if (m1.rows() != m2.rows() || m1.rows() != m3.rows())
    throw Error(ErrorCode::DomainError, "kruskal_report: factor matrices need the same row count");
  KruskalReport rep{kruskal_rank(m1), kruskal_rank(m2), kruskal_rank(m3), static_cast<int>(m1.rows()), false};
  rep.condition_met = kruskal_condition(rep.i1, rep.i2, rep.i3, rep.r);
  return rep;
}

// ---------------------------------------------------------------------------
// Conditional configuration matrix.

inline constexpr std::uint64_t kMaxConditionalRows = 4096;
inline constexpr std::uint64_t kMaxConditionalCols = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kMaxConditionalEntries = std::uint64_t{1} << 24;

/// Row I (latent assignment, lexicographic) and column x (configuration,
/// first edge most significant) hold P(X = x | Z = I).
struct ConditionalMatrix {
  int Q = 0;
  int m = 0;
  int kappa = 2;
  Matrix A;
};

/// Throws SizeGuard naming the guard that fires.
inline void check_conditional_size(int Q, int kappa, int m) {
  const auto rows = detail::capped_pow(static_cast<std::uint64_t>(Q), static_cast<std::uint64_t>(m), kMaxConditionalRows);
  const auto cols =
      detail::capped_pow(static_cast<std::uint64_t>(kappa), edge_count(m), kMaxConditionalCols);
  if (rows > kMaxConditionalRows)
    throw Error(ErrorCode::SizeGuard, "size guard: Q^m = " + std::to_string(Q) + "^" + std::to_string(m) +
                                          " rows exceeds " + std::to_string(kMaxConditionalRows));
  if (cols > kMaxConditionalCols)
    throw Error(ErrorCode::SizeGuard, "size guard: kappa^(m choose 2) = " + std::to_string(kappa) + "^" +
                                          std::to_string(edge_count(m)) + " columns exceeds 2^20");
  if (rows * cols > kMaxConditionalEntries)
    throw Error(ErrorCode::SizeGuard, "size guard: " + std::to_string(rows) + " x " + std::to_string(cols) +
                                          " matrix exceeds 2^24 entries");
}

inline ConditionalMatrix build_conditional_matrix(const FiniteStateParams& p, int m, unsigned threads = max_threads()) {
  require_valid(p);
  if (m < 2) throw Error(ErrorCode::DomainError, "build_conditional_matrix: need m >= 2");
  check_conditional_size(p.groups(), p.kappa, m);
  const int Q = p.groups();
  const auto rows = detail::capped_pow(static_cast<std::uint64_t>(Q), static_cast<std::uint64_t>(m), kMaxConditionalRows);
  const auto cols = detail::capped_pow(static_cast<std::uint64_t>(p.kappa), edge_count(m), kMaxConditionalCols);
  ConditionalMatrix out{Q, m, p.kappa, Matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols))};
  detail::parallel_blocks(rows, threads, [&](std::size_t begin, std::size_t end, unsigned) {
    std::vector<int> z(static_cast<std::size_t>(m));
    std::vector<double> row;
    for (std::size_t r = begin; r < end; ++r) {
      std::size_t code = r;
      for (int i = m; i-- > 0;) {
        z[static_cast<std::size_t>(i)] = static_cast<int>(code % static_cast<std::size_t>(Q));
        code /= static_cast<std::size_t>(Q);
      }
      detail::conditional_row(p, z, 1.0, row);
      for (std::size_t c = 0; c < row.size(); ++c) out.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
  });
  return out;
}

inline ConditionalMatrix build_conditional_matrix(const BinaryBlockParams& p, int m, unsigned threads = max_threads()) {
  require_valid(p);
  return build_conditional_matrix(as_finite_state(p), m, threads);
}

/// Smallest m for which the degree-sequence argument applies.
constexpr int node_bound(int Q) {
  return Q % 2 == 0 ? Q - 1 + (Q + 2) * (Q + 2) / 4 : Q - 1 + (Q + 1) * (Q + 3) / 4;
}

struct BaseCaseReport {
  int Q = 0;
  int m = 0;
  int rank = 0;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  bool full_row_rank = false;
  int node_bound = 0;
  bool meets_node_bound = false;
  /// Full-rank factors of size Q^m on the three blocks satisfy
  /// 3 Q^m >= 2 Q^m + 2 whenever Q^m >= 2.
  bool extension_condition = false;
};

template <class Params>
BaseCaseReport check_base_case(const Params& p, int m, unsigned threads = max_threads()) {
  const auto cm = build_conditional_matrix(p, m, threads);
  BaseCaseReport rep;
  rep.Q = cm.Q;
  rep.m = m;
  rep.rows = static_cast<std::uint64_t>(cm.A.rows());
  rep.cols = static_cast<std::uint64_t>(cm.A.cols());
  rep.rank = numerical_rank(cm.A);
  rep.full_row_rank = static_cast<std::uint64_t>(rep.rank) == rep.rows;
  rep.node_bound = node_bound(cm.Q);
  rep.meets_node_bound = m >= rep.node_bound;
  const int r = static_cast<int>(rep.rows);
  rep.extension_condition = rep.full_row_rank && kruskal_condition(r, r, r, r);
  return rep;
}

// ---------------------------------------------------------------------------
// Degree sequences.

struct DegreeSequence {
  std::vector<int> degrees;
  bool realizable = false;
};

/// Whether a simple graph on degrees.size() nodes has these degrees.
inline bool erdos_gallai(std::vector<int> d) {
  const auto m = static_cast<long>(d.size());
  long sum = 0;
  for (int v : d) {
    if (v < 0 || v > m - 1) return false;
    sum += v;
  }
  if (sum % 2) return false;
  std::sort(d.begin(), d.end(), std::greater<>());
  long prefix = 0;
  for (long k = 1; k <= m; ++k) {
    prefix += d[static_cast<std::size_t>(k - 1)];
    long rhs = k * (k - 1);
    for (long v = k; v < m; ++v) rhs += std::min<long>(k, d[static_cast<std::size_t>(v)]);
    if (prefix > rhs) return false;
  }
  return true;
}

/// The Q^m sequences with d_v in {1..Q} for the first m-1 nodes and the last
/// degree ranging over the Q values of the parity that makes the sum even.
inline std::vector<DegreeSequence> build_degree_family(int Q, int m) {
  if (Q < 1 || m < 3) throw Error(ErrorCode::DomainError, "build_degree_family: need Q >= 1 and m >= 3");
  const auto count = detail::capped_pow(static_cast<std::uint64_t>(Q), static_cast<std::uint64_t>(m), kEnumerationGuard);
  if (count > kEnumerationGuard) throw Error(ErrorCode::SizeGuard, "build_degree_family: Q^m exceeds 10^7");
  std::vector<DegreeSequence> out;
  out.reserve(count);
  std::vector<int> head(static_cast<std::size_t>(m - 1), 1);
  for (;;) {
    const int partial = std::accumulate(head.begin(), head.end(), 0);
    for (int k = 0; k < Q; ++k) {
      DegreeSequence s;
      s.degrees = head;
      s.degrees.push_back(partial % 2 == 0 ? 2 * k : 2 * k + 1);
      s.realizable = erdos_gallai(s.degrees);
      out.push_back(std::move(s));
    }
    int pos = m - 2;
    while (pos >= 0 && head[static_cast<std::size_t>(pos)] == Q) head[static_cast<std::size_t>(pos--)] = 1;
    if (pos < 0) break;
    ++head[static_cast<std::size_t>(pos)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Three-way tables.

struct Tensor3 {
  Eigen::Index d1 = 0, d2 = 0, d3 = 0;
  std::vector<double> data;

  double& operator()(Eigen::Index a, Eigen::Index b, Eigen::Index c) {
    return data[static_cast<std::size_t>((a * d2 + b) * d3 + c)];
  }
  double operator()(Eigen::Index a, Eigen::Index b, Eigen::Index c) const {
    return data[static_cast<std::size_t>((a * d2 + b) * d3 + c)];
  }
};

/// sum_i v_i m1_i (x) m2_i (x) m3_i where m_j_i is row i of M_j.
inline Tensor3 build_kruskal_tensor(const Vector& v, const Matrix& m1, const Matrix& m2, const Matrix& m3) {
  const Eigen::Index r = v.size();
  if (m1.rows() != r || m2.rows() != r || m3.rows() != r)
    throw Error(ErrorCode::DomainError, "build_kruskal_tensor: factor rows must match the length of v");
  Tensor3 t{m1.cols(), m2.cols(), m3.cols(), {}};
  t.data.assign(static_cast<std::size_t>(t.d1 * t.d2 * t.d3), 0.0);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index a = 0; a < t.d1; ++a)
      for (Eigen::Index b = 0; b < t.d2; ++b) {
        const double ab = v(i) * m1(i, a) * m2(i, b);
        for (Eigen::Index c = 0; c < t.d3; ++c) t(a, b, c) += ab * m3(i, c);
      }
  return t;
}

}  // namespace sbm_ident
