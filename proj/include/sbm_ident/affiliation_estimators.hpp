#pragma once

// Method-of-moments recovery for the binary affiliation model.
//
//   estimate_k3_q2       Q = 2, priors unknown, from (m1, m2, m31)
//   estimate_known_pi    any Q, priors known, from (m1, m2, m31)
//   estimate_q_uniform   uniform priors, Q unknown, from (m1, m31, m41)
//   candidates_general_q any Q, from all edge-product moments of K_{Q+1}

#include <sbm_ident/exact_oracle.hpp>
#include <sbm_ident/moments.hpp>
#include <sbm_ident/polynomial.hpp>
#include <sbm_ident/random.hpp>
#include <sbm_ident/sampler.hpp>

#include <algorithm>
#include <bit>
#include <numeric>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sbm_ident {

struct RecoveryResult {
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<std::vector<double>> pi;
  std::optional<int> Q;
  /// Which closed form produced the estimate.
  std::string branch;
  /// Named residuals and intermediate quantities.
  std::vector<std::pair<std::string, double>> diagnostics;
};

struct EstimatorTolerances {
  /// |alpha - m1| (equivalently |alpha - beta|) below this is treated as alpha = beta.
  double degenerate = 1e-8;
  /// |m2 - m1^2| at or below this selects the uniform-prior branch.
  double uniformity = 1e-7;
  /// |m41 - m1^4| at or below this makes Q unidentifiable.
  double q_denominator = 1e-13;
  /// Slack allowed on [0,1] for recovered probabilities.
  double range = 1e-9;
};

namespace detail {

inline void check_unit_range(RecoveryResult& r, double slack) {
  for (double* v : {&r.alpha, &r.beta}) {
    if (*v < -slack || *v > 1.0 + slack)
      throw Error(ErrorCode::InconsistentMoments,
                  "recovered connectivity " + detail::fmt(*v) + " lies outside [0,1]; moments are inconsistent");
    *v = std::clamp(*v, 0.0, 1.0);
  }
}

/// Signed real cube root of (m1^3 - m31)/(Q-1): the uniform-prior formulas.
inline std::pair<double, double> uniform_prior_solution(double m1, double m31, int Q) {
  if (Q <= 1) throw Error(ErrorCode::SingleGroup, "single group: beta is undefined when Q = 1");
  const double beta = m1 + std::cbrt((m1 * m1 * m1 - m31) / (Q - 1));
  const double alpha = Q * m1 + (1 - Q) * beta;
  return {alpha, beta};
}

}  // namespace detail

/// Q = 2 with unknown priors. alpha is the unique real root of
/// X^3 - 3 m1 X^2 + 3 m2 X - m31 (increasing because m2 >= m1^2), beta solves
/// the linear equation X^2 + XY - 3 m1 X - m1 Y + 2 m2 = 0 at X = alpha, and
/// s2 = (m1 - beta)/(alpha - beta) gives the unordered pair {pi1, pi2}.
inline RecoveryResult estimate_k3_q2(const MomentSet& ms, const EstimatorTolerances& tol = {}) {
  const double m1 = require(ms.m1, "m1"), m2 = require(ms.m2, "m2"), m31 = require(ms.m31, "m31");
  const double spread = m2 - m1 * m1;
  if (spread < -tol.range)
    throw Error(ErrorCode::InconsistentMoments, "m2 < m1^2 (" + detail::fmt(spread) + "); no Q=2 affiliation model");

  // third cumulant of the triangle = (alpha - beta)^3 times a positive prior
  // factor; near zero the cubic has a triple root and alpha is ill-posed
  const double cumulant = m31 - 3 * m1 * m2 + 2 * m1 * m1 * m1;
  if (std::abs(cumulant) <= tol.degenerate * std::sqrt(tol.degenerate))
    throw Error(ErrorCode::DegenerateAlphaBeta,
                "affiliation degenerate: alpha = beta, so beta and pi are unidentifiable");

  const CubicRoot cubic = solve_monotone_cubic(-3 * m1, 3 * m2, -m31);
  RecoveryResult r;
  r.branch = "k3-q2";
  r.alpha = cubic.root;
  r.diagnostics.emplace_back("cubic_discriminant", cubic.discriminant);
  r.diagnostics.emplace_back("bisection_agrees", cubic.bisection_agrees ? 1.0 : 0.0);
  const std::vector<double> u2{1.0, -3 * m1, 3 * m2, -m31};
  r.diagnostics.emplace_back("u2_residual", horner(std::span<const double>(u2), r.alpha));

  const double lead = r.alpha - m1;
  if (std::abs(lead) <= tol.degenerate)
    throw Error(ErrorCode::DegenerateAlphaBeta,
                "affiliation degenerate: alpha = beta, so beta and pi are unidentifiable");
  r.beta = (3 * m1 * r.alpha - r.alpha * r.alpha - 2 * m2) / lead;
  if (std::abs(r.alpha - r.beta) <= tol.degenerate)
    throw Error(ErrorCode::DegenerateAlphaBeta,
                "affiliation degenerate: alpha = beta, so beta and pi are unidentifiable");

  const double s2 = (m1 - r.beta) / (r.alpha - r.beta);
  r.diagnostics.emplace_back("s2", s2);
  if (!(s2 >= 0.5 - tol.range) || !(s2 < 1.0))
    throw Error(ErrorCode::InconsistentMoments, "inconsistent moments: s2 = " + detail::fmt(s2) + " outside [1/2, 1)");
  const double disc = 2 * s2 - 1;
  if (disc < -tol.range) throw Error(ErrorCode::InconsistentMoments, "s2 out of feasible range: priors are complex");
  const double root = std::sqrt(std::max(disc, 0.0));
  r.pi = std::vector<double>{(1 - root) / 2, (1 + root) / 2};
  r.Q = 2;
  detail::check_unit_range(r, tol.range);
  return r;
}

/// alpha and beta for known priors. Non-uniform priors give beta as a
/// rational function of (m1, m2, m31); uniform priors force m2 = m1^2 and
/// beta = m1 + cbrt((m1^3 - m31)/(Q - 1)).
inline RecoveryResult estimate_known_pi(const MomentSet& ms, const std::vector<double>& pi,
                                        const EstimatorTolerances& tol = {}) {
  {
    std::vector<std::string> issues;
    detail::check_pi(pi, issues);
    if (!issues.empty()) throw Error(ErrorCode::InvalidParams, "estimate_known_pi: " + issues.front());
  }
  const double m1 = require(ms.m1, "m1"), m2 = require(ms.m2, "m2"), m31 = require(ms.m31, "m31");
  const auto s = power_sums(pi, 3);
  const double s2 = s(2), s3 = s(3);
  const bool pi_uniform = std::abs(s3 - s2 * s2) <= 1e-14;
  const double spread = m1 * m1 - m2;

  RecoveryResult r;
  r.pi = pi;
  r.Q = static_cast<int>(pi.size());
  if (!pi_uniform) {
    // m1^2 - m2 = -(alpha - beta)^2 (s3 - s2^2)
    const double gap_sq = -spread / (s3 - s2 * s2);
    if (gap_sq < -tol.range)
      throw Error(ErrorCode::InconsistentMoments, "inconsistent moments: m2 < m1^2");
    if (gap_sq <= tol.degenerate)
      throw Error(ErrorCode::DegenerateAlphaBeta,
                  "m2 = m1^2 with non-uniform priors: alpha = beta, or the moments are inconsistent");
    const double s2_3 = s2 * s2 * s2;
    const double prior_factor = 2 * s2_3 - 3 * s3 * s2 + s3;
    const double num = (s3 - s2 * s3) * m1 * m1 * m1 + (s2_3 - s3) * m2 * m1 + (s3 * s2 - s2_3) * m31;
    const double den = spread * prior_factor;
    r.branch = "rational";
    // The rational form divides by m1^2 - m2, which vanishes as the priors
    // approach uniform. The same solution follows from the triangle cumulant
    // (alpha - beta)^3 * prior_factor without that division.
    const double gap = std::cbrt((m31 - 3 * m1 * m2 + 2 * m1 * m1 * m1) / prior_factor);
    r.beta = m1 - gap * s2;
    r.alpha = r.beta + gap;
    r.diagnostics.emplace_back("denominator", den);
    r.diagnostics.emplace_back("beta_rational", num / den);
  } else {
    if (std::abs(spread) > tol.uniformity)
      throw Error(ErrorCode::InconsistentMoments, "inconsistent inputs: m2 != m1^2 but the given priors are uniform");
    r.branch = "uniform";
    std::tie(r.alpha, r.beta) = detail::uniform_prior_solution(m1, m31, static_cast<int>(pi.size()));
    r.diagnostics.emplace_back("cube_root_argument", (m1 * m1 * m1 - m31) / (static_cast<double>(pi.size()) - 1));
  }
  detail::check_unit_range(r, tol.range);
  return r;
}

/// Q from (m1, m31, m41) under uniform priors, then alpha and beta from the
/// uniform-prior formulas. The ratio is evaluated in the centered form
/// Q = 1 + (m31 - m1^3)^4 / (m41 - m1^4)^3, algebraically identical to the
/// expanded polynomial ratio but free of its cancellation.
inline RecoveryResult estimate_q_uniform(const MomentSet& ms, const EstimatorTolerances& tol = {}) {
  const double m1 = require(ms.m1, "m1"), m31 = require(ms.m31, "m31"), m41 = require(ms.m41, "m41");
  const double m1_2 = m1 * m1, m1_3 = m1_2 * m1, m1_4 = m1_2 * m1_2;
  const double a = m31 - m1_3;
  const double b = m41 - m1_4;
  if (std::abs(b) <= tol.q_denominator)
    throw Error(ErrorCode::DegenerateAlphaBeta, "m41 = m1^4: alpha = beta and Q is unidentifiable");

  RecoveryResult r;
  r.branch = "uniform-q";
  const double q_raw = 1.0 + (a * a) * (a * a) / (b * b * b);
  {
    const double m1_6 = m1_3 * m1_3, m1_8 = m1_4 * m1_4, m1_9 = m1_8 * m1;
    const double expanded = (-std::pow(m31, 4) - m41 * m41 * m41 - 3 * m41 * m1_8 + 3 * m41 * m41 * m1_4 -
                             6 * m1_6 * m31 * m31 + 4 * m1_9 * m31 + 4 * m1_3 * m31 * m31 * m31) /
                            std::pow(m1_4 - m41, 3);
    r.diagnostics.emplace_back("q_raw_expanded", expanded);
  }
  r.diagnostics.emplace_back("q_raw", q_raw);
  const double q_round = std::round(q_raw);
  if (!std::isfinite(q_raw) || std::abs(q_raw - q_round) > 0.2 || q_round < 1.0)
    throw Error(ErrorCode::InconsistentMoments,
                "moments inconsistent with a uniform-prior affiliation model (Q_raw = " + detail::fmt(q_raw) + ")");
  const int Q = static_cast<int>(q_round);
  r.Q = Q;
  std::tie(r.alpha, r.beta) = detail::uniform_prior_solution(m1, m31, Q);
  r.pi = uniform_pi(Q);
  detail::check_unit_range(r, tol.range);
  return r;
}

// ---------------------------------------------------------------------------
// General Q: polynomials U_Q and V_Q over K_{Q+1}.

/// E[prod_{e in S} X_e] for every edge subset S of K_m, indexed by bitmask
/// (bit e <-> lexicographic edge e). Size 2^(m choose 2).
struct SubsetMoments {
  int m = 0;
  std::vector<double> values;

  double operator()(std::size_t mask) const { return values[mask]; }
};

inline SubsetMoments subset_moments(const ExactDistribution& d) { return {d.n, edge_product_moments(d)}; }

/// Subset moments of K_3 from a symmetric moment set: every single edge is
/// m1, every pair is m2 and the triangle is m31.
inline SubsetMoments subset_moments_k3(const MomentSet& ms) {
  const double m1 = require(ms.m1, "m1"), m2 = require(ms.m2, "m2"), m31 = require(ms.m31, "m31");
  SubsetMoments s{3, std::vector<double>(8)};
  for (std::size_t mask = 0; mask < 8; ++mask) {
    const int k = std::popcount(mask);
    s.values[mask] = k == 0 ? 1.0 : k == 1 ? m1 : k == 2 ? m2 : m31;
  }
  return s;
}

/// Plug-in subset moments of K_m from one binary graph: the average of
/// prod X_e over injective node m-tuples. All tuples are used when there are
/// at most `max_tuples`; otherwise `max_tuples` random tuples drawn with `seed`.
inline SubsetMoments empirical_subset_moments(const SampledGraph& g, int m, std::size_t max_tuples = 2'000'000,
                                              std::uint64_t seed = 0) {
  if (g.kind != EdgeKind::Binary) throw Error(ErrorCode::DomainError, "empirical_subset_moments: binary graph required");
  if (m < 2 || m > g.n) throw Error(ErrorCode::DomainError, "empirical_subset_moments: need 2 <= m <= n");
  const std::size_t E = edge_count(m);
  if (E > 20) throw Error(ErrorCode::SizeGuard, "empirical_subset_moments: K_m has too many edge subsets");
  std::vector<double> counts(std::size_t{1} << E, 0.0);
  std::size_t used = 0;
  std::vector<int> nodes(static_cast<std::size_t>(m));
  const auto add = [&] {
    std::size_t mask = 0, e = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j, ++e)
        if (g.at(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]) != 0.0) mask |= std::size_t{1} << e;
    counts[mask] += 1.0;
    ++used;
  };
  const auto taken = [&](int k, int v) { return std::find(nodes.begin(), nodes.begin() + k, v) != nodes.begin() + k; };

  double tuples = 1.0;
  for (int k = 0; k < m; ++k) tuples *= g.n - k;
  if (tuples <= static_cast<double>(max_tuples)) {
    const std::function<void(int)> rec = [&](int k) {
      if (k == m) return add();
      for (int v = 0; v < g.n; ++v) {
        if (taken(k, v)) continue;
        nodes[static_cast<std::size_t>(k)] = v;
        rec(k + 1);
      }
    };
    rec(0);
  } else {
    Rng gen = make_rng(seed);
    for (std::size_t t = 0; t < max_tuples; ++t) {
      for (int k = 0; k < m; ++k) {
        int v;
        do {
          v = static_cast<int>(uniform01(gen) * g.n);
        } while (taken(k, v));
        nodes[static_cast<std::size_t>(k)] = v;
      }
      add();
    }
  }
  for (std::size_t b = 0; b < E; ++b)
    for (std::size_t s = 0; s < counts.size(); ++s)
      if (!(s & (std::size_t{1} << b))) counts[s] += counts[s | (std::size_t{1} << b)];
  for (double& c : counts) c /= static_cast<double>(used);
  return {m, std::move(counts)};
}

/// Monic U_Q(X) = E[prod_{edges of K_{Q+1}} (X - X_e)], degree (Q+1 choose 2),
/// coefficients descending.
struct PolynomialU {
  std::vector<double> coeffs;
};

/// V_Q(X, Y) = y_coeff(X) * Y + constant(X), both descending in X.
struct PolynomialV {
  std::vector<double> y_coeff;
  std::vector<double> constant;

  double coefficient_of_y(double x) const { return horner(std::span<const double>(y_coeff), x); }
  double operator()(double x, double y) const {
    return coefficient_of_y(x) * y + horner(std::span<const double>(constant), x);
  }
};

namespace detail {

inline void require_subsets(const SubsetMoments& sm, int Q) {
  if (Q < 1) throw Error(ErrorCode::DomainError, "Q must be positive");
  if (sm.m != Q + 1 || sm.values.size() != (std::size_t{1} << edge_count(Q + 1)))
    throw Error(ErrorCode::MissingMoment, "need the expectation of every edge subset of K_" + std::to_string(Q + 1));
}

}  // namespace detail

inline PolynomialU build_uq(const SubsetMoments& sm, int Q) {
  detail::require_subsets(sm, Q);
  const std::size_t N = edge_count(Q + 1);
  PolynomialU u{std::vector<double>(N + 1, 0.0)};
  for (std::size_t mask = 0; mask < sm.values.size(); ++mask) {
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    u.coeffs[k] += (k % 2 ? -1.0 : 1.0) * sm(mask);
  }
  return u;
}

inline PolynomialV build_vq(const SubsetMoments& sm, int Q) {
  detail::require_subsets(sm, Q);
  const int m = Q + 1;
  const std::size_t T = edge_count(Q);
  // masks of K_{Q+1} for the K_Q edges and the star edges into node Q
  std::vector<std::size_t> inner_bit, star_bit;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const std::size_t bit = std::size_t{1} << edge_index(i, j, m);
      (j == Q ? star_bit : inner_bit).push_back(bit);
    }
  PolynomialV v{std::vector<double>(T + 1, 0.0), std::vector<double>(T + 2, 0.0)};
  for (std::size_t sub = 0; sub < (std::size_t{1} << T); ++sub) {
    std::size_t mask = 0;
    for (std::size_t e = 0; e < T; ++e)
      if (sub & (std::size_t{1} << e)) mask |= inner_bit[e];
    const auto k = static_cast<std::size_t>(std::popcount(sub));
    const double sign = k % 2 ? -1.0 : 1.0;
    const double base = sm(mask);
    double star = 0.0;
    for (std::size_t b : star_bit) star += sm(mask | b);
    // (X + (Q-1) Y) E[S] X^{T-k}  -  (sum_i E[S + s_i]) X^{T-k}
    v.y_coeff[k] += sign * (Q - 1) * base;
    v.constant[k] += sign * base;
    v.constant[k + 1] -= sign * star;
  }
  return v;
}

struct Candidate {
  double alpha = 0.0;
  double beta = std::numeric_limits<double>::quiet_NaN();
  int multiplicity = 1;
  /// Coefficient of Y in V_Q(alpha, Y) was below tolerance (alpha = beta).
  bool beta_flagged = false;
  double residual = std::numeric_limits<double>::infinity();
};

/// Squared misfit of (m2, m31) for a candidate (alpha, beta), with s2 taken
/// from m1 and s3 fitted by least squares to the two remaining equations.
inline double candidate_residual(double m1, double m2, double m31, double alpha, double beta) {
  const double d = alpha - beta;
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  const double s2 = (m1 - beta) / d;
  const double a2 = d * d, b2 = 2 * s2 * alpha * beta + (1 - 2 * s2) * beta * beta;
  const double a3 = d * d * (alpha + 2 * beta), b3 = 3 * s2 * alpha * beta * beta + (1 - 3 * s2) * beta * beta * beta;
  const double denom = a2 * a2 + a3 * a3;
  const double s3 = denom > 0 ? (a2 * (m2 - b2) + a3 * (m31 - b3)) / denom : 0.0;
  const double r2 = a2 * s3 + b2 - m2, r3 = a3 * s3 + b3 - m31;
  return r2 * r2 + r3 * r3;
}

/// Candidate (alpha, beta) pairs: real roots of U_Q in [0,1], each with the
/// beta solving V_Q(alpha, Y) = 0. Ranked by residual; flagged last.
inline std::vector<Candidate> candidates_general_q(const SubsetMoments& sm, int Q, double flag_tol = 1e-10) {
  if (Q > 4) throw Error(ErrorCode::SizeGuard, "candidates_general_q: Q <= 4 (2^(Q+1 choose 2) subsets)");
  const auto u = build_uq(sm, Q);
  const auto v = build_vq(sm, Q);
  const double m1 = sm(1), m2 = sm(0b11), m31 = sm(std::size_t{1} | (std::size_t{1} << 1) | (std::size_t{1} << edge_index(1, 2, Q + 1)));

  std::vector<Candidate> out;
  for (const RealRoot& root : real_roots(std::span<const double>(u.coeffs))) {
    if (root.value < -1e-9 || root.value > 1.0 + 1e-9) continue;
    Candidate c;
    c.alpha = std::clamp(root.value, 0.0, 1.0);
    c.multiplicity = root.multiplicity;
    const double lead = v.coefficient_of_y(c.alpha);
    if (std::abs(lead) <= flag_tol) {
      c.beta_flagged = true;
    } else {
      c.beta = -horner(std::span<const double>(v.constant), c.alpha) / lead;
      c.residual = candidate_residual(m1, m2, m31, c.alpha, c.beta);
    }
    out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.beta_flagged != b.beta_flagged) return !a.beta_flagged;
    return a.residual < b.residual;
  });
  return out;
}

}  // namespace sbm_ident
