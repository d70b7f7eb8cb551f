#pragma once

// Weighted-edge models: expansion of the law of K_3 (or K_n) into product
// mixture components, and the constructive inversions back to parameters.
// Components are taken as exact inputs; fitting them from data is left to an
// external mixture fitter.

#include <sbm_ident/exact_oracle.hpp>
#include <sbm_ident/polynomial.hpp>
#include <sbm_ident/sampler.hpp>
#include <sbm_ident/truncated_poisson.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

namespace sbm_ident {

/// Atom matching tolerance on family parameters.
inline constexpr double kAtomTol = 1e-9;

/// One coordinate law: Dirac mass at 0 or the weight family with rate theta.
struct Atom {
  bool dirac = false;
  double theta = 0.0;

  static Atom zero() { return {true, 0.0}; }
  static Atom family(double theta) { return {false, theta}; }
};

inline bool operator<(const Atom& a, const Atom& b) {
  if (a.dirac != b.dirac) return a.dirac;
  return a.theta < b.theta;
}

inline bool same_atom(const Atom& a, const Atom& b, double tol = kAtomTol) {
  return a.dirac == b.dirac && (a.dirac || std::abs(a.theta - b.theta) <= tol);
}

struct Component {
  double weight = 0.0;
  std::vector<Atom> atoms;
};

struct MixtureComponentSet {
  int arity = 0;
  std::vector<Component> components;

  double total_weight() const {
    double t = 0.0;
    for (const auto& c : components) t += c.weight;
    return t;
  }
};

namespace detail {

inline bool same_atoms(const std::vector<Atom>& a, const std::vector<Atom>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_atom(a[i], b[i], tol)) return false;
  return true;
}

/// Adds weight w at atoms, merging with an existing equal component.
inline void accumulate(std::vector<Component>& out, std::vector<Atom> atoms, double w, double tol = kAtomTol) {
  if (w == 0.0) return;
  for (auto& c : out)
    if (same_atoms(c.atoms, atoms, tol)) {
      c.weight += w;
      return;
    }
  out.push_back({w, std::move(atoms)});
}

inline void sort_components(std::vector<Component>& cs) {
  std::sort(cs.begin(), cs.end(), [](const Component& a, const Component& b) {
    return std::lexicographical_compare(a.atoms.begin(), a.atoms.end(), b.atoms.begin(), b.atoms.end());
  });
}

}  // namespace detail

/// Law of the edge variables of K_n as a mixture of product distributions:
/// every latent assignment and every present/absent pattern is one term,
/// equal atom vectors merged.
inline MixtureComponentSet expand_kn_mixture(const WeightedParams& p, int n) {
  require_valid(p);
  if (n < 2) throw Error(ErrorCode::DomainError, "expand_kn_mixture: need at least 2 nodes");
  const int Q = p.groups();
  const std::size_t E = edge_count(n);
  const auto terms = detail::capped_pow(static_cast<std::uint64_t>(Q), static_cast<std::uint64_t>(n), kEnumerationGuard);
  if (E > 20 || terms > kEnumerationGuard || (terms << E) > kEnumerationGuard)
    throw Error(ErrorCode::SizeGuard, "expand_kn_mixture: Q^n * 2^(n choose 2) exceeds 10^7 terms");

  MixtureComponentSet out{static_cast<int>(E), {}};
  std::map<std::vector<std::pair<bool, double>>, double> merged;
  std::vector<std::pair<int, int>> groups(E);
  detail::for_each_assignment(Q, n, [&](const std::vector<int>& z) {
    double wz = 1.0;
    for (int zi : z) wz *= p.pi[static_cast<std::size_t>(zi)];
    std::size_t e = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) groups[e++] = {z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]};
    for (std::size_t present = 0; present < (std::size_t{1} << E); ++present) {
      double w = wz;
      std::vector<std::pair<bool, double>> key(E);
      for (std::size_t k = 0; k < E; ++k) {
        const auto [q, l] = groups[k];
        const double s = p.sparsity(q, l);
        if (present & (std::size_t{1} << k)) {
          w *= s;
          key[k] = {false, p.theta(q, l)};
        } else {
          w *= 1.0 - s;
          key[k] = {true, 0.0};
        }
      }
      if (w > 0.0) merged[key] += w;
    }
  });
  for (const auto& [key, w] : merged) {
    Component c{w, {}};
    for (const auto& [dirac, theta] : key) c.atoms.push_back(dirac ? Atom::zero() : Atom::family(theta));
    out.components.push_back(std::move(c));
  }
  detail::sort_components(out.components);
  return out;
}

/// Law of the triangle (X_01, X_02, X_12).
inline MixtureComponentSet expand_k3_mixture(const WeightedParams& p) { return expand_kn_mixture(p, 3); }

/// Law of one edge: sum over ordered (q,l) of pi_q pi_l [(1-p) delta_0 + p F].
inline MixtureComponentSet expand_edge_marginal(const WeightedParams& p) {
  require_valid(p);
  const int Q = p.groups();
  MixtureComponentSet out{1, {}};
  double absent = 0.0;
  for (int q = 0; q < Q; ++q)
    for (int l = 0; l < Q; ++l) {
      const double w = p.pi[static_cast<std::size_t>(q)] * p.pi[static_cast<std::size_t>(l)];
      absent += w * (1.0 - p.sparsity(q, l));
      detail::accumulate(out.components, {Atom::family(p.theta(q, l))}, w * p.sparsity(q, l), 0.0);
    }
  if (absent > 0.0) out.components.push_back({absent, {Atom::zero()}});
  detail::sort_components(out.components);
  return out;
}

// ---------------------------------------------------------------------------
// General weighted model from the triangle law.

namespace detail {

inline void require_arity(const MixtureComponentSet& s, int arity, const char* what) {
  if (s.arity != arity) throw Error(ErrorCode::InvalidParams, std::string(what) + ": wrong number of edge coordinates");
  for (const auto& c : s.components)
    if (static_cast<int>(c.atoms.size()) != arity || !(c.weight > 0.0))
      throw Error(ErrorCode::InvalidParams, std::string(what) + ": malformed component");
}

inline std::size_t find_theta(const std::vector<double>& values, double theta) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (std::abs(values[i] - theta) <= kAtomTol) return i;
  return values.size();
}

}  // namespace detail

/// Inverts the triangle mixture under distinct family parameters across
/// group pairs. Groups come out ordered by ascending within-group theta.
inline WeightedParams recover_from_k3(const MixtureComponentSet& k3, const MixtureComponentSet& marginal) {
  detail::require_arity(k3, 3, "recover_from_k3");
  detail::require_arity(marginal, 1, "recover_from_k3 marginal");

  // Only components with no absent edge matter for the family parameters.
  std::vector<const Component*> full;
  for (const auto& c : k3.components)
    if (std::none_of(c.atoms.begin(), c.atoms.end(), [](const Atom& a) { return a.dirac; })) full.push_back(&c);

  // (1) all three equal: theta_qq, weight (pi_q p_qq)^3
  std::vector<double> diag_theta, diag_c;
  for (const Component* c : full) {
    const auto& a = c->atoms;
    if (same_atom(a[0], a[1]) && same_atom(a[1], a[2])) {
      if (detail::find_theta(diag_theta, a[0].theta) != diag_theta.size())
        throw Error(ErrorCode::AssumptionViolated, "repeated within-group parameter: distinct-parameter assumption violated");
      diag_theta.push_back(a[0].theta);
      diag_c.push_back(std::cbrt(c->weight));
    }
  }
  const int Q = static_cast<int>(diag_theta.size());
  if (Q == 0) throw Error(ErrorCode::AssumptionViolated, "no all-equal component: wrong model or violated assumption");
  std::vector<std::size_t> order(static_cast<std::size_t>(Q));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return diag_theta[a] < diag_theta[b]; });
  std::vector<double> theta_qq(static_cast<std::size_t>(Q)), c_q(static_cast<std::size_t>(Q));
  for (int q = 0; q < Q; ++q) {
    theta_qq[static_cast<std::size_t>(q)] = diag_theta[order[static_cast<std::size_t>(q)]];
    c_q[static_cast<std::size_t>(q)] = diag_c[order[static_cast<std::size_t>(q)]];
  }

  // (2)-(3) exactly two equal: a singleton theta_qq and a pair theta_ql,
  // pooled over the three coordinate orders. Under distinct parameters each
  // pair value is shared by exactly the two heads q and l.
  struct Tail {
    double theta;
    std::vector<std::pair<std::size_t, double>> heads;  // (q, pooled weight)
  };
  std::vector<Tail> tails;
  for (const Component* c : full) {
    const auto& a = c->atoms;
    if (same_atom(a[0], a[1]) && same_atom(a[1], a[2])) continue;
    std::optional<std::pair<double, double>> head_tail;
    for (int k = 0; k < 3; ++k) {
      const auto& x = a[static_cast<std::size_t>(k)];
      const auto& y = a[static_cast<std::size_t>((k + 1) % 3)];
      const auto& s = a[static_cast<std::size_t>((k + 2) % 3)];
      if (same_atom(x, y)) head_tail = std::pair{s.theta, x.theta};
    }
    if (!head_tail) continue;  // three groups: all atoms distinct
    const auto [head, tail] = *head_tail;
    const std::size_t q = detail::find_theta(theta_qq, head);
    if (q == theta_qq.size() || detail::find_theta(theta_qq, tail) != theta_qq.size())
      throw Error(ErrorCode::AssumptionViolated,
                  "within- and between-group parameters coincide: distinct-parameter assumption violated");
    auto it = std::find_if(tails.begin(), tails.end(), [&](const Tail& t) { return std::abs(t.theta - tail) <= kAtomTol; });
    if (it == tails.end()) it = tails.insert(tails.end(), Tail{tail, {}});
    auto h = std::find_if(it->heads.begin(), it->heads.end(), [&](const auto& e) { return e.first == q; });
    if (h == it->heads.end()) it->heads.emplace_back(q, c->weight);
    else h->second += c->weight;
  }

  WeightedParams out;
  out.pi.assign(static_cast<std::size_t>(Q), 0.0);
  out.sparsity = Matrix::Zero(Q, Q);
  out.theta = Matrix::Zero(Q, Q);
  for (int q = 0; q < Q; ++q) out.theta(q, q) = theta_qq[static_cast<std::size_t>(q)];
  // r(q,l) = pooled / 3 / (pi_q p_qq) = pi_q pi_l p_ql^2
  Matrix r = Matrix::Constant(Q, Q, std::numeric_limits<double>::quiet_NaN());
  for (const Tail& t : tails) {
    if (t.heads.size() != 2)
      throw Error(ErrorCode::InconsistentMoments, "unmatched two-equal component in the triangle mixture");
    const auto q = static_cast<Eigen::Index>(t.heads[0].first), l = static_cast<Eigen::Index>(t.heads[1].first);
    if (!std::isnan(r(q, l)))
      throw Error(ErrorCode::AssumptionViolated, "two between-group parameters for one group pair");
    out.theta(q, l) = out.theta(l, q) = t.theta;
    r(q, l) = t.heads[0].second / 3.0 / c_q[static_cast<std::size_t>(q)];
    r(l, q) = t.heads[1].second / 3.0 / c_q[static_cast<std::size_t>(l)];
  }

  // (4) marginal: pi_q^2 p_qq at theta_qq, 2 pi_q pi_l p_ql at theta_ql.
  const auto marginal_weight = [&](double theta) {
    double w = 0.0;
    bool found = false;
    for (const auto& c : marginal.components)
      if (!c.atoms[0].dirac && std::abs(c.atoms[0].theta - theta) <= kAtomTol) {
        w += c.weight;
        found = true;
      }
    if (!found) throw Error(ErrorCode::InconsistentMoments, "edge marginal lacks the atom for theta = " + detail::fmt(theta));
    return w;
  };
  for (int q = 0; q < Q; ++q) {
    const double c = c_q[static_cast<std::size_t>(q)];
    const double p_qq = c * c / marginal_weight(theta_qq[static_cast<std::size_t>(q)]);
    out.sparsity(q, q) = p_qq;
    out.pi[static_cast<std::size_t>(q)] = c / p_qq;
  }
  for (int q = 0; q < Q; ++q)
    for (int l = 0; l < Q; ++l) {
      if (l == q) continue;
      if (std::isnan(r(q, l)))
        throw Error(ErrorCode::InconsistentMoments, "no triangle component for group pair (" + std::to_string(q) + "," +
                                                        std::to_string(l) + ")");
      const double half = marginal_weight(out.theta(q, l)) / 2.0;
      out.sparsity(q, l) = r(q, l) / half;
    }
  // average the two reads of each symmetric pair
  for (int q = 0; q < Q; ++q)
    for (int l = q + 1; l < Q; ++l) out.sparsity(q, l) = out.sparsity(l, q) = 0.5 * (out.sparsity(q, l) + out.sparsity(l, q));
  return out;
}

// ---------------------------------------------------------------------------
// Weighted affiliation model.

struct AffiliationWeightedEstimate {
  double alpha = 0.0;
  double beta = 0.0;
  double theta_in = 0.0;
  double theta_out = 0.0;
};

namespace detail {

inline double weight_of(const MixtureComponentSet& s, const std::vector<Atom>& atoms) {
  double w = 0.0;
  for (const auto& c : s.components)
    if (same_atoms(c.atoms, atoms, kAtomTol)) w += c.weight;
  return w;
}

}  // namespace detail

/// alpha, beta, theta_in and theta_out from the triangle mixture (all
/// branches, absent edges included).
inline AffiliationWeightedEstimate recover_affiliation_weighted(const MixtureComponentSet& k3) {
  detail::require_arity(k3, 3, "recover_affiliation_weighted");
  // Family atoms occurring in absent-free components, with multiplicity
  // pattern: a value seen as the pair of a two-equal component is theta_out.
  std::optional<double> theta_in, theta_out;
  std::vector<double> seen;
  for (const auto& c : k3.components) {
    const auto& a = c.atoms;
    if (std::any_of(a.begin(), a.end(), [](const Atom& x) { return x.dirac; })) continue;
    for (const auto& x : a)
      if (detail::find_theta(seen, x.theta) == seen.size()) seen.push_back(x.theta);
    for (int k = 0; k < 3; ++k) {
      const auto& x = a[static_cast<std::size_t>(k)];
      const auto& y = a[static_cast<std::size_t>((k + 1) % 3)];
      const auto& s = a[static_cast<std::size_t>((k + 2) % 3)];
      if (same_atom(x, y) && !same_atom(x, s)) {
        theta_out = x.theta;
        theta_in = s.theta;
      }
    }
  }
  if (seen.size() == 1)
    throw Error(ErrorCode::Unidentifiable, "theta_in = theta_out: affiliation parameters are not identifiable");
  if (!theta_in || seen.size() != 2)
    throw Error(ErrorCode::InconsistentMoments, "triangle mixture does not have the affiliation structure");
  AffiliationWeightedEstimate est;
  est.theta_in = *theta_in;
  est.theta_out = *theta_out;
  const Atom fin = Atom::family(est.theta_in), fout = Atom::family(est.theta_out), zero = Atom::zero();
  // coordinates are (X_01, X_02, X_12)
  const double all_in = detail::weight_of(k3, {fin, fin, fin});
  const double one_absent = detail::weight_of(k3, {zero, fin, fin});
  if (!(all_in > 0.0)) throw Error(ErrorCode::InconsistentMoments, "no all-within component in the triangle mixture");
  est.alpha = all_in / (all_in + one_absent);
  const double out_pair = detail::weight_of(k3, {fout, fout, fin});
  const double out_absent = detail::weight_of(k3, {zero, fout, fin});
  if (!(out_pair > 0.0)) throw Error(ErrorCode::InconsistentMoments, "no between-group pair component in the triangle mixture");
  est.beta = out_pair / (out_pair + out_absent);
  return est;
}

/// Weight of the component of the K_n mixture with every edge present at
/// theta_in: alpha^(n choose 2) * sum_q pi_q^n.
inline double all_in_weight(const MixtureComponentSet& kn, double theta_in) {
  return detail::weight_of(kn, std::vector<Atom>(static_cast<std::size_t>(kn.arity), Atom::family(theta_in)));
}

/// s_n = w_n / alpha^(n choose 2). weights[k] holds w_{k+2}; s_1 = 1.
inline PowerSums extract_power_sums_from_kn(const std::vector<double>& weights, double alpha, double tol = 1e-12) {
  if (!(alpha > tol)) throw Error(ErrorCode::DegenerateAlphaBeta, "alpha must be positive to extract power sums");
  PowerSums s;
  s.values.push_back(1.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const int n = static_cast<int>(k) + 2;
    s.values.push_back(weights[k] / std::pow(alpha, static_cast<double>(edge_count(n))));
  }
  return s;
}

/// Priors from the first Q power sums: Newton identities to elementary
/// symmetric polynomials, then the roots of prod (x - pi_q), ascending.
inline std::vector<double> recover_pi_newton(const PowerSums& s, int Q, double tol = 1e-8) {
  if (Q < 1 || s.order() < Q) throw Error(ErrorCode::MissingMoment, "recover_pi_newton: need power sums s_1..s_Q");
  std::vector<double> e(static_cast<std::size_t>(Q) + 1, 0.0);
  e[0] = 1.0;
  for (int k = 1; k <= Q; ++k) {
    double acc = 0.0;
    for (int i = 1; i <= k; ++i) acc += (i % 2 ? 1.0 : -1.0) * e[static_cast<std::size_t>(k - i)] * s(i);
    e[static_cast<std::size_t>(k)] = acc / k;
  }
  std::vector<double> coeffs(static_cast<std::size_t>(Q) + 1);
  for (int k = 0; k <= Q; ++k) coeffs[static_cast<std::size_t>(k)] = (k % 2 ? -1.0 : 1.0) * e[static_cast<std::size_t>(k)];
  std::vector<double> pi;
  for (const Complex& r : polynomial_roots(std::span<const double>(coeffs))) {
    if (std::abs(r.imag()) > tol || r.real() < -tol)
      throw Error(ErrorCode::InconsistentMoments, "power sums inconsistent with a probability vector");
    pi.push_back(std::max(r.real(), 0.0));
  }
  std::sort(pi.begin(), pi.end());
  return pi;
}

// ---------------------------------------------------------------------------
// Binning weighted edges into finitely many states.

namespace detail {

inline void require_ascending(const std::vector<double>& cuts) {
  for (std::size_t k = 0; k < cuts.size(); ++k)
    if (!std::isfinite(cuts[k]) || (k > 0 && !(cuts[k] > cuts[k - 1])))
      throw Error(ErrorCode::InvalidParams, "cutpoints must be finite and strictly ascending");
}

/// mu((-inf, x]) for mu = (1 - p) delta_0 + p F(theta).
inline double weighted_cdf(double p, double theta, double x) {
  return (x >= 0.0 ? 1.0 - p : 0.0) + p * truncated_poisson_cdf(x, theta);
}

}  // namespace detail

/// State k is the interval (u_k, u_{k+1}] with u_0 = -inf, u_kappa = +inf.
inline FiniteStateParams discretize(const WeightedParams& p, const std::vector<double>& cuts) {
  require_valid(p);
  detail::require_ascending(cuts);
  const int Q = p.groups();
  FiniteStateParams f;
  f.pi = p.pi;
  f.kappa = static_cast<int>(cuts.size()) + 1;
  f.probs.resize(static_cast<std::size_t>(Q) * static_cast<std::size_t>(Q));
  for (int q = 0; q < Q; ++q)
    for (int l = 0; l < Q; ++l) {
      auto& v = f.at(q, l);
      v.assign(static_cast<std::size_t>(f.kappa), 0.0);
      double prev = 0.0;
      for (std::size_t k = 0; k < cuts.size(); ++k) {
        const double cur = detail::weighted_cdf(p.sparsity(q, l), p.theta(q, l), cuts[k]);
        v[k] = cur - prev;
        prev = cur;
      }
      v.back() = 1.0 - prev;
    }
  return f;
}

inline int bin_of(double value, const std::vector<double>& cuts) {
  return static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

inline SampledGraph discretize(const SampledGraph& g, const std::vector<double>& cuts) {
  if (g.kind != EdgeKind::Weighted) throw Error(ErrorCode::DomainError, "discretize: weighted graph required");
  detail::require_ascending(cuts);
  SampledGraph out = g;
  out.kind = EdgeKind::Finite;
  out.kappa = static_cast<int>(cuts.size()) + 1;
  for (double& v : out.values) v = bin_of(v, cuts);
  return out;
}

struct BinIndependence {
  int rank = 0;
  int rows = 0;
  bool independent = false;
};

/// Numerical rank of the stacked state vectors of the unordered group pairs.
inline BinIndependence check_bin_independence(const FiniteStateParams& f, double rel_tol = 1e-9) {
  require_valid(f);
  const int Q = f.groups();
  const int rows = Q * (Q + 1) / 2;
  Matrix m(rows, f.kappa);
  int r = 0;
  for (int q = 0; q < Q; ++q)
    for (int l = q; l < Q; ++l, ++r)
      for (int k = 0; k < f.kappa; ++k) m(r, k) = f.at(q, l)[static_cast<std::size_t>(k)];
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return {rank, rows, rank == rows};
}

}  // namespace sbm_ident
