#pragma once

// Parameter bundles for the four random graph mixture families, plus the
// small combinatorial helpers (edge indexing, power sums) shared by every
// other module.

#include <sbm_ident/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace sbm_ident {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Absolute tolerance on probability vectors summing to one.
inline constexpr double kProbabilitySumTol = 1e-12;

// ---------------------------------------------------------------------------
// Edge indexing. Edges of K_n are ordered lexicographically:
// (0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1). Node labels are 0-based.

constexpr std::size_t edge_count(int n) {
  return n < 2 ? 0 : static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
}

/// Position of edge {i,j} (i != j) in the lexicographic order.
constexpr std::size_t edge_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  const auto ii = static_cast<std::size_t>(i);
  return ii * (2 * static_cast<std::size_t>(n) - ii - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

using Edge = std::pair<int, int>;

inline std::vector<Edge> edge_list(int n) {
  std::vector<Edge> out;
  out.reserve(edge_count(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Model families.

/// Binary edges: P(X_ij = 1 | Z_i = q, Z_j = l) = P(q,l).
struct BinaryBlockParams {
  std::vector<double> pi;
  Matrix P;

  int groups() const { return static_cast<int>(pi.size()); }
};

/// Binary affiliation model: alpha within groups, beta across groups.
struct AffiliationParams {
  std::vector<double> pi;
  double alpha = 0.0;
  double beta = 0.0;

  int groups() const { return static_cast<int>(pi.size()); }
};

/// Edges take one of kappa states 0..kappa-1 with group-pair dependent law.
struct FiniteStateParams {
  std::vector<double> pi;
  int kappa = 2;
  /// Row-major Q x Q table of state distributions, each of length kappa.
  std::vector<std::vector<double>> probs;

  int groups() const { return static_cast<int>(pi.size()); }
  const std::vector<double>& at(int q, int l) const {
    return probs[static_cast<std::size_t>(q) * pi.size() + static_cast<std::size_t>(l)];
  }
  std::vector<double>& at(int q, int l) {
    return probs[static_cast<std::size_t>(q) * pi.size() + static_cast<std::size_t>(l)];
  }
};

/// Parametric families for present-edge weights. Only the zero-truncated
/// Poisson is implemented; Gaussian or Laplace kernels would slot in here.
enum class WeightFamily { TruncatedPoisson };

/// Weighted edges: mu_ql = (1 - p_ql) delta_0 + p_ql F(., theta_ql).
struct WeightedParams {
  std::vector<double> pi;
  Matrix sparsity;
  WeightFamily family = WeightFamily::TruncatedPoisson;
  Matrix theta;

  int groups() const { return static_cast<int>(pi.size()); }
};

/// s_k = sum_q pi_q^k for k = 1..K, stored 0-based (values[k-1] = s_k).
struct PowerSums {
  std::vector<double> values;

  double operator()(int k) const { return values.at(static_cast<std::size_t>(k - 1)); }
  int order() const { return static_cast<int>(values.size()); }
};

// ---------------------------------------------------------------------------
// Validation. Each overload returns human-readable violations; empty = valid.

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

inline void check_pi(const std::vector<double>& pi, std::vector<std::string>& out) {
  if (pi.empty()) {
    out.emplace_back("pi is empty (Q must be positive)");
    return;
  }
  double sum = 0.0;
  for (std::size_t q = 0; q < pi.size(); ++q) {
    if (!(pi[q] > 0.0)) out.push_back("pi[" + std::to_string(q) + "] = " + fmt(pi[q]) + " is not positive");
    sum += pi[q];
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTol) out.push_back("pi sums to " + fmt(sum));
}

inline void check_square(const Matrix& m, int Q, const char* name, std::vector<std::string>& out) {
  if (m.rows() != Q || m.cols() != Q)
    out.push_back(std::string(name) + " must be " + std::to_string(Q) + "x" + std::to_string(Q));
}

inline bool check_symmetric(const Matrix& m, const char* name, std::vector<std::string>& out) {
  for (Eigen::Index q = 0; q < m.rows(); ++q)
    for (Eigen::Index l = q + 1; l < m.cols(); ++l)
      if (m(q, l) != m(l, q)) {
        out.push_back(std::string(name) + " symmetry violated at (" + std::to_string(q) + "," +
                      std::to_string(l) + "): " + fmt(m(q, l)) + " != " + fmt(m(l, q)));
        return false;
      }
  return true;
}

}  // namespace detail

inline std::vector<std::string> validate(const BinaryBlockParams& p) {
  std::vector<std::string> out;
  detail::check_pi(p.pi, out);
  detail::check_square(p.P, p.groups(), "P", out);
  if (!out.empty() && (p.P.rows() != p.groups() || p.P.cols() != p.groups())) return out;
  detail::check_symmetric(p.P, "P", out);
  for (Eigen::Index q = 0; q < p.P.rows(); ++q)
    for (Eigen::Index l = 0; l < p.P.cols(); ++l)
      if (!(p.P(q, l) >= 0.0 && p.P(q, l) <= 1.0))
        out.push_back("P(" + std::to_string(q) + "," + std::to_string(l) + ") = " + detail::fmt(p.P(q, l)) +
                      " outside [0,1]");
  return out;
}

inline std::vector<std::string> validate(const AffiliationParams& p) {
  std::vector<std::string> out;
  detail::check_pi(p.pi, out);
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) out.push_back("alpha = " + detail::fmt(p.alpha) + " outside [0,1]");
  if (!(p.beta >= 0.0 && p.beta <= 1.0)) out.push_back("beta = " + detail::fmt(p.beta) + " outside [0,1]");
  return out;
}

inline std::vector<std::string> validate(const FiniteStateParams& p) {
  std::vector<std::string> out;
  detail::check_pi(p.pi, out);
  const int Q = p.groups();
  if (p.kappa < 2) out.push_back("kappa = " + std::to_string(p.kappa) + " must be at least 2");
  if (p.probs.size() != static_cast<std::size_t>(Q) * static_cast<std::size_t>(Q)) {
    out.push_back("state table must hold Q*Q vectors");
    return out;
  }
  for (int q = 0; q < Q; ++q)
    for (int l = 0; l < Q; ++l) {
      const auto& v = p.at(q, l);
      const std::string tag = "(" + std::to_string(q) + "," + std::to_string(l) + ")";
      if (static_cast<int>(v.size()) != p.kappa) {
        out.push_back("state vector " + tag + " has length " + std::to_string(v.size()));
        continue;
      }
      double sum = 0.0;
      for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) out.push_back("state vector " + tag + " has entry " + detail::fmt(x));
        sum += x;
      }
      if (std::abs(sum - 1.0) > kProbabilitySumTol)
        out.push_back("state vector " + tag + " sums to " + detail::fmt(sum));
      if (l > q && v != p.at(l, q)) out.push_back("state table symmetry violated at " + tag);
    }
  return out;
}

inline std::vector<std::string> validate(const WeightedParams& p) {
  std::vector<std::string> out;
  detail::check_pi(p.pi, out);
  const int Q = p.groups();
  detail::check_square(p.sparsity, Q, "sparsity", out);
  detail::check_square(p.theta, Q, "theta", out);
  if (p.sparsity.rows() != Q || p.sparsity.cols() != Q || p.theta.rows() != Q || p.theta.cols() != Q) return out;
  detail::check_symmetric(p.sparsity, "sparsity", out);
  detail::check_symmetric(p.theta, "theta", out);
  for (int q = 0; q < Q; ++q)
    for (int l = 0; l < Q; ++l) {
      const double s = p.sparsity(q, l);
      if (!(s > 0.0 && s <= 1.0))
        out.push_back("sparsity(" + std::to_string(q) + "," + std::to_string(l) + ") = " + detail::fmt(s) +
                      " outside (0,1]");
      if (p.family == WeightFamily::TruncatedPoisson && !(p.theta(q, l) > 0.0))
        out.push_back("theta(" + std::to_string(q) + "," + std::to_string(l) + ") = " +
                      detail::fmt(p.theta(q, l)) + " is not a positive Poisson rate");
    }
  return out;
}

template <class Params>
void require_valid(const Params& p) {
  const auto issues = validate(p);
  if (issues.empty()) return;
  std::string msg = "invalid parameters:";
  for (const auto& s : issues) msg += " " + s + ";";
  throw Error(ErrorCode::InvalidParams, msg);
}

// ---------------------------------------------------------------------------

inline PowerSums power_sums(const std::vector<double>& pi, int K) {
  if (K < 1) throw Error(ErrorCode::DomainError, "power_sums: order K must be at least 1");
  PowerSums out;
  out.values.assign(static_cast<std::size_t>(K), 0.0);
  for (double p : pi) {
    double term = 1.0;
    for (int k = 0; k < K; ++k) {
      term *= p;
      out.values[static_cast<std::size_t>(k)] += term;
    }
  }
  return out;
}

inline BinaryBlockParams affiliation_to_block(const AffiliationParams& a) {
  const int Q = a.groups();
  BinaryBlockParams b{a.pi, Matrix::Constant(Q, Q, a.beta)};
  b.P.diagonal().setConstant(a.alpha);
  return b;
}

/// Binary edges as a two-state model: state 0 = absent, state 1 = present.
inline FiniteStateParams as_finite_state(const BinaryBlockParams& b) {
  const int Q = b.groups();
  FiniteStateParams f;
  f.pi = b.pi;
  f.kappa = 2;
  f.probs.resize(static_cast<std::size_t>(Q) * static_cast<std::size_t>(Q));
  for (int q = 0; q < Q; ++q)
    for (int l = 0; l < Q; ++l) f.at(q, l) = {1.0 - b.P(q, l), b.P(q, l)};
  return f;
}

/// Weighted affiliation specialization: (alpha, theta_in) within groups,
/// (beta, theta_out) across groups.
inline WeightedParams weighted_affiliation(std::vector<double> pi, double alpha, double beta, double theta_in,
                                           double theta_out) {
  const auto Q = static_cast<Eigen::Index>(pi.size());
  WeightedParams w;
  w.pi = std::move(pi);
  w.sparsity = Matrix::Constant(Q, Q, beta);
  w.sparsity.diagonal().setConstant(alpha);
  w.theta = Matrix::Constant(Q, Q, theta_out);
  w.theta.diagonal().setConstant(theta_in);
  return w;
}

inline std::vector<double> uniform_pi(int Q) { return std::vector<double>(static_cast<std::size_t>(Q), 1.0 / Q); }

}  // namespace sbm_ident
