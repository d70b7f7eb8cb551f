#pragma once

// Univariate polynomial utilities. Coefficients are stored in descending
// order: c[0] x^d + c[1] x^{d-1} + ... + c[d].

#include <sbm_ident/error.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

namespace sbm_ident {

using Complex = std::complex<double>;

template <class T>
T horner(std::span<const double> coeffs, T x) {
  T acc{0};
  for (double c : coeffs) acc = acc * x + c;
  return acc;
}

inline double horner(std::span<const double> coeffs, double x) { return horner<double>(coeffs, x); }

inline std::vector<double> derivative(std::span<const double> coeffs) {
  std::vector<double> out;
  if (coeffs.size() <= 1) return {0.0};
  const auto deg = coeffs.size() - 1;
  out.reserve(deg);
  for (std::size_t i = 0; i < deg; ++i) out.push_back(coeffs[i] * static_cast<double>(deg - i));
  return out;
}

/// Monic polynomial with the given (complex) roots.
inline std::vector<Complex> poly_from_roots(std::span<const Complex> roots) {
  std::vector<Complex> c{Complex(1.0)};
  for (const Complex& r : roots) {
    c.push_back(Complex(0.0));
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
  }
  return c;
}

// ---------------------------------------------------------------------------
// Cubic with a single real root.

struct CubicRoot {
  double root = 0.0;
  /// Discriminant of the depressed cubic t^3 + p t + q: q^2/4 + p^3/27.
  double discriminant = 0.0;
  bool bisection_agrees = true;
};

/// Real root of the depressed cubic t^3 + p t + q for p >= 0 (one real root).
/// Uses the cancellation-free Cardano branch.
inline double depressed_cubic_root(double p, double q) {
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  const double s = std::sqrt(std::max(disc, 0.0));
  const double a = -std::copysign(std::cbrt(std::abs(q) / 2.0 + s), q);
  if (a == 0.0) return 0.0;
  return a - p / (3.0 * a);
}

/// Bisection for an increasing function on [lo, hi]; returns the sign change.
template <class F>
double bisect_increasing(F&& f, double lo, double hi, int iterations = 200) {
  for (int i = 0; i < iterations && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Unique real root of the monic cubic x^3 + a x^2 + b x + c, assuming the
/// derivative is nonnegative everywhere (a^2 <= 3b). Solved in closed form,
/// Newton-polished, and cross-checked by bisection on [lo, hi].
inline CubicRoot solve_monotone_cubic(double a, double b, double c, double lo = -1.0, double hi = 2.0) {
  const double shift = -a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const std::vector<double> coeffs{1.0, a, b, c};
  const std::vector<double> slope = derivative(coeffs);

  CubicRoot out;
  out.discriminant = q * q / 4.0 + p * p * p / 27.0;
  double x = depressed_cubic_root(std::max(p, 0.0), q) + shift;
  for (int i = 0; i < 3; ++i) {
    const double d = horner(std::span<const double>(slope), x);
    if (d <= 0.0) break;
    const double step = horner(std::span<const double>(coeffs), x) / d;
    if (!std::isfinite(step)) break;
    x -= step;
  }
  out.root = x;

  const auto f = [&](double t) { return horner(std::span<const double>(coeffs), t); };
  if (f(lo) < 0.0 && f(hi) > 0.0) {
    const double check = bisect_increasing(f, lo, hi);
    out.bisection_agrees = std::abs(check - x) <= 1e-9 * std::max(1.0, std::abs(x));
    if (!out.bisection_agrees) out.root = check;
  }
  return out;
}

// ---------------------------------------------------------------------------
// General roots via the companion matrix, with repair of multiple roots.

namespace detail {

inline std::vector<Complex> companion_roots(const std::vector<double>& monic) {
  const auto deg = static_cast<Eigen::Index>(monic.size()) - 1;
  if (deg <= 0) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (Eigen::Index j = 0; j < deg; ++j) comp(0, j) = -monic[static_cast<std::size_t>(j + 1)];
  for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, false);
  std::vector<Complex> roots;
  for (Eigen::Index i = 0; i < deg; ++i) roots.push_back(solver.eigenvalues()(i));
  return roots;
}

inline Complex newton_refine(const std::vector<double>& coeffs, Complex x, int iterations = 60) {
  const auto d = derivative(coeffs);
  for (int i = 0; i < iterations; ++i) {
    const Complex fx = horner<Complex>(coeffs, x);
    const Complex dx = horner<Complex>(d, x);
    if (std::abs(dx) == 0.0) break;
    const Complex step = fx / dx;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    const Complex next = x - step;
    if (std::abs(horner<Complex>(coeffs, next)) > std::abs(fx)) break;
    x = next;
    if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

inline double coefficient_residual(const std::vector<double>& monic, const std::vector<Complex>& roots) {
  const auto rebuilt = poly_from_roots(roots);
  double err = 0.0;
  for (std::size_t i = 0; i < monic.size(); ++i) err = std::max(err, std::abs(rebuilt[i] - monic[i]));
  return err;
}

/// Merge roots closer than `tol` into clusters; each cluster of size k is
/// re-solved as a simple root of the (k-1)-th derivative.
inline std::vector<Complex> clustered_roots(const std::vector<double>& monic, std::vector<Complex> raw, double tol) {
  std::vector<int> label(raw.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (label[i] >= 0) continue;
    label[i] = next;
    // single linkage
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < raw.size(); ++j) {
        if (label[j] >= 0) continue;
        for (std::size_t k = 0; k < raw.size(); ++k)
          if (label[k] == next && std::abs(raw[j] - raw[k]) <= tol) {
            label[j] = next;
            grew = true;
            break;
          }
      }
    }
    ++next;
  }
  std::vector<Complex> out;
  for (int c = 0; c < next; ++c) {
    Complex mean{0.0};
    int k = 0;
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (label[i] == c) {
        mean += raw[i];
        ++k;
      }
    mean /= static_cast<double>(k);
    std::vector<double> d = monic;
    for (int j = 1; j < k; ++j) d = derivative(d);
    const Complex root = newton_refine(d, mean);
    for (int j = 0; j < k; ++j) out.push_back(root);
  }
  return out;
}

}  // namespace detail

/// All complex roots (with multiplicity) of a polynomial with nonzero
/// leading coefficient. Exact multiple roots, which the eigenvalue route
/// scatters by O(eps^{1/k}), are re-joined when doing so reproduces the
/// coefficients to working precision.
inline std::vector<Complex> polynomial_roots(std::span<const double> coeffs) {
  if (coeffs.empty() || coeffs[0] == 0.0)
    throw Error(ErrorCode::DomainError, "polynomial_roots: leading coefficient must be nonzero");
  std::vector<double> monic(coeffs.begin(), coeffs.end());
  for (double& c : monic) c /= coeffs[0];
  auto raw = detail::companion_roots(monic);

  double scale = 0.0;
  for (double c : monic) scale = std::max(scale, std::abs(c));
  const double accept = 1e-12 * (1.0 + scale);

  for (double tol : {1e-1, 5e-2, 1e-2, 1e-3, 1e-5, 1e-7}) {
    auto merged = detail::clustered_roots(monic, raw, tol);
    if (merged.size() == raw.size() && detail::coefficient_residual(monic, merged) <= accept) return merged;
  }
  for (Complex& r : raw) r = detail::newton_refine(monic, r);
  return raw;
}

struct RealRoot {
  double value = 0.0;
  int multiplicity = 1;
};

/// Distinct real roots (imaginary part within `imag_tol`), ascending.
inline std::vector<RealRoot> real_roots(std::span<const double> coeffs, double imag_tol = 1e-7) {
  const auto roots = polynomial_roots(coeffs);
  std::vector<double> reals;
  for (const Complex& r : roots)
    if (std::abs(r.imag()) <= imag_tol * std::max(1.0, std::abs(r.real()))) reals.push_back(r.real());
  std::sort(reals.begin(), reals.end());
  std::vector<RealRoot> out;
  for (double r : reals) {
    if (!out.empty() && std::abs(out.back().value - r) <= 1e-12 * std::max(1.0, std::abs(r)))
      ++out.back().multiplicity;
    else
      out.push_back({r, 1});
  }
  return out;
}

}  // namespace sbm_ident
