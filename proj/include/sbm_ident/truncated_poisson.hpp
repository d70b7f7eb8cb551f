#pragma once

#include <sbm_ident/error.hpp>
#include <sbm_ident/random.hpp>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <random>

namespace sbm_ident {

/// Zero-truncated Poisson mass theta^k / (k! (e^theta - 1)), k >= 1.
inline double truncated_poisson_density(std::int64_t k, double theta) {
  if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "truncated Poisson rate must be positive");
  if (k < 1) throw Error(ErrorCode::DomainError, "truncated Poisson has no mass below 1");
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(theta) - std::lgamma(kd + 1.0) - std::log(std::expm1(theta)));
}

/// P(K <= x) for the zero-truncated Poisson, x real.
inline double truncated_poisson_cdf(double x, double theta) {
  if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "truncated Poisson rate must be positive");
  if (x < 1.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double k = std::floor(x);
  // P(K > k) = P(Pois >= k+1) / P(Pois >= 1)
  const double upper = boost::math::gamma_p(k + 1.0, theta) / -std::expm1(-theta);
  return 1.0 - upper;
}

/// Draw from the zero-truncated Poisson. Rejection from the ordinary Poisson
/// for theta >= 0.1; below that the acceptance rate degrades like theta, so
/// a sequential inverse-CDF scan is used instead.
inline std::int64_t sample_truncated_poisson(double theta, Rng& gen) {
  if (!(theta > 0.0)) throw Error(ErrorCode::DomainError, "truncated Poisson rate must be positive");
  if (theta >= 0.1) {
    std::poisson_distribution<std::int64_t> pois(theta);
    for (;;) {
      const auto k = pois(gen);
      if (k > 0) return k;
    }
  }
  const double u = uniform01(gen);
  double mass = theta / std::expm1(theta);
  double cdf = mass;
  std::int64_t k = 1;
  while (u > cdf && k < 1000) {
    ++k;
    mass *= theta / static_cast<double>(k);
    cdf += mass;
  }
  return k;
}

inline std::int64_t sample_truncated_poisson(double theta, std::uint64_t seed) {
  Rng gen = make_rng(seed);
  return sample_truncated_poisson(theta, gen);
}

}  // namespace sbm_ident
