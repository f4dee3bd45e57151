#pragma once

// Occupancy function f(N, n, m): the probability that at least one of m
// disjoint cells of measure 1/n receives none of N i.i.d. points,
//   f = sum_{k=1}^m (-1)^{k+1} C(m, k) (1 - k/n)^N.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "covrad/error.hpp"

namespace covrad {

using Rational = boost::multiprecision::cpp_rational;

struct OccupancyParams {
  std::uint64_t N = 1;
  double n = 1.0;
  std::uint64_t m = 1;

  void validate() const {
    require(m >= 1, ErrorCode::kInvalidArgument, "occupancy needs m >= 1");
    require(std::isfinite(n), ErrorCode::kInvalidArgument, "occupancy needs finite n");
    require(static_cast<double>(m) <= n, ErrorCode::kInvalidArgument,
            "occupancy needs m <= n (cells must fit)");
    require(n <= static_cast<double>(N), ErrorCode::kInvalidArgument, "occupancy needs n <= N");
  }
};

enum class RegimeVariant { kI, kII, kIII };

struct RegimeSpec {
  RegimeVariant variant = RegimeVariant::kI;
  double kappa = 1.0;
  double alpha = 1.5;
  int d = 2;
};

inline std::string to_string(RegimeVariant v) {
  switch (v) {
    case RegimeVariant::kI: return "I";
    case RegimeVariant::kII: return "II";
    case RegimeVariant::kIII: return "III";
  }
  return "?";
}

/// Exact binary value of a double as a rational.
inline Rational exact_rational(double x) {
  require(std::isfinite(x), ErrorCode::kInvalidArgument, "non-finite value");
  int exp = 0;
  const double mant = std::frexp(x, &exp);
  // mant * 2^53 is an integer for every finite double.
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  Rational r(scaled);
  exp -= 53;
  boost::multiprecision::cpp_int pow2 = 1;
  pow2 <<= static_cast<unsigned>(std::abs(exp));
  if (exp >= 0) return r * pow2;
  return r / pow2;
}

/// Inclusion-exclusion sum in exact rational arithmetic.
inline Rational f_exact(std::uint64_t N, const Rational& n, std::uint64_t m) {
  require(m >= 1 && Rational(m) <= n && n <= Rational(N), ErrorCode::kInvalidArgument,
          "occupancy needs 1 <= m <= n <= N");
  const auto bits = [](const boost::multiprecision::cpp_int& v) -> double {
    return v == 0 ? 1.0 : static_cast<double>(boost::multiprecision::msb(abs(v)) + 1);
  };
  const double per_power = bits(numerator(n)) + bits(denominator(n)) + 64.0;
  require(static_cast<double>(N) * per_power <= static_cast<double>(1u << 22) && m <= 4096,
          ErrorCode::kResourceLimit, "exact occupancy sum exceeds the big-integer budget");
  Rational sum = 0;
  boost::multiprecision::cpp_int binom = 1;
  for (std::uint64_t k = 1; k <= m; ++k) {
    binom = binom * (m - k + 1) / k;
    const Rational base = 1 - Rational(k) / n;
    const auto e = static_cast<unsigned>(N);
    Rational term(boost::multiprecision::pow(numerator(base), e), boost::multiprecision::pow(denominator(base), e));
    term *= binom;
    if (k % 2 == 1) sum += term;
    else sum -= term;
  }
  return sum;
}

inline Rational f_exact(const OccupancyParams& p) {
  p.validate();
  return f_exact(p.N, exact_rational(p.n), p.m);
}

/// Forward recurrence over the points: state j = occupied target cells,
/// j -> j + 1 with probability (m - j)/n. O(N m) time.
inline double f_recurrence(const OccupancyParams& p) {
  p.validate();
  const std::size_t m = p.m;
  std::vector<double> dist(m + 1, 0.0);
  dist[0] = 1.0;
  std::size_t top = 0;  // highest reachable state
  for (std::uint64_t t = 0; t < p.N; ++t) {
    if (top < m) ++top;
    for (std::size_t j = top; j-- > 0;) {
      const double move = dist[j] * (static_cast<double>(m - j) / p.n);
      dist[j] -= move;
      dist[j + 1] += move;
    }
  }
  double f = 0.0;
  for (std::size_t j = 0; j < m; ++j) f += dist[j];
  return std::min(1.0, std::max(0.0, f));
}

/// Same probability through its generating function: P(all m cells hit) is
/// N! [y^N] (e^{y/n} - 1)^m e^{(n-m) y/n}. The coefficient is read off a
/// trapezoidal contour integral on the saddle-point circle, where all
/// coefficients are positive and aliasing decays like exp(-M^2 / 2N).
inline double f_contour(const OccupancyParams& p) {
  p.validate();
  using R = long double;
  using C = std::complex<R>;
  const R N = static_cast<R>(p.N), n = static_cast<R>(p.n), m = static_cast<R>(p.m);
  R log_all;
  if (p.N == p.m) {
    log_all = std::lgamma(N + 1) - N * std::log(n);
  } else {
    // Saddle u = R/n solves u ((m/n)/(1 - e^{-u}) + 1 - m/n) = N/n.
    const auto g = [&](R u) { return u * ((m / n) / -std::expm1(-u) + 1 - m / n) - N / n; };
    R lo = 0, hi = N / n + 1;
    for (int it = 0; it < 200 && hi - lo > hi * 1e-19L; ++it) {
      const R mid = 0.5L * (lo + hi);
      (g(mid) < 0 ? lo : hi) = mid;
    }
    const R u = 0.5L * (lo + hi);
    const R base = std::expm1(u);
    const std::uint64_t half = static_cast<std::uint64_t>(std::ceil(8.0 * std::sqrt(static_cast<double>(p.N)))) + 64;
    const std::uint64_t M = 2 * half;
    R sum = 1;  // theta = 0 term
    for (std::uint64_t j = 1; j <= half; ++j) {
      const R theta = 2 * std::numbers::pi_v<R> * static_cast<R>(j) / static_cast<R>(M);
      const R a = u * std::cos(theta), b = u * std::sin(theta);
      const C em1(std::expm1(a) * std::cos(b) - 2 * std::sin(b / 2) * std::sin(b / 2), std::exp(a) * std::sin(b));
      const C q = std::log(em1 / base);
      // N theta reduced exactly modulo 2 pi.
      const R phase_n = 2 * std::numbers::pi_v<R> *
                        static_cast<R>(((p.N % M) * j) % M) /
                        static_cast<R>(M);
      const R re = m * q.real() + (n - m) * (a - u);
      const R im = m * q.imag() + (n - m) * b - phase_n;
      const R term = std::exp(re) * std::cos(im);
      sum += j == half ? term : 2 * term;
    }
    const R mean = sum / static_cast<R>(M);
    log_all = std::lgamma(N + 1) + m * std::log(base) + (n - m) * u - N * std::log(n * u) + std::log(mean);
  }
  const R f = -std::expm1(log_all);
  return static_cast<double>(std::min<R>(1, std::max<R>(0, f)));
}

/// Production evaluator: the exact recurrence when N m is small, the
/// contour integral otherwise.
inline double f_dp(const OccupancyParams& p) {
  p.validate();
  if (static_cast<double>(p.N) * static_cast<double>(p.m) <= 2e7) return f_recurrence(p);
  return f_contour(p);
}

/// 1 - [1 - (1-1/n)^N]^m - (N/n^2) m(m-1)/2 (1-1/n)^{2(N-1)} [1 + (1-1/n)^{N-1}]^{m-2}
inline double f_lower_bound(const OccupancyParams& p) {
  p.validate();
  const double N = static_cast<double>(p.N), m = static_cast<double>(p.m);
  const double log_q = std::log1p(-1.0 / p.n);  // log(1 - 1/n)
  const double a = std::exp(N * log_q);
  const double first = -std::expm1(m * std::log1p(-a));
  if (p.m < 2) return first;
  const double b = std::exp((N - 1.0) * log_q);
  const double log_second = std::log(N) - 2.0 * std::log(p.n) + std::log(m * (m - 1.0) / 2.0) +
                            2.0 * (N - 1.0) * log_q + (m - 2.0) * std::log1p(b);
  return first - std::exp(log_second);
}

/// (N, n, m) for one of the three scaling regimes.
inline OccupancyParams regime_params(const RegimeSpec& spec, std::uint64_t N) {
  require(spec.kappa > 0.0 && std::isfinite(spec.kappa), ErrorCode::kInvalidArgument,
          "kappa must be positive");
  require(std::isfinite(spec.alpha), ErrorCode::kInvalidArgument, "alpha must be finite");
  if (spec.variant == RegimeVariant::kI) {
    require(spec.kappa <= 1.0, ErrorCode::kInvalidArgument, "variant I needs kappa <= 1");
  } else {
    require(spec.d >= 2, ErrorCode::kInvalidArgument, "variants II and III need d >= 2");
  }
  require(N >= 3, ErrorCode::kInvalidArgument, "regimes need N >= 3");
  const double Nd = static_cast<double>(N);
  const double L = std::log(Nd);
  const double d = spec.d;
  double lead = 1.0, expo = 1.0;
  if (spec.variant == RegimeVariant::kII) {
    lead = (d - 1.0) / d;
    expo = (d - 1.0) / d;
  } else if (spec.variant == RegimeVariant::kIII) {
    lead = 1.0 / d;
    expo = 1.0 / d;
  }
  const double denom = lead * L - spec.alpha * std::log(L);
  require(denom > 0.0, ErrorCode::kInvalidArgument,
          "regime denominator is not positive at N = " + std::to_string(N));
  OccupancyParams p;
  p.N = N;
  p.n = Nd / denom;
  const double mf = std::floor(spec.kappa * std::pow(p.n, expo));
  require(mf >= 1.0, ErrorCode::kInvalidArgument, "regime gives m < 1 at N = " + std::to_string(N));
  p.m = static_cast<std::uint64_t>(mf);
  p.validate();
  return p;
}

}  // namespace covrad
