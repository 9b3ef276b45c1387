#include "qbin/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "qbin/errors.hpp"

namespace qbin {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
constexpr int kMaxIterations = 1'000'000;

void check_shape(double a) {
  if (!std::isfinite(a) || a <= 0.0) {
    throw DomainError("incomplete gamma: shape must be positive and finite, got " + std::to_string(a));
  }
  if (a > kEvalDomain.max_shape) {
    throw DomainError("incomplete gamma: shape " + std::to_string(a) + " exceeds supported maximum");
  }
}

void check_argument(double x) {
  if (std::isnan(x) || x < 0.0) {
    throw DomainError("incomplete gamma: argument must be nonnegative, got " + std::to_string(x));
  }
}

// t - log1p(t), exact to rounding near t = 0.
double log1pmx_neg(double t) {
  if (std::abs(t) < 0.1) {
    double power = t * t;
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double term = power / k;
      sum += (k % 2 == 0) ? term : -term;
      if (std::abs(term) < kEps * std::abs(sum)) break;
      power *= t;
    }
    return sum;
  }
  return t - std::log1p(t);
}

// ln Γ(a+1) - [(a+1/2) ln a - a + ln √(2π)]
double stirling_error(double a) {
  if (a < 15.0) {
    return log_gamma(a + 1.0) - (a + 0.5) * std::log(a) + a - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double inv = 1.0 / a;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
}

// x^a e^{-x} / Γ(a+1), without forming either power.
double power_prefactor(double a, double x) {
  const double t = (x - a) / a;
  const double log_value =
      -a * log1pmx_neg(t) - 0.5 * std::log(2.0 * std::numbers::pi * a) - stirling_error(a);
  return std::exp(log_value);
}

double lower_series(double a, double x) {
  double term = 1.0;
  double sum = 1.0;
  double denom = a;
  for (int i = 0; i < kMaxIterations; ++i) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (term < sum * kEps) {
      return std::min(1.0, power_prefactor(a, x) * sum);
    }
  }
  throw NumericError("incomplete gamma series did not converge", a, x);
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double upper_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::min(1.0, a * power_prefactor(a, x) * h);
    }
  }
  throw NumericError("incomplete gamma continued fraction did not converge", a, x);
}

detail::GammaPair incomplete_gamma(double a, double x) {
  check_shape(a);
  check_argument(x);
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  if (a > kEvalDomain.asymptotic_threshold) {
    return detail::temme_incomplete_gamma(a, x);
  }
  if (x < a + 1.0) {
    const double p = lower_series(a, x);
    return {p, 1.0 - p};
  }
  const double q = upper_continued_fraction(a, x);
  return {1.0 - q, q};
}

}  // namespace

double log_gamma(double a) {
  if (!std::isfinite(a) || a <= 0.0) {
    throw DomainError("log_gamma: argument must be positive and finite, got " + std::to_string(a));
  }
  return boost::math::lgamma(a);
}

double reg_lower_incomplete_gamma(double a, double x) { return incomplete_gamma(a, x).lower; }

double reg_upper_incomplete_gamma(double a, double x) { return incomplete_gamma(a, x).upper; }

double reg_gamma_diff(double a, double x_lo, double x_hi) {
  check_shape(a);
  check_argument(x_lo);
  check_argument(x_hi);
  if (x_hi < x_lo) {
    throw ContractError("reg_gamma_diff: upper bound " + std::to_string(x_hi) + " below lower bound " +
                        std::to_string(x_lo));
  }
  if (x_hi == x_lo) return 0.0;
  double diff;
  if (x_lo >= a) {
    diff = incomplete_gamma(a, x_lo).upper - incomplete_gamma(a, x_hi).upper;
  } else {
    diff = incomplete_gamma(a, x_hi).lower - incomplete_gamma(a, x_lo).lower;
  }
  return std::clamp(diff, 0.0, 1.0);
}

double erf(double x) {
  if (!std::isfinite(x)) {
    throw DomainError("erf: argument must be finite");
  }
  return std::erf(x);
}

namespace detail {

namespace {
constexpr double kTaylorRadius = 0.05;

double polynomial(const double* coeffs, int count, double x) {
  double acc = 0.0;
  for (int i = count - 1; i >= 0; --i) acc = acc * x + coeffs[i];
  return acc;
}
}  // namespace

double temme_c0(double eta, double lambda) {
  if (std::abs(eta) < kTaylorRadius) {
    static constexpr double coeffs[] = {
        -1.0 / 3.0,         1.0 / 12.0,          -2.0 / 135.0,         1.0 / 864.0,
        1.0 / 2835.0,       -139.0 / 777600.0,   1.0 / 25515.0,        -571.0 / 261273600.0,
    };
    return polynomial(coeffs, 8, eta);
  }
  return 1.0 / (lambda - 1.0) - 1.0 / eta;
}

double temme_c1(double eta, double lambda) {
  if (std::abs(eta) < kTaylorRadius) {
    static constexpr double coeffs[] = {
        -0.0018518518518518519, -0.0034722222222222222, 0.0026455026455026455,
        -0.00099022633744855967, 0.00020576131687242798, -0.40187757201646091e-6,
        -0.18098550334489978e-4, 0.76491609160811101e-5,
    };
    return polynomial(coeffs, 8, eta);
  }
  const double t = lambda - 1.0;
  return 1.0 / (eta * eta * eta) - 1.0 / (t * t * t) - 1.0 / (t * t) - 1.0 / (12.0 * t);
}

GammaPair temme_incomplete_gamma(double a, double x) {
  const double lambda = x / a;
  const double t = lambda - 1.0;
  const double phi = log1pmx_neg(t);
  const double eta = std::copysign(std::sqrt(2.0 * phi), t);
  const double z = eta * std::sqrt(0.5 * a);
  // erfc(38) underflows; the correction term is smaller still.
  if (z > 38.0) return {1.0, 0.0};
  if (z < -38.0) return {0.0, 1.0};
  const double series = temme_c0(eta, lambda) + temme_c1(eta, lambda) / a;
  const double correction = std::exp(-a * phi) / std::sqrt(2.0 * std::numbers::pi * a) * series;
  const double upper = 0.5 * std::erfc(z) + correction;
  const double lower = 0.5 * std::erfc(-z) - correction;
  return {std::clamp(lower, 0.0, 1.0), std::clamp(upper, 0.0, 1.0)};
}

}  // namespace detail
}  // namespace qbin
