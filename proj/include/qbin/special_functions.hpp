#pragma once

namespace qbin {

/// Accuracy contract for the special functions below.
///
/// Shapes up to `asymptotic_threshold` are evaluated by the power series or the
/// continued fraction and meet `abs_tol`/`rel_tol`. Larger shapes use the uniform
/// asymptotic expansion and meet `large_shape_abs_tol`.
struct EvalDomain {
  double max_shape = 1e8;
  double asymptotic_threshold = 1e4;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double large_shape_abs_tol = 1e-9;

  constexpr double abs_tol_for(double a) const noexcept {
    return a <= asymptotic_threshold ? abs_tol : large_shape_abs_tol;
  }
};

inline constexpr EvalDomain kEvalDomain{};

/// ln Γ(a) for a > 0.
double log_gamma(double a);

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a). `x` may be +inf.
double reg_lower_incomplete_gamma(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly.
double reg_upper_incomplete_gamma(double a, double x);

/// P(a, x_hi) - P(a, x_lo) for 0 <= x_lo <= x_hi, evaluated on whichever tail
/// avoids cancellation. Either bound may be +inf.
double reg_gamma_diff(double a, double x_lo, double x_hi);

double erf(double x);

namespace detail {

struct GammaPair {
  double lower;
  double upper;
};

/// Temme's uniform asymptotic expansion, exposed for cross-checks against the
/// series/continued-fraction route. Valid for any x > 0, accurate for large a.
GammaPair temme_incomplete_gamma(double a, double x);

/// Coefficients C0(eta), C1(eta) of the expansion. `lambda` is x / a.
double temme_c0(double eta, double lambda);
double temme_c1(double eta, double lambda);

}  // namespace detail
}  // namespace qbin
