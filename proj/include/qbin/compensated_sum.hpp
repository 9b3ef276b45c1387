#pragma once

#include <cmath>

namespace qbin {

/// Neumaier-compensated running sum. Merging two partial sums keeps the
/// compensation, so chunked and sequential accumulation agree to rounding.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double value) noexcept {
    const double t = sum + value;
    if (std::abs(sum) >= std::abs(value)) {
      carry += (sum - t) + value;
    } else {
      carry += (value - t) + sum;
    }
    sum = t;
  }

  CompensatedSum& operator+=(const CompensatedSum& other) noexcept {
    add(other.sum);
    add(other.carry);
    return *this;
  }

  double value() const noexcept { return sum + carry; }
};

inline CompensatedSum operator+(CompensatedSum lhs, const CompensatedSum& rhs) noexcept {
  lhs += rhs;
  return lhs;
}

}  // namespace qbin
