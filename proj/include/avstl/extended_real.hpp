#pragma once

#include <cassert>
#include <cmath>
#include <limits>

namespace avstl {

/// A real number extended with the two poles +inf / -inf.
///
/// Backed by an IEEE double, which already implements the required algebra:
/// total order, lattice min/max, negation, addition with a finite number and
/// scaling by a positive finite factor. NaN is never stored; the operations
/// that could create one (inf - inf, 0 * inf) are asserted against instead of
/// being silently produced.
class ExtendedReal {
 public:
  constexpr ExtendedReal() : v_(0.0) {}
  constexpr ExtendedReal(double v) : v_(v) { assert(!std::isnan(v)); }

  static constexpr ExtendedReal plus_inf() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }
  static constexpr ExtendedReal minus_inf() {
    return ExtendedReal(-std::numeric_limits<double>::infinity());
  }

  constexpr double raw() const { return v_; }
  constexpr bool is_finite() const { return std::isfinite(v_); }
  constexpr bool is_plus_inf() const {
    return v_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_minus_inf() const {
    return v_ == -std::numeric_limits<double>::infinity();
  }

  constexpr ExtendedReal operator-() const { return ExtendedReal(-v_); }

  /// Addition with a finite offset; inf + finite stays inf.
  constexpr ExtendedReal operator+(double d) const {
    assert(std::isfinite(d));
    return ExtendedReal(v_ + d);
  }

  /// Scaling by a strictly positive finite factor; poles are preserved.
  constexpr ExtendedReal scaled(double k) const {
    assert(std::isfinite(k) && k > 0.0);
    return ExtendedReal(v_ * k);
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.v_ == b.v_;
  }
  friend constexpr bool operator<(ExtendedReal a, ExtendedReal b) {
    return a.v_ < b.v_;
  }
  friend constexpr bool operator<=(ExtendedReal a, ExtendedReal b) {
    return a.v_ <= b.v_;
  }
  friend constexpr bool operator>(ExtendedReal a, ExtendedReal b) {
    return a.v_ > b.v_;
  }
  friend constexpr bool operator>=(ExtendedReal a, ExtendedReal b) {
    return a.v_ >= b.v_;
  }

  friend constexpr ExtendedReal min(ExtendedReal a, ExtendedReal b) {
    return a.v_ <= b.v_ ? a : b;
  }
  friend constexpr ExtendedReal max(ExtendedReal a, ExtendedReal b) {
    return a.v_ >= b.v_ ? a : b;
  }

 private:
  double v_;
};

}  // namespace avstl
