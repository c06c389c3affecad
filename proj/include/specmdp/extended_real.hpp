#pragma once

#include <limits>
#include <ostream>

#include "specmdp/errors.hpp"

namespace specmdp {

/// Value in [ -inf, +inf ] U { +infinity as an explicit tag }.
/// Log-MGF formulas and rate functions return this instead of a sentinel
/// float, so "+infinity" survives serialization and comparisons exactly.
template <typename Scalar = double>
class ExtendedReal {
 public:
  static ExtendedReal finite(Scalar v) { return ExtendedReal(v, false); }
  static ExtendedReal infinity() { return ExtendedReal(Scalar(0), true); }

  bool is_finite() const { return !infinite_; }
  bool is_infinite() const { return infinite_; }

  /// Finite value; throws on +infinity.
  Scalar value() const {
    if (infinite_) throw BranchError("ExtendedReal: value() on +infinity");
    return value_;
  }

  /// Collapses to a plain scalar, mapping +infinity to numeric infinity.
  Scalar as_scalar() const {
    return infinite_ ? std::numeric_limits<Scalar>::infinity() : value_;
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.infinite_) return os << "+inf";
    return os << x.value_;
  }

 private:
  ExtendedReal(Scalar v, bool inf) : value_(v), infinite_(inf) {}
  Scalar value_;
  bool infinite_;
};

}  // namespace specmdp
