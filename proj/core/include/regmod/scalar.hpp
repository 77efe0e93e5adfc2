// regmod — exact one-dimensional set-valued analysis laboratory.
//
// Scalar: exact arithmetic and total ordering for the quadratic field
// Q(sqrt(2)).  Every coordinate, radius and rate in the library is a Scalar;
// decimal output exists for reporting only and never feeds a decision.

#ifndef REGMOD_SCALAR_HPP
#define REGMOD_SCALAR_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace regmod {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Raised when a Scalar literal does not match the grammar.  `position` is the
// byte offset of the first offending character.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position(position) {}
  std::size_t position = 0;
};

// Raised on domain violations (division by zero, negative dilation radius,
// arithmetic with infinities that has no unambiguous value, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An element a + b*sqrt(2) of Q(sqrt(2)).  `rat()` is a, `rad()` is b; both
// are arbitrary-precision rationals kept in lowest terms by the rational
// type, so overflow is impossible by construction.  Values are immutable in
// spirit: all operations are pure and return fresh values, so Scalars are
// safe to share across concurrent checkers.
class Scalar {
 public:
  Scalar() = default;
  Scalar(int n) : rat_(n) {}                // NOLINT: implicit by design
  Scalar(long long n) : rat_(n) {}          // NOLINT
  explicit Scalar(Rational rat, Rational rad = Rational(0))
      : rat_(std::move(rat)), rad_(std::move(rad)) {}

  // b * sqrt(2).
  static Scalar sqrt2(Rational coeff = Rational(1)) {
    return Scalar(Rational(0), std::move(coeff));
  }
  // Convenience for rationals p/q.
  static Scalar ratio(long long p, long long q) {
    if (q == 0) throw DomainError("zero denominator");
    return Scalar(Rational(p, q));
  }

  const Rational& rat() const { return rat_; }
  const Rational& rad() const { return rad_; }

  // True iff the sqrt(2) coefficient is zero.  This is the exact rationality
  // test that drives the irrational-decomposition witnesses.
  bool is_rational() const { return rad_.is_zero(); }
  bool is_zero() const { return rat_.is_zero() && rad_.is_zero(); }

  // Exact sign in {-1, 0, +1}, by case analysis on the signs of the two
  // parts and, when they disagree, comparison of rat^2 with 2*rad^2.  No
  // floating point is involved anywhere.
  int sign() const;

  Scalar operator-() const { return Scalar(-rat_, -rad_); }
  Scalar& operator+=(const Scalar& o) {
    rat_ += o.rat_;
    rad_ += o.rad_;
    return *this;
  }
  Scalar& operator-=(const Scalar& o) {
    rat_ -= o.rat_;
    rad_ -= o.rad_;
    return *this;
  }
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.rat_ == b.rat_ && a.rad_ == b.rad_;
  }
  friend bool operator!=(const Scalar& a, const Scalar& b) {
    return !(a == b);
  }
  friend bool operator<(const Scalar& a, const Scalar& b) {
    return (a - b).sign() < 0;
  }
  friend bool operator>(const Scalar& a, const Scalar& b) { return b < a; }
  friend bool operator<=(const Scalar& a, const Scalar& b) { return !(b < a); }
  friend bool operator>=(const Scalar& a, const Scalar& b) { return !(a < b); }

  Scalar abs() const { return sign() < 0 ? -*this : *this; }

  // Literal grammar (ASCII):
  //   RAT    := ['-'] DIGITS ['/' DIGITS]
  //   SCALAR := RAT | RAT ('+'|'-') RAT 'r2' | ['-'] RAT 'r2'
  // where 'r2' denotes sqrt(2).  parse(format(x)) == x for every canonical x.
  static Scalar parse(std::string_view text);
  std::string format() const;

  // Correctly rounded decimal with `digits` fractional digits (reporting
  // only; round-half-away-from-zero on the exact rational bracketing of
  // sqrt(2) carried to `digits`+12 guard digits).
  std::string approx(int digits = 12) const;

 private:
  Rational rat_;  // a
  Rational rad_;  // b, coefficient of sqrt(2)
};

inline Scalar min(const Scalar& a, const Scalar& b) { return a < b ? a : b; }
inline Scalar max(const Scalar& a, const Scalar& b) { return a < b ? b : a; }

// A Scalar extended with the two symbols -inf / +inf, used for unbounded
// interval endpoints and for distances/excesses of empty or unbounded sets.
// Arithmetic is defined only where unambiguous and throws otherwise.
class ExtScalar {
 public:
  ExtScalar() : kind_(Kind::finite) {}
  ExtScalar(const Scalar& v) : kind_(Kind::finite), v_(v) {}  // NOLINT
  ExtScalar(int n) : kind_(Kind::finite), v_(n) {}            // NOLINT

  static ExtScalar pos_inf() { return ExtScalar(Kind::pos_inf); }
  static ExtScalar neg_inf() { return ExtScalar(Kind::neg_inf); }

  bool is_finite() const { return kind_ == Kind::finite; }
  bool is_pos_inf() const { return kind_ == Kind::pos_inf; }
  bool is_neg_inf() const { return kind_ == Kind::neg_inf; }

  // Finite value accessor; throws on infinities.
  const Scalar& finite() const {
    if (!is_finite()) throw DomainError("infinite endpoint has no finite value");
    return v_;
  }

  int sign() const {
    switch (kind_) {
      case Kind::pos_inf: return 1;
      case Kind::neg_inf: return -1;
      default: return v_.sign();
    }
  }

  ExtScalar operator-() const {
    switch (kind_) {
      case Kind::pos_inf: return neg_inf();
      case Kind::neg_inf: return pos_inf();
      default: return ExtScalar(-v_);
    }
  }

  // a + b; throws on inf + (-inf).
  friend ExtScalar operator+(const ExtScalar& a, const ExtScalar& b);
  friend ExtScalar operator-(const ExtScalar& a, const ExtScalar& b) {
    return a + (-b);
  }
  // Scale by a finite nonzero scalar (sign flips infinities); scaling by zero
  // is only defined for finite values.
  friend ExtScalar operator*(const ExtScalar& a, const Scalar& k);
  friend ExtScalar operator/(const ExtScalar& a, const Scalar& k);

  friend bool operator==(const ExtScalar& a, const ExtScalar& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != Kind::finite || a.v_ == b.v_;
  }
  friend bool operator!=(const ExtScalar& a, const ExtScalar& b) {
    return !(a == b);
  }
  friend bool operator<(const ExtScalar& a, const ExtScalar& b);
  friend bool operator>(const ExtScalar& a, const ExtScalar& b) { return b < a; }
  friend bool operator<=(const ExtScalar& a, const ExtScalar& b) {
    return !(b < a);
  }
  friend bool operator>=(const ExtScalar& a, const ExtScalar& b) {
    return !(a < b);
  }

  // Extended literals: "inf", "-inf", or a Scalar literal.
  static ExtScalar parse(std::string_view text);
  std::string format() const;
  std::string approx(int digits = 12) const;

 private:
  enum class Kind { neg_inf, finite, pos_inf };
  explicit ExtScalar(Kind k) : kind_(k) {}
  Kind kind_;
  Scalar v_;
};

inline ExtScalar min(const ExtScalar& a, const ExtScalar& b) {
  return a < b ? a : b;
}
inline ExtScalar max(const ExtScalar& a, const ExtScalar& b) {
  return a < b ? b : a;
}

// Exact floor of a field element (largest integer <= x).
BigInt floor_int(const Scalar& x);

// Some rational strictly between the endpoints (requires lo < hi; either
// endpoint may be infinite).  Deterministic: the same bounds always yield the
// same rational.
Rational rational_between(const ExtScalar& lo, const ExtScalar& hi);

}  // namespace regmod

#endif  // REGMOD_SCALAR_HPP
