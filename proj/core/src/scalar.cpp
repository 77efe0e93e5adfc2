// regmod — exact one-dimensional set-valued analysis laboratory.
//
// Scalar arithmetic, exact sign computation, literal parsing/formatting and
// the decimal reporting path for Q(sqrt(2)).

#include "regmod/scalar.hpp"

#include <boost/multiprecision/integer.hpp>

#include <cctype>
#include <sstream>
#include <utility>

namespace regmod {

namespace {

int rational_sign(const Rational& r) { return r.sign(); }

}  // namespace

int Scalar::sign() const {
  const int sa = rational_sign(rat_);
  const int sb = rational_sign(rad_);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // Parts disagree: a + b*sqrt(2) has the sign of the larger magnitude.
  // |a| > |b*sqrt(2)|  <=>  a^2 > 2*b^2, compared cross-multiplied in plain
  // integers (the generic rational comparison would re-normalize; squares
  // need no gcd work).  Equality would force sqrt(2) rational, hence cannot
  // occur with b != 0.
  const auto& qa = rat_.backend().data();
  const auto& qb = rad_.backend().data();
  const BigInt lhs = qa.numerator() * qa.numerator() * qb.denominator() *
                     qb.denominator();
  const BigInt rhs = 2 * qb.numerator() * qb.numerator() * qa.denominator() *
                     qa.denominator();
  if (lhs == rhs)
    throw DomainError("sqrt(2) cannot satisfy a^2 == 2*b^2 with b != 0");
  return lhs > rhs ? sa : sb;
}

Scalar& Scalar::operator*=(const Scalar& o) {
  // (a + b r)(c + d r) = (ac + 2bd) + (ad + bc) r, with r = sqrt(2).
  Rational a = std::move(rat_), b = std::move(rad_);
  rat_ = a * o.rat_ + 2 * b * o.rad_;
  rad_ = a * o.rad_ + b * o.rat_;
  return *this;
}

Scalar& Scalar::operator/=(const Scalar& o) {
  if (o.is_zero()) throw DomainError("division by zero");
  // Multiply by the conjugate: 1/(c + d r) = (c - d r)/(c^2 - 2 d^2).
  const Rational denom = o.rat_ * o.rat_ - 2 * o.rad_ * o.rad_;
  Scalar conj(o.rat_ / denom, -o.rad_ / denom);
  return *this *= conj;
}

ExtScalar operator+(const ExtScalar& a, const ExtScalar& b) {
  if (a.is_finite() && b.is_finite()) return ExtScalar(a.v_ + b.v_);
  if (a.is_pos_inf() && b.is_neg_inf()) throw DomainError("inf + (-inf)");
  if (a.is_neg_inf() && b.is_pos_inf()) throw DomainError("(-inf) + inf");
  if (a.is_pos_inf() || b.is_pos_inf()) return ExtScalar::pos_inf();
  return ExtScalar::neg_inf();
}

ExtScalar operator*(const ExtScalar& a, const Scalar& k) {
  if (a.is_finite()) return ExtScalar(a.v_ * k);
  const int s = k.sign();
  if (s == 0) throw DomainError("0 * inf");
  return (s > 0) == a.is_pos_inf() ? ExtScalar::pos_inf() : ExtScalar::neg_inf();
}

ExtScalar operator/(const ExtScalar& a, const Scalar& k) {
  if (k.is_zero()) throw DomainError("division by zero");
  if (a.is_finite()) return ExtScalar(a.v_ / k);
  return (k.sign() > 0) == a.is_pos_inf() ? ExtScalar::pos_inf()
                                          : ExtScalar::neg_inf();
}

bool operator<(const ExtScalar& a, const ExtScalar& b) {
  if (a.kind_ == b.kind_)
    return a.kind_ == ExtScalar::Kind::finite && a.v_ < b.v_;
  return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
}

namespace {

// RAT := ['-'] DIGITS ['/' DIGITS].  Advances `pos` past the token.
Rational parse_rat(std::string_view text, std::size_t& pos) {
  const std::size_t start = pos;
  bool neg = false;
  if (pos < text.size() && text[pos] == '-') {
    neg = true;
    ++pos;
  }
  if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
    throw ParseError("expected digits", pos);
  BigInt num = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    num = num * 10 + (text[pos] - '0');
    ++pos;
  }
  BigInt den = 1;
  if (pos < text.size() && text[pos] == '/') {
    ++pos;
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      throw ParseError("expected digits after '/'", pos);
    den = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      den = den * 10 + (text[pos] - '0');
      ++pos;
    }
    if (den == 0) throw ParseError("zero denominator", start);
  }
  Rational r(num, den);
  return neg ? Rational(-r) : r;
}

// True if the token starting at `pos` is "r2".
bool at_r2(std::string_view text, std::size_t pos) {
  return pos + 1 < text.size() && text[pos] == 'r' && text[pos + 1] == '2';
}

std::string format_rat(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << '/' << denominator(r);
  return os.str();
}

}  // namespace

Scalar Scalar::parse(std::string_view text) {
  std::size_t pos = 0;
  if (text.empty()) throw ParseError("empty scalar literal", 0);

  // Case ['-'] RAT 'r2': pure radical part.
  // Disambiguate by scanning one RAT and checking what follows.
  Rational first = parse_rat(text, pos);
  if (at_r2(text, pos)) {
    pos += 2;
    if (pos != text.size()) throw ParseError("trailing characters", pos);
    return Scalar(Rational(0), first);
  }
  if (pos == text.size()) return Scalar(first);

  // Case RAT ('+'|'-') RAT 'r2'.
  const char op = text[pos];
  if (op != '+' && op != '-') throw ParseError("expected '+', '-' or 'r2'", pos);
  ++pos;
  Rational second = parse_rat(text, pos);
  if (!at_r2(text, pos)) throw ParseError("expected 'r2'", pos);
  pos += 2;
  if (pos != text.size()) throw ParseError("trailing characters", pos);
  if (op == '-') second = -second;
  return Scalar(first, second);
}

std::string Scalar::format() const {
  if (rad_ == 0) return format_rat(rat_);
  if (rat_ == 0) {
    if (rad_ < 0) return "-" + format_rat(Rational(-rad_)) + "r2";
    return format_rat(rad_) + "r2";
  }
  std::string out = format_rat(rat_);
  if (rad_ < 0)
    out += "-" + format_rat(Rational(-rad_)) + "r2";
  else
    out += "+" + format_rat(rad_) + "r2";
  return out;
}

std::string Scalar::approx(int digits) const {
  if (digits < 0) digits = 0;
  // Evaluate a + b*sqrt(2) as an exact rational bracket with guard digits,
  // then round half away from zero to `digits` fractional digits.
  const int guard = digits + 12;
  BigInt pow_guard = 1;
  for (int i = 0; i < guard; ++i) pow_guard *= 10;
  // floor(sqrt(2) * 10^guard) via integer square root of 2*10^(2*guard).
  const BigInt s = boost::multiprecision::sqrt(BigInt(2) * pow_guard * pow_guard);
  // value ~ rat + rad * s / 10^guard; both bracket endpoints agree to the
  // requested precision because of the guard digits.
  const Rational approx_val = rat_ + rad_ * Rational(s, pow_guard);

  BigInt pow_out = 1;
  for (int i = 0; i < digits; ++i) pow_out *= 10;
  Rational scaled = approx_val * pow_out;
  // Round half away from zero.
  BigInt num = numerator(scaled), den = denominator(scaled);
  const bool neg = num < 0;
  if (neg) num = -num;
  BigInt q = num / den, r = num % den;
  if (2 * r >= den) ++q;

  std::ostringstream os;
  os << q;
  std::string s_digits = os.str();
  std::string out;
  if (digits == 0) {
    out = s_digits;
  } else {
    if (s_digits.size() <= static_cast<std::size_t>(digits))
      s_digits.insert(0, static_cast<std::size_t>(digits) + 1 - s_digits.size(), '0');
    out = s_digits.substr(0, s_digits.size() - digits) + "." +
          s_digits.substr(s_digits.size() - digits);
    // Trim trailing zeros but keep at least one fractional digit.
    std::size_t last = out.find_last_not_of('0');
    if (out[last] == '.') ++last;
    out.erase(last + 1);
  }
  if (neg && out.find_first_not_of("0.") != std::string::npos) out.insert(0, "-");
  return out;
}

BigInt floor_int(const Scalar& x) {
  const BigInt num = numerator(x.rat()), den = denominator(x.rat());
  // Floor of the rational part alone (cpp_int division truncates toward 0).
  BigInt f = num / den;
  if (f * den > num) --f;
  if (x.is_rational()) return f;

  // Bracket b*sqrt(2) by rational bounds tight to ~1 unit, then correct the
  // candidate with exact comparisons (at most a couple of steps).
  const Rational b = x.rad();
  int g = 1;
  BigInt mag = boost::multiprecision::abs(numerator(b)) / denominator(b);
  while (mag > 0) {
    mag /= 10;
    ++g;
  }
  g += 2;
  BigInt pow = 1;
  for (int i = 0; i < g; ++i) pow *= 10;
  const BigInt s = boost::multiprecision::sqrt(BigInt(2) * pow * pow);
  const Rational lo_bound = x.rat() + b * Rational(b > 0 ? s : s + 1, pow);
  BigInt n = numerator(lo_bound), d = denominator(lo_bound);
  BigInt c = n / d;
  if (c * d > n) --c;
  while (Scalar(Rational(c + 1)) <= x) ++c;
  while (Scalar(Rational(c)) > x) --c;
  return c;
}

Rational rational_between(const ExtScalar& lo, const ExtScalar& hi) {
  if (!(lo < hi)) throw DomainError("rational_between requires lo < hi");
  if (!lo.is_finite() && !hi.is_finite()) return 0;
  if (!lo.is_finite()) return Rational(floor_int(hi.finite()) - 1);
  if (!hi.is_finite()) return Rational(floor_int(lo.finite()) + 1);
  const Scalar l = lo.finite(), h = hi.finite();
  BigInt two_k = 1;
  for (;;) {
    const BigInt m = floor_int(l * Scalar(Rational(two_k))) + 1;
    const Rational cand(m, two_k);
    if (Scalar(cand) > l && Scalar(cand) < h) return cand;
    two_k *= 2;
  }
}

ExtScalar ExtScalar::parse(std::string_view text) {
  if (text == "inf") return pos_inf();
  if (text == "-inf") return neg_inf();
  return ExtScalar(Scalar::parse(text));
}

std::string ExtScalar::format() const {
  switch (kind_) {
    case Kind::pos_inf: return "inf";
    case Kind::neg_inf: return "-inf";
    default: return v_.format();
  }
}

std::string ExtScalar::approx(int digits) const {
  switch (kind_) {
    case Kind::pos_inf: return "inf";
    case Kind::neg_inf: return "-inf";
    default: return v_.approx(digits);
  }
}

}  // namespace regmod
