#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mmda/numerics/interval.hpp"
#include "mmda/numerics/monomial.hpp"

namespace mmda::numerics {

class PrecisionCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PrecisionPolicy {
  mpfr_prec_t start = 256;
  mpfr_prec_t cap = 4096;

  // MMDA_PRECISION_CAP overrides the cap when set to a positive integer.
  static PrecisionPolicy from_env() {
    PrecisionPolicy p;
    if (const char* v = std::getenv("MMDA_PRECISION_CAP")) {
      long cap = std::strtol(v, nullptr, 10);
      if (cap > 0) p.cap = static_cast<mpfr_prec_t>(cap);
    }
    if (p.start > p.cap) p.start = p.cap;
    return p;
  }
};

enum class Ordering { kLess, kEqual, kGreater, kUndecided };

inline const char* to_string(Ordering o) {
  switch (o) {
    case Ordering::kLess: return "<";
    case Ordering::kEqual: return "=";
    case Ordering::kGreater: return ">";
    case Ordering::kUndecided: return "undecided";
  }
  return "?";
}

// A real number in one of three modes: exact rational, exact factored
// monomial, or a certified MPFR interval.
class Scalar {
 public:
  enum class Kind { kRational, kMonomial, kInterval };

  Scalar() : v_(mpq_class(0)) {}
  Scalar(int v) : v_(mpq_class(v)) {}
  Scalar(long v) : v_(mpq_class(v)) {}
  Scalar(unsigned long v) : v_(mpq_class(v)) {}
  Scalar(long long v) : v_(mpq_class(mpz_class(std::to_string(v)))) {}
  Scalar(unsigned long long v) : v_(mpq_class(mpz_class(std::to_string(v)))) {}
  Scalar(const mpz_class& z) : v_(mpq_class(z)) {}
  Scalar(mpq_class q) : v_(std::move(q)) { std::get<mpq_class>(v_).canonicalize(); }
  Scalar(Monomial m) : v_(std::move(m)) {}
  Scalar(Interval i) : v_(std::move(i)) {}

  static Scalar ratio(long p, long q) { return Scalar(mpq_class(p, q)); }

  // Parses "p/q", "p", or a decimal such as "1e-3" or "0.25" exactly.
  static Scalar parse(const std::string& s) {
    if (s.empty()) throw DomainError("empty number");
    if (s.find('/') != std::string::npos) {
      mpq_class q;
      if (q.set_str(s, 10) != 0 || q.get_den() == 0) throw DomainError("bad rational: " + s);
      q.canonicalize();
      return Scalar(q);
    }
    std::string mant = s;
    long exp10 = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
      mant = s.substr(0, epos);
      try {
        exp10 = std::stol(s.substr(epos + 1));
      } catch (const std::exception&) {
        throw DomainError("bad number: " + s);
      }
    }
    bool neg = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
      neg = mant[0] == '-';
      mant = mant.substr(1);
    }
    auto dot = mant.find('.');
    std::string digits = mant;
    if (dot != std::string::npos) {
      digits = mant.substr(0, dot) + mant.substr(dot + 1);
      exp10 -= static_cast<long>(mant.size() - dot - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw DomainError("bad number: " + s);
    mpz_class num(digits, 10), ten = 10, pw;
    mpz_pow_ui(pw.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    mpq_class q = exp10 < 0 ? mpq_class(num, pw) : mpq_class(num * pw);
    q.canonicalize();
    if (neg) q = -q;
    return Scalar(q);
  }

  Kind kind() const { return static_cast<Kind>(v_.index()); }
  bool is_exact() const { return kind() != Kind::kInterval; }
  bool is_rational() const {
    if (kind() == Kind::kRational) return true;
    return kind() == Kind::kMonomial && std::get<Monomial>(v_).integral_exponents();
  }

  // Exact rational value; throws unless is_rational().
  mpq_class rational() const {
    if (kind() == Kind::kRational) return std::get<mpq_class>(v_);
    if (kind() == Kind::kMonomial && std::get<Monomial>(v_).integral_exponents())
      return std::get<Monomial>(v_).to_rational();
    throw DomainError("value is not an exact rational");
  }
  const mpq_class& rational_ref() const { return std::get<mpq_class>(v_); }
  const Monomial& monomial() const { return std::get<Monomial>(v_); }
  const Interval& interval() const { return std::get<Interval>(v_); }

  bool is_zero() const { return kind() == Kind::kRational && std::get<mpq_class>(v_) == 0; }

  // Monomials with all-integer exponents become rationals.
  Scalar simplified() const {
    if (kind() == Kind::kMonomial && std::get<Monomial>(v_).integral_exponents())
      return Scalar(std::get<Monomial>(v_).to_rational());
    return *this;
  }

  std::optional<Monomial> as_monomial() const {
    if (kind() == Kind::kMonomial) return std::get<Monomial>(v_);
    if (kind() == Kind::kRational && std::get<mpq_class>(v_) != 0)
      return Monomial::from_rational(std::get<mpq_class>(v_));
    return std::nullopt;
  }

  mpfr_prec_t precision_hint() const {
    return kind() == Kind::kInterval ? std::get<Interval>(v_).precision() : 0;
  }

  Interval enclose(mpfr_prec_t prec) const {
    switch (kind()) {
      case Kind::kRational: return Interval::from_rational(std::get<mpq_class>(v_), prec);
      case Kind::kMonomial: return std::get<Monomial>(v_).enclose(prec);
      case Kind::kInterval: return std::get<Interval>(v_);
    }
    return Interval(prec);
  }

  double approx() const { return enclose(128).mid_double(); }

  // Canonical text. Exact kinds round-trip through parse_exact.
  std::string to_string() const {
    switch (kind()) {
      case Kind::kRational: return std::get<mpq_class>(v_).get_str();
      case Kind::kMonomial: return std::get<Monomial>(v_).to_string();
      case Kind::kInterval: return std::get<Interval>(v_).to_string();
    }
    return "";
  }

  Scalar pow(const mpq_class& q) const {
    if (kind() == Kind::kInterval) return Scalar(interval().pow(q));
    if (is_zero()) {
      if (q <= 0) throw DomainError("non-positive power of zero");
      return Scalar(0);
    }
    if (q.get_den() == 1 && kind() == Kind::kRational) {
      mpz_class num, den;
      unsigned long k = mpz_class(abs(q.get_num())).get_ui();
      mpz_pow_ui(num.get_mpz_t(), rational_ref().get_num_mpz_t(), k);
      mpz_pow_ui(den.get_mpz_t(), rational_ref().get_den_mpz_t(), k);
      mpq_class r(num, den);
      r.canonicalize();
      if (q < 0) r = 1 / r;
      return Scalar(r);
    }
    return Scalar(as_monomial()->pow(q));
  }

  Scalar operator-() const {
    switch (kind()) {
      case Kind::kRational: return Scalar(mpq_class(-std::get<mpq_class>(v_)));
      case Kind::kMonomial: return Scalar(-std::get<Monomial>(v_));
      case Kind::kInterval: return Scalar(-std::get<Interval>(v_));
    }
    return *this;
  }

  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    if (a.kind() == Kind::kInterval || b.kind() == Kind::kInterval) {
      mpfr_prec_t p = std::max<mpfr_prec_t>({a.precision_hint(), b.precision_hint(), 256});
      return Scalar(a.enclose(p) * b.enclose(p));
    }
    if (a.is_zero() || b.is_zero()) return Scalar(0);
    if (a.kind() == Kind::kRational && b.kind() == Kind::kRational)
      return Scalar(mpq_class(a.rational_ref() * b.rational_ref()));
    return Scalar(*a.as_monomial() * *b.as_monomial()).collapse();
  }

  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    if (b.is_zero()) throw DomainError("division by zero");
    if (a.kind() == Kind::kInterval || b.kind() == Kind::kInterval) {
      mpfr_prec_t p = std::max<mpfr_prec_t>({a.precision_hint(), b.precision_hint(), 256});
      return Scalar(a.enclose(p) / b.enclose(p));
    }
    if (a.is_zero()) return Scalar(0);
    if (a.kind() == Kind::kRational && b.kind() == Kind::kRational)
      return Scalar(mpq_class(a.rational_ref() / b.rational_ref()));
    return Scalar(*a.as_monomial() / *b.as_monomial()).collapse();
  }

  // Exact whenever both operands share a radical part; otherwise the sum is
  // enclosed at working precision.
  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.kind() == Kind::kRational && b.kind() == Kind::kRational)
      return Scalar(mpq_class(a.rational_ref() + b.rational_ref()));
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_exact() && b.is_exact()) {
      auto [ca, ra] = a.as_monomial()->radical_split();
      auto [cb, rb] = b.as_monomial()->radical_split();
      if (ra == rb) return from_split(ca + cb, ra);
    }
    mpfr_prec_t p = std::max<mpfr_prec_t>({a.precision_hint(), b.precision_hint(), 256});
    return Scalar(a.enclose(p) + b.enclose(p));
  }

  friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

  // Structural equality of exact values; intervals compare by endpoints.
  friend bool same_value(const Scalar& a, const Scalar& b);

  static Scalar from_split(const mpq_class& coef, const Monomial& radical) {
    if (coef == 0) return Scalar(0);
    if (radical.is_one()) return Scalar(coef);
    return Scalar(Monomial::from_rational(coef) * radical);
  }

 private:
  // Monomials equal to a rational collapse to the rational kind only when it
  // is 1; other integral monomials are left as they are.
  Scalar collapse() const {
    if (kind() == Kind::kMonomial && std::get<Monomial>(v_).is_one()) return Scalar(1);
    return *this;
  }

  std::variant<mpq_class, Monomial, Interval> v_;
};

// Sum of n copies of x.
inline Scalar times(const Scalar& x, const mpz_class& n) { return x * Scalar(n); }

namespace detail {

inline Ordering order_from_sign(int s) {
  return s < 0 ? Ordering::kLess : (s > 0 ? Ordering::kGreater : Ordering::kEqual);
}

inline int sign_exact(const Scalar& x) {
  if (x.kind() == Scalar::Kind::kRational) return sgn(x.rational_ref());
  return x.monomial().negative() ? -1 : 1;
}

}  // namespace detail

// Certified comparison. Exact operands are decided by exact arithmetic or by
// escalating interval precision; PrecisionCapExceeded is thrown at the cap.
// A comparison involving an interval returns kUndecided on overlap.
inline Ordering compare_certified(const Scalar& a, const Scalar& b,
                                  const PrecisionPolicy& policy = PrecisionPolicy{}) {
  using K = Scalar::Kind;
  if (a.is_exact() && b.is_exact()) {
    if (a.kind() == K::kRational && b.kind() == K::kRational)
      return detail::order_from_sign(cmp(a.rational_ref(), b.rational_ref()));
    int sa = detail::sign_exact(a), sb = detail::sign_exact(b);
    if (sa != sb || sa == 0) return detail::order_from_sign(sa - sb);
    // Same nonzero sign: compare |a| / |b| with 1.
    Monomial r = *a.as_monomial() / *b.as_monomial();
    if (r.exponents().empty()) return Ordering::kEqual;
    for (mpfr_prec_t p = policy.start; p <= policy.cap; p *= 2) {
      Interval l = r.log2_abs(p);
      int s = l.positive() ? 1 : (l.negative() ? -1 : 0);
      if (s != 0) return detail::order_from_sign(sa > 0 ? s : -s);
      if (p > policy.cap / 2) break;
    }
    throw PrecisionCapExceeded("comparison undecided at precision cap " + std::to_string(policy.cap));
  }
  mpfr_prec_t p = std::max<mpfr_prec_t>({a.precision_hint(), b.precision_hint(), policy.start});
  Interval ia = a.enclose(p), ib = b.enclose(p);
  int o = ia.strict_order(ib);
  if (o != 0) return detail::order_from_sign(o);
  if (ia.is_point() && ib.is_point()) return Ordering::kEqual;
  return Ordering::kUndecided;
}

inline bool same_value(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return compare_certified(a, b) == Ordering::kEqual;
  if (a.kind() == Scalar::Kind::kInterval && b.kind() == Scalar::Kind::kInterval)
    return mpfr_equal_p(a.interval().lo(), b.interval().lo()) &&
           mpfr_equal_p(a.interval().hi(), b.interval().hi());
  return false;
}

inline bool certified_less(const Scalar& a, const Scalar& b, const PrecisionPolicy& p = {}) {
  return compare_certified(a, b, p) == Ordering::kLess;
}
inline bool certified_leq(const Scalar& a, const Scalar& b, const PrecisionPolicy& p = {}) {
  Ordering o = compare_certified(a, b, p);
  return o == Ordering::kLess || o == Ordering::kEqual;
}

inline Scalar scalar_mul(const Scalar& a, const Scalar& b) { return a * b; }

// Sign of a quantity computed by `f(prec)` as an interval, escalating
// precision until the enclosure excludes zero. Returns nullopt at the cap.
inline std::optional<int> certified_sign(const std::function<Interval(mpfr_prec_t)>& f,
                                         const PrecisionPolicy& policy = PrecisionPolicy{}) {
  for (mpfr_prec_t p = policy.start; p <= policy.cap; p *= 2) {
    Interval v = f(p);
    if (v.positive()) return 1;
    if (v.negative()) return -1;
    if (p > policy.cap / 2) break;
  }
  return std::nullopt;
}

// Ceiling of an exact value.
inline mpz_class ceil_certified(const Scalar& x, const PrecisionPolicy& policy = PrecisionPolicy{}) {
  if (x.is_rational()) {
    mpq_class q = x.rational();
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return c;
  }
  if (!x.is_exact()) throw DomainError("ceiling of an interval value");
  for (mpfr_prec_t p = policy.start; p <= policy.cap; p *= 2) {
    mpz_class c;
    if (x.enclose(p).certified_ceil(c)) return c;
    if (p > policy.cap / 2) break;
  }
  throw PrecisionCapExceeded("ceiling undecided at precision cap");
}

inline mpz_class floor_certified(const Scalar& x, const PrecisionPolicy& policy = PrecisionPolicy{}) {
  if (x.is_rational()) {
    mpq_class q = x.rational();
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return f;
  }
  return -ceil_certified(-x, policy);
}

// Exact sum of many values, grouped by radical part. Terms whose radicals
// differ fall back to an interval enclosure.
class ScalarSum {
 public:
  void add(const Scalar& x, const mpz_class& mult = 1) {
    if (x.is_zero() || mult == 0) return;
    if (x.kind() == Scalar::Kind::kRational) {
      rational_ += x.rational_ref() * mult;
      return;
    }
    if (x.kind() == Scalar::Kind::kInterval) {
      mpfr_prec_t p = x.interval().precision();
      Interval term = x.interval() * Interval::from_integer(mult, p);
      inexact_ = inexact_ ? *inexact_ + term : term;
      return;
    }
    auto [c, r] = x.monomial().radical_split();
    std::string key = r.to_string();
    auto it = groups_.find(key);
    if (it == groups_.end()) groups_.emplace(key, std::make_pair(mpq_class(c * mult), r));
    else it->second.first += c * mult;
  }

  Scalar value() const {
    std::vector<Scalar> parts;
    if (rational_ != 0) parts.emplace_back(rational_);
    for (const auto& [k, g] : groups_)
      if (g.first != 0) parts.push_back(Scalar::from_split(g.first, g.second));
    if (inexact_) parts.emplace_back(*inexact_);
    if (parts.empty()) return Scalar(0);
    Scalar acc = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) acc = acc + parts[i];
    return acc;
  }

 private:
  mpq_class rational_ = 0;
  std::map<std::string, std::pair<mpq_class, Monomial>> groups_;
  std::optional<Interval> inexact_;
};

}  // namespace mmda::numerics
