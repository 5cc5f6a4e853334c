#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace mmda::numerics {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Closed interval [lo, hi] with MPFR endpoints. Every operation rounds the
// lower endpoint down and the upper endpoint up, so the true value of an
// expression stays enclosed.
class Interval {
 public:
  explicit Interval(mpfr_prec_t prec = 256) : prec_(prec) {
    mpfr_init2(lo_, prec);
    mpfr_init2(hi_, prec);
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
  }

  Interval(const Interval& o) : prec_(o.prec_) {
    mpfr_init2(lo_, prec_);
    mpfr_init2(hi_, prec_);
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }

  Interval(Interval&& o) noexcept : prec_(o.prec_) {
    mpfr_init2(lo_, prec_);
    mpfr_init2(hi_, prec_);
    mpfr_swap(lo_, o.lo_);
    mpfr_swap(hi_, o.hi_);
  }

  Interval& operator=(Interval o) noexcept {
    std::swap(prec_, o.prec_);
    mpfr_swap(lo_, o.lo_);
    mpfr_swap(hi_, o.hi_);
    return *this;
  }

  ~Interval() {
    mpfr_clear(lo_);
    mpfr_clear(hi_);
  }

  static Interval from_rational(const mpq_class& q, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set_q(r.lo_, q.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(r.hi_, q.get_mpq_t(), MPFR_RNDU);
    return r;
  }

  static Interval from_integer(const mpz_class& z, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set_z(r.lo_, z.get_mpz_t(), MPFR_RNDD);
    mpfr_set_z(r.hi_, z.get_mpz_t(), MPFR_RNDU);
    return r;
  }

  static Interval from_long(long v, mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_set_si(r.lo_, v, MPFR_RNDD);
    mpfr_set_si(r.hi_, v, MPFR_RNDU);
    return r;
  }

  static Interval from_bounds(double lo, double hi, mpfr_prec_t prec) {
    if (lo > hi) throw DomainError("interval bounds out of order");
    Interval r(prec);
    mpfr_set_d(r.lo_, lo, MPFR_RNDD);
    mpfr_set_d(r.hi_, hi, MPFR_RNDU);
    return r;
  }

  mpfr_prec_t precision() const { return prec_; }
  mpfr_srcptr lo() const { return lo_; }
  mpfr_srcptr hi() const { return hi_; }

  double lo_double() const { return mpfr_get_d(lo_, MPFR_RNDD); }
  double hi_double() const { return mpfr_get_d(hi_, MPFR_RNDU); }
  double mid_double() const {
    return 0.5 * mpfr_get_d(lo_, MPFR_RNDN) + 0.5 * mpfr_get_d(hi_, MPFR_RNDN);
  }

  bool is_point() const { return mpfr_equal_p(lo_, hi_) != 0; }
  bool positive() const { return mpfr_sgn(lo_) > 0; }
  bool negative() const { return mpfr_sgn(hi_) < 0; }
  bool contains_zero() const { return mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0; }

  bool contains(const mpq_class& q) const {
    return mpfr_cmp_q(lo_, q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi_, q.get_mpq_t()) >= 0;
  }
  bool contains(const mpz_class& z) const {
    return mpfr_cmp_z(lo_, z.get_mpz_t()) <= 0 && mpfr_cmp_z(hi_, z.get_mpz_t()) >= 0;
  }

  // Certified width as an upper bound in double.
  double width() const {
    mpfr_t w;
    mpfr_init2(w, prec_);
    mpfr_sub(w, hi_, lo_, MPFR_RNDU);
    double d = mpfr_get_d(w, MPFR_RNDU);
    mpfr_clear(w);
    return d;
  }

  // -1 if entirely below other, +1 if entirely above, 0 if they overlap.
  int strict_order(const Interval& o) const {
    if (mpfr_less_p(hi_, o.lo_)) return -1;
    if (mpfr_greater_p(lo_, o.hi_)) return 1;
    return 0;
  }

  Interval operator-() const {
    Interval r(prec_);
    mpfr_neg(r.lo_, hi_, MPFR_RNDD);
    mpfr_neg(r.hi_, lo_, MPFR_RNDU);
    return r;
  }

  friend Interval operator+(const Interval& a, const Interval& b) {
    Interval r(std::max(a.prec_, b.prec_));
    mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
  }

  friend Interval operator-(const Interval& a, const Interval& b) {
    Interval r(std::max(a.prec_, b.prec_));
    mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
    mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
    return r;
  }

  friend Interval operator*(const Interval& a, const Interval& b) {
    mpfr_prec_t p = std::max(a.prec_, b.prec_);
    Interval r(p);
    mpfr_t t;
    mpfr_init2(t, p);
    bool first = true;
    for (mpfr_srcptr x : {a.lo_, a.hi_}) {
      for (mpfr_srcptr y : {b.lo_, b.hi_}) {
        mpfr_mul(t, x, y, MPFR_RNDD);
        if (first || mpfr_less_p(t, r.lo_)) mpfr_set(r.lo_, t, MPFR_RNDD);
        mpfr_mul(t, x, y, MPFR_RNDU);
        if (first || mpfr_greater_p(t, r.hi_)) mpfr_set(r.hi_, t, MPFR_RNDU);
        first = false;
      }
    }
    mpfr_clear(t);
    return r;
  }

  friend Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains_zero()) throw DomainError("interval division by an interval containing zero");
    mpfr_prec_t p = std::max(a.prec_, b.prec_);
    Interval r(p);
    mpfr_t t;
    mpfr_init2(t, p);
    bool first = true;
    for (mpfr_srcptr x : {a.lo_, a.hi_}) {
      for (mpfr_srcptr y : {b.lo_, b.hi_}) {
        mpfr_div(t, x, y, MPFR_RNDD);
        if (first || mpfr_less_p(t, r.lo_)) mpfr_set(r.lo_, t, MPFR_RNDD);
        mpfr_div(t, x, y, MPFR_RNDU);
        if (first || mpfr_greater_p(t, r.hi_)) mpfr_set(r.hi_, t, MPFR_RNDU);
        first = false;
      }
    }
    mpfr_clear(t);
    return r;
  }

  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }

  // Monotone increasing maps.
  Interval log2() const {
    if (mpfr_sgn(lo_) <= 0) throw DomainError("log2 of a non-positive interval");
    Interval r(prec_);
    mpfr_log2(r.lo_, lo_, MPFR_RNDD);
    mpfr_log2(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  Interval log() const {
    if (mpfr_sgn(lo_) <= 0) throw DomainError("log of a non-positive interval");
    Interval r(prec_);
    mpfr_log(r.lo_, lo_, MPFR_RNDD);
    mpfr_log(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  Interval exp2() const {
    Interval r(prec_);
    mpfr_exp2(r.lo_, lo_, MPFR_RNDD);
    mpfr_exp2(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  Interval exp() const {
    Interval r(prec_);
    mpfr_exp(r.lo_, lo_, MPFR_RNDD);
    mpfr_exp(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  Interval sqrt() const {
    if (mpfr_sgn(lo_) < 0) throw DomainError("sqrt of a negative interval");
    Interval r(prec_);
    mpfr_sqrt(r.lo_, lo_, MPFR_RNDD);
    mpfr_sqrt(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  // x^q for x > 0, via exp2(q * log2 x).
  Interval pow(const mpq_class& q) const {
    if (q == 0) return from_long(1, prec_);
    Interval e = from_rational(q, prec_) * log2();
    return e.exp2();
  }

  Interval hull(const Interval& o) const {
    Interval r(std::max(prec_, o.prec_));
    mpfr_min(r.lo_, lo_, o.lo_, MPFR_RNDD);
    mpfr_max(r.hi_, hi_, o.hi_, MPFR_RNDU);
    return r;
  }

  // Enclosure of pi.
  static Interval pi(mpfr_prec_t prec) {
    Interval r(prec);
    mpfr_const_pi(r.lo_, MPFR_RNDD);
    mpfr_const_pi(r.hi_, MPFR_RNDU);
    return r;
  }

  // Decimal rendering of both endpoints with `digits` significant digits.
  std::string to_string(int digits = 17) const {
    std::ostringstream os;
    os << "[" << endpoint_string(lo_, digits, MPFR_RNDD) << ", "
       << endpoint_string(hi_, digits, MPFR_RNDU) << "]";
    return os.str();
  }

  // Smallest integer >= every point of the interval when both endpoints
  // share the same ceiling; false otherwise.
  bool certified_ceil(mpz_class& out) const {
    mpz_class a, b;
    mpfr_get_z(a.get_mpz_t(), lo_, MPFR_RNDU);
    mpfr_get_z(b.get_mpz_t(), hi_, MPFR_RNDU);
    if (a != b) return false;
    // lo exactly integral while hi is above it shares the ceiling only if
    // lo == hi; mpfr_get_z with RNDU already separates those cases.
    out = a;
    return true;
  }

 private:
  static std::string endpoint_string(mpfr_srcptr x, int digits, mpfr_rnd_t rnd) {
    if (mpfr_zero_p(x)) return "0";
    char* buf = nullptr;
    std::string fmt = "%." + std::to_string(digits) + (rnd == MPFR_RNDD ? "RDg" : "RUg");
    mpfr_asprintf(&buf, fmt.c_str(), x);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
  }

  mpfr_prec_t prec_;
  mpfr_t lo_;
  mpfr_t hi_;
};

}  // namespace mmda::numerics
