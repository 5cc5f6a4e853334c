#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mmda/numerics/interval.hpp"

namespace mmda::numerics {

namespace detail {

inline const std::vector<unsigned long>& small_primes() {
  static const std::vector<unsigned long> primes = [] {
    constexpr unsigned long kLimit = 1UL << 17;
    std::vector<bool> composite(kLimit + 1, false);
    std::vector<unsigned long> out;
    for (unsigned long i = 2; i <= kLimit; ++i) {
      if (composite[i]) continue;
      out.push_back(i);
      for (unsigned long j = i * i; j <= kLimit; j += i) composite[j] = true;
    }
    return out;
  }();
  return primes;
}

// Trial division by primes below 2^17. A cofactor that survives is kept as a
// single base; it is coprime to every small prime.
inline void factor_into(mpz_class n, const mpq_class& weight, std::map<mpz_class, mpq_class>& out) {
  if (n <= 1) return;
  for (unsigned long p : small_primes()) {
    if (n == 1) break;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
      unsigned long count = 0;
      while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
        mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
        ++count;
      }
      out[mpz_class(p)] += weight * count;
    }
  }
  if (n > 1) out[n] += weight;
}

inline mpq_class floor_q(const mpq_class& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return mpq_class(f);
}

}  // namespace detail

// sign * prod base^exponent with nonzero rational exponents. Bases are primes,
// or large cofactors that trial division could not split. Canonical, so
// structural equality is exact equality.
class Monomial {
 public:
  Monomial() = default;

  static Monomial from_rational(const mpq_class& q) {
    if (q == 0) throw DomainError("zero has no monomial form");
    Monomial m;
    m.negative_ = q < 0;
    mpz_class num = abs(q.get_num());
    detail::factor_into(num, mpq_class(1), m.exps_);
    detail::factor_into(q.get_den(), mpq_class(-1), m.exps_);
    m.normalize();
    return m;
  }

  static Monomial power_of(const mpz_class& base, const mpq_class& exponent) {
    Monomial m;
    if (base <= 0) throw DomainError("monomial base must be positive");
    detail::factor_into(base, exponent, m.exps_);
    m.normalize();
    return m;
  }

  bool negative() const { return negative_; }
  const std::map<mpz_class, mpq_class>& exponents() const { return exps_; }
  bool is_one() const { return !negative_ && exps_.empty(); }

  bool integral_exponents() const {
    for (const auto& [b, e] : exps_)
      if (e.get_den() != 1) return false;
    return true;
  }

  // Exact rational value when every exponent is an integer.
  mpq_class to_rational() const {
    mpz_class num = 1, den = 1;
    for (const auto& [b, e] : exps_) {
      mpz_class pw;
      unsigned long k = mpz_class(abs(e.get_num())).get_ui();
      mpz_pow_ui(pw.get_mpz_t(), b.get_mpz_t(), k);
      if (e > 0) num *= pw; else den *= pw;
    }
    mpq_class r(num, den);
    r.canonicalize();
    return negative_ ? mpq_class(-r) : r;
  }

  // value = coefficient * radical with radical exponents in (0, 1).
  std::pair<mpq_class, Monomial> radical_split() const {
    Monomial integral, radical;
    integral.negative_ = negative_;
    for (const auto& [b, e] : exps_) {
      mpq_class f = detail::floor_q(e);
      if (f != 0) integral.exps_[b] = f;
      if (e != f) radical.exps_[b] = e - f;
    }
    return {integral.to_rational(), radical};
  }

  Monomial pow(const mpq_class& q) const {
    if (negative_ && q.get_den() != 1) throw DomainError("fractional power of a negative monomial");
    Monomial r;
    if (q == 0) return r;
    r.negative_ = negative_ && (abs(q.get_num()) % 2 == 1);
    for (const auto& [b, e] : exps_) r.exps_[b] = e * q;
    r.normalize();
    return r;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial r = a;
    r.negative_ = a.negative_ != b.negative_;
    for (const auto& [base, e] : b.exps_) r.exps_[base] += e;
    r.normalize();
    return r;
  }

  friend Monomial operator/(const Monomial& a, const Monomial& b) {
    Monomial r = a;
    r.negative_ = a.negative_ != b.negative_;
    for (const auto& [base, e] : b.exps_) r.exps_[base] -= e;
    r.normalize();
    return r;
  }

  Monomial operator-() const {
    Monomial r = *this;
    r.negative_ = !negative_;
    return r;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.negative_ == b.negative_ && a.exps_ == b.exps_;
  }

  // Enclosure of log2 |value|.
  Interval log2_abs(mpfr_prec_t prec) const {
    Interval acc = Interval::from_long(0, prec);
    for (const auto& [b, e] : exps_)
      acc += Interval::from_rational(e, prec) * Interval::from_integer(b, prec).log2();
    return acc;
  }

  Interval enclose(mpfr_prec_t prec) const {
    Interval v = log2_abs(prec).exp2();
    return negative_ ? -v : v;
  }

  std::string to_string() const {
    std::ostringstream os;
    if (negative_) os << "-";
    if (exps_.empty()) {
      os << "1";
      return os.str();
    }
    bool first = true;
    for (const auto& [b, e] : exps_) {
      if (!first) os << "*";
      first = false;
      os << b.get_str() << "^(" << e.get_str() << ")";
    }
    return os.str();
  }

 private:
  void normalize() {
    for (auto it = exps_.begin(); it != exps_.end();) {
      if (it->second == 0) it = exps_.erase(it);
      else ++it;
    }
  }

  bool negative_ = false;
  std::map<mpz_class, mpq_class> exps_;
};

}  // namespace mmda::numerics
