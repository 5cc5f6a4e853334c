#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>

#include "mmda/numerics/interval.hpp"
#include "mmda/numerics/monomial.hpp"
#include "mmda/numerics/scalar.hpp"

namespace mmda::numerics {

inline mpz_class binomial(long n, long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

inline mpz_class factorial(long n) {
  if (n < 0) throw DomainError("factorial of a negative number");
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
  return r;
}

// n! as a factored monomial, via Legendre's formula.
inline Monomial factorial_monomial(long n) {
  if (n < 0) throw DomainError("factorial of a negative number");
  Monomial m;
  for (unsigned long p : detail::small_primes()) {
    if (p > static_cast<unsigned long>(n)) break;
    unsigned long e = 0;
    for (unsigned long q = p; q <= static_cast<unsigned long>(n); q *= p) {
      e += static_cast<unsigned long>(n) / q;
      if (q > static_cast<unsigned long>(n) / p) break;
    }
    m = m * Monomial::power_of(mpz_class(p), mpq_class(e));
  }
  if (n > static_cast<long>(detail::small_primes().back()))
    throw DomainError("factorial too large for factored form");
  return m;
}

inline Monomial binomial_monomial(long n, long k) {
  if (n < 0 || k < 0 || k > n) throw DomainError("binomial outside its support");
  return factorial_monomial(n) / (factorial_monomial(k) * factorial_monomial(n - k));
}

// Exact factorial below this argument; Robbins' two-sided Stirling bound above.
inline constexpr long kExactFactorialLimit = 4096;

// Enclosure of ln n! from Robbins' bounds
//   sqrt(2 pi n) (n/e)^n e^{1/(12n+1)} < n! < sqrt(2 pi n) (n/e)^n e^{1/(12n)}.
inline Interval ln_factorial_stirling(long n, mpfr_prec_t prec) {
  if (n < 1) return Interval::from_long(0, prec);
  Interval N = Interval::from_long(n, prec);
  Interval base = N * N.log() - N +
                  (Interval::from_long(2, prec) * Interval::pi(prec) * N).log() *
                      Interval::from_rational(mpq_class(1, 2), prec);
  Interval lo_corr = Interval::from_rational(mpq_class(1, 12 * n + 1), prec);
  Interval hi_corr = Interval::from_rational(mpq_class(1, 12 * n), prec);
  return (base + lo_corr).hull(base + hi_corr);
}

// Certified enclosure of log2 C(n, k). Exact big-integer arithmetic up to
// kExactFactorialLimit; Stirling enclosures beyond, or when forced.
inline Interval log2_binomial(long n, long k, mpfr_prec_t prec = 256, bool force_stirling = false) {
  if (n < 0 || k < 0 || k > n) throw DomainError("log2_binomial outside its support");
  if (!force_stirling && n <= kExactFactorialLimit)
    return Interval::from_integer(binomial(n, k), prec).log2();
  Interval ln = ln_factorial_stirling(n, prec) - ln_factorial_stirling(k, prec) -
                ln_factorial_stirling(n - k, prec);
  Interval ln2 = Interval::from_long(2, prec).log();
  return ln / ln2;
}

// Binary entropy h(x) = -x log2 x - (1-x) log2(1-x) for x in [0, 1].
inline Interval entropy(const Interval& x) {
  mpfr_prec_t p = x.precision();
  Interval one = Interval::from_long(1, p);
  Interval y = one - x;
  return -(x * x.log2()) - (y * y.log2());
}

inline Interval entropy(const mpq_class& x, mpfr_prec_t prec) {
  if (x < 0 || x > 1) throw DomainError("entropy argument outside [0, 1]");
  if (x == 0 || x == 1) return Interval::from_long(0, prec);
  return entropy(Interval::from_rational(x, prec));
}

}  // namespace mmda::numerics
