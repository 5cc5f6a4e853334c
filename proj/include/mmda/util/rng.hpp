#pragma once

#include <gmpxx.h>

#include <cstdint>

#include "mmda/numerics/scalar.hpp"

namespace mmda::util {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator: the draw is a function of its key alone, so the
// order in which samples or edges are visited does not matter.
inline std::uint64_t counter_draw(std::uint64_t seed, std::uint64_t sample, std::uint64_t round, std::uint64_t a,
                                  std::uint64_t b) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = splitmix64(h ^ sample);
  h = splitmix64(h ^ round);
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

static_assert(sizeof(unsigned long) >= 8, "thresholds need 64-bit mpz_get_ui");

// Bernoulli(p) as u < threshold with u uniform on 64 bits; the threshold is
// ceil(p 2^64), so the realised probability exceeds p by less than 2^-64.
struct Bernoulli {
  std::uint64_t threshold = 0;
  bool always = false;

  static Bernoulli of(const mpq_class& p) {
    Bernoulli b;
    if (p >= 1) {
      b.always = true;
      return b;
    }
    if (p <= 0) return b;
    mpz_class num = p.get_num(), den = p.get_den();
    mpz_class scaled = (num << 64) / den;
    if (scaled * den != (num << 64)) scaled += 1;
    b.threshold = static_cast<std::uint64_t>(mpz_get_ui(scaled.get_mpz_t()));
    return b;
  }

  // Irrational p: the threshold is still ceil(p 2^64), found by certified
  // rounding with precision escalation.
  static Bernoulli of(const numerics::Scalar& p, const numerics::PrecisionPolicy& pol = {}) {
    if (p.is_rational()) return of(p.rational());
    Bernoulli b;
    if (numerics::certified_leq(numerics::Scalar(1), p, pol)) {
      b.always = true;
      return b;
    }
    if (numerics::certified_leq(p, numerics::Scalar(0), pol)) return b;
    mpz_class two64 = mpz_class(1) << 64;
    mpz_class t = numerics::ceil_certified(p * numerics::Scalar(two64), pol);
    b.threshold = static_cast<std::uint64_t>(mpz_get_ui(t.get_mpz_t()));
    return b;
  }

  bool draw(std::uint64_t u) const { return always || u < threshold; }
};

}  // namespace mmda::util
