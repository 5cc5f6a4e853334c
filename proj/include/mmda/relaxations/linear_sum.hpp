#pragma once

#include <gmpxx.h>

#include <utility>
#include <vector>

#include "mmda/numerics/scalar.hpp"

namespace mmda::relaxations {

using numerics::Interval;
using numerics::Ordering;
using numerics::PrecisionPolicy;
using numerics::Scalar;

// A sum of exact terms with multiplicities. Its value is exact when the
// radicals match; otherwise comparisons re-enclose every term at rising
// precision instead of comparing a fixed-width interval.
class LinearSum {
 public:
  LinearSum() = default;
  explicit LinearSum(const Scalar& x) { add(x); }

  void add(const Scalar& x, const mpz_class& mult = 1) {
    if (x.is_zero() || mult == 0) return;
    terms_.emplace_back(x, mult);
  }
  void add(const LinearSum& o, const Scalar& scale = Scalar(1)) {
    for (const auto& [x, n] : o.terms_) add(x * scale, n);
  }

  bool empty() const { return terms_.empty(); }

  Scalar value() const {
    numerics::ScalarSum s;
    for (const auto& [x, n] : terms_) s.add(x, n);
    return s.value();
  }

  Interval enclose(mpfr_prec_t prec) const {
    Interval acc = Interval::from_long(0, prec);
    for (const auto& [x, n] : terms_) acc = acc + x.enclose(prec) * Interval::from_integer(n, prec);
    return acc;
  }

  const std::vector<std::pair<Scalar, mpz_class>>& terms() const { return terms_; }

 private:
  std::vector<std::pair<Scalar, mpz_class>> terms_;
};

// Certified ordering of a and b. kUndecided only when the precision cap is
// reached without separating them.
inline Ordering compare_sums(const LinearSum& a, const LinearSum& b, const PrecisionPolicy& policy = {}) {
  Scalar va = a.value(), vb = b.value();
  if (va.is_exact() && vb.is_exact()) {
    try {
      return numerics::compare_certified(va, vb, policy);
    } catch (const numerics::PrecisionCapExceeded&) {
      return Ordering::kUndecided;
    }
  }
  auto s = numerics::certified_sign([&](mpfr_prec_t p) { return a.enclose(p) - b.enclose(p); }, policy);
  if (!s) return Ordering::kUndecided;
  return *s < 0 ? Ordering::kLess : (*s > 0 ? Ordering::kGreater : Ordering::kEqual);
}

}  // namespace mmda::relaxations
