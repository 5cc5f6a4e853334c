#pragma once

#include <gmpxx.h>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmda/numerics/combinatorics.hpp"
#include "mmda/numerics/interval.hpp"
#include "mmda/numerics/scalar.hpp"

namespace mmda::numerics {

enum class SignCondition { kNegative, kPositive, kNonPositive };

inline const char* to_string(SignCondition c) {
  switch (c) {
    case SignCondition::kNegative: return "< 0";
    case SignCondition::kPositive: return "> 0";
    case SignCondition::kNonPositive: return "<= 0";
  }
  return "?";
}

struct ProofFunction {
  std::string name;
  std::string variable;
  SignCondition condition;
  // Exact zero at this point, if any.
  std::optional<mpq_class> exact_zero_at;
  std::function<Interval(const mpq_class& x, const mpq_class& rho, const mpq_class& eps, mpfr_prec_t)> eval;
};

namespace detail {

inline Interval h_of(const Interval& x) {
  // h vanishes at the endpoints; the enclosure here assumes 0 < x < 1.
  if (!(x.positive() && (Interval::from_long(1, x.precision()) - x).positive()))
    throw DomainError("entropy argument not strictly inside (0, 1)");
  return entropy(x);
}

inline Interval Q(const mpq_class& q, mpfr_prec_t p) { return Interval::from_rational(q, p); }

}  // namespace detail

inline std::vector<ProofFunction> proof_functions() {
  using detail::h_of;
  using detail::Q;
  std::vector<ProofFunction> fns;

  fns.push_back({"f_packing", "rho", SignCondition::kNegative, std::nullopt,
                 [](const mpq_class& r, const mpq_class&, const mpq_class&, mpfr_prec_t p) {
                   if (r <= 0 || r >= mpq_class(1, 2)) throw DomainError("f_packing needs 0 < rho < 1/2");
                   Interval R = Q(r, p), one = Q(1, p), two = Q(2, p);
                   Interval s = Q(r / (1 - r), p);
                   return two * R * h_of(R) - (one - R) * (one - R) * h_of(s * s) +
                          two * (one - R) * h_of(s) - two * h_of(R);
                 }});

  fns.push_back({"g_integral", "rho", SignCondition::kPositive, std::nullopt,
                 [](const mpq_class& r, const mpq_class&, const mpq_class&, mpfr_prec_t p) {
                   if (r <= 0 || r >= mpq_class(1, 2)) throw DomainError("g_integral needs 0 < rho < 1/2");
                   Interval R = Q(r, p), one = Q(1, p);
                   return (one - R) * h_of(Q(r / (1 - r), p)) - R * h_of(Q(mpq_class(1, 3), p)) -
                          (one - R) * h_of(Q(mpq_class(2, 3) * r / (1 - r), p));
                 }});

  fns.push_back({"f1_appendix", "y", SignCondition::kNonPositive, mpq_class(2),
                 [](const mpq_class& y, const mpq_class& r, const mpq_class&, mpfr_prec_t p) {
                   if (y < 2) throw DomainError("f1_appendix needs y >= 2");
                   if (y == 2) return Interval::from_long(0, p);
                   mpq_class d = y - 2, den = 1 - 4 * r + y * r;
                   if (den <= 0) throw DomainError("f1_appendix outside its domain");
                   Interval D = Q(d, p);
                   return Q(2 * r, p) * D * (D.log2() - Q(1, p)) + Q(den, p) * h_of(Q(r * d / den, p));
                 }});

  fns.push_back({"f2_appendix", "x", SignCondition::kNonPositive, mpq_class(2),
                 [](const mpq_class& x, const mpq_class& r, const mpq_class&, mpfr_prec_t p) {
                   if (x > 2) throw DomainError("f2_appendix needs x <= 2");
                   if (x == 2) return Interval::from_long(0, p);
                   mpq_class d = 2 - x, den = 1 - r * x;
                   if (den <= 0) throw DomainError("f2_appendix outside its domain");
                   Interval D = Q(d, p);
                   return Q(2 * r, p) * D * (D.log2() - Q(1, p)) + Q(den, p) * h_of(Q(r * d / den, p));
                 }});

  // Lower bounds on log2(k_i)/m for the three phases of the construction.
  fns.push_back({"k_bound_phase1", "rho", SignCondition::kPositive, std::nullopt,
                 [](const mpq_class& r, const mpq_class&, const mpq_class& e, mpfr_prec_t p) {
                   Interval R = Q(r, p), E = Q(e, p), one = Q(1, p);
                   Interval l = Q(1 / e, p).log2();
                   return -(E * (one - R) * h_of(Q(r / (1 - r), p))) - l * E * R +
                          (one - R) * h_of(Q(e * r / (1 - r), p));
                 }});

  fns.push_back({"k_bound_phase2", "rho", SignCondition::kPositive, std::nullopt,
                 [](const mpq_class& r, const mpq_class&, const mpq_class& e, mpfr_prec_t p) {
                   Interval R = Q(r, p), E = Q(e, p), one = Q(1, p), two = Q(2, p);
                   Interval l = Q(1 / e, p).log2();
                   return -(two * E * R) - l * E * R + (one - two * R) * h_of(Q(e * r / (1 - 2 * r), p));
                 }});

  fns.push_back({"k_bound_phase3", "rho", SignCondition::kPositive, std::nullopt,
                 [](const mpq_class& r, const mpq_class&, const mpq_class& e, mpfr_prec_t p) {
                   Interval R = Q(r, p), E = Q(e, p);
                   Interval l = Q(1 / e, p).log2();
                   return -(E * R * l) + R * h_of(E);
                 }});
  return fns;
}

inline const ProofFunction& find_proof_function(const std::string& name) {
  static const std::vector<ProofFunction> fns = proof_functions();
  for (const auto& f : fns)
    if (f.name == name) return f;
  throw DomainError("unknown proof function: " + name);
}

struct ScanPoint {
  mpq_class x;
  // -1, 0 (certified zero), +1; nullopt when undecided at the cap.
  std::optional<int> sign;
  std::string enclosure;
  bool holds = false;
};

struct ScanReport {
  std::string name;
  std::string variable;
  SignCondition condition;
  mpq_class rho;
  mpq_class eps;
  std::vector<ScanPoint> points;
  std::vector<std::size_t> undecided;
  bool all_hold = false;
  // Longest run of consecutive grid points where the condition holds.
  std::optional<std::pair<std::size_t, std::size_t>> longest_run;
  // Runs anchored at the lower and upper domain ends.
  std::optional<std::size_t> run_from_lo_end;
  std::optional<std::size_t> run_from_hi_start;
};

// Evaluates the named function on `resolution` equally spaced exact grid
// points of [lo, hi]. Parameters not used by the function are ignored.
inline ScanReport scan_proof_function(const std::string& name, const mpq_class& lo, const mpq_class& hi,
                                      std::size_t resolution, const mpq_class& rho = mpq_class(1, 4),
                                      const mpq_class& eps = mpq_class(1, 100),
                                      const PrecisionPolicy& policy = PrecisionPolicy{}) {
  const ProofFunction& fn = find_proof_function(name);
  if (resolution < 1) throw DomainError("resolution must be positive");
  if (lo > hi) throw DomainError("scan domain is empty");
  if (resolution < 2 && lo != hi) throw DomainError("resolution must be at least 2");
  ScanReport rep{fn.name, fn.variable, fn.condition, rho, eps, {}, {}, false, std::nullopt, std::nullopt, std::nullopt};
  for (std::size_t i = 0; i < resolution; ++i) {
    mpq_class x = resolution == 1 ? lo : mpq_class(lo + (hi - lo) * mpq_class(i, resolution - 1));
    x.canonicalize();
    ScanPoint pt{x, std::nullopt, "", false};
    if (fn.exact_zero_at && *fn.exact_zero_at == x) {
      pt.sign = 0;
      pt.enclosure = "[0, 0]";
    } else {
      Interval last(policy.start);
      auto s = certified_sign(
          [&](mpfr_prec_t p) {
            last = fn.eval(x, rho, eps, p);
            return last;
          },
          policy);
      pt.sign = s;
      pt.enclosure = last.to_string(12);
    }
    if (pt.sign) {
      int s = *pt.sign;
      switch (fn.condition) {
        case SignCondition::kNegative: pt.holds = s < 0; break;
        case SignCondition::kPositive: pt.holds = s > 0; break;
        case SignCondition::kNonPositive: pt.holds = s <= 0; break;
      }
    } else {
      rep.undecided.push_back(i);
    }
    rep.points.push_back(pt);
  }
  rep.all_hold = true;
  std::size_t best_len = 0, cur = 0;
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    if (rep.points[i].holds) {
      ++cur;
      if (cur > best_len) {
        best_len = cur;
        rep.longest_run = {i + 1 - cur, i};
      }
    } else {
      rep.all_hold = false;
      cur = 0;
    }
  }
  for (std::size_t i = 0; i < rep.points.size() && rep.points[i].holds; ++i) rep.run_from_lo_end = i;
  for (std::size_t i = rep.points.size(); i-- > 0 && rep.points[i].holds;) rep.run_from_hi_start = i;
  return rep;
}

}  // namespace mmda::numerics
