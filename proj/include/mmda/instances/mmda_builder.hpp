#pragma once

#include <gmpxx.h>

#include <bit>
#include <cstdint>
#include <vector>

#include "mmda/instances/layered_instance.hpp"
#include "mmda/instances/subsets.hpp"
#include "mmda/numerics/combinatorics.hpp"

namespace mmda::instances {

using numerics::binomial;
using numerics::binomial_monomial;
using numerics::factorial_monomial;
using numerics::Monomial;

// gamma'_1, gamma'_2, gamma'_3 as exact monomials.
struct GammaValues {
  Scalar g1, g2, g3;
};

inline GammaValues mmda_gammas(const InstanceParams& p) {
  int r = p.rho_m(), s = p.step();
  Monomial num = factorial_monomial(s);
  Monomial rf = factorial_monomial(r);
  auto g = [&](const Monomial& denom_base) {
    return Scalar(num / denom_base.pow(p.epsilon)).simplified();
  };
  return {g(rf * binomial_monomial(p.m - r, r)), g(rf * binomial_monomial(2 * r, r)), g(rf)};
}

// Degree profile from the closed forms alone; needs no graph.
inline std::vector<LayerProfile> mmda_profile(const InstanceParams& p) {
  p.validate();
  int phases = p.phases(), s = p.step(), m = p.m;
  GammaValues gv = mmda_gammas(p);
  std::vector<LayerProfile> out;
  for (int i = 0; i <= p.ell; ++i) {
    LayerProfile lp;
    lp.index = i;
    lp.label_size = p.label_size(i);
    lp.size = mpz_class(binomial(m, lp.label_size)).get_ui();
    int lab = lp.label_size;
    if (i < p.ell) {
      lp.delta_plus = i < 2 * phases ? binomial(m - lab, s) : binomial(lab, s);
      lp.gamma = i < phases ? gv.g1 : (i < 2 * phases ? gv.g2 : gv.g3);
      lp.k = (lp.gamma * Scalar(*lp.delta_plus)).simplified();
    } else {
      lp.delta_plus = mpz_class(0);
    }
    if (i > 0) lp.delta_minus = i <= 2 * phases ? binomial(lab, s) : binomial(m - lab, s);
    else lp.delta_minus = mpz_class(0);
    out.push_back(lp);
  }
  return out;
}

inline std::uint64_t mmda_edge_count(const InstanceParams& p) {
  mpz_class total = 0;
  for (const auto& lp : mmda_profile(p)) total += mpz_class(static_cast<unsigned long>(lp.size)) * *lp.delta_minus;
  return total.fits_ulong_p() ? total.get_ui() : ~std::uint64_t{0};
}

inline LayeredInstance build_mmda(const InstanceParams& p, const BuildLimits& limits = BuildLimits{}) {
  p.validate();
  if (p.m > limits.max_m || p.m > kMaxGroundSet) throw SizeCapExceeded("m exceeds the configured size cap");
  std::uint64_t edges = mmda_edge_count(p);
  if (edges > limits.max_edges)
    throw SizeCapExceeded("instance would have " + std::to_string(edges) + " edges, above the cap of " +
                          std::to_string(limits.max_edges));
  LayeredInstance g;
  g.family_ = Family::kMmda;
  g.params_ = p;
  g.profile_ = mmda_profile(p);
  g.layer_offset_.assign(1, 0);
  for (const auto& lp : g.profile_) g.layer_offset_.push_back(g.layer_offset_.back() + static_cast<std::uint32_t>(lp.size));
  g.labels_.reserve(g.layer_offset_.back());
  for (int i = 0; i <= p.ell; ++i)
    for_each_subset(p.m, p.label_size(i), [&](Label s) { g.labels_.push_back(s); });

  const int phases = p.phases(), step = p.step();
  const Label all = (Label{1} << p.m) - 1;
  g.edges_.reserve(edges);
  std::vector<VertexId> tails;
  for (int i = 1; i <= p.ell; ++i) {
    bool expanding = i <= 2 * phases;
    for (VertexId v = g.layer_begin(i); v < g.layer_end(i); ++v) {
      Label sv = g.labels_[v];
      tails.clear();
      if (expanding) {
        for_each_subset_of(sv, step, [&](Label drop) { tails.push_back(g.vertex_with_label(i - 1, sv & ~drop)); });
      } else {
        for_each_subset_of(all & ~sv, step, [&](Label add) { tails.push_back(g.vertex_with_label(i - 1, sv | add)); });
      }
      std::sort(tails.begin(), tails.end());
      for (VertexId u : tails) g.edges_.push_back({u, v});
    }
  }
  g.layer_k_.clear();
  for (const auto& lp : g.profile_) g.layer_k_.push_back(lp.k);
  g.finish();
  return g;
}

inline LayeredInstance build_mmda(int m, const mpq_class& rho, int ell, const BuildLimits& limits = BuildLimits{}) {
  return build_mmda(InstanceParams::make(m, rho, ell), limits);
}

// k_s, k_1, k_2 of the depth-3 construction, straight from its definition.
struct DepthThreeRequirements {
  Scalar ks, k1, k2;
};

inline DepthThreeRequirements depth_three_requirements(int m, int r) {
  return {Scalar(mpq_class(binomial(m, r), binomial(m - r, r))),
          Scalar(mpq_class(binomial(m - r, r), binomial(2 * r, r))), Scalar(binomial(2 * r, r))};
}

}  // namespace mmda::instances
