#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmda/shadow/shadow_model.hpp"
#include "mmda/util/json_support.hpp"

namespace mmda::shadow {

// f triggers e when x_f > 0 and x^{(f)}_e > 0.
struct Trigger {
  EdgeId f;
  ClassId x;  // class of x_f in the base table
  ClassId b;  // class of x^{(f)}_e in the family table
};

enum class EventSign { kPositive, kNegative };

inline const char* to_string(EventSign s) { return s == EventSign::kPositive ? "positive" : "negative"; }

struct ConditionEvent {
  EdgeId edge;
  EventSign sign;
};

struct MomentReport {
  std::string model;
  std::optional<ConditionEvent> event;
  Scalar event_probability{1};
  std::vector<Scalar> marginal;        // s_e
  std::vector<Scalar> probability;     // P[e in A | E]
  std::vector<Scalar> multiplicity;    // E[n_e | E]
  std::vector<Scalar> in_probability;  // per vertex, sums of the above over in/out edges
  std::vector<Scalar> out_probability;
  std::vector<Scalar> in_multiplicity;
  std::vector<Scalar> out_multiplicity;
};

namespace detail {

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ k.size();
    for (std::uint64_t v : k) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

inline constexpr int kClassBits = 21;
inline constexpr std::uint64_t kClassMask = (1ULL << kClassBits) - 1;

inline std::uint64_t pack(ClassId a, ClassId b, ClassId c = 0) {
  return (std::uint64_t{a} << (2 * kClassBits)) | (std::uint64_t{b} << kClassBits) | c;
}

// Run-length (value, count) list of the packed keys, sorted by value.
inline std::vector<std::uint64_t> multiset_key(std::vector<std::uint64_t>& items) {
  std::sort(items.begin(), items.end());
  std::vector<std::uint64_t> key;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j] == items[i]) ++j;
    key.push_back(items[i]);
    key.push_back(j - i);
    i = j;
  }
  return key;
}

inline mpq_class pow_q(const mpq_class& a, std::uint64_t n) {
  mpq_class r = 1;
  for (std::uint64_t i = 0; i < n; ++i) r *= a;
  return r;
}

}  // namespace detail

// Exact moments of the shadow distribution. Every probability is a product
// over mutually independent trigger events, so values are computed from the
// multiset of (x_f, x^{(f)}_e) pairs and memoized on that multiset.
class ShadowEngine {
 public:
  struct Marginal {
    mpq_class s;       // P[e in A]
    mpq_class absent;  // 1 - s
    mpq_class mean;    // E[n_e]
  };
  struct Joint {
    mpq_class both;      // P[e in A and e1 in A]
    mpq_class mean_pos;  // E[n_e 1{e1 in A}]
  };

  // cache_triggers keeps every trigger list in memory; turn it off for
  // million-edge instances that only need marginals.
  explicit ShadowEngine(const ShadowModel& model, bool cache_triggers = true)
      : model_(&model), cache_(cache_triggers) {
    const auto& xt = model.base().table();
    const auto& ft = model.family().table();
    if (xt.size() > detail::kClassMask || ft.size() > detail::kClassMask)
      throw numerics::DomainError("too many value classes for the exact engine");
    for (ClassId c = 0; c < xt.size(); ++c) xq_.push_back(rational_of(xt[c]));
    for (ClassId c = 0; c < ft.size(); ++c) bq_.push_back(rational_of(ft[c]));
    const std::size_t ne = model.instance().num_edges();
    edge_sig_.assign(ne, kUnset);
    if (cache_) triggers_.resize(ne);
  }

  const ShadowModel& model() const { return *model_; }
  const LayeredInstance& instance() const { return model_->instance(); }
  const mpq_class& x_value(ClassId c) const { return xq_[c]; }
  const mpq_class& b_value(ClassId c) const { return bq_[c]; }
  mpq_class x_of(EdgeId e) const { return xq_[model_->base().class_of(e)]; }

  // Triggers of e in increasing order of f.
  void collect_triggers(EdgeId e, std::vector<Trigger>& out) const {
    out.clear();
    const EdgeSolution& x = model_->base();
    model_->family().for_each_trigger(e, [&](EdgeId f, ClassId b) {
      ClassId xc = x.class_of(f);
      if (xc != relaxations::kZeroClass && b != relaxations::kZeroClass) out.push_back({f, xc, b});
    });
    if (!std::is_sorted(out.begin(), out.end(), [](const Trigger& a, const Trigger& c) { return a.f < c.f; }))
      std::sort(out.begin(), out.end(), [](const Trigger& a, const Trigger& c) { return a.f < c.f; });
  }

  const std::vector<Trigger>& triggers(EdgeId e) {
    if (!cache_) {
      collect_triggers(e, scratch_);
      return scratch_;
    }
    auto& t = triggers_.at(e);
    if (!filled(e)) {
      collect_triggers(e, t);
      mark(e);
    }
    return t;
  }

  // Id of the (x_f, x^{(f)}_e) multiset of e.
  std::uint32_t signature(EdgeId e) {
    if (edge_sig_.at(e) != kUnset) return edge_sig_[e];
    std::uint32_t id = signature_of(triggers(e));
    if (cache_) edge_sig_[e] = id;
    return id;
  }

  std::uint32_t signature_of(const std::vector<Trigger>& t) {
    std::vector<std::uint64_t> items;
    items.reserve(t.size());
    for (const auto& tr : t) items.push_back(detail::pack(tr.x, tr.b));
    return intern_marginal(detail::multiset_key(items));
  }

  std::size_t num_signatures() const { return marginals_.size(); }
  const Marginal& signature_marginal(std::uint32_t id) const { return marginals_.at(id); }
  const Marginal& marginal_info(EdgeId e) { return marginals_[signature(e)]; }
  const mpq_class& marginal_q(EdgeId e) { return marginal_info(e).s; }
  Scalar marginal(EdgeId e) { return Scalar(marginal_q(e)); }
  Scalar expected_multiplicity(EdgeId e) { return Scalar(marginal_info(e).mean); }

  // Memo id of the joint structure of (e, e1); see joint().
  std::uint32_t joint_id(EdgeId e, EdgeId e1) {
    const auto& ta = triggers(e);
    std::vector<Trigger> copy;
    if (!cache_) copy = ta;
    const auto& a = cache_ ? ta : copy;
    const auto& b = triggers(e1);
    std::vector<std::uint64_t> items;
    items.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a[i].f < b[j].f)) {
        items.push_back(detail::pack(a[i].x, a[i].b, 0));
        ++i;
      } else if (i == a.size() || b[j].f < a[i].f) {
        items.push_back(detail::pack(b[j].x, 0, b[j].b));
        ++j;
      } else {
        items.push_back(detail::pack(a[i].x, a[i].b, b[j].b));
        ++i;
        ++j;
      }
    }
    std::vector<std::uint64_t> key = detail::multiset_key(items);
    key.push_back(e == e1 ? 1 : 0);
    auto it = joint_index_.find(key);
    if (it != joint_index_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(joints_.size());
    joints_.push_back(evaluate_joint(key));
    joint_index_.emplace(std::move(key), id);
    return id;
  }

  const Joint& joint_info(std::uint32_t id) const { return joints_.at(id); }
  const Joint& joint(EdgeId e, EdgeId e1) { return joints_[joint_id(e, e1)]; }
  std::size_t num_joints() const { return joints_.size(); }

  Scalar pair_probability(EdgeId e, EdgeId e1) { return Scalar(joint(e, e1).both); }

  // P[E] for an event on e1.
  mpq_class event_probability(const ConditionEvent& ev) {
    const Marginal& m = marginal_info(ev.edge);
    return ev.sign == EventSign::kPositive ? m.s : m.absent;
  }

  // P[e in A | E] and E[n_e | E] for every edge. Throws on P[E] = 0.
  void event_moments(const ConditionEvent& ev, std::vector<mpq_class>& prob, std::vector<mpq_class>& mult) {
    const LayeredInstance& g = instance();
    mpq_class pe = event_probability(ev);
    if (pe == 0)
      throw numerics::DomainError("conditioning on a zero-probability event on edge " + std::to_string(ev.edge));
    prob.resize(g.num_edges());
    mult.resize(g.num_edges());
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const Joint& jt = joint(e, ev.edge);
      if (ev.sign == EventSign::kPositive) {
        prob[e] = jt.both / pe;
        mult[e] = jt.mean_pos / pe;
      } else {
        const Marginal& m = marginal_info(e);
        prob[e] = (m.s - jt.both) / pe;
        mult[e] = (m.mean - jt.mean_pos) / pe;
      }
    }
  }

  MomentReport conditional_report(const std::optional<ConditionEvent>& ev) {
    const LayeredInstance& g = instance();
    MomentReport r;
    r.model = model_->name();
    r.event = ev;
    std::vector<mpq_class> prob(g.num_edges()), mult(g.num_edges());
    if (ev) {
      r.event_probability = Scalar(event_probability(*ev));
      event_moments(*ev, prob, mult);
    } else {
      for (EdgeId e = 0; e < g.num_edges(); ++e) {
        prob[e] = marginal_info(e).s;
        mult[e] = marginal_info(e).mean;
      }
    }
    std::vector<mpq_class> ip(g.num_vertices()), op(g.num_vertices()), im(g.num_vertices()), om(g.num_vertices());
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      r.marginal.emplace_back(marginal_info(e).s);
      r.probability.emplace_back(prob[e]);
      r.multiplicity.emplace_back(mult[e]);
      ip[g.head(e)] += prob[e];
      op[g.tail(e)] += prob[e];
      im[g.head(e)] += mult[e];
      om[g.tail(e)] += mult[e];
    }
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      r.in_probability.emplace_back(ip[v]);
      r.out_probability.emplace_back(op[v]);
      r.in_multiplicity.emplace_back(im[v]);
      r.out_multiplicity.emplace_back(om[v]);
    }
    return r;
  }

 private:
  static constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();

  static mpq_class rational_of(const Scalar& v) {
    Scalar s = v.simplified();
    if (!s.is_rational()) throw numerics::DomainError("the exact shadow engine needs rational values, got " + s.to_string());
    return s.rational();
  }

  bool filled(EdgeId e) const { return filled_.size() > e && filled_[e]; }
  void mark(EdgeId e) {
    if (filled_.size() <= e) filled_.resize(instance().num_edges(), false);
    filled_[e] = true;
  }

  std::uint32_t intern_marginal(std::vector<std::uint64_t> key) {
    auto it = marginal_index_.find(key);
    if (it != marginal_index_.end()) return it->second;
    Marginal m;
    m.absent = 1;
    m.mean = 0;
    for (std::size_t i = 0; i < key.size(); i += 2) {
      ClassId xc = static_cast<ClassId>((key[i] >> (2 * detail::kClassBits)) & detail::kClassMask);
      ClassId bc = static_cast<ClassId>((key[i] >> detail::kClassBits) & detail::kClassMask);
      mpq_class a = xq_[xc] * bq_[bc];
      m.absent *= detail::pow_q(1 - a, key[i + 1]);
      m.mean += a * key[i + 1];
    }
    m.s = 1 - m.absent;
    std::uint32_t id = static_cast<std::uint32_t>(marginals_.size());
    marginals_.push_back(std::move(m));
    marginal_index_.emplace(std::move(key), id);
    return id;
  }

  // Key: run-length triples (x_f, x^{(f)}_e, x^{(f)}_{e1}) over T(e) u T(e1),
  // then a same-edge flag.
  Joint evaluate_joint(const std::vector<std::uint64_t>& key) const {
    struct Row {
      mpq_class x, b, b1;
      std::uint64_t n;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i + 1 < key.size(); i += 2) {
      std::uint64_t k = key[i];
      rows.push_back({xq_[(k >> (2 * detail::kClassBits)) & detail::kClassMask],
                      bq_[(k >> detail::kClassBits) & detail::kClassMask], bq_[k & detail::kClassMask], key[i + 1]});
    }
    bool same = key.back() == 1;
    Joint jt;
    mpq_class abs_e = 1, abs_1 = 1, abs_both = 1, mean = 0;
    for (const auto& r : rows) {
      abs_e *= detail::pow_q(1 - r.x * r.b, r.n);
      abs_1 *= detail::pow_q(1 - r.x * r.b1, r.n);
      abs_both *= detail::pow_q(1 - r.x * (1 - (1 - r.b) * (1 - r.b1)), r.n);
      mean += r.x * r.b * r.n;
    }
    if (same) {
      jt.both = 1 - abs_e;
      jt.mean_pos = mean;
      return jt;
    }
    jt.both = 1 - abs_e - abs_1 + abs_both;
    // Given f in S and e in S_f, e1 is missed iff it is missed by S_f and by
    // every other trigger of e1.
    jt.mean_pos = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      if (r.b == 0) continue;
      mpq_class others = detail::pow_q(1 - r.x * r.b1, r.n - 1);
      for (std::size_t j = 0; j < rows.size(); ++j)
        if (j != i) others *= detail::pow_q(1 - rows[j].x * rows[j].b1, rows[j].n);
      mpq_class q = 1 - (1 - r.b1) * others;
      jt.mean_pos += r.x * r.b * q * r.n;
    }
    return jt;
  }

  const ShadowModel* model_;
  bool cache_;
  std::vector<mpq_class> xq_, bq_;
  std::vector<std::vector<Trigger>> triggers_;
  std::vector<bool> filled_;
  std::vector<Trigger> scratch_;
  std::vector<std::uint32_t> edge_sig_;
  std::vector<Marginal> marginals_;
  std::unordered_map<std::vector<std::uint64_t>, std::uint32_t, detail::KeyHash> marginal_index_;
  std::vector<Joint> joints_;
  std::unordered_map<std::vector<std::uint64_t>, std::uint32_t, detail::KeyHash> joint_index_;
};

inline Json moment_report_json(const MomentReport& r, const LayeredInstance& g) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "moment_report";
  j["model"] = r.model;
  if (r.event) {
    j["event"] = {{"edge", r.event->edge}, {"sign", to_string(r.event->sign)}};
  } else {
    j["event"] = nullptr;
  }
  j["event_probability"] = scalar_json(r.event_probability);
  Json edges = Json::array();
  for (EdgeId e = 0; e < r.marginal.size(); ++e) {
    Json x;
    x["edge"] = e;
    x["tail"] = g.tail(e);
    x["head"] = g.head(e);
    x["marginal"] = scalar_json(r.marginal[e]);
    x["probability"] = scalar_json(r.probability[e]);
    x["multiplicity"] = scalar_json(r.multiplicity[e]);
    edges.push_back(x);
  }
  j["edges"] = edges;
  Json verts = Json::array();
  for (VertexId v = 0; v < r.in_probability.size(); ++v) {
    Json x;
    x["vertex"] = v;
    x["in_probability"] = scalar_json(r.in_probability[v]);
    x["out_probability"] = scalar_json(r.out_probability[v]);
    x["in_multiplicity"] = scalar_json(r.in_multiplicity[v]);
    x["out_multiplicity"] = scalar_json(r.out_multiplicity[v]);
    verts.push_back(x);
  }
  j["vertices"] = verts;
  return j;
}

}  // namespace mmda::shadow
