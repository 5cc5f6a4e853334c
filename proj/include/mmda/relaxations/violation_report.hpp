#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mmda/relaxations/linear_sum.hpp"
#include "mmda/util/json_support.hpp"

namespace mmda::relaxations {

enum class ConstraintSense { kAtLeast, kAtMost, kEqual };

inline const char* to_string(ConstraintSense s) {
  switch (s) {
    case ConstraintSense::kAtLeast: return ">=";
    case ConstraintSense::kAtMost: return "<=";
    case ConstraintSense::kEqual: return "==";
  }
  return "?";
}

struct ConstraintRecord {
  std::string id;
  ConstraintSense sense = ConstraintSense::kAtLeast;
  Scalar lhs;
  Scalar rhs;
  // lhs / rhs; absent when rhs is zero.
  std::optional<Scalar> factor;
  Ordering ordering = Ordering::kUndecided;
  bool satisfied = false;
  bool certified() const { return ordering != Ordering::kUndecided; }

  double factor_approx() const {
    if (factor) return factor->approx();
    return lhs.is_zero() ? 1.0 : std::numeric_limits<double>::infinity();
  }
};

// Outcome of checking a family of constraints. Every check is counted; the
// stored records are the violations, the undecided ones, and the extremes
// (smallest covering factor, largest packing factor) unless keep_all is set.
class ViolationReport {
 public:
  explicit ViolationReport(std::string name = {}, bool keep_all = false)
      : name_(std::move(name)), keep_all_(keep_all) {}

  const std::string& name() const { return name_; }
  std::uint64_t checked() const { return checked_; }
  std::uint64_t violated() const { return violated_; }
  std::uint64_t undecided() const { return undecided_; }
  bool passed() const { return violated_ == 0 && undecided_ == 0; }
  const std::vector<ConstraintRecord>& records() const { return records_; }
  const std::optional<ConstraintRecord>& worst_covering() const { return worst_covering_; }
  const std::optional<ConstraintRecord>& worst_packing() const { return worst_packing_; }
  const std::vector<std::string>& notes() const { return notes_; }
  void note(std::string s) { notes_.push_back(std::move(s)); }

  // Counts n satisfied constraints that were decided outside check().
  void add_trivial(std::uint64_t n) { checked_ += n; }

  const ConstraintRecord& check(std::string id, ConstraintSense sense, const LinearSum& lhs, const LinearSum& rhs,
                                const PrecisionPolicy& policy = {}) {
    ConstraintRecord r;
    r.id = std::move(id);
    r.sense = sense;
    r.lhs = lhs.value();
    r.rhs = rhs.value();
    r.ordering = compare_sums(lhs, rhs, policy);
    if (!r.rhs.is_zero()) r.factor = r.lhs / r.rhs;
    return settle(std::move(r));
  }

  // Compares lhs against threshold * rhs; the factor stays lhs / rhs.
  const ConstraintRecord& check_scaled(std::string id, ConstraintSense sense, const Scalar& lhs, const Scalar& rhs,
                                       const Scalar& threshold, const PrecisionPolicy& policy = {}) {
    ConstraintRecord r;
    r.id = std::move(id);
    r.sense = sense;
    r.lhs = lhs;
    r.rhs = rhs;
    r.ordering = compare_sums(LinearSum(lhs), LinearSum(threshold * rhs), policy);
    if (!r.rhs.is_zero()) r.factor = r.lhs / r.rhs;
    return settle(std::move(r));
  }

  const ConstraintRecord& check(std::string id, ConstraintSense sense, const Scalar& lhs, const Scalar& rhs,
                                const PrecisionPolicy& policy = {}) {
    return check(std::move(id), sense, LinearSum(lhs), LinearSum(rhs), policy);
  }

  const ConstraintRecord& settle(ConstraintRecord r) {
    switch (r.sense) {
      case ConstraintSense::kAtLeast:
        r.satisfied = r.ordering == Ordering::kGreater || r.ordering == Ordering::kEqual;
        break;
      case ConstraintSense::kAtMost:
        r.satisfied = r.ordering == Ordering::kLess || r.ordering == Ordering::kEqual;
        break;
      case ConstraintSense::kEqual: r.satisfied = r.ordering == Ordering::kEqual; break;
    }
    return add(std::move(r));
  }

  const ConstraintRecord& add(ConstraintRecord r) {
    ++checked_;
    if (!r.certified()) ++undecided_;
    else if (!r.satisfied) ++violated_;
    // Extremes are picked by the decimal approximation; satisfaction above is
    // decided exactly.
    double f = r.factor_approx();
    if (r.sense == ConstraintSense::kAtLeast) {
      if (!worst_covering_ || f < worst_covering_->factor_approx()) worst_covering_ = r;
    } else if (r.sense == ConstraintSense::kAtMost) {
      if (!worst_packing_ || f > worst_packing_->factor_approx()) worst_packing_ = r;
    }
    last_ = r;
    if (keep_all_ || !r.satisfied) records_.push_back(std::move(r));
    return last_;
  }

  void merge(const ViolationReport& o) {
    checked_ += o.checked_;
    violated_ += o.violated_;
    undecided_ += o.undecided_;
    records_.insert(records_.end(), o.records_.begin(), o.records_.end());
    if (o.worst_covering_ &&
        (!worst_covering_ || o.worst_covering_->factor_approx() < worst_covering_->factor_approx()))
      worst_covering_ = o.worst_covering_;
    if (o.worst_packing_ &&
        (!worst_packing_ || o.worst_packing_->factor_approx() > worst_packing_->factor_approx()))
      worst_packing_ = o.worst_packing_;
    notes_.insert(notes_.end(), o.notes_.begin(), o.notes_.end());
  }

  Json to_json() const;

 private:
  std::string name_;
  bool keep_all_ = false;
  std::uint64_t checked_ = 0, violated_ = 0, undecided_ = 0;
  std::vector<ConstraintRecord> records_;
  std::optional<ConstraintRecord> worst_covering_, worst_packing_;
  // The record most recently added, returned by check().
  ConstraintRecord last_;
  std::vector<std::string> notes_;
};

inline Json record_json(const ConstraintRecord& r) {
  Json j;
  j["constraint_id"] = r.id;
  j["sense"] = to_string(r.sense);
  j["lhs"] = scalar_json(r.lhs);
  j["rhs"] = scalar_json(r.rhs);
  j["factor"] = r.factor ? scalar_json(*r.factor) : Json(nullptr);
  j["certified"] = r.certified();
  j["satisfied"] = r.satisfied;
  return j;
}

inline Json ViolationReport::to_json() const {
  Json j;
  j["name"] = name_;
  j["checked"] = checked_;
  j["violated"] = violated_;
  j["undecided"] = undecided_;
  j["passed"] = passed();
  j["worst_covering"] = worst_covering_ ? record_json(*worst_covering_) : Json(nullptr);
  j["worst_packing"] = worst_packing_ ? record_json(*worst_packing_) : Json(nullptr);
  Json list = Json::array();
  for (const auto& r : records_) list.push_back(record_json(r));
  j["constraints"] = list;
  if (!notes_.empty()) j["notes"] = notes_;
  return j;
}

}  // namespace mmda::relaxations
