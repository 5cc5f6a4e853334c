#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mmda/numerics/scalar.hpp"

namespace mmda::relaxations {

using numerics::Scalar;

// Index into a ValueTable. Class 0 is always the value zero.
using ClassId = std::uint32_t;
inline constexpr ClassId kZeroClass = 0;

// Interns exact values so that large solutions store one small id per entry.
class ValueTable {
 public:
  ValueTable() { values_.emplace_back(0); index_.emplace("0", kZeroClass); }

  ClassId intern(const Scalar& x) {
    Scalar v = x.simplified();
    if (!v.is_exact()) throw numerics::DomainError("only exact values can be interned");
    std::string key = v.to_string();
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    ClassId id = static_cast<ClassId>(values_.size());
    values_.push_back(v);
    index_.emplace(std::move(key), id);
    return id;
  }

  const Scalar& operator[](ClassId c) const { return values_.at(c); }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<Scalar> values_;
  std::map<std::string, ClassId> index_;
};

}  // namespace mmda::relaxations
