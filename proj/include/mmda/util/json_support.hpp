#pragma once

#include <cmath>
#include <string>

#include "json.hpp"
#include "mmda/numerics/scalar.hpp"

namespace mmda {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Exact values carry their canonical text; all values carry a double.
inline Json scalar_json(const numerics::Scalar& x) {
  Json j;
  switch (x.kind()) {
    case numerics::Scalar::Kind::kRational: j["kind"] = "rational"; break;
    case numerics::Scalar::Kind::kMonomial: j["kind"] = "monomial"; break;
    case numerics::Scalar::Kind::kInterval: j["kind"] = "interval"; break;
  }
  j["value"] = x.to_string();
  double a = x.approx();
  if (std::isfinite(a)) j["approx"] = a;
  else j["approx"] = nullptr;
  return j;
}

inline std::string rational_text(const mpq_class& q) { return q.get_str(); }

}  // namespace mmda
