#pragma once

#include <vector>

#include "mmda/instances/layered_instance.hpp"

namespace mmda::testing {

// Every (m, rho, ell) accepted by the builder with m in [lo, hi].
inline std::vector<instances::InstanceParams> valid_params(int lo, int hi) {
  std::vector<instances::InstanceParams> out;
  for (int m = lo; m <= hi; ++m)
    for (int r = 1; 4 * r <= m; ++r)
      for (int d = 1; d <= r; ++d)
        if (r % d == 0) out.push_back(instances::InstanceParams::make(m, mpq_class(r, m), 3 * d));
  return out;
}

}  // namespace mmda::testing
