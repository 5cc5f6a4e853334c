// Walks the m = 8 depth-three instance: sizes, requirements, LP check and the
// integral optimum.

#include <iostream>

#include "mmda/instances/mmda_builder.hpp"
#include "mmda/integral/bruteforce.hpp"
#include "mmda/relaxations/assignment_check.hpp"

int main() {
  using namespace mmda;
  instances::LayeredInstance g = instances::build_mmda(8, mpq_class(1, 4), 3);
  for (int i = 0; i <= g.depth(); ++i) {
    std::cout << "L" << i << ": " << g.layer_size(i) << " vertices";
    if (i < g.depth()) std::cout << ", k = " << g.layer_requirement(i).to_string();
    std::cout << "\n";
  }
  auto r = relaxations::verify_assignment(g, relaxations::assignment_solution(g));
  std::cout << "assignment LP: " << (r.passed() ? "feasible" : "violated") << " (" << r.checked() << " checks)\n";
  auto b = integral::bruteforce_best(g);
  std::cout << "best integral quality: " << b.quality.alpha.to_string() << "\n";
  return r.passed() ? 0 : 1;
}
