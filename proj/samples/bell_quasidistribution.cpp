// Ideal Bell measurement: standard form and optimal quasidistribution of
// every element, printed as 6x6 tables.

#include "povm_entangle.hpp"

#include <cstdio>

int main() {
  const povm::PovmSet bell = povm::bell_povm();
  for (std::size_t k = 0; k < bell.size(); ++k) {
    const auto sf = povm::to_standard_form(bell[k]);
    const auto q = povm::optimal_quasidistribution(sf);
    const auto report = povm::negativity_report(q);
    std::printf("element %s  pi = (%.4f, %.4f, %.4f, %.4f)  q = %.4f  cumulative negativity = %.4f\n",
                bell.labels()[k].c_str(), sf.pi[0], sf.pi[1], sf.pi[2], sf.pi[3], q.q, report.cumulative_negativity);
    std::printf("      ");
    for (const char* b : povm::kLocalLabels) std::printf("%9s", b);
    std::printf("\n");
    for (int i = 0; i < 6; ++i) {
      std::printf("  %-4s", povm::kLocalLabels[i]);
      for (int j = 0; j < 6; ++j) std::printf("%9.4f", q.grid(i, j));
      std::printf("\n");
    }
    std::printf("\n");
  }
}
