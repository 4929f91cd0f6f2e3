// Scan of the GHZ probe test over the white-noise weight, with the point
// where certification is lost.

#include "povm_entangle.hpp"

#include <cstdio>

int main() {
  for (int n = 2; n <= 5; ++n) {
    const auto probe = povm::ghz_probe(n);
    std::printf("n = %d  bound %.6f  threshold %.6f\n", n, *probe.gmax, povm::ghz_noise_threshold(n));
    for (int s = 0; s <= 8; ++s) {
      const double eps = 0.05 * s;
      const auto r = povm::witness_evaluate(povm::noisy_ghz_element(n, eps), probe);
      std::printf("  eps %.2f  lhs %.6f  %s\n", eps, r.lhs, povm::to_string(r.verdict));
    }
  }
  std::printf("\nlarge n threshold: %.9f\n", povm::ghz_noise_threshold(40));
}
