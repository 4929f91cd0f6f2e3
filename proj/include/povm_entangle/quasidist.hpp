#pragma once

#include "povm_entangle/reference.hpp"
#include "povm_entangle/standard_form.hpp"

#include <map>
#include <optional>

namespace povm {

/// Optimal entanglement quasidistribution of a two-qubit standard form over
/// the local labels x+, x-, y+, y-, z+, z- (rows Alice, columns Bob).
struct QuasiDistribution {
  QuasiGrid grid = QuasiGrid::Zero();
  double q = 0.0;
  /// Trace of the operator the grid decomposes (sum of all entries).
  double trace = 0.0;

  double min_entry() const { return grid.minCoeff(); }
};

/// q = pi_0 - |pi_x| - |pi_y| - |pi_z|
inline double q_parameter(const std::array<double, 4>& pi) {
  return pi[0] - std::abs(pi[1]) - std::abs(pi[2]) - std::abs(pi[3]);
}

/// Q(w_sA, w'_sB) = (q/3 + |pi_w| + sA sB pi_w) delta_{w,w'}
inline QuasiDistribution optimal_quasidistribution(const std::array<double, 4>& pi) {
  QuasiDistribution out;
  out.q = q_parameter(pi);
  out.trace = 4.0 * pi[0];
  for (int w = 0; w < 3; ++w)
    for (int sa = 0; sa < 2; ++sa)
      for (int sb = 0; sb < 2; ++sb) {
        const double sign = sa == sb ? 1.0 : -1.0;
        out.grid(2 * w + sa, 2 * w + sb) = out.q / 3.0 + std::abs(pi[w + 1]) + sign * pi[w + 1];
      }
  return out;
}

inline QuasiDistribution optimal_quasidistribution(const StandardForm& sf) { return optimal_quasidistribution(sf.pi); }

inline TildeDecomposition back_transform(const StandardForm& sf, const QuasiDistribution& q) {
  return back_transform(sf, q.grid);
}

enum class Verdict { separable, entangled };

inline const char* to_string(Verdict v) { return v == Verdict::entangled ? "entangled" : "separable"; }

struct NegativityReport {
  double max_negativity = 0.0;         // min(0, smallest entry)
  double cumulative_negativity = 0.0;  // sum of negative entries
  double q = 0.0;
  Verdict verdict = Verdict::separable;
  /// -Q/sigma on negative entries; empty when no sigma grid was supplied,
  /// NaN where undefined.
  std::optional<QuasiGrid> significance;
};

inline constexpr double kVerdictTolerance = 1e-9;

inline NegativityReport negativity_report(const QuasiDistribution& q, const std::optional<QuasiGrid>& sigma = {},
                                          double tolerance = kVerdictTolerance) {
  NegativityReport r;
  r.q = q.q;
  r.max_negativity = std::min(0.0, q.grid.minCoeff());
  r.cumulative_negativity = q.grid.unaryExpr([](double v) { return v < 0 ? v : 0.0; }).sum();
  r.verdict = q.q < -tolerance ? Verdict::entangled : Verdict::separable;
  if (sigma) {
    QuasiGrid s;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        s(i, j) = q.grid(i, j) < 0 && (*sigma)(i, j) > 0 ? -q.grid(i, j) / (*sigma)(i, j)
                                                         : std::numeric_limits<double>::quiet_NaN();
    r.significance = s;
  }
  return r;
}

/// Ideal grids of the four Bell projectors keyed by Bell label.
inline std::map<std::string, QuasiDistribution> ideal_bell_reference() {
  std::map<std::string, QuasiDistribution> out;
  for (int w = 0; w < 4; ++w) out[kBellLabels[w]] = optimal_quasidistribution(bell_pi(w));
  return out;
}

}  // namespace povm
