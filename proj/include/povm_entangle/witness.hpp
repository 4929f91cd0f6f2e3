#pragma once

#include "povm_entangle/parallel.hpp"
#include "povm_entangle/reference.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace povm {

/// Unit-trace positive operator used to probe a POVM element, with the largest
/// value a separable measurement can reach on it when known in closed form.
struct ProbeState {
  HermitianOperator op;
  std::optional<double> gmax;

  ProbeState() = default;
  ProbeState(HermitianOperator o, std::optional<double> g) : op(std::move(o)), gmax(g) {
    if (std::abs(op.trace() - 1.0) > 1e-12) throw InputError("probe state must have unit trace");
    if (min_eigenvalue(op) < -1e-12) throw InputError("probe state must be positive semidefinite");
  }
};

/// Largest separability eigenvalue of Lambda(n, d): max over d' of d'(d'-1)/d'^n.
inline double lambda_gmax_analytic(int n, int d) {
  if (n < 2 || d < 2) throw InputError("lambda bound needs n >= 2 and d >= 2");
  double best = 0.0;
  for (int dp = 1; dp <= d; ++dp) best = std::max(best, dp * (dp - 1.0) / std::pow(dp, n));
  return best;
}

/// (1 + (|0><1|)^{(x)n} + (|1><0|)^{(x)n}) / 2^n with bound (1 + 2^{1-n}) / 2^n.
inline ProbeState ghz_probe(int n) {
  if (n < 2) throw InputError("GHZ probe needs n >= 2");
  const int dim = checked_power(2, n);
  CMatrix m = CMatrix::Identity(dim, dim) + lambda_operator(n, 2).matrix();
  m /= static_cast<double>(dim);
  return ProbeState(HermitianOperator(std::move(m), std::vector<int>(n, 2)),
                    (1.0 + std::pow(2.0, 1 - n)) / std::pow(2.0, n));
}

/// (1 + sum_{k != l} |k><l| (x) |k><l|) / d^2 with bound (1 + (1 - 1/d)) / d^2.
inline ProbeState me_probe(int d) {
  if (d < 2) throw InputError("ME probe needs d >= 2");
  const int dim = checked_power(d, 2);
  CMatrix m = CMatrix::Identity(dim, dim) + lambda_operator(2, d).matrix();
  m /= static_cast<double>(dim);
  return ProbeState(HermitianOperator(std::move(m), {d, d}), (2.0 - 1.0 / d) / (d * d));
}

/// Largest white-noise weight eps for which eps 1 + (1-eps)|GHZ><GHZ| is
/// still certified by the GHZ probe.
inline double ghz_noise_threshold(int n) {
  if (n < 2) throw InputError("GHZ threshold needs n >= 2");
  const double h = std::pow(2.0, n - 1);
  return (h - 1.0) / (3.0 * h - 1.0);
}

inline double me_noise_threshold(int d) {
  if (d < 2) throw InputError("ME threshold needs d >= 2");
  const double inv = 1.0 / d;
  return (d - 2.0 + inv) / (static_cast<double>(d) * d - 2.0 + inv);
}

struct SeparabilityOptions {
  int restarts = 64;
  double tolerance = 1e-10;
  int max_sweeps = 10000;
  std::uint64_t seed = 0x5eed;
  int workers = 1;
};

struct AlternatingRun {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<CVector> product_state;
  std::vector<double> history;  // objective after each sweep
  bool converged = false;
};

struct SeparabilityResult {
  double gmax = -std::numeric_limits<double>::infinity();
  std::vector<CVector> product_state;
  /// Number of restarts that stopped before the sweep cap.
  int converged_restarts = 0;
  int restarts = 0;
  bool all_converged() const { return converged_restarts == restarts; }
};

namespace detail {

inline CVector product_vector(const std::vector<CVector>& states) {
  CVector v = states.front();
  for (std::size_t i = 1; i < states.size(); ++i) v = kron(v, states[i]);
  return v;
}

}  // namespace detail

/// One alternating maximization of <a_1...a_n|L|a_1...a_n> over product
/// states: with all parties but j fixed, the optimal a_j is the top eigenvector
/// of the conditioned d_j x d_j operator. Parties are swept cyclically until
/// the objective changes by less than `tolerance`; the objective never
/// decreases.
inline AlternatingRun alternating_maximize(const HermitianOperator& l, std::vector<CVector> states,
                                           double tolerance, int max_sweeps) {
  const auto& dims = l.parties();
  const std::size_t n = dims.size();
  if (states.size() != n) throw InputError("initial product state has the wrong number of parties");
  AlternatingRun run;
  double previous = -std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double value = previous;
    for (std::size_t j = 0; j < n; ++j) {
      const int dj = dims[j];
      std::vector<CVector> basis_vectors;
      basis_vectors.reserve(dj);
      for (int k = 0; k < dj; ++k) {
        std::vector<CVector> s = states;
        s[j] = CVector::Unit(dj, k);
        basis_vectors.push_back(detail::product_vector(s));
      }
      CMatrix lv(l.dim(), dj);
      for (int k = 0; k < dj; ++k) lv.col(k) = l.matrix() * basis_vectors[k];
      CMatrix conditioned(dj, dj);
      for (int k = 0; k < dj; ++k)
        for (int m = 0; m < dj; ++m) conditioned(k, m) = basis_vectors[k].dot(lv.col(m));
      Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(conditioned));
      states[j] = es.eigenvectors().col(dj - 1);
      value = es.eigenvalues()(dj - 1);
    }
    run.history.push_back(value);
    if (std::abs(value - previous) < tolerance) {
      run.converged = true;
      break;
    }
    previous = value;
  }
  run.value = run.history.empty() ? previous : run.history.back();
  run.product_state = std::move(states);
  return run;
}

/// Seeded random product state for restart `index`.
inline std::vector<CVector> random_product_state(const std::vector<int>& dims, std::uint64_t seed,
                                                 std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  std::vector<CVector> states;
  for (int d : dims) {
    CVector v(d);
    for (int k = 0; k < d; ++k) v(k) = cplx(normal(rng), normal(rng));
    states.push_back(v.normalized());
  }
  return states;
}

/// Numerical largest separability eigenvalue: best fixed point of seeded
/// multi-start alternating maximization. The result is a lower bound on the
/// true maximum.
inline SeparabilityResult separability_eigenvalue_numeric(const HermitianOperator& l,
                                                         const SeparabilityOptions& opts = {}) {
  if (l.dim() > kMaxDenseDimension) throw InputError("operator exceeds the dense guard");
  if (opts.restarts < 1) throw InputError("need at least one restart");
  std::vector<AlternatingRun> runs(opts.restarts);
  parallel_for(runs.size(), opts.workers, [&](std::size_t i) {
    runs[i] = alternating_maximize(l, random_product_state(l.parties(), opts.seed, i), opts.tolerance,
                                   opts.max_sweeps);
  });
  SeparabilityResult out;
  out.restarts = opts.restarts;
  for (const auto& r : runs) {
    if (r.converged) ++out.converged_restarts;
    if (r.value > out.gmax) {
      out.gmax = r.value;
      out.product_state = r.product_state;
    }
  }
  return out;
}

enum class WitnessVerdict { entangled, inconclusive };

inline const char* to_string(WitnessVerdict v) { return v == WitnessVerdict::entangled ? "entangled" : "inconclusive"; }

struct WitnessResult {
  double lhs = 0.0;    // tr(Pi rho) / tr(Pi)
  double bound = 0.0;  // g_max(rho)
  double margin = 0.0;
  WitnessVerdict verdict = WitnessVerdict::inconclusive;
  bool numeric_bound = false;
};

struct WitnessOptions {
  double tolerance = 1e-13;
  /// Use the numeric separability eigenvalue when the probe has no analytic
  /// bound. It is only a lower bound, so verdicts based on it can overclaim.
  bool allow_numeric = false;
  SeparabilityOptions numeric;
};

inline WitnessResult witness_evaluate(const HermitianOperator& element, const ProbeState& probe,
                                      const WitnessOptions& opts = {}) {
  if (element.parties() != probe.op.parties())
    throw InputError("POVM element and probe state act on different spaces");
  const double tr = element.trace();
  if (!(tr > 0)) throw InputError("POVM element must have positive trace");
  WitnessResult r;
  r.lhs = hs_inner(element, probe.op) / tr;
  if (probe.gmax) {
    r.bound = *probe.gmax;
  } else if (opts.allow_numeric) {
    r.bound = separability_eigenvalue_numeric(probe.op, opts.numeric).gmax;
    r.numeric_bound = true;
  } else {
    throw InputError("probe state has no analytic bound and the numeric bound is disabled");
  }
  r.margin = r.lhs - r.bound;
  r.verdict = r.margin > opts.tolerance ? WitnessVerdict::entangled : WitnessVerdict::inconclusive;
  return r;
}

}  // namespace povm
