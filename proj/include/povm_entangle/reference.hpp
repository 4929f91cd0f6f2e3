#pragma once

#include "povm_entangle/pauli.hpp"

#include <cmath>

namespace povm {

/// Bell labels in the order 0, x, y, z.
inline constexpr std::array<const char*, 4> kBellLabels{"0", "x", "y", "z"};

/// Standard-form coefficients (pi_0, pi_x, pi_y, pi_z) of the four Bell
/// projectors: singlet (0), (|00>-|11>)/sqrt2 (x), (|00>+|11>)/sqrt2 (y),
/// (|01>+|10>)/sqrt2 (z).
inline std::array<double, 4> bell_pi(int w) {
  std::array<double, 4> pi{0.25, 0.25, 0.25, 0.25};
  if (w == 0) {
    pi[1] = pi[2] = pi[3] = -0.25;
  } else {
    pi[w] = -0.25;
  }
  return pi;
}

inline PovmSet bell_povm() {
  std::vector<std::string> labels;
  std::vector<HermitianOperator> elements;
  for (int w = 0; w < 4; ++w) {
    labels.emplace_back(kBellLabels[w]);
    elements.push_back(diagonal_pauli_operator(bell_pi(w)));
  }
  return PovmSet(std::move(labels), std::move(elements));
}

inline void require_noise_fraction(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw InputError("noise fraction must lie in [0, 1]");
}

/// Guard for dense storage of d^n dimensional operators.
inline constexpr long kMaxDenseDimension = 4096;

inline int checked_power(int d, int n) {
  long dim = 1;
  for (int i = 0; i < n; ++i) {
    dim *= d;
    if (dim > kMaxDenseDimension)
      throw InputError("dimension " + std::to_string(d) + "^" + std::to_string(n) + " exceeds the dense guard of " +
                       std::to_string(kMaxDenseDimension));
  }
  return static_cast<int>(dim);
}

/// eps * 1 + (1 - eps) |GHZ><GHZ| with |GHZ> = (|0...0> + |1...1>)/sqrt2.
inline HermitianOperator noisy_ghz_element(int n, double eps) {
  if (n < 2) throw InputError("GHZ element needs n >= 2 parties");
  require_noise_fraction(eps);
  const int dim = checked_power(2, n);
  CVector ghz = CVector::Zero(dim);
  ghz(0) = ghz(dim - 1) = 1.0 / std::sqrt(2.0);
  CMatrix m = eps * CMatrix::Identity(dim, dim) + (1.0 - eps) * ghz * ghz.adjoint();
  return HermitianOperator::hermitized(m, std::vector<int>(n, 2));
}

/// eps * 1 + (1 - eps) |ME><ME| with |ME> = d^{-1/2} sum_k |k>|k>.
inline HermitianOperator noisy_me_element(int d, double eps) {
  if (d < 2) throw InputError("ME element needs local dimension d >= 2");
  require_noise_fraction(eps);
  const int dim = checked_power(d, 2);
  CVector me = CVector::Zero(dim);
  for (int k = 0; k < d; ++k) me(k * d + k) = 1.0 / std::sqrt(static_cast<double>(d));
  CMatrix m = eps * CMatrix::Identity(dim, dim) + (1.0 - eps) * me * me.adjoint();
  return HermitianOperator::hermitized(m, {d, d});
}

/// sum_{k,l} (|k><l|)^{(x)n} - sum_k (|k><k|)^{(x)n}: ones on the off-diagonal
/// entries connecting |k...k> and |l...l>.
inline HermitianOperator lambda_operator(int n, int d) {
  if (n < 2 || d < 2) throw InputError("lambda operator needs n >= 2 and d >= 2");
  const int dim = checked_power(d, n);
  // index of |k,k,...,k>
  auto diag_index = [&](int k) {
    int idx = 0;
    for (int i = 0; i < n; ++i) idx = idx * d + k;
    return idx;
  };
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      if (k != l) m(diag_index(k), diag_index(l)) = 1.0;
  return HermitianOperator(std::move(m), std::vector<int>(n, d));
}

}  // namespace povm
