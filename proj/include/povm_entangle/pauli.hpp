#pragma once

#include "povm_entangle/operator.hpp"

namespace povm {

/// Real coefficients pi_{w,w'} of a two-qubit operator in the
/// sigma_w (x) sigma_w' basis, rows Alice and columns Bob, both ordered 0,x,y,z.
struct PauliCorrelation {
  Mat4 coeffs = Mat4::Zero();

  double operator()(int w, int wp) const { return coeffs(w, wp); }
  double& operator()(int w, int wp) { return coeffs(w, wp); }

  /// Correlation block pi_{w,w'} for w, w' in {x,y,z}.
  Mat3 correlation_block() const { return coeffs.block<3, 3>(1, 1); }

  /// Largest |pi_{w,0}| or |pi_{0,w}|.
  double local_magnitude() const {
    return std::max(coeffs.block<3, 1>(1, 0).cwiseAbs().maxCoeff(), coeffs.block<1, 3>(0, 1).cwiseAbs().maxCoeff());
  }
};

inline const Mat4c& two_qubit_pauli(int w, int wp) {
  static const auto table = [] {
    std::array<Mat4c, 16> t;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) t[a * 4 + b] = kron(CMatrix(pauli(a)), CMatrix(pauli(b)));
    return t;
  }();
  return table[w * 4 + wp];
}

/// pi_{w,w'} = tr(op sigma_w (x) sigma_w') / 4. Rejects matrices whose
/// coefficients carry an imaginary part above 1e-9.
inline PauliCorrelation pauli_expand(const CMatrix& op) {
  if (op.rows() != 4 || op.cols() != 4) throw InputError("pauli_expand needs a 4x4 operator");
  PauliCorrelation c;
  for (int w = 0; w < 4; ++w)
    for (int wp = 0; wp < 4; ++wp) {
      const cplx v = (op * two_qubit_pauli(w, wp)).trace() / 4.0;
      if (std::abs(v.imag()) > 1e-9)
        throw InputError("operator is not Hermitian: Pauli coefficient has imaginary part " + std::to_string(v.imag()));
      c(w, wp) = v.real();
    }
  return c;
}

inline PauliCorrelation pauli_expand(const HermitianOperator& op) {
  if (!op.is_two_qubit()) throw InputError("pauli_expand needs a two-qubit operator");
  return pauli_expand(op.matrix());
}

inline HermitianOperator pauli_compose(const PauliCorrelation& c) {
  CMatrix m = CMatrix::Zero(4, 4);
  for (int w = 0; w < 4; ++w)
    for (int wp = 0; wp < 4; ++wp)
      if (c(w, wp) != 0.0) m += c(w, wp) * two_qubit_pauli(w, wp);
  return HermitianOperator::hermitized(m, {2, 2});
}

/// Operator sum_w pi_w sigma_w (x) sigma_w for pi = (pi_0, pi_x, pi_y, pi_z).
inline HermitianOperator diagonal_pauli_operator(const std::array<double, 4>& pi) {
  PauliCorrelation c;
  for (int w = 0; w < 4; ++w) c(w, w) = pi[w];
  return pauli_compose(c);
}

}  // namespace povm
