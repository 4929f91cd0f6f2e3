#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace povm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;
using Mat4c = Eigen::Matrix4cd;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr cplx kI{0.0, 1.0};

/// Pauli matrices indexed 0,x,y,z.
inline Mat2c pauli(int w) {
  Mat2c m;
  switch (w) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -kI, kI, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Ascending eigenvalues of a Hermitian matrix. Eigen's self-adjoint solver is
/// deterministic and already returns ascending order.
inline Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// m^{-1/2} for a Hermitian positive matrix; eigenvalues below `floor` are
/// clamped to it.
inline CMatrix inverse_sqrt(const CMatrix& m, double floor = 1e-12) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  Eigen::VectorXd inv = es.eigenvalues().unaryExpr(
      [floor](double v) { return 1.0 / std::sqrt(std::max(v, floor)); });
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

/// Six Pauli eigenstates in the fixed label order x+, x-, y+, y-, z+, z-.
inline Vec2c pauli_eigenstate(int axis, int sign) {
  const double r = 1.0 / std::sqrt(2.0);
  Vec2c v;
  switch (axis) {
    case 1: v << r, sign * r; break;
    case 2: v << r, sign * r * kI; break;
    default: v = sign > 0 ? Vec2c(1, 0) : Vec2c(0, 1); break;
  }
  return v;
}

/// Label order of the quasidistribution grid.
inline constexpr std::array<const char*, 6> kLocalLabels{"x+", "x-", "y+", "y-", "z+", "z-"};

inline Vec2c local_label_state(std::size_t index) {
  return pauli_eigenstate(static_cast<int>(index / 2) + 1, index % 2 == 0 ? 1 : -1);
}

inline std::array<double, 3> bloch_vector(const Vec2c& psi) {
  Mat2c rho = psi * psi.adjoint();
  std::array<double, 3> r{};
  for (int w = 1; w <= 3; ++w) r[w - 1] = (rho * pauli(w)).trace().real();
  return r;
}

}  // namespace povm

namespace povm {

/// 6x6 grid over local labels (x+, x-, y+, y-, z+, z-) for Alice (rows) and Bob (columns).
using QuasiGrid = Eigen::Matrix<double, 6, 6>;

}  // namespace povm
