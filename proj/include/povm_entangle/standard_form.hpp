#pragma once

#include "povm_entangle/pauli.hpp"

#include <cmath>

namespace povm {

struct StandardFormOptions {
  /// Local Bloch-vector length at which alternating filtering stops.
  double iteration_target = 1e-12;
  /// Accepted relative size of leftover local or off-diagonal Pauli terms.
  double residual_tolerance = 1e-9;
  int max_iterations = 10000;
  /// Eigenvalue floor for inverse square roots.
  double eigenvalue_floor = 1e-12;
};

/// Local operations taking an operator to its standard form:
/// Pi_std = (U_A L_A (x) U_B L_B) Pi (U_A L_A (x) U_B L_B)^dagger.
struct LocalTransform {
  Mat2c filter_a = Mat2c::Identity();
  Mat2c filter_b = Mat2c::Identity();
  Mat2c rotation_a = Mat2c::Identity();
  Mat2c rotation_b = Mat2c::Identity();

  Mat2c total_a() const { return rotation_a * filter_a; }
  Mat2c total_b() const { return rotation_b * filter_b; }
};

struct StandardForm {
  std::array<double, 4> pi{};  // pi_0, pi_x, pi_y, pi_z
  LocalTransform transform;
  double source_trace = 0.0;
  /// Largest leftover non-diagonal Pauli coefficient, relative to pi_0.
  double residual = 0.0;
};

/// (A (x) B) op (A (x) B)^dagger
inline HermitianOperator apply_local(const HermitianOperator& op, const Mat2c& a, const Mat2c& b) {
  const CMatrix ab = kron(CMatrix(a), CMatrix(b));
  return HermitianOperator::hermitized(ab * op.matrix() * ab.adjoint(), op.parties());
}

namespace detail {

inline double bloch_length(const CMatrix& reduced) {
  const Mat2c r = reduced;
  double s = 0.0;
  for (int w = 1; w <= 3; ++w) s += std::norm((r * pauli(w)).trace());
  return std::sqrt(s);
}

/// Relative size of the sigma_w (x) 1 and 1 (x) sigma_w coefficients.
inline double local_residual(const PauliCorrelation& c) {
  return c(0, 0) > 0 ? c.local_magnitude() / c(0, 0) : std::numeric_limits<double>::infinity();
}

/// Scales a 2x2 matrix to unit determinant (det is real positive here).
inline Mat2c unit_determinant(const Mat2c& m) { return m / std::sqrt(m.determinant()); }

}  // namespace detail

struct FilterResult {
  HermitianOperator op;  // (L_A (x) L_B) op (L_A (x) L_B)^dagger
  Mat2c filter_a = Mat2c::Identity();
  Mat2c filter_b = Mat2c::Identity();
  int iterations = 0;
  double residual = 0.0;
};

/// Removes the local Pauli terms by alternating local filtering: each half
/// step applies X = (reduced operator)^{-1/2}, scaled to det X = 1, on one
/// side and renormalizes, until both reduced operators are proportional to
/// the identity. The filters are the accumulated unit-determinant products,
/// so the step acts as a Lorentz boost on the Pauli coefficients.
inline FilterResult remove_local_terms(const HermitianOperator& op, const StandardFormOptions& opts = {}) {
  if (!op.is_two_qubit()) throw InputError("standard form needs a two-qubit operator");
  const double tr = op.trace();
  if (!(tr > 0)) throw InputError("standard form needs an operator with positive trace");

  FilterResult out;
  HermitianOperator rho = op.scaled(1.0 / tr);
  double residual = 0.0;
  bool converged = false;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    const CMatrix ra = partial_trace(rho, true);
    const CMatrix rb = partial_trace(rho, false);
    residual = std::max(detail::bloch_length(ra), detail::bloch_length(rb));
    if (residual < opts.iteration_target) {
      converged = true;
      out.iterations = it;
      break;
    }
    if (it == opts.max_iterations) break;
    for (int side = 0; side < 2; ++side) {
      const CMatrix reduced = partial_trace(rho, side == 0);
      if (hermitian_eigenvalues(reduced).minCoeff() <= opts.eigenvalue_floor)
        throw ConvergenceError("local filtering hit a rank-deficient reduced operator", residual);
      const Mat2c x = detail::unit_determinant(Mat2c(inverse_sqrt(reduced, opts.eigenvalue_floor)));
      if (side == 0) {
        rho = apply_local(rho, x, Mat2c::Identity());
        out.filter_a = x * out.filter_a;
      } else {
        rho = apply_local(rho, Mat2c::Identity(), x);
        out.filter_b = x * out.filter_b;
      }
      rho = rho.scaled(1.0 / rho.trace());
    }
  }
  if (!converged) throw ConvergenceError("local filtering did not converge", residual);

  out.op = apply_local(op, out.filter_a, out.filter_b);
  out.residual = detail::local_residual(pauli_expand(out.op));
  if (!(out.residual <= opts.residual_tolerance))
    throw ConvergenceError("local terms remain after filtering", out.residual);
  return out;
}

/// SU(2) element U with U sigma_i U^dagger = sum_k R_ki sigma_k, taken with
/// rotation angle in [0, pi].
inline Mat2c su2_lift(const Mat3& r) {
  // Quaternion extraction, branch on the largest diagonal combination.
  const double t = r.trace();
  double w, x, y, z;
  if (t >= r(0, 0) && t >= r(1, 1) && t >= r(2, 2)) {
    w = 0.5 * std::sqrt(std::max(0.0, 1.0 + t));
    x = (r(2, 1) - r(1, 2)) / (4 * w);
    y = (r(0, 2) - r(2, 0)) / (4 * w);
    z = (r(1, 0) - r(0, 1)) / (4 * w);
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    x = 0.5 * std::sqrt(std::max(0.0, 1.0 + r(0, 0) - r(1, 1) - r(2, 2)));
    w = (r(2, 1) - r(1, 2)) / (4 * x);
    y = (r(0, 1) + r(1, 0)) / (4 * x);
    z = (r(0, 2) + r(2, 0)) / (4 * x);
  } else if (r(1, 1) >= r(2, 2)) {
    y = 0.5 * std::sqrt(std::max(0.0, 1.0 - r(0, 0) + r(1, 1) - r(2, 2)));
    w = (r(0, 2) - r(2, 0)) / (4 * y);
    x = (r(0, 1) + r(1, 0)) / (4 * y);
    z = (r(1, 2) + r(2, 1)) / (4 * y);
  } else {
    z = 0.5 * std::sqrt(std::max(0.0, 1.0 - r(0, 0) - r(1, 1) + r(2, 2)));
    w = (r(1, 0) - r(0, 1)) / (4 * z);
    x = (r(0, 2) + r(2, 0)) / (4 * z);
    y = (r(1, 2) + r(2, 1)) / (4 * z);
  }
  if (w < 0) {
    w = -w;
    x = -x;
    y = -y;
    z = -z;
  }
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  return (w * pauli(0) - kI * (x * pauli(1) + y * pauli(2) + z * pauli(3))) / n;
}

struct Diagonalization {
  std::array<double, 4> pi{};
  Mat3 rotation_a = Mat3::Identity();  // acts on Alice's Pauli index
  Mat3 rotation_b = Mat3::Identity();
  Mat2c unitary_a = Mat2c::Identity();
  Mat2c unitary_b = Mat2c::Identity();
};

/// Rotates the 3x3 correlation block T to R_A T R_B^T = diag. Among the
/// equivalent SO(3) pairs (signed axis permutations of one SVD) the pair with
/// the least total rotation, i.e. largest tr R_A + tr R_B, is kept, so an
/// already diagonal block stays put and magnitude order and signs are
/// preserved where possible.
inline Diagonalization diagonalize_correlations(const HermitianOperator& op) {
  const PauliCorrelation c = pauli_expand(op);
  if (detail::local_residual(c) > 1e-9 && c.local_magnitude() > 1e-9)
    throw InputError("correlation diagonalization needs an operator without local Pauli terms");
  const Mat3 t = c.correlation_block();

  Diagonalization out;
  out.pi[0] = c(0, 0);
  const double scale = t.cwiseAbs().maxCoeff();
  Mat3 off = t;
  off.diagonal().setZero();
  if (scale == 0.0 || off.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    for (int w = 0; w < 3; ++w) out.pi[w + 1] = t(w, w);
    return out;
  }

  Eigen::JacobiSVD<Mat3> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 ra0 = svd.matrixU().transpose();
  const Mat3 rb0 = svd.matrixV().transpose();

  std::array<int, 3> perm{0, 1, 2};
  double best = -std::numeric_limits<double>::infinity();
  do {
    Mat3 p = Mat3::Zero();
    for (int i = 0; i < 3; ++i) p(i, perm[i]) = 1.0;
    for (int fa = 0; fa < 8; ++fa) {
      const Mat3 ga = Eigen::Vector3d(fa & 1 ? -1 : 1, fa & 2 ? -1 : 1, fa & 4 ? -1 : 1).asDiagonal() * p;
      const Mat3 ra = ga * ra0;
      if (ra.determinant() < 0) continue;
      for (int fb = 0; fb < 8; ++fb) {
        const Mat3 gb = Eigen::Vector3d(fb & 1 ? -1 : 1, fb & 2 ? -1 : 1, fb & 4 ? -1 : 1).asDiagonal() * p;
        const Mat3 rb = gb * rb0;
        if (rb.determinant() < 0) continue;
        const double score = ra.trace() + rb.trace();
        if (score > best + 1e-12) {
          best = score;
          out.rotation_a = ra;
          out.rotation_b = rb;
        }
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const Mat3 d = out.rotation_a * t * out.rotation_b.transpose();
  for (int w = 0; w < 3; ++w) out.pi[w + 1] = d(w, w);
  out.unitary_a = su2_lift(out.rotation_a);
  out.unitary_b = su2_lift(out.rotation_b);
  return out;
}

/// Residual of a candidate standard form: largest non-diagonal Pauli
/// coefficient of the transformed operator relative to its pi_0.
inline double standard_form_residual(const HermitianOperator& transformed) {
  const PauliCorrelation c = pauli_expand(transformed);
  Mat4 off = c.coeffs;
  off.diagonal().setZero();
  return c(0, 0) > 0 ? off.cwiseAbs().maxCoeff() / c(0, 0) : std::numeric_limits<double>::infinity();
}

inline StandardForm to_standard_form(const HermitianOperator& op, const StandardFormOptions& opts = {}) {
  const FilterResult filtered = remove_local_terms(op, opts);
  const Diagonalization diag = diagonalize_correlations(filtered.op);
  StandardForm sf;
  sf.pi = diag.pi;
  sf.transform = {filtered.filter_a, filtered.filter_b, diag.unitary_a, diag.unitary_b};
  sf.source_trace = op.trace();
  sf.residual = standard_form_residual(apply_local(op, sf.transform.total_a(), sf.transform.total_b()));
  if (!(sf.pi[0] > 0)) throw NumericError("standard form has non-positive pi_0");
  if (!(sf.residual <= opts.residual_tolerance))
    throw ConvergenceError("standard form is not diagonal", sf.residual);
  return sf;
}

/// sum_w pi_w sigma_w (x) sigma_w
inline HermitianOperator standard_operator(const StandardForm& sf) { return diagonal_pauli_operator(sf.pi); }

/// Undo the local transform: (T_A (x) T_B)^{-1} op (T_A (x) T_B)^{-dagger}.
inline HermitianOperator undo_transform(const HermitianOperator& op, const LocalTransform& t) {
  return apply_local(op, t.total_a().inverse(), t.total_b().inverse());
}

/// Local states and weights of the decomposition in the original frame.
struct TildeDecomposition {
  std::array<Vec2c, 6> states_a;
  std::array<Vec2c, 6> states_b;
  QuasiGrid weights = QuasiGrid::Zero();
  std::array<double, 6> norms_a{};
  std::array<double, 6> norms_b{};
};

/// Maps the standard-label states back through the inverse transform,
/// |a~> ~ L^{-1} U^dagger |a>, normalizes them, and absorbs the norms
/// <a|U L^{-dagger} L^{-1} U^dagger|a> into the weights. Norms are positive,
/// so every weight keeps its sign.
inline TildeDecomposition back_transform(const StandardForm& sf, const QuasiGrid& q_std) {
  TildeDecomposition out;
  const Mat2c inv_a = sf.transform.total_a().inverse();
  const Mat2c inv_b = sf.transform.total_b().inverse();
  for (std::size_t k = 0; k < 6; ++k) {
    const Vec2c va = inv_a * local_label_state(k);
    const Vec2c vb = inv_b * local_label_state(k);
    const double na = va.squaredNorm(), nb = vb.squaredNorm();
    if (!(na > 0) || !(nb > 0) || !std::isfinite(na) || !std::isfinite(nb))
      throw NumericError("non-positive normalization in back transformation");
    out.norms_a[k] = na;
    out.norms_b[k] = nb;
    out.states_a[k] = va / std::sqrt(na);
    out.states_b[k] = vb / std::sqrt(nb);
  }
  for (int k = 0; k < 6; ++k)
    for (int l = 0; l < 6; ++l) out.weights(k, l) = q_std(k, l) * out.norms_a[k] * out.norms_b[l];
  return out;
}

/// sum_{k,l} Q(a~_k, b~_l) |a~_k><a~_k| (x) |b~_l><b~_l|
inline HermitianOperator recompose(const TildeDecomposition& t) {
  CMatrix m = CMatrix::Zero(4, 4);
  for (int k = 0; k < 6; ++k) {
    const CMatrix pa = t.states_a[k] * t.states_a[k].adjoint();
    for (int l = 0; l < 6; ++l) {
      if (t.weights(k, l) == 0.0) continue;
      m += t.weights(k, l) * kron(pa, CMatrix(t.states_b[l] * t.states_b[l].adjoint()));
    }
  }
  return HermitianOperator::hermitized(m, {2, 2});
}

}  // namespace povm
