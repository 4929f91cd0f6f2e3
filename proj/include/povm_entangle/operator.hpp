#pragma once

#include "povm_entangle/error.hpp"
#include "povm_entangle/linalg.hpp"

#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace povm {

inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kCompletenessTolerance = 1e-9;

/// Dense Hermitian operator on a tensor product of qudits. `parties` lists the
/// local dimensions, e.g. {2, 2} for two qubits.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  /// Validates shape and Hermiticity (entrywise, 1e-12).
  HermitianOperator(CMatrix matrix, std::vector<int> parties)
      : matrix_(std::move(matrix)), parties_(std::move(parties)) {
    validate_shape();
    const double asym = max_abs(matrix_ - matrix_.adjoint());
    if (asym > kHermiticityTolerance)
      throw InputError("operator is not Hermitian (max |A - A^dagger| = " + std::to_string(asym) + ")");
  }

  /// Takes the Hermitian part of `matrix`. Used after products such as
  /// X A X^dagger, where rounding breaks exact symmetry.
  static HermitianOperator hermitized(const CMatrix& matrix, std::vector<int> parties) {
    HermitianOperator op;
    op.matrix_ = hermitian_part(matrix);
    op.parties_ = std::move(parties);
    op.validate_shape();
    return op;
  }

  static HermitianOperator identity(std::vector<int> parties) {
    const int dim = product(parties);
    return HermitianOperator(CMatrix::Identity(dim, dim), std::move(parties));
  }

  const CMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<int>& parties() const noexcept { return parties_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  bool is_two_qubit() const noexcept { return parties_ == std::vector<int>{2, 2}; }

  double trace() const { return matrix_.trace().real(); }

  HermitianOperator scaled(double c) const { return hermitized(c * matrix_, parties_); }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    require_same_parties(a, b);
    return hermitized(a.matrix_ + b.matrix_, a.parties_);
  }
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    require_same_parties(a, b);
    return hermitized(a.matrix_ - b.matrix_, a.parties_);
  }

  static int product(const std::vector<int>& parties) {
    return std::accumulate(parties.begin(), parties.end(), 1, std::multiplies<>());
  }

 private:
  static void require_same_parties(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.parties_ != b.parties_) throw InputError("operator party dimensions differ");
  }

  void validate_shape() const {
    if (parties_.empty()) throw InputError("operator needs at least one party");
    for (int d : parties_)
      if (d < 1) throw InputError("local dimensions must be positive");
    if (matrix_.rows() != matrix_.cols()) throw InputError("operator matrix is not square");
    if (matrix_.rows() != product(parties_))
      throw InputError("operator side " + std::to_string(matrix_.rows()) +
                       " does not match product of local dimensions " + std::to_string(product(parties_)));
  }

  CMatrix matrix_;
  std::vector<int> parties_;
};

inline double min_eigenvalue(const HermitianOperator& op) { return hermitian_eigenvalues(op.matrix()).minCoeff(); }
inline double max_eigenvalue(const HermitianOperator& op) { return hermitian_eigenvalues(op.matrix()).maxCoeff(); }

/// Hilbert-Schmidt inner product tr(A B), real for Hermitian A, B.
inline double hs_inner(const HermitianOperator& a, const HermitianOperator& b) {
  return (a.matrix().adjoint().cwiseProduct(b.matrix())).sum().real();
}

/// Transpose on the second factor of a bipartite operator.
inline HermitianOperator partial_transpose(const HermitianOperator& op) {
  if (op.parties().size() != 2) throw InputError("partial transpose needs a bipartite operator");
  const int da = op.parties()[0], db = op.parties()[1];
  CMatrix out(op.dim(), op.dim());
  for (int i = 0; i < da; ++i)
    for (int k = 0; k < db; ++k)
      for (int j = 0; j < da; ++j)
        for (int l = 0; l < db; ++l) out(i * db + k, j * db + l) = op.matrix()(i * db + l, j * db + k);
  return HermitianOperator::hermitized(out, op.parties());
}

/// Reduced operator on party 0 (keep_first) or party 1 of a bipartite operator.
inline CMatrix partial_trace(const HermitianOperator& op, bool keep_first) {
  if (op.parties().size() != 2) throw InputError("partial trace needs a bipartite operator");
  const int da = op.parties()[0], db = op.parties()[1];
  const int keep = keep_first ? da : db;
  CMatrix out = CMatrix::Zero(keep, keep);
  for (int i = 0; i < keep; ++i)
    for (int j = 0; j < keep; ++j)
      for (int t = 0; t < (keep_first ? db : da); ++t)
        out(i, j) += keep_first ? op.matrix()(i * db + t, j * db + t) : op.matrix()(t * db + i, t * db + j);
  return out;
}

/// Ordered, labelled set of measurement operators summing to the identity.
class PovmSet {
 public:
  PovmSet() = default;

  PovmSet(std::vector<std::string> labels, std::vector<HermitianOperator> elements)
      : labels_(std::move(labels)), elements_(std::move(elements)) {
    if (elements_.empty()) throw InputError("POVM has no elements");
    if (labels_.size() != elements_.size()) throw InputError("POVM label count does not match element count");
    for (const auto& e : elements_)
      if (e.parties() != elements_.front().parties()) throw InputError("POVM elements act on different spaces");
    const double residual = completeness_residual();
    if (residual > kCompletenessTolerance)
      throw InputError("POVM elements do not sum to the identity (residual " + std::to_string(residual) + ")");
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<HermitianOperator>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const HermitianOperator& operator[](std::size_t k) const { return elements_.at(k); }

  const HermitianOperator& at(const std::string& label) const {
    for (std::size_t k = 0; k < labels_.size(); ++k)
      if (labels_[k] == label) return elements_[k];
    throw InputError("no POVM element labelled '" + label + "'");
  }

  /// max |sum_k Pi_k - 1| entrywise.
  double completeness_residual() const {
    CMatrix sum = CMatrix::Zero(elements_.front().dim(), elements_.front().dim());
    for (const auto& e : elements_) sum += e.matrix();
    return max_abs(sum - CMatrix::Identity(sum.rows(), sum.cols()));
  }

 private:
  std::vector<std::string> labels_;
  std::vector<HermitianOperator> elements_;
};

}  // namespace povm
