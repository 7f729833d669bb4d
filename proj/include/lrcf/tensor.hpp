#pragma once

#include <span>
#include <sstream>
#include <vector>

#include "lrcf/errors.hpp"
#include "lrcf/types.hpp"

namespace lrcf {

// Frequency-index convention used throughout: the harmonic k in [-K, K]
// is stored at offset k + K, so the zero frequency lives at offset K.

inline Index freq_offset(int k, int harmonics) {
  if (k < -harmonics || k > harmonics) {
    std::ostringstream msg;
    msg << "frequency " << k << " outside [-" << harmonics << ", " << harmonics << "]";
    throw invalid_argument(msg.str());
  }
  return static_cast<Index>(k + harmonics);
}

inline int offset_freq(Index offset, int harmonics) {
  return static_cast<int>(offset) - harmonics;
}

//! Column-wise Khatri-Rao product. Output row i*B.rows()+j holds the
//! elementwise product A(i,:) * B(j,:); the second operand's index varies
//! fastest. Every unfolding in this library follows the same row order.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
khatri_rao(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  static_assert(std::is_same_v<typename DerivedA::Scalar, typename DerivedB::Scalar>,
                "khatri_rao operands must share a scalar type");
  if (a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "khatri_rao: column counts differ (" << a.cols() << " vs " << b.cols() << ")";
    throw invalid_argument(msg.str());
  }
  const Index rows_a = a.rows();
  const Index rows_b = b.rows();
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows_a * rows_b,
                                                                               a.cols());
  for (Index i = 0; i < rows_a; ++i) {
    out.middleRows(i * rows_b, rows_b) = b.derived().array().rowwise() * a.derived().row(i).array();
  }
  return out;
}

//! Dense third-order tensor. Entries are stored as the mode-1 unfolding:
//! a (J*L) x I matrix whose row l*J + j, column i holds entry (i, j, l).
template <typename Scalar>
class Tensor3 {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Tensor3() : dim0_(0), dim1_(0), dim2_(0) {}

  Tensor3(Index i_dim, Index j_dim, Index l_dim)
      : dim0_(i_dim), dim1_(j_dim), dim2_(l_dim), unfold_(j_dim * l_dim, i_dim) {
    if (i_dim <= 0 || j_dim <= 0 || l_dim <= 0) {
      throw invalid_argument("Tensor3 dimensions must be positive");
    }
    unfold_.setZero();
  }

  //! Reassemble a tensor from its mode-1 unfolding ((J*L) x I).
  static Tensor3 from_mode1(Matrix unfold, Index i_dim, Index j_dim, Index l_dim) {
    if (unfold.rows() != j_dim * l_dim || unfold.cols() != i_dim) {
      throw invalid_argument("from_mode1: unfolding shape does not match dimensions");
    }
    Tensor3 t;
    t.dim0_ = i_dim;
    t.dim1_ = j_dim;
    t.dim2_ = l_dim;
    t.unfold_ = std::move(unfold);
    return t;
  }

  Index dim0() const { return dim0_; }
  Index dim1() const { return dim1_; }
  Index dim2() const { return dim2_; }
  Index size() const { return dim0_ * dim1_ * dim2_; }

  Scalar& operator()(Index i, Index j, Index l) { return unfold_(l * dim1_ + j, i); }
  const Scalar& operator()(Index i, Index j, Index l) const { return unfold_(l * dim1_ + j, i); }

  const Matrix& mode1() const { return unfold_; }
  Matrix& mode1() { return unfold_; }

  bool all_finite() const { return unfold_.allFinite(); }

private:
  Index dim0_, dim1_, dim2_;
  Matrix unfold_;
};

using CTensor3 = Tensor3<Complex>;

//! Mode-1 unfolding: row l*J + j, column i.
template <typename Scalar>
const typename Tensor3<Scalar>::Matrix& mode1_unfold(const Tensor3<Scalar>& t) {
  return t.mode1();
}

//! Unfolding with axis `mode` in the matrix-column role. The remaining two
//! axes keep their original order, the lower-numbered one varying fastest,
//! which matches khatri_rao(A_high, A_low) row order.
template <typename Scalar>
typename Tensor3<Scalar>::Matrix mode_unfold(const Tensor3<Scalar>& t, int mode) {
  using Matrix = typename Tensor3<Scalar>::Matrix;
  const Index di = t.dim0(), dj = t.dim1(), dl = t.dim2();
  switch (mode) {
  case 0:
    return t.mode1();
  case 1: {
    Matrix out(di * dl, dj);
    for (Index l = 0; l < dl; ++l)
      for (Index i = 0; i < di; ++i)
        for (Index j = 0; j < dj; ++j) out(l * di + i, j) = t(i, j, l);
    return out;
  }
  case 2: {
    Matrix out(di * dj, dl);
    for (Index j = 0; j < dj; ++j)
      for (Index i = 0; i < di; ++i)
        for (Index l = 0; l < dl; ++l) out(j * di + i, l) = t(i, j, l);
    return out;
  }
  default:
    throw invalid_argument("mode_unfold: mode must be 0, 1 or 2");
  }
}

//! One tensor entry of the rank-F model: sum_h lambda(h) prod_n A_n(k_n+K, h).
//! Runs in O(N*F) without materializing anything.
inline Complex cpd_entry(const RVector& lambda, std::span<const CMatrix* const> factors,
                         std::span<const int> freqs) {
  if (factors.size() != freqs.size()) {
    throw invalid_argument("cpd_entry: one frequency per factor required");
  }
  const Index rank = lambda.size();
  CRowVector acc = CRowVector::Ones(rank);
  for (std::size_t n = 0; n < factors.size(); ++n) {
    const CMatrix& a = *factors[n];
    if (a.cols() != rank) throw invalid_argument("cpd_entry: factor rank mismatch");
    const int harmonics = static_cast<int>((a.rows() - 1) / 2);
    acc.array() *= a.row(freq_offset(freqs[n], harmonics)).array();
  }
  return (acc.array() * lambda.transpose().cast<Complex>().array()).sum();
}

inline Complex cpd_entry(const RVector& lambda, const std::vector<CMatrix>& factors,
                         const std::vector<int>& freqs) {
  std::vector<const CMatrix*> ptrs(factors.size());
  for (std::size_t n = 0; n < factors.size(); ++n) ptrs[n] = &factors[n];
  return cpd_entry(lambda, std::span<const CMatrix* const>(ptrs),
                   std::span<const int>(freqs));
}

//! Full rank-F synthesis of a third-order tensor from three factors.
inline CTensor3 cpd_synthesize(const RVector& lambda, const CMatrix& a_i, const CMatrix& a_j,
                               const CMatrix& a_l) {
  if (a_i.cols() != lambda.size() || a_j.cols() != lambda.size() || a_l.cols() != lambda.size()) {
    throw invalid_argument("cpd_synthesize: factor rank mismatch");
  }
  CMatrix unfold = khatri_rao(a_l, a_j) * lambda.cast<Complex>().asDiagonal() * a_i.transpose();
  return CTensor3::from_mode1(std::move(unfold), a_i.rows(), a_j.rows(), a_l.rows());
}

} // namespace lrcf
