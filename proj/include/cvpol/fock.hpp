#pragma once

// Truncated single- and two-mode Fock-space operator algebra: ladder
// operators, tensor products, operator exponentials, traces and
// manifold-block machinery.
//
// Two-mode basis ordering (fixed, inherited by every other module):
// |m>_H (x) |n>_V lives at flat index m*d + n, i.e. the H occupation is the
// slow index.  tensor_product(A, B) therefore places A on mode H.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "cvpol/types.hpp"

namespace cvpol {

enum class Mode { H = 0, V = 1 };

struct FockSpace {
  int dim_per_mode = 0;  // d, Fock levels 0..d-1
  int modes = 0;         // 1 or 2

  static FockSpace single(int d) { return checked(d, 1); }
  static FockSpace two(int d) { return checked(d, 2); }

  int total_dim() const { return modes == 1 ? dim_per_mode : dim_per_mode * dim_per_mode; }

  // Flat index of |m>_H (x) |n>_V.
  int index(int m, int n) const { return m * dim_per_mode + n; }

  int max_total_photons() const { return modes == 1 ? dim_per_mode - 1 : 2 * (dim_per_mode - 1); }

  bool operator==(const FockSpace&) const = default;

 private:
  static FockSpace checked(int d, int modes) {
    if (d < 2) throw std::invalid_argument("FockSpace: dim_per_mode must be >= 2");
    return FockSpace{d, modes};
  }
};

// Occupations (m, n) present in the truncated excitation manifold of total
// photon number n_total: m runs over [m_lo, m_hi], the V occupation is
// n_total - m.  Manifolds with n_total > d-1 are incomplete at the
// truncation edge.
struct ManifoldRange {
  int m_lo = 0;
  int m_hi = -1;
  int size() const { return m_hi - m_lo + 1; }
};

inline ManifoldRange manifold_range(const FockSpace& space, int n_total) {
  if (space.modes != 2) throw std::invalid_argument("manifold_range: two-mode space required");
  if (n_total < 0 || n_total > space.max_total_photons())
    throw std::invalid_argument("manifold_range: total photon number out of range");
  const int d = space.dim_per_mode;
  return ManifoldRange{std::max(0, n_total - (d - 1)), std::min(n_total, d - 1)};
}

inline std::vector<int> manifold_indices(const FockSpace& space, int n_total) {
  const ManifoldRange r = manifold_range(space, n_total);
  std::vector<int> idx;
  idx.reserve(r.size());
  for (int m = r.m_lo; m <= r.m_hi; ++m) idx.push_back(space.index(m, n_total - m));
  return idx;
}

template <class Scalar>
Scalar max_abs(const MatrixC<Scalar>& a) {
  return a.size() == 0 ? Scalar(0) : a.cwiseAbs().maxCoeff();
}

template <class Scalar>
Scalar max_nonhermiticity(const MatrixC<Scalar>& a) {
  return max_abs<Scalar>((a - a.adjoint()).eval());
}

template <class Scalar>
void assert_hermitian(const MatrixC<Scalar>& a, Scalar tol = Scalar(kHermitianTol)) {
  const Scalar dev = max_nonhermiticity(a);
  if (!(dev <= tol))
    throw numerical_error("operator fails the Hermiticity check (max |A - A^dag| = " +
                          std::to_string(static_cast<double>(dev)) + ")");
}

template <class Scalar = double>
MatrixC<Scalar> identity_op(const FockSpace& space) {
  const int n = space.total_dim();
  return MatrixC<Scalar>::Identity(n, n);
}

namespace detail {

template <class Scalar>
MatrixC<Scalar> single_mode_lower(int d) {
  MatrixC<Scalar> a = MatrixC<Scalar>::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(Scalar(n));
  return a;
}

}  // namespace detail

// Annihilation operator on the requested mode; <n-1|a|n> = sqrt(n).  On a
// two-mode space the operator is embedded with identity on the other mode.
template <class Scalar = double>
MatrixC<Scalar> ladder_lower(const FockSpace& space, Mode mode = Mode::H) {
  const int d = space.dim_per_mode;
  if (space.modes == 1) {
    if (mode != Mode::H) throw std::invalid_argument("ladder_lower: single-mode space has only mode H");
    return detail::single_mode_lower<Scalar>(d);
  }
  const MatrixC<Scalar> a = detail::single_mode_lower<Scalar>(d);
  const MatrixC<Scalar> id = MatrixC<Scalar>::Identity(d, d);
  return mode == Mode::H ? Eigen::kroneckerProduct(a, id).eval()
                         : Eigen::kroneckerProduct(id, a).eval();
}

template <class Scalar = double>
MatrixC<Scalar> ladder_raise(const FockSpace& space, Mode mode = Mode::H) {
  return ladder_lower<Scalar>(space, mode).adjoint();
}

template <class Scalar = double>
MatrixC<Scalar> number_op(const FockSpace& space, Mode mode = Mode::H) {
  const int d = space.dim_per_mode;
  VectorC<Scalar> diag(d);
  for (int n = 0; n < d; ++n) diag(n) = Scalar(n);
  MatrixC<Scalar> nm = diag.asDiagonal();
  if (space.modes == 1) {
    if (mode != Mode::H) throw std::invalid_argument("number_op: single-mode space has only mode H");
    return nm;
  }
  const MatrixC<Scalar> id = MatrixC<Scalar>::Identity(d, d);
  return mode == Mode::H ? Eigen::kroneckerProduct(nm, id).eval()
                         : Eigen::kroneckerProduct(id, nm).eval();
}

// Kronecker product of two equal-dimension single-mode operators; the first
// factor acts on mode H (slow index).
template <class Scalar>
MatrixC<Scalar> tensor_product(const MatrixC<Scalar>& a, const MatrixC<Scalar>& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("tensor_product: factors must be square");
  if (a.rows() != b.rows())
    throw std::invalid_argument("tensor_product: single-mode dimensions differ");
  return Eigen::kroneckerProduct(a, b).eval();
}

template <class Scalar>
MatrixC<Scalar> commutator(const MatrixC<Scalar>& a, const MatrixC<Scalar>& b) {
  return a * b - b * a;
}

// Tr(A rho) without forming the product matrix.
template <class Scalar>
Complex<Scalar> trace_product(const MatrixC<Scalar>& a, const MatrixC<Scalar>& rho) {
  if (a.rows() != rho.rows() || a.cols() != rho.cols() || a.rows() != a.cols())
    throw std::invalid_argument("trace_product: dimension mismatch");
  return a.cwiseProduct(rho.transpose()).sum();
}

// exp(G) for an anti-Hermitian generator, via eigendecomposition of iG.
// The result is unitary on the truncated space to machine precision, well
// inside the 1e-10 operator-norm contract.
template <class Scalar>
MatrixC<Scalar> op_exponential(const MatrixC<Scalar>& g) {
  if (g.rows() != g.cols()) throw std::invalid_argument("op_exponential: non-square generator");
  const Scalar dev = max_abs<Scalar>((g + g.adjoint()).eval());
  if (!(dev <= Scalar(kAntiHermitianTol)))
    throw numerical_error("op_exponential: generator is not anti-Hermitian (max |G + G^dag| = " +
                          std::to_string(static_cast<double>(dev)) + ")");
  const MatrixC<Scalar> h =
      Complex<Scalar>(0, 1) * ((g - g.adjoint()) * Complex<Scalar>(Scalar(0.5), 0)).eval();
  Eigen::SelfAdjointEigenSolver<MatrixC<Scalar>> es(h);
  if (es.info() != Eigen::Success)
    throw numerical_error("op_exponential: eigendecomposition failed, accuracy target unreachable");
  VectorC<Scalar> phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    phases(k) = std::exp(Complex<Scalar>(0, -es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Hermitian positive-semidefinite matrix on the two-mode (or single-mode)
// Fock basis.  The trace may fall short of one; the deficit is the
// truncation loss and is reported, never silently renormalised away.
template <class Scalar>
struct DensityMatrix {
  FockSpace space;
  MatrixC<Scalar> mat;

  Scalar trace() const { return mat.trace().real(); }
  Scalar trace_deficit() const { return Scalar(1) - trace(); }
};

template <class Scalar>
DensityMatrix<Scalar> make_density_matrix(const FockSpace& space, MatrixC<Scalar> mat) {
  if (mat.rows() != space.total_dim() || mat.cols() != space.total_dim())
    throw std::invalid_argument("make_density_matrix: dimension does not match the space");
  const Scalar herm = max_nonhermiticity<Scalar>(mat);
  if (!(herm <= Scalar(kHermitianTol)))
    throw physicality_error("density matrix is not Hermitian within tolerance");
  const Scalar tr = mat.trace().real();
  if (!(tr > Scalar(0)) || !(tr <= Scalar(1) + Scalar(kTraceTol)))
    throw physicality_error("density matrix trace outside (0, 1]");
  return DensityMatrix<Scalar>{space, std::move(mat)};
}

template <class Scalar>
DensityMatrix<Scalar> pure_density(const FockSpace& space, const VectorC<Scalar>& psi) {
  if (psi.size() != space.total_dim())
    throw std::invalid_argument("pure_density: vector does not match the space");
  return make_density_matrix<Scalar>(space, (psi * psi.adjoint()).eval());
}

template <class Scalar>
Scalar min_eigenvalue(const DensityMatrix<Scalar>& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixC<Scalar>> es(rho.mat, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Full physicality check (eigenvalues >= -kPsdTol).  O(D^3); meant for
// validation and tests, not for per-call hot paths.
template <class Scalar>
void assert_physical(const DensityMatrix<Scalar>& rho, Scalar psd_tol = Scalar(kPsdTol)) {
  if (min_eigenvalue(rho) < -psd_tol)
    throw physicality_error("density matrix has a negative eigenvalue beyond tolerance");
}

template <class Scalar>
Complex<Scalar> expectation(const DensityMatrix<Scalar>& rho, const MatrixC<Scalar>& a) {
  return trace_product(a, rho.mat);
}

// --- passive (photon-number-conserving) transformations ------------------
//
// A quadratic generator h_jk a_j^dag a_k (h Hermitian 2x2) is block-diagonal
// in the total photon number, so exp(-i h) is applied manifold block by
// manifold block.  This realises beam-splitter/phase transformations and
// SU(2) polarisation rotations without touching the full matrix exponential.

template <class Scalar>
MatrixC<Scalar> passive_block_hamiltonian(const Matrix2C<Scalar>& h, const FockSpace& space,
                                          int n_total) {
  const ManifoldRange r = manifold_range(space, n_total);
  MatrixC<Scalar> blk = MatrixC<Scalar>::Zero(r.size(), r.size());
  for (int k = 0; k < r.size(); ++k) {
    const int m = r.m_lo + k;
    const int n = n_total - m;
    blk(k, k) = h(0, 0) * Scalar(m) + h(1, 1) * Scalar(n);
    if (k + 1 < r.size()) {
      const Scalar c = std::sqrt(Scalar(m + 1) * Scalar(n));
      blk(k + 1, k) = h(0, 1) * c;
      blk(k, k + 1) = h(1, 0) * c;
    }
  }
  return blk;
}

template <class Scalar>
std::vector<MatrixC<Scalar>> passive_block_unitaries(const Matrix2C<Scalar>& h,
                                                     const FockSpace& space) {
  if (max_nonhermiticity<Scalar>(MatrixC<Scalar>(h)) > Scalar(kHermitianTol) * Scalar(100))
    throw std::invalid_argument("passive generator must be Hermitian");
  std::vector<MatrixC<Scalar>> us;
  us.reserve(space.max_total_photons() + 1);
  for (int n_total = 0; n_total <= space.max_total_photons(); ++n_total) {
    const MatrixC<Scalar> blk = passive_block_hamiltonian(h, space, n_total);
    Eigen::SelfAdjointEigenSolver<MatrixC<Scalar>> es(blk);
    if (es.info() != Eigen::Success)
      throw numerical_error("passive_block_unitaries: eigendecomposition failed");
    VectorC<Scalar> phases(blk.rows());
    for (Eigen::Index k = 0; k < blk.rows(); ++k)
      phases(k) = std::exp(Complex<Scalar>(0, -es.eigenvalues()(k)));
    us.push_back(es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint());
  }
  return us;
}

// rho -> U rho U^dag with U = exp(-i sum_jk h_jk a_j^dag a_k).
template <class Scalar>
DensityMatrix<Scalar> apply_passive(const DensityMatrix<Scalar>& rho, const Matrix2C<Scalar>& h) {
  if (rho.space.modes != 2) throw std::invalid_argument("apply_passive: two-mode state required");
  const auto us = passive_block_unitaries(h, rho.space);
  const int n_manifolds = rho.space.max_total_photons() + 1;
  std::vector<std::vector<int>> idx(n_manifolds);
  for (int n = 0; n < n_manifolds; ++n) idx[n] = manifold_indices(rho.space, n);

  MatrixC<Scalar> work = rho.mat;
  for (int n = 0; n < n_manifolds; ++n)
    work(idx[n], Eigen::all) = (us[n] * work(idx[n], Eigen::all)).eval();
  for (int n = 0; n < n_manifolds; ++n)
    work(Eigen::all, idx[n]) = (work(Eigen::all, idx[n]) * us[n].adjoint()).eval();
  work = ((work + work.adjoint()) * Complex<Scalar>(Scalar(0.5), 0)).eval();
  return DensityMatrix<Scalar>{rho.space, std::move(work)};
}

// rho -> (A (x) B) rho (A (x) B)^dag without materialising the Kronecker
// factor; A acts on mode H, B on mode V.
template <class Scalar>
DensityMatrix<Scalar> apply_product_unitary(const DensityMatrix<Scalar>& rho,
                                            const MatrixC<Scalar>& a, const MatrixC<Scalar>& b) {
  if (rho.space.modes != 2)
    throw std::invalid_argument("apply_product_unitary: two-mode state required");
  const int d = rho.space.dim_per_mode;
  if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d)
    throw std::invalid_argument("apply_product_unitary: factor dimension mismatch");

  MatrixC<Scalar> work = rho.mat;
  // Left factor: contract B over the fast (V) index, then A over the slow one.
  for (int m = 0; m < d; ++m)
    work.middleRows(m * d, d) = (b * work.middleRows(m * d, d)).eval();
  std::vector<int> strided(d);
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) strided[m] = m * d + n;
    work(strided, Eigen::all) = (a * work(strided, Eigen::all)).eval();
  }
  // Right factor, acting on columns.
  for (int m = 0; m < d; ++m)
    work.middleCols(m * d, d) = (work.middleCols(m * d, d) * b.adjoint()).eval();
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) strided[m] = m * d + n;
    work(Eigen::all, strided) = (work(Eigen::all, strided) * a.adjoint()).eval();
  }
  work = ((work + work.adjoint()) * Complex<Scalar>(Scalar(0.5), 0)).eval();
  return DensityMatrix<Scalar>{rho.space, std::move(work)};
}

}  // namespace cvpol
