#pragma once

// Stokes operators, excitation-manifold decomposition and the two degrees of
// polarisation.
//
// Labelling (kept exactly as used throughout this library; note that a lot
// of the literature swaps the roles of S1 and S3):
//   S0 = n_H + n_V          S1 = a_H^dag a_V + a_H a_V^dag
//   S2 = -i(a_H^dag a_V - a_H a_V^dag)          S3 = n_H - n_V
// All four are block-diagonal in the total photon number, which is what the
// manifold-resolved degree exploits.

#include <cmath>
#include <optional>
#include <vector>

#include "cvpol/fock.hpp"
#include "cvpol/states.hpp"
#include "cvpol/types.hpp"

namespace cvpol {

template <class Scalar>
struct StokesOperators {
  FockSpace space;
  MatrixC<Scalar> s0, s1, s2, s3;
};

template <class Scalar = double>
StokesOperators<Scalar> stokes_operators(const FockSpace& space) {
  if (space.modes != 2) throw std::invalid_argument("stokes_operators: two-mode space required");
  const int d = space.dim_per_mode;
  const int dim = space.total_dim();
  MatrixC<Scalar> s0 = MatrixC<Scalar>::Zero(dim, dim);
  MatrixC<Scalar> s3 = MatrixC<Scalar>::Zero(dim, dim);
  MatrixC<Scalar> x = MatrixC<Scalar>::Zero(dim, dim);  // a_H^dag a_V
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      const int i = space.index(m, n);
      s0(i, i) = Scalar(m + n);
      s3(i, i) = Scalar(m - n);
      if (m + 1 < d && n >= 1)
        x(space.index(m + 1, n - 1), i) = std::sqrt(Scalar(m + 1) * Scalar(n));
    }
  }
  MatrixC<Scalar> s1 = x + x.adjoint();
  MatrixC<Scalar> s2 = Complex<Scalar>(0, -1) * (x - x.adjoint()).eval();
  assert_hermitian<Scalar>(s1);
  assert_hermitian<Scalar>(s2);
  return StokesOperators<Scalar>{space, std::move(s0), std::move(s1), std::move(s2),
                                 std::move(s3)};
}

template <class Scalar>
struct StokesMeans {
  Scalar s0 = 0;
  Vector3R<Scalar> s = Vector3R<Scalar>::Zero();
};

// <S_j> by direct summation over the matrix elements that S_j connects;
// equivalent to Tr(S_j rho) without materialising the operators.
template <class Scalar>
StokesMeans<Scalar> stokes_means(const DensityMatrix<Scalar>& rho) {
  if (rho.space.modes != 2) throw std::invalid_argument("stokes_means: two-mode state required");
  const int d = rho.space.dim_per_mode;
  StokesMeans<Scalar> out;
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      const int i = rho.space.index(m, n);
      const Scalar pop = rho.mat(i, i).real();
      out.s0 += Scalar(m + n) * pop;
      out.s(2) += Scalar(m - n) * pop;
      if (m + 1 < d && n >= 1) {
        const Complex<Scalar> coh = rho.mat(rho.space.index(m + 1, n - 1), i);
        const Scalar c = std::sqrt(Scalar(m + 1) * Scalar(n));
        out.s(0) += Scalar(2) * c * coh.real();
        out.s(1) -= Scalar(2) * c * coh.imag();
      }
    }
  }
  return out;
}

template <class Scalar>
StokesMeans<Scalar> stokes_means_product(const DensityMatrix<Scalar>& rho_h,
                                         const DensityMatrix<Scalar>& rho_v) {
  if (rho_h.space.modes != 1 || rho_v.space.modes != 1 || rho_h.space != rho_v.space)
    throw std::invalid_argument("stokes_means_product: matching single-mode states required");
  const int d = rho_h.space.dim_per_mode;
  StokesMeans<Scalar> out;
  Scalar tr_h = 0, tr_v = 0, n_h = 0, n_v = 0;
  for (int m = 0; m < d; ++m) {
    tr_h += rho_h.mat(m, m).real();
    tr_v += rho_v.mat(m, m).real();
    n_h += Scalar(m) * rho_h.mat(m, m).real();
    n_v += Scalar(m) * rho_v.mat(m, m).real();
  }
  out.s0 = n_h * tr_v + n_v * tr_h;
  out.s(2) = n_h * tr_v - n_v * tr_h;
  // <a_H^dag a_V> = Tr(a^dag rho_H) Tr(a rho_V); then <S1> = 2 Re,
  // <S2> = 2 Im of it.
  Complex<Scalar> adag_h{0, 0}, a_v{0, 0};
  for (int m = 0; m + 1 < d; ++m) {
    adag_h += std::sqrt(Scalar(m + 1)) * rho_h.mat(m, m + 1);
    a_v += std::sqrt(Scalar(m + 1)) * rho_v.mat(m + 1, m);
  }
  const Complex<Scalar> z = adag_h * a_v;
  out.s(0) = Scalar(2) * z.real();
  out.s(1) = Scalar(2) * z.imag();
  return out;
}

template <class Scalar>
struct ManifoldRow {
  int n = 0;
  Scalar p = 0;
  // Stokes expectations under the normalised manifold projection; only
  // meaningful when `defined` (p above the 0/0 guard).
  Vector3R<Scalar> stokes = Vector3R<Scalar>::Zero();
  bool defined = false;
};

template <class Scalar>
struct ManifoldDecomposition {
  std::vector<ManifoldRow<Scalar>> rows;  // N = 0..n_max
  Scalar tail = 0;                        // 1 - sum_N p_N
  int n_max = 0;
};

namespace detail {

template <class Scalar, class DiagFn, class CohFn>
ManifoldDecomposition<Scalar> decompose_impl(const FockSpace& space, int n_max, DiagFn diag,
                                             CohFn coh) {
  if (space.modes != 2) throw std::invalid_argument("decompose: two-mode state required");
  if (n_max < 0 || n_max > space.max_total_photons())
    throw std::invalid_argument("decompose: N_max out of range");
  ManifoldDecomposition<Scalar> dec;
  dec.n_max = n_max;
  dec.rows.reserve(n_max + 1);
  Scalar total = 0;
  for (int total_n = 0; total_n <= n_max; ++total_n) {
    const ManifoldRange r = manifold_range(space, total_n);
    ManifoldRow<Scalar> row;
    row.n = total_n;
    Scalar s1 = 0, s2 = 0, s3 = 0;
    for (int m = r.m_lo; m <= r.m_hi; ++m) {
      const Scalar pop = diag(m, total_n - m);
      row.p += pop;
      s3 += Scalar(2 * m - total_n) * pop;
      if (m + 1 <= r.m_hi) {
        // <m+1, N-m-1| rho |m, N-m>
        const Complex<Scalar> c = coh(m, total_n - m);
        const Scalar w = std::sqrt(Scalar(m + 1) * Scalar(total_n - m));
        s1 += Scalar(2) * w * c.real();
        s2 -= Scalar(2) * w * c.imag();
      }
    }
    total += row.p;
    if (row.p > Scalar(kManifoldEps)) {
      row.defined = true;
      row.stokes << s1 / row.p, s2 / row.p, s3 / row.p;
    }
    dec.rows.push_back(row);
  }
  dec.tail = Scalar(1) - total;
  return dec;
}

}  // namespace detail

// Per-manifold probabilities and normalised Stokes expectations; the Stokes
// operators never mix manifolds so each block is handled on its own.
template <class Scalar>
ManifoldDecomposition<Scalar> decompose(const DensityMatrix<Scalar>& rho, int n_max) {
  const FockSpace& sp = rho.space;
  return detail::decompose_impl<Scalar>(
      sp, n_max, [&](int m, int n) { return rho.mat(sp.index(m, n), sp.index(m, n)).real(); },
      [&](int m, int n) {
        return Complex<Scalar>(rho.mat(sp.index(m + 1, n - 1), sp.index(m, n)));
      });
}

template <class Scalar>
ManifoldDecomposition<Scalar> decompose_product(const DensityMatrix<Scalar>& rho_h,
                                                const DensityMatrix<Scalar>& rho_v, int n_max) {
  if (rho_h.space.modes != 1 || rho_v.space.modes != 1 || rho_h.space != rho_v.space)
    throw std::invalid_argument("decompose_product: matching single-mode states required");
  const FockSpace sp = FockSpace::two(rho_h.space.dim_per_mode);
  return detail::decompose_impl<Scalar>(
      sp, n_max, [&](int m, int n) { return rho_h.mat(m, m).real() * rho_v.mat(n, n).real(); },
      [&](int m, int n) {
        return Complex<Scalar>(rho_h.mat(m + 1, m) * rho_v.mat(n - 1, n));
      });
}

template <class Scalar>
ManifoldDecomposition<Scalar> decompose(const TwoModeProduct<Scalar>& prod, int n_max) {
  return decompose_product(prod.mode_h, prod.mode_v, n_max);
}

template <class Scalar>
struct ManifoldProjection {
  Scalar p = 0;
  // Normalised N-photon projection; absent when p is below the 0/0 guard.
  std::optional<DensityMatrix<Scalar>> state;
};

template <class Scalar>
ManifoldProjection<Scalar> manifold_project(const DensityMatrix<Scalar>& rho, int n_total) {
  if (rho.space.modes != 2)
    throw std::invalid_argument("manifold_project: two-mode state required");
  if (n_total < 0 || n_total > rho.space.max_total_photons())
    throw std::invalid_argument("manifold_project: N out of range");
  const std::vector<int> idx = manifold_indices(rho.space, n_total);
  Scalar p = 0;
  for (int i : idx) p += rho.mat(i, i).real();
  ManifoldProjection<Scalar> out;
  out.p = p;
  if (p > Scalar(kManifoldEps)) {
    MatrixC<Scalar> block = MatrixC<Scalar>::Zero(rho.space.total_dim(), rho.space.total_dim());
    block(idx, idx) = rho.mat(idx, idx) / p;
    out.state = DensityMatrix<Scalar>{rho.space, std::move(block)};
  }
  return out;
}

template <class Scalar>
struct DegreeWithTail {
  Scalar value = 0;
  // Upper bound on the contribution of everything not summed: truncation
  // tail plus the mass of manifolds skipped by the 0/0 guard.
  Scalar tail_bound = 0;
};

// Manifold-resolved degree: sum_N p_N ||<S>_N|| / N over N >= 1.
template <class Scalar>
DegreeWithTail<Scalar> degree_p1(const ManifoldDecomposition<Scalar>& dec) {
  DegreeWithTail<Scalar> out;
  for (const auto& row : dec.rows) {
    if (row.n == 0 || !row.defined) continue;
    out.value += row.p * row.stokes.norm() / Scalar(row.n);
  }
  out.tail_bound = std::max(dec.tail, Scalar(0)) + Scalar(kManifoldEps) * Scalar(dec.n_max);
  return out;
}

// Semi-classical degree ||<S>|| / <S0>, zero below the vacuum guard.
template <class Scalar>
Scalar degree_p1sc(const StokesMeans<Scalar>& means) {
  if (means.s0 < Scalar(kStokesVacuumEps)) return Scalar(0);
  return means.s.norm() / means.s0;
}

template <class Scalar>
Scalar degree_p1sc(const DensityMatrix<Scalar>& rho) {
  return degree_p1sc(stokes_means(rho));
}

template <class Scalar>
Scalar degree_p1sc_product(const DensityMatrix<Scalar>& rho_h,
                           const DensityMatrix<Scalar>& rho_v) {
  return degree_p1sc(stokes_means_product(rho_h, rho_v));
}

// Block reconstruction of the semi-classical degree from a decomposition:
// ||sum_N p_N <S>_N|| / sum_N p_N N.  Agrees with the full-matrix value up
// to the manifolds outside the decomposition.
template <class Scalar>
Scalar degree_p1sc(const ManifoldDecomposition<Scalar>& dec) {
  Vector3R<Scalar> s = Vector3R<Scalar>::Zero();
  Scalar s0 = 0;
  for (const auto& row : dec.rows) {
    if (!row.defined) continue;
    s += row.p * row.stokes;
    s0 += row.p * Scalar(row.n);
  }
  if (s0 < Scalar(kStokesVacuumEps)) return Scalar(0);
  return s.norm() / s0;
}

// Closed form for |alpha>_H (x) |beta>_V.
template <class Scalar = double>
Scalar closed_form_p1_coherent(Complex<Scalar> alpha, Complex<Scalar> beta = {0, 0}) {
  return Scalar(1) - std::exp(-(std::norm(alpha) + std::norm(beta)));
}

// Closed form for D(alpha) S(xi)|0>_H (x) |0>_V.
template <class Scalar = double>
Scalar closed_form_p1_squeezed(Complex<Scalar> alpha, Complex<Scalar> xi) {
  const Scalar r = std::abs(xi);
  const Scalar theta = std::arg(xi);
  const Complex<Scalar> ac = std::conj(alpha);
  const Scalar arg =
      -std::norm(alpha) - (ac * ac * std::exp(Complex<Scalar>(0, theta))).real() * std::tanh(r);
  return Scalar(1) - std::exp(arg) / std::cosh(r);
}

// 2x2 SU(2) element for a Stokes-sphere rotation by `angle` about `axis`
// (axis components along S1, S2, S3).  A geometric rotation of the
// polarisation plane by phi corresponds to a Stokes-sphere angle 2*phi.
template <class Scalar = double>
Matrix2C<Scalar> su2_matrix(const Vector3R<Scalar>& axis, Scalar angle) {
  Matrix2C<Scalar> n_sigma;
  n_sigma << Complex<Scalar>(axis(2), 0), Complex<Scalar>(axis(0), -axis(1)),
      Complex<Scalar>(axis(0), axis(1)), Complex<Scalar>(-axis(2), 0);
  const Scalar c = std::cos(angle / Scalar(2)), s = std::sin(angle / Scalar(2));
  return (c * Matrix2C<Scalar>::Identity() - Complex<Scalar>(0, s) * n_sigma).eval();
}

// exp(-i angle (axis . S)/2) rho exp(+i ...): unitary polarisation
// transformation; photon-number distribution preserved.
template <class Scalar>
DensityMatrix<Scalar> su2_rotate(const DensityMatrix<Scalar>& rho, const Vector3R<Scalar>& axis,
                                 Scalar angle) {
  if (std::abs(axis.norm() - Scalar(1)) > Scalar(1e-9))
    throw std::invalid_argument("su2_rotate: axis must be a unit vector");
  Matrix2C<Scalar> n_sigma;
  n_sigma << Complex<Scalar>(axis(2), 0), Complex<Scalar>(axis(0), -axis(1)),
      Complex<Scalar>(axis(0), axis(1)), Complex<Scalar>(-axis(2), 0);
  const Matrix2C<Scalar> h = (angle / Scalar(2)) * n_sigma;
  return apply_passive(rho, h);
}

}  // namespace cvpol
