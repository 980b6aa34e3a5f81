#pragma once

// Gaussian two-mode states: (mean, covariance) representation, conversion
// from per-mode specs and dB squeezing figures, Williamson + Bloch-Messiah
// decompositions and conversion into the truncated Fock basis.
//
// Units and ordering: quadratures x = (a + a^dag)/sqrt(2),
// p = (a - a^dag)/(i sqrt(2)); `mean` holds (<x_H>, <p_H>, <x_V>, <p_V>),
// so a coherent state has mean = sqrt(2)(Re alpha, Im alpha) per mode.  The
// covariance matrix is kept in shot-noise units (vacuum = identity, i.e.
// twice the natural covariance).  The symplectic form in these units is
// Omega = blkdiag([[0,1],[-1,0]], [[0,1],[-1,0]]) and physical states obey
// cov + i Omega >= 0.

#include <array>
#include <cmath>
#include <vector>

#include "cvpol/fock.hpp"
#include "cvpol/states.hpp"
#include "cvpol/types.hpp"

namespace cvpol {

template <class Scalar>
struct GaussianState {
  Vector4R<Scalar> mean = Vector4R<Scalar>::Zero();
  Matrix4R<Scalar> cov = Matrix4R<Scalar>::Identity();
};

template <class Scalar = double>
Matrix4R<Scalar> symplectic_form() {
  Matrix4R<Scalar> omega = Matrix4R<Scalar>::Zero();
  omega(0, 1) = 1;
  omega(1, 0) = -1;
  omega(2, 3) = 1;
  omega(3, 2) = -1;
  return omega;
}

template <class Scalar>
Scalar uncertainty_min_eigenvalue(const Matrix4R<Scalar>& cov) {
  Eigen::Matrix<Complex<Scalar>, 4, 4> t =
      cov.template cast<Complex<Scalar>>() +
      Complex<Scalar>(0, 1) * symplectic_form<Scalar>().template cast<Complex<Scalar>>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex<Scalar>, 4, 4>> es(t,
                                                                         Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <class Scalar>
void validate_gaussian(const GaussianState<Scalar>& g,
                       Scalar uncertainty_tol = Scalar(kUncertaintyTol)) {
  if (!g.mean.allFinite() || !g.cov.allFinite())
    throw physicality_error("GaussianState: non-finite entries");
  if ((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() > Scalar(kHermitianTol))
    throw physicality_error("GaussianState: covariance not symmetric");
  if (uncertainty_min_eigenvalue(g.cov) < -uncertainty_tol)
    throw physicality_error("GaussianState: uncertainty relation violated");
}

// --- spec <-> Gaussian -----------------------------------------------------

template <class Scalar>
Vector2R<Scalar> spec_to_mode_mean(const StateSpec<Scalar>& spec) {
  return Vector2R<Scalar>(std::sqrt(Scalar(2)) * spec.alpha.real(),
                          std::sqrt(Scalar(2)) * spec.alpha.imag());
}

// (2 n_th + 1) R(theta/2) diag(e^{-2r}, e^{2r}) R(theta/2)^T
template <class Scalar>
Matrix2R<Scalar> spec_to_mode_cov(const StateSpec<Scalar>& spec) {
  const Scalar c = std::cos(spec.theta / Scalar(2)), s = std::sin(spec.theta / Scalar(2));
  Matrix2R<Scalar> rot;
  rot << c, -s, s, c;
  Matrix2R<Scalar> diag = Matrix2R<Scalar>::Zero();
  diag(0, 0) = std::exp(-Scalar(2) * spec.r);
  diag(1, 1) = std::exp(Scalar(2) * spec.r);
  return ((Scalar(2) * spec.n_th + Scalar(1)) * (rot * diag * rot.transpose())).eval();
}

template <class Scalar>
GaussianState<Scalar> spec_to_gaussian(const StateSpec<Scalar>& spec_h,
                                       const StateSpec<Scalar>& spec_v) {
  validate_spec(spec_h);
  validate_spec(spec_v);
  GaussianState<Scalar> g;
  g.mean.template segment<2>(0) = spec_to_mode_mean(spec_h);
  g.mean.template segment<2>(2) = spec_to_mode_mean(spec_v);
  g.cov = Matrix4R<Scalar>::Zero();
  g.cov.template block<2, 2>(0, 0) = spec_to_mode_cov(spec_h);
  g.cov.template block<2, 2>(2, 2) = spec_to_mode_cov(spec_v);
  return g;
}

// Squeezing/antisqueezing quoted in dB: V_min = 10^{-sqz/10},
// V_max = 10^{anti/10}; r = ln(V_max/V_min)/4 and 2 n_th + 1 =
// sqrt(V_min V_max).  Rejects pairs with V_min V_max < 1.
template <class Scalar = double>
StateSpec<Scalar> db_to_spec(Scalar sqz_db, Scalar antisqz_db, Scalar theta = Scalar(0)) {
  const Scalar v_min = std::pow(Scalar(10), -sqz_db / Scalar(10));
  const Scalar v_max = std::pow(Scalar(10), antisqz_db / Scalar(10));
  const Scalar prod = v_min * v_max;
  if (prod < Scalar(1) - Scalar(1e-12))
    throw physicality_error("db_to_spec: V_min * V_max < 1 is unphysical");
  StateSpec<Scalar> spec;
  spec.r = std::log(v_max / v_min) / Scalar(4);
  spec.n_th = std::max(Scalar(0), (std::sqrt(prod) - Scalar(1)) / Scalar(2));
  spec.theta = theta;
  return spec;
}

// --- photon-number moments from (mean, cov) --------------------------------

namespace detail {

template <class Scalar>
struct ComplexMoments {
  std::array<Complex<Scalar>, 2> alpha;
  Matrix2C<Scalar> m;  // <delta a_j^dag delta a_k>
  Matrix2C<Scalar> c;  // <delta a_j delta a_k>
};

template <class Scalar>
ComplexMoments<Scalar> complex_moments(const GaussianState<Scalar>& g) {
  ComplexMoments<Scalar> out;
  for (int j = 0; j < 2; ++j)
    out.alpha[j] =
        Complex<Scalar>(g.mean(2 * j), g.mean(2 * j + 1)) / std::sqrt(Scalar(2));
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const Scalar xx = g.cov(2 * j, 2 * k), pp = g.cov(2 * j + 1, 2 * k + 1);
      const Scalar xp = g.cov(2 * j, 2 * k + 1), px = g.cov(2 * j + 1, 2 * k);
      out.m(j, k) = Complex<Scalar>(xx + pp, xp - px) / Scalar(4);
      out.c(j, k) = Complex<Scalar>(xx - pp, xp + px) / Scalar(4);
      if (j == k) out.m(j, k) -= Scalar(0.5);
    }
  }
  return out;
}

}  // namespace detail

// Mean and variance of the total photon number, by Wick contraction of the
// complex second moments.
template <class Scalar>
PhotonMoments<Scalar> photon_moments(const GaussianState<Scalar>& g) {
  const auto cm = detail::complex_moments(g);
  Scalar mean = cm.m.trace().real();
  for (int j = 0; j < 2; ++j) mean += std::norm(cm.alpha[j]);
  Scalar var = cm.c.squaredNorm() + cm.m.squaredNorm() + cm.m.trace().real();
  Complex<Scalar> quad_c{0, 0};
  Complex<Scalar> quad_m{0, 0};
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      quad_c += std::conj(cm.alpha[j]) * std::conj(cm.alpha[k]) * cm.c(j, k);
      quad_m += std::conj(cm.alpha[j]) * cm.m(j, k) * cm.alpha[k];
    }
  }
  var += Scalar(2) * quad_c.real() + Scalar(2) * quad_m.real();
  for (int j = 0; j < 2; ++j) var += std::norm(cm.alpha[j]);
  return PhotonMoments<Scalar>{mean, var};
}

// Smallest per-mode cutoff that keeps <n> + 6 sigma below dim-1.
template <class Scalar>
int auto_dim(const GaussianState<Scalar>& g, int floor_dim = 8) {
  const auto pm = photon_moments(g);
  const Scalar reach = pm.mean + Scalar(6) * std::sqrt(std::max(pm.var, Scalar(0)));
  const int d = static_cast<int>(std::ceil(static_cast<double>(reach))) + 2;
  return std::max(floor_dim, d);
}

// --- Williamson decomposition ----------------------------------------------

template <class Scalar>
struct Williamson {
  Matrix4R<Scalar> s;      // symplectic, cov = s diag(nu_1,nu_1,nu_2,nu_2) s^T
  Vector2R<Scalar> nu;     // symplectic eigenvalues, >= 1 for physical states
};

template <class Scalar>
Williamson<Scalar> williamson(const Matrix4R<Scalar>& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix4R<Scalar>> es(cov);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= Scalar(0))
    throw physicality_error("williamson: covariance is not positive definite");
  Matrix4R<Scalar> sqrt_cov = es.operatorSqrt();
  Matrix4R<Scalar> m = sqrt_cov * symplectic_form<Scalar>() * sqrt_cov;
  m = ((m - m.transpose()) * Scalar(0.5)).eval();

  // i M is Hermitian with eigenvalues (-nu_2, -nu_1, nu_1, nu_2); the real
  // and imaginary parts of an eigenvector for +nu span the corresponding
  // orthogonal 2-plane.
  Eigen::Matrix<Complex<Scalar>, 4, 4> im = Complex<Scalar>(0, 1) * m.template cast<Complex<Scalar>>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex<Scalar>, 4, 4>> esm(im);
  if (esm.info() != Eigen::Success)
    throw numerical_error("williamson: eigendecomposition failed");

  Williamson<Scalar> out;
  Matrix4R<Scalar> q;
  for (int k = 0; k < 2; ++k) {
    const int idx = 2 + k;  // the two positive eigenvalues, ascending
    const Scalar nu = esm.eigenvalues()(idx);
    if (!(nu > Scalar(0))) throw physicality_error("williamson: non-positive symplectic eigenvalue");
    Eigen::Matrix<Complex<Scalar>, 4, 1> w = esm.eigenvectors().col(idx);
    Vector4R<Scalar> u = std::sqrt(Scalar(2)) * w.real();
    Vector4R<Scalar> v = std::sqrt(Scalar(2)) * w.imag();
    // Columns (v, u) give the block [[0, nu], [-nu, 0]] in q^T M q.
    q.col(2 * k) = v;
    q.col(2 * k + 1) = u;
    out.nu(k) = nu;
  }
  Matrix4R<Scalar> scale = Matrix4R<Scalar>::Zero();
  for (int k = 0; k < 2; ++k) {
    scale(2 * k, 2 * k) = Scalar(1) / std::sqrt(out.nu(k));
    scale(2 * k + 1, 2 * k + 1) = Scalar(1) / std::sqrt(out.nu(k));
  }
  out.s = sqrt_cov * q * scale;

  const Matrix4R<Scalar> omega = symplectic_form<Scalar>();
  if ((out.s * omega * out.s.transpose() - omega).cwiseAbs().maxCoeff() > Scalar(1e-8))
    throw numerical_error("williamson: result failed the symplecticity check");
  return out;
}

// --- Bloch-Messiah decomposition -------------------------------------------

// Orthogonal symplectic matrices are exactly the quadrature images of 2x2
// complex unitaries acting on the mode operators; extract that unitary.
template <class Scalar>
Matrix2C<Scalar> passive_unitary_from_orthosymplectic(const Matrix4R<Scalar>& o) {
  Matrix2C<Scalar> u;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const Scalar re = o(2 * j, 2 * k), im = o(2 * j + 1, 2 * k);
      if (std::abs(o(2 * j + 1, 2 * k + 1) - re) > Scalar(1e-8) ||
          std::abs(o(2 * j, 2 * k + 1) + im) > Scalar(1e-8))
        throw numerical_error("matrix is not orthogonal-symplectic");
      u(j, k) = Complex<Scalar>(re, im);
    }
  }
  return u;
}

// Quadrature image of a passive 2x2 unitary (for tests and composition).
template <class Scalar>
Matrix4R<Scalar> orthosymplectic_from_passive(const Matrix2C<Scalar>& u) {
  Matrix4R<Scalar> o;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      o(2 * j, 2 * k) = u(j, k).real();
      o(2 * j, 2 * k + 1) = -u(j, k).imag();
      o(2 * j + 1, 2 * k) = u(j, k).imag();
      o(2 * j + 1, 2 * k + 1) = u(j, k).real();
    }
  }
  return o;
}

template <class Scalar>
struct BlochMessiah {
  Matrix2C<Scalar> u_out;    // passive factor applied last
  Vector2R<Scalar> squeeze;  // per-mode r; x quadrature scales by e^{-r}
  Matrix2C<Scalar> u_in;     // passive factor applied first
};

// S = O(u_out) Z(squeeze) O(u_in) with Z = diag(e^{-r_1}, e^{r_1}, ...).
template <class Scalar>
BlochMessiah<Scalar> bloch_messiah(const Matrix4R<Scalar>& s) {
  const Matrix4R<Scalar> omega = symplectic_form<Scalar>();
  if ((s * omega * s.transpose() - omega).cwiseAbs().maxCoeff() > Scalar(1e-8))
    throw std::invalid_argument("bloch_messiah: input is not symplectic");

  Eigen::SelfAdjointEigenSolver<Matrix4R<Scalar>> esp((s * s.transpose()).eval());
  if (esp.info() != Eigen::Success) throw numerical_error("bloch_messiah: eigensolver failed");
  const Matrix4R<Scalar> p = esp.operatorSqrt();
  const Matrix4R<Scalar> p_inv = esp.operatorInverseSqrt();
  const Matrix4R<Scalar> o = p_inv * s;  // orthogonal symplectic

  // Diagonalise P = O1 Z O1^T with O1 orthogonal symplectic.  Eigenvalues of
  // P come in (z, 1/z) pairs whose eigenplanes are swapped by Omega; within
  // a unit cluster Omega acts inside the eigenspace, so pairing u with
  // -Omega u works in every case.
  Eigen::SelfAdjointEigenSolver<Matrix4R<Scalar>> esq(p);
  if (esq.info() != Eigen::Success) throw numerical_error("bloch_messiah: eigensolver failed");
  const Vector4R<Scalar> lam = esq.eigenvalues();
  const Matrix4R<Scalar> vec = esq.eigenvectors();

  Matrix4R<Scalar> o1;
  Vector2R<Scalar> squeeze;
  std::array<bool, 4> used{false, false, false, false};
  std::array<Vector4R<Scalar>, 4> chosen;
  int n_chosen = 0;
  int mode = 0;
  for (int i = 3; i >= 0 && mode < 2; --i) {  // descending eigenvalues
    if (used[i]) continue;
    Vector4R<Scalar> u = vec.col(i);
    // Project out previously chosen directions (only needed inside clusters).
    for (int c = 0; c < n_chosen; ++c) u -= chosen[c].dot(u) * chosen[c];
    const Scalar nrm = u.norm();
    if (nrm < Scalar(1e-6)) continue;  // direction already consumed by a pair
    u /= nrm;
    Vector4R<Scalar> v = -omega * u;
    for (int c = 0; c < n_chosen; ++c) v -= chosen[c].dot(v) * chosen[c];
    if (v.norm() < Scalar(0.5))
      throw numerical_error("bloch_messiah: failed to build a symplectic eigenbasis");
    v.normalize();
    used[i] = true;
    o1.col(2 * mode) = u;
    o1.col(2 * mode + 1) = v;
    chosen[n_chosen++] = u;
    chosen[n_chosen++] = v;
    const Scalar z_u = u.dot(p * u);   // Rayleigh quotient: x-quadrature scale
    const Scalar z_v = v.dot(p * v);
    squeeze(mode) = (std::log(z_v) - std::log(z_u)) / Scalar(2);
    ++mode;
  }
  if (mode != 2) throw numerical_error("bloch_messiah: failed to pair eigenplanes");

  BlochMessiah<Scalar> out;
  out.u_out = passive_unitary_from_orthosymplectic((o1).eval());
  out.squeeze = squeeze;
  out.u_in = passive_unitary_from_orthosymplectic((o1.transpose() * o).eval());

  // Reconstruction check.
  Matrix4R<Scalar> z = Matrix4R<Scalar>::Zero();
  for (int k = 0; k < 2; ++k) {
    z(2 * k, 2 * k) = std::exp(-out.squeeze(k));
    z(2 * k + 1, 2 * k + 1) = std::exp(out.squeeze(k));
  }
  const Matrix4R<Scalar> rebuilt =
      orthosymplectic_from_passive(out.u_out) * z * orthosymplectic_from_passive(out.u_in);
  if ((rebuilt - s).cwiseAbs().maxCoeff() > Scalar(1e-7) * std::max(Scalar(1), s.cwiseAbs().maxCoeff()))
    throw numerical_error("bloch_messiah: reconstruction check failed");
  return out;
}

// --- Gaussian -> Fock -------------------------------------------------------

// Symplectic eigenvalues in [1 - clip, 1) are projected back to 1; anything
// below aborts.  Analytic paths keep the strict default; the tomography
// estimator passes a generous tolerance because finite-sample covariances of
// near-pure states routinely dip below the physical boundary.
template <class Scalar>
struct RepairPolicy {
  Scalar clip = Scalar(1e-6);
};

template <class Scalar>
Scalar repaired_nu(Scalar nu, const RepairPolicy<Scalar>& policy) {
  if (nu >= Scalar(1)) return nu;
  if (nu >= Scalar(1) - policy.clip) return Scalar(1);
  throw physicality_error("unphysical covariance: symplectic eigenvalue " +
                          std::to_string(static_cast<double>(nu)) + " below 1 - clip");
}

template <class Scalar>
bool is_block_diagonal(const Matrix4R<Scalar>& cov, Scalar tol = Scalar(1e-13)) {
  return cov.template block<2, 2>(0, 2).cwiseAbs().maxCoeff() <= tol &&
         cov.template block<2, 2>(2, 0).cwiseAbs().maxCoeff() <= tol;
}

// Invert a single-mode (mean, cov) block into displacement/squeeze/thermal
// parameters (2x2 Williamson in closed form).
template <class Scalar>
StateSpec<Scalar> mode_to_spec(const Vector2R<Scalar>& mean, const Matrix2R<Scalar>& cov,
                               const RepairPolicy<Scalar>& policy = {}) {
  const Scalar det = cov.determinant();
  if (!(det > Scalar(0))) throw physicality_error("mode_to_spec: covariance not positive");
  const Scalar nu = repaired_nu(std::sqrt(det), policy);
  Eigen::SelfAdjointEigenSolver<Matrix2R<Scalar>> es(cov);
  if (es.info() != Eigen::Success) throw numerical_error("mode_to_spec: eigensolver failed");
  const Scalar lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
  StateSpec<Scalar> spec;
  spec.alpha = Complex<Scalar>(mean(0), mean(1)) / std::sqrt(Scalar(2));
  spec.n_th = (nu - Scalar(1)) / Scalar(2);
  spec.r = std::max(Scalar(0), std::log(hi / lo) / Scalar(4));
  const Scalar phi = std::atan2(es.eigenvectors()(1, 0), es.eigenvectors()(0, 0));
  spec.theta = Scalar(2) * phi;
  const Scalar two_pi = Scalar(2) * Scalar(kPi);
  spec.theta = std::fmod(std::fmod(spec.theta, two_pi) + two_pi, two_pi);
  return spec;
}

// Quadrature mean and covariance of a single-mode Fock-basis state, for
// verification of constructed states (O(d^2), no operators materialised).
template <class Scalar>
void mode_moments_from_fock(const DensityMatrix<Scalar>& rho, Vector2R<Scalar>& mean,
                            Matrix2R<Scalar>& cov) {
  if (rho.space.modes != 1) throw std::invalid_argument("mode_moments_from_fock: single-mode");
  const int d = rho.space.dim_per_mode;
  Complex<Scalar> a{0, 0}, aa{0, 0};
  Scalar n = 0;
  for (int m = 0; m + 1 < d; ++m) a += std::sqrt(Scalar(m + 1)) * rho.mat(m, m + 1);
  for (int m = 0; m + 2 < d; ++m)
    aa += std::sqrt(Scalar(m + 1) * Scalar(m + 2)) * rho.mat(m, m + 2);
  for (int m = 0; m < d; ++m) n += Scalar(m) * rho.mat(m, m).real();
  const Complex<Scalar> da2 = aa - a * a;           // <delta a delta a>
  const Scalar dn = n - std::norm(a);               // <delta a^dag delta a>
  mean(0) = std::sqrt(Scalar(2)) * a.real();
  mean(1) = std::sqrt(Scalar(2)) * a.imag();
  // sigma_xx = 2 Re(C + M') etc. with M' = <da^dag da> + 1/2.
  const Scalar mprime = dn + Scalar(0.5);
  cov(0, 0) = Scalar(2) * (da2.real() + mprime);
  cov(1, 1) = Scalar(2) * (mprime - da2.real());
  cov(0, 1) = cov(1, 0) = Scalar(2) * da2.imag();
}

// Full 4x4 moments of a two-mode Fock-basis state (O(d^2) index sums).
template <class Scalar>
GaussianState<Scalar> gaussian_moments_from_fock(const DensityMatrix<Scalar>& rho) {
  if (rho.space.modes != 2)
    throw std::invalid_argument("gaussian_moments_from_fock: two-mode state");
  const int d = rho.space.dim_per_mode;
  const auto& r = rho.mat;
  const auto idx = [&](int m, int n) { return rho.space.index(m, n); };
  Complex<Scalar> a_h{0, 0}, a_v{0, 0}, aa_h{0, 0}, aa_v{0, 0}, ahav{0, 0}, ahdav{0, 0};
  Scalar n_h = 0, n_v = 0;
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      const Scalar pop = r(idx(m, n), idx(m, n)).real();
      n_h += Scalar(m) * pop;
      n_v += Scalar(n) * pop;
      if (m + 1 < d) a_h += std::sqrt(Scalar(m + 1)) * r(idx(m, n), idx(m + 1, n));
      if (n + 1 < d) a_v += std::sqrt(Scalar(n + 1)) * r(idx(m, n), idx(m, n + 1));
      if (m + 2 < d)
        aa_h += std::sqrt(Scalar(m + 1) * Scalar(m + 2)) * r(idx(m, n), idx(m + 2, n));
      if (n + 2 < d)
        aa_v += std::sqrt(Scalar(n + 1) * Scalar(n + 2)) * r(idx(m, n), idx(m, n + 2));
      if (m + 1 < d && n + 1 < d)
        ahav += std::sqrt(Scalar(m + 1) * Scalar(n + 1)) * r(idx(m, n), idx(m + 1, n + 1));
      if (m + 1 < d && n >= 1)
        ahdav += std::sqrt(Scalar(m + 1) * Scalar(n)) * r(idx(m + 1, n - 1), idx(m, n));
    }
  }
  // <a_H^dag a_V> from the sum above runs over <m+1,n-1| rho |m,n>, which is
  // its complex conjugate.
  ahdav = std::conj(ahdav);

  const std::array<Complex<Scalar>, 2> alpha{a_h, a_v};
  Matrix2C<Scalar> mm, cc;
  mm(0, 0) = n_h - std::norm(a_h);
  mm(1, 1) = n_v - std::norm(a_v);
  mm(0, 1) = ahdav - std::conj(a_h) * a_v;
  mm(1, 0) = std::conj(mm(0, 1));
  cc(0, 0) = aa_h - a_h * a_h;
  cc(1, 1) = aa_v - a_v * a_v;
  cc(0, 1) = cc(1, 0) = ahav - a_h * a_v;

  GaussianState<Scalar> g;
  for (int j = 0; j < 2; ++j) {
    g.mean(2 * j) = std::sqrt(Scalar(2)) * alpha[j].real();
    g.mean(2 * j + 1) = std::sqrt(Scalar(2)) * alpha[j].imag();
  }
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const Complex<Scalar> mprime = mm(j, k) + (j == k ? Scalar(0.5) : Scalar(0));
      const Complex<Scalar> sum = cc(j, k) + mprime;    // (sigma_xx + i sigma_xp)/2
      const Complex<Scalar> diff = mprime - cc(j, k);   // (sigma_pp - i sigma_px)/2
      g.cov(2 * j, 2 * k) = Scalar(2) * sum.real();
      g.cov(2 * j, 2 * k + 1) = Scalar(2) * sum.imag();
      g.cov(2 * j + 1, 2 * k + 1) = Scalar(2) * diff.real();
      g.cov(2 * j + 1, 2 * k) = -Scalar(2) * diff.imag();
    }
  }
  g.cov = ((g.cov + g.cov.transpose()) * Scalar(0.5)).eval();
  return g;
}

// Block-diagonal covariance: build each mode separately and keep the product
// form (the memory-lean route for separable states at large cutoffs).
template <class Scalar>
TwoModeProduct<Scalar> gaussian_to_fock_product(const GaussianState<Scalar>& g, int dim,
                                                const RepairPolicy<Scalar>& policy = {}) {
  validate_gaussian(g, std::max(Scalar(kUncertaintyTol), Scalar(2) * policy.clip));
  if (!is_block_diagonal(g.cov, Scalar(1e-12)))
    throw std::invalid_argument("gaussian_to_fock_product: covariance has cross-mode blocks");
  check_truncation(photon_moments(g), dim);
  const FockSpace mode = FockSpace::single(dim);
  std::array<DensityMatrix<Scalar>, 2> parts = {vacuum_fock<Scalar>(mode),
                                                vacuum_fock<Scalar>(mode)};
  for (int j = 0; j < 2; ++j) {
    const Vector2R<Scalar> mean = g.mean.template segment<2>(2 * j);
    const Matrix2R<Scalar> cov = g.cov.template block<2, 2>(2 * j, 2 * j);
    const StateSpec<Scalar> spec = mode_to_spec(mean, cov, policy);
    parts[j] = displaced_squeezed_thermal_fock(spec, mode);

    // The constructed mode must reproduce the (repaired) target moments.
    Vector2R<Scalar> got_mean;
    Matrix2R<Scalar> got_cov;
    mode_moments_from_fock(parts[j], got_mean, got_cov);
    const Matrix2R<Scalar> target = spec_to_mode_cov(spec);
    if ((got_mean - spec_to_mode_mean(spec)).cwiseAbs().maxCoeff() > Scalar(1e-8) ||
        (got_cov - target).cwiseAbs().maxCoeff() > Scalar(1e-8))
      throw numerical_error("gaussian_to_fock_product: moment check failed");
  }
  return TwoModeProduct<Scalar>{std::move(parts[0]), std::move(parts[1])};
}

// General covariance: Williamson + Bloch-Messiah, realised as thermal input,
// passive/squeeze/passive chain and a final displacement.
template <class Scalar>
DensityMatrix<Scalar> gaussian_to_fock(const GaussianState<Scalar>& g, const FockSpace& space,
                                       const RepairPolicy<Scalar>& policy = {}) {
  if (space.modes != 2) throw std::invalid_argument("gaussian_to_fock: two-mode space required");
  if (is_block_diagonal(g.cov, Scalar(1e-12)))
    return gaussian_to_fock_product(g, space.dim_per_mode, policy).materialise();

  validate_gaussian(g, std::max(Scalar(kUncertaintyTol), Scalar(2) * policy.clip));
  check_truncation(photon_moments(g), space.dim_per_mode);

  Williamson<Scalar> wil = williamson(g.cov);
  Vector2R<Scalar> nu;
  for (int k = 0; k < 2; ++k) nu(k) = repaired_nu(wil.nu(k), policy);
  const BlochMessiah<Scalar> bm = bloch_messiah(wil.s);

  const FockSpace mode = FockSpace::single(space.dim_per_mode);
  const DensityMatrix<Scalar> th_h = thermal_fock((nu(0) - Scalar(1)) / Scalar(2), mode);
  const DensityMatrix<Scalar> th_v = thermal_fock((nu(1) - Scalar(1)) / Scalar(2), mode);
  DensityMatrix<Scalar> rho =
      DensityMatrix<Scalar>{space, tensor_product<Scalar>(th_h.mat, th_v.mat)};

  const auto log_unitary = [](const Matrix2C<Scalar>& u) {
    Eigen::ComplexEigenSolver<Matrix2C<Scalar>> es(u);
    Matrix2C<Scalar> logd = Matrix2C<Scalar>::Zero();
    for (int k = 0; k < 2; ++k) logd(k, k) = std::log(es.eigenvalues()(k));
    const Matrix2C<Scalar> v = es.eigenvectors();
    Matrix2C<Scalar> h = Complex<Scalar>(0, 1) * (v * logd * v.inverse()).eval();
    return ((h + h.adjoint()) * Complex<Scalar>(Scalar(0.5), 0)).eval();
  };

  rho = apply_passive(rho, log_unitary(bm.u_in));
  const MatrixC<Scalar> sq_h =
      op_exponential(squeeze_generator<Scalar>(Complex<Scalar>(bm.squeeze(0), 0), mode));
  const MatrixC<Scalar> sq_v =
      op_exponential(squeeze_generator<Scalar>(Complex<Scalar>(bm.squeeze(1), 0), mode));
  rho = apply_product_unitary(rho, sq_h, sq_v);
  rho = apply_passive(rho, log_unitary(bm.u_out));

  const Complex<Scalar> alpha_h =
      Complex<Scalar>(g.mean(0), g.mean(1)) / std::sqrt(Scalar(2));
  const Complex<Scalar> alpha_v =
      Complex<Scalar>(g.mean(2), g.mean(3)) / std::sqrt(Scalar(2));
  if (std::abs(alpha_h) > Scalar(0) || std::abs(alpha_v) > Scalar(0)) {
    const MatrixC<Scalar> d_h = op_exponential(displacement_generator(alpha_h, mode));
    const MatrixC<Scalar> d_v = op_exponential(displacement_generator(alpha_v, mode));
    rho = apply_product_unitary(rho, d_h, d_v);
  }

  DensityMatrix<Scalar> out = make_density_matrix(space, std::move(rho.mat));

  // Verify first and second moments against the (repaired) target.
  GaussianState<Scalar> target = g;
  Matrix4R<Scalar> d_rep = Matrix4R<Scalar>::Zero();
  for (int k = 0; k < 2; ++k) d_rep(2 * k, 2 * k) = d_rep(2 * k + 1, 2 * k + 1) = nu(k);
  target.cov = (wil.s * d_rep * wil.s.transpose()).eval();
  const GaussianState<Scalar> got = gaussian_moments_from_fock(out);
  const Scalar tol = Scalar(1e-6);
  if ((got.mean - target.mean).cwiseAbs().maxCoeff() > tol ||
      (got.cov - target.cov).cwiseAbs().maxCoeff() > tol)
    throw numerical_error("gaussian_to_fock: moment check failed");
  return out;
}

}  // namespace cvpol
