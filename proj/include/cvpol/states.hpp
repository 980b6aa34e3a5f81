#pragma once

// Constructors for the states the library works with: coherent,
// displaced-squeezed-thermal modes, their two-mode products, the Xi
// hidden-polarisation state and explicit Fock superpositions.
//
// Conventions (used consistently everywhere):
//   D(alpha) = exp(alpha a^dag - conj(alpha) a)
//   S(xi)    = exp[(conj(xi) a^2 - xi a^dag^2)/2],  xi = r e^{i theta}
// so that S^dag(xi) x_{theta/2} S(xi) = e^{-r} x_{theta/2}: the quadrature at
// phase-space angle theta/2 is the squeezed one.

#include <cmath>
#include <vector>

#include "cvpol/fock.hpp"
#include "cvpol/types.hpp"

namespace cvpol {

// Per-mode displacement / squeezing / thermal-occupancy parameterisation.
template <class Scalar>
struct StateSpec {
  Complex<Scalar> alpha{0, 0};
  Scalar r = 0;
  Scalar theta = 0;
  Scalar n_th = 0;
};

template <class Scalar>
void validate_spec(const StateSpec<Scalar>& spec) {
  if (!std::isfinite(spec.alpha.real()) || !std::isfinite(spec.alpha.imag()) ||
      !std::isfinite(spec.r) || !std::isfinite(spec.theta) || !std::isfinite(spec.n_th))
    throw std::invalid_argument("StateSpec: parameters must be finite");
  if (spec.r < Scalar(0)) throw std::invalid_argument("StateSpec: r must be non-negative");
  if (spec.n_th < Scalar(0)) throw std::invalid_argument("StateSpec: n_th must be non-negative");
}

// Photon-number mean and variance of the state described by a spec, from the
// complex second moments.  Used for truncation adequacy checks before any
// Fock-space object is built.
template <class Scalar>
struct PhotonMoments {
  Scalar mean = 0;
  Scalar var = 0;
};

template <class Scalar>
PhotonMoments<Scalar> spec_photon_moments(const StateSpec<Scalar>& spec) {
  const Scalar sh = std::sinh(spec.r), ch = std::cosh(spec.r);
  const Scalar n_g = spec.n_th * std::cosh(Scalar(2) * spec.r) + sh * sh;
  const Complex<Scalar> c =
      -std::exp(Complex<Scalar>(0, spec.theta)) * ((Scalar(2) * spec.n_th + Scalar(1)) * sh * ch);
  const Scalar a2 = std::norm(spec.alpha);
  const Complex<Scalar> ac = std::conj(spec.alpha);
  const Scalar var = std::norm(c) + n_g * n_g + n_g + a2 * (Scalar(2) * n_g + Scalar(1)) +
                     Scalar(2) * (ac * ac * c).real();
  return PhotonMoments<Scalar>{a2 + n_g, var};
}

// Truncation adequacy gate: predicted <n> + 6 sqrt(Var n) must sit below the
// cutoff.  Throws truncation_error otherwise.
template <class Scalar>
void check_truncation(const PhotonMoments<Scalar>& pm, int dim) {
  const Scalar reach = pm.mean + Scalar(6) * std::sqrt(std::max(pm.var, Scalar(0)));
  if (!(reach <= Scalar(dim - 1)))
    throw truncation_error("cutoff too small: predicted <n> + 6 sigma = " +
                           std::to_string(static_cast<double>(reach)) + " exceeds dim-1 = " +
                           std::to_string(dim - 1));
}

template <class Scalar>
void check_truncation(const StateSpec<Scalar>& spec, int dim) {
  check_truncation(spec_photon_moments(spec), dim);
}

template <class Scalar = double>
VectorC<Scalar> coherent_amplitudes(Complex<Scalar> alpha, int dim) {
  VectorC<Scalar> c(dim);
  c(0) = std::exp(Complex<Scalar>(-std::norm(alpha) / Scalar(2), 0));
  for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(Scalar(n));
  return c;
}

template <class Scalar = double>
DensityMatrix<Scalar> vacuum_fock(const FockSpace& space) {
  VectorC<Scalar> psi = VectorC<Scalar>::Zero(space.total_dim());
  psi(0) = Scalar(1);
  return pure_density(space, psi);
}

// Coherent state |alpha> (single-mode space) or |alpha>_H (x) |0>_V
// (two-mode space), built from the closed-form amplitudes.
template <class Scalar = double>
DensityMatrix<Scalar> coherent_fock(Complex<Scalar> alpha, const FockSpace& space) {
  const int d = space.dim_per_mode;
  const VectorC<Scalar> c = coherent_amplitudes(alpha, d);
  const Scalar tail = std::max(Scalar(0), Scalar(1) - c.squaredNorm());
  if (!(tail < Scalar(kTruncationTarget)))
    throw truncation_error("coherent_fock: cutoff too small for requested alpha (Poisson tail " +
                           std::to_string(static_cast<double>(tail)) + ")");
  if (space.modes == 1) return pure_density(space, c);
  VectorC<Scalar> psi = VectorC<Scalar>::Zero(space.total_dim());
  for (int m = 0; m < d; ++m) psi(space.index(m, 0)) = c(m);
  return pure_density(space, psi);
}

template <class Scalar = double>
DensityMatrix<Scalar> two_mode_coherent_fock(Complex<Scalar> alpha, Complex<Scalar> beta,
                                             const FockSpace& space) {
  if (space.modes != 2) throw std::invalid_argument("two_mode_coherent_fock: two-mode space");
  const int d = space.dim_per_mode;
  const VectorC<Scalar> ca = coherent_amplitudes(alpha, d);
  const VectorC<Scalar> cb = coherent_amplitudes(beta, d);
  const Scalar tail =
      std::max(Scalar(0), Scalar(1) - ca.squaredNorm() * cb.squaredNorm());
  if (!(tail < Scalar(kTruncationTarget)))
    throw truncation_error("two_mode_coherent_fock: cutoff too small");
  VectorC<Scalar> psi(space.total_dim());
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) psi(space.index(m, n)) = ca(m) * cb(n);
  return pure_density(space, psi);
}

template <class Scalar = double>
MatrixC<Scalar> displacement_generator(Complex<Scalar> alpha, const FockSpace& space,
                                       Mode mode = Mode::H) {
  const MatrixC<Scalar> a = ladder_lower<Scalar>(space, mode);
  return (alpha * a.adjoint() - std::conj(alpha) * a).eval();
}

template <class Scalar = double>
MatrixC<Scalar> squeeze_generator(Complex<Scalar> xi, const FockSpace& space,
                                  Mode mode = Mode::H) {
  const MatrixC<Scalar> a = ladder_lower<Scalar>(space, mode);
  return ((std::conj(xi) * (a * a) - xi * (a.adjoint() * a.adjoint())) *
          Complex<Scalar>(Scalar(0.5), 0))
      .eval();
}

template <class Scalar = double>
DensityMatrix<Scalar> thermal_fock(Scalar n_th, const FockSpace& space) {
  if (space.modes != 1) throw std::invalid_argument("thermal_fock: single-mode space");
  if (n_th < Scalar(0)) throw std::invalid_argument("thermal_fock: n_th must be non-negative");
  const int d = space.dim_per_mode;
  MatrixC<Scalar> rho = MatrixC<Scalar>::Zero(d, d);
  if (n_th == Scalar(0)) {
    rho(0, 0) = Scalar(1);
  } else {
    const Scalar q = n_th / (Scalar(1) + n_th);
    Scalar p = Scalar(1) / (Scalar(1) + n_th);
    for (int n = 0; n < d; ++n) {
      rho(n, n) = p;
      p *= q;
    }
  }
  return make_density_matrix(space, std::move(rho));
}

// rho = D(alpha) S(xi) rho_th(n_th) S^dag D^dag on a single mode; pure for
// n_th = 0.
template <class Scalar = double>
DensityMatrix<Scalar> displaced_squeezed_thermal_fock(const StateSpec<Scalar>& spec,
                                                      const FockSpace& space) {
  if (space.modes != 1)
    throw std::invalid_argument("displaced_squeezed_thermal_fock: single-mode space");
  validate_spec(spec);
  check_truncation(spec, space.dim_per_mode);
  const Complex<Scalar> xi = spec.r * std::exp(Complex<Scalar>(0, spec.theta));
  MatrixC<Scalar> rho = thermal_fock(spec.n_th, space).mat;
  if (spec.r != Scalar(0)) {
    const MatrixC<Scalar> s = op_exponential(squeeze_generator(xi, space));
    rho = (s * rho * s.adjoint()).eval();
  }
  if (spec.alpha != Complex<Scalar>(0, 0)) {
    const MatrixC<Scalar> dop = op_exponential(displacement_generator(spec.alpha, space));
    rho = (dop * rho * dop.adjoint()).eval();
  }
  rho = ((rho + rho.adjoint()) * Complex<Scalar>(Scalar(0.5), 0)).eval();
  return make_density_matrix(space, std::move(rho));
}

// |Xi> = (sqrt(2)|1,0> + e^{i phi}|0,2>)/sqrt(3): zero mean Stokes vector in
// every component yet not rotation invariant.
template <class Scalar = double>
DensityMatrix<Scalar> xi_state(Scalar phi, const FockSpace& space) {
  if (space.modes != 2) throw std::invalid_argument("xi_state: two-mode space required");
  if (space.dim_per_mode < 3) throw std::invalid_argument("xi_state: requires dim >= 3");
  VectorC<Scalar> psi = VectorC<Scalar>::Zero(space.total_dim());
  psi(space.index(1, 0)) = std::sqrt(Scalar(2) / Scalar(3));
  psi(space.index(0, 2)) = std::exp(Complex<Scalar>(0, phi)) / std::sqrt(Scalar(3));
  return pure_density(space, psi);
}

template <class Scalar>
struct FockTerm {
  int m = 0;
  int n = 0;
  Complex<Scalar> amplitude{0, 0};
};

template <class Scalar = double>
DensityMatrix<Scalar> fock_superposition(const std::vector<FockTerm<Scalar>>& terms,
                                         const FockSpace& space, bool normalise = true) {
  if (space.modes != 2) throw std::invalid_argument("fock_superposition: two-mode space");
  if (terms.empty()) throw std::invalid_argument("fock_superposition: no terms");
  VectorC<Scalar> psi = VectorC<Scalar>::Zero(space.total_dim());
  for (const auto& t : terms) {
    if (t.m < 0 || t.n < 0 || t.m >= space.dim_per_mode || t.n >= space.dim_per_mode)
      throw std::invalid_argument("fock_superposition: occupation outside the space");
    psi(space.index(t.m, t.n)) += t.amplitude;
  }
  const Scalar nrm = psi.norm();
  if (!(nrm > Scalar(0))) throw std::invalid_argument("fock_superposition: zero state");
  if (normalise) psi /= nrm;
  return pure_density(space, psi);
}

// Product of two single-mode states; keeps the factors so that sweeps over
// large cutoffs never materialise the d^2 x d^2 matrix unless asked to.
template <class Scalar>
struct TwoModeProduct {
  DensityMatrix<Scalar> mode_h;
  DensityMatrix<Scalar> mode_v;

  FockSpace two_mode_space() const { return FockSpace::two(mode_h.space.dim_per_mode); }

  DensityMatrix<Scalar> materialise() const {
    return make_density_matrix(two_mode_space(),
                               tensor_product<Scalar>(mode_h.mat, mode_v.mat));
  }
};

template <class Scalar = double>
TwoModeProduct<Scalar> product_from_specs(const StateSpec<Scalar>& spec_h,
                                          const StateSpec<Scalar>& spec_v, int dim) {
  const FockSpace mode = FockSpace::single(dim);
  return TwoModeProduct<Scalar>{displaced_squeezed_thermal_fock(spec_h, mode),
                                displaced_squeezed_thermal_fock(spec_v, mode)};
}

// Population of Fock levels strictly above `level` (single-mode matrix).
template <class Scalar>
Scalar population_above(const DensityMatrix<Scalar>& rho, int level) {
  if (rho.space.modes != 1) throw std::invalid_argument("population_above: single-mode state");
  Scalar p = 0;
  for (int n = level + 1; n < rho.space.dim_per_mode; ++n) p += rho.mat(n, n).real();
  return p;
}

}  // namespace cvpol
