#pragma once

// Independent oracles used to freeze expected values: direct closed-form
// arithmetic (Poisson statistics, squeezed-state amplitudes, lgamma-based
// factorials) and brute-force operator constructions, kept deliberately
// separate from the library's own computation paths.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cvpol/fock.hpp"

namespace oracles {

using cxd = std::complex<double>;

inline double poisson_pmf(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

inline double poisson_mean_from_pmf(double mean, int n_top) {
  double acc = 0;
  for (int n = 0; n <= n_top; ++n) acc += n * poisson_pmf(mean, n);
  return acc;
}

// Amplitudes of D(alpha)|0>, by direct evaluation with lgamma.
inline cxd coherent_amplitude(cxd alpha, int n) {
  if (alpha == cxd(0, 0)) return n == 0 ? cxd(1, 0) : cxd(0, 0);
  const double mag = std::exp(-0.5 * std::norm(alpha) + n * std::log(std::abs(alpha)) -
                              0.5 * std::lgamma(n + 1.0));
  return mag * std::exp(cxd(0, n * std::arg(alpha)));
}

// Amplitudes of S(xi)|0> with S(xi) = exp[(xi* a^2 - xi a^dag^2)/2]:
// c_{2m} = (-e^{i theta} tanh r)^m sqrt((2m)!)/(2^m m!)/sqrt(cosh r).
inline cxd squeezed_vacuum_amplitude(double r, double theta, int n) {
  if (n % 2 != 0) return {0, 0};
  const int m = n / 2;
  const double lt = std::abs(std::tanh(r));
  double mag = 0.0;
  if (r == 0.0) return m == 0 ? cxd(1, 0) : cxd(0, 0);
  mag = std::exp(0.5 * std::lgamma(2.0 * m + 1.0) - m * std::log(2.0) - std::lgamma(m + 1.0) +
                 m * std::log(lt) - 0.5 * std::log(std::cosh(r)));
  const cxd phase = std::pow(cxd(-std::cos(theta), -std::sin(theta)), m);
  return mag * phase;
}

// <0| D(alpha) S(xi) rho_vac S^dag D^dag |0> for the pure displaced squeezed
// state, evaluated from the standard overlap formula.
inline double displaced_squeezed_vacuum_population(cxd alpha, double r, double theta) {
  const cxd ac = std::conj(alpha);
  const double expo = -std::norm(alpha) - (ac * ac * std::exp(cxd(0, theta))).real() * std::tanh(r);
  return std::exp(expo) / std::cosh(r);
}

inline Eigen::MatrixXcd random_complex_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cxd(g(rng), g(rng));
  return m;
}

inline Eigen::MatrixXcd random_hermitian(int n, std::mt19937& rng) {
  const Eigen::MatrixXcd m = random_complex_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

inline Eigen::MatrixXcd random_anti_hermitian(int n, std::mt19937& rng) {
  const Eigen::MatrixXcd m = random_complex_matrix(n, rng);
  return 0.5 * (m - m.adjoint());
}

inline Eigen::MatrixXcd random_unitary(int n, std::mt19937& rng) {
  const Eigen::MatrixXcd m = random_complex_matrix(n, rng);
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  Eigen::MatrixXcd q = qr.householderQ();
  return q;
}

// Random two-mode pure state supported on total photon number <= cap.
inline Eigen::VectorXcd random_bounded_state(const cvpol::FockSpace& space, int cap,
                                             std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(space.total_dim());
  for (int m = 0; m < space.dim_per_mode; ++m)
    for (int n = 0; n < space.dim_per_mode; ++n)
      if (m + n <= cap) psi(space.index(m, n)) = cxd(g(rng), g(rng));
  psi.normalize();
  return psi;
}

// Random two-mode mixed state supported on total photon number <= cap.
inline cvpol::DensityMatrix<double> random_bounded_density(const cvpol::FockSpace& space, int cap,
                                                           int n_pure, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(space.total_dim(), space.total_dim());
  double total = 0;
  for (int k = 0; k < n_pure; ++k) {
    const Eigen::VectorXcd psi = random_bounded_state(space, cap, rng);
    const double w = u(rng);
    rho += w * (psi * psi.adjoint());
    total += w;
  }
  rho /= total;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return cvpol::make_density_matrix<double>(space, std::move(rho));
}

}  // namespace oracles
