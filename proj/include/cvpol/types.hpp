#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cvpol {

template <class Scalar>
using Complex = std::complex<Scalar>;

template <class Scalar>
using MatrixC = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorC = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixR = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorR = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix2C = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <class Scalar>
using Matrix4R = Eigen::Matrix<Scalar, 4, 4>;
template <class Scalar>
using Matrix2R = Eigen::Matrix<Scalar, 2, 2>;
template <class Scalar>
using Vector4R = Eigen::Matrix<Scalar, 4, 1>;
template <class Scalar>
using Vector3R = Eigen::Matrix<Scalar, 3, 1>;
template <class Scalar>
using Vector2R = Eigen::Matrix<Scalar, 2, 1>;

using cxd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Tolerances used by the contracts throughout the library.  Algebraic
// identities are held to 1e-12, spectral quantities to 1e-10; both sit well
// above double-precision noise for per-mode cutoffs up to ~128.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kSpectralTol = 1e-10;
inline constexpr double kAntiHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kUncertaintyTol = 1e-9;
// Manifolds with probability below this are skipped in the manifold-resolved
// degree (0/0 guard); their omitted contribution is folded into the tail bound.
inline constexpr double kManifoldEps = 1e-14;
// Total-photon-number threshold below which the semi-classical degree is
// defined to vanish (two-mode vacuum supplement).
inline constexpr double kStokesVacuumEps = 1e-14;
// Population above this many levels below the cutoff must stay under
// kTruncationTarget for the accuracy guarantees to apply.
inline constexpr int kTruncationGuardLevels = 6;
inline constexpr double kTruncationTarget = 1e-10;

// Numerical-contract violations (truncation inadequacy, unphysical states,
// unattainable accuracy).  The CLI maps these to exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct truncation_error : numerical_error {
  using numerical_error::numerical_error;
};

struct physicality_error : numerical_error {
  using numerical_error::numerical_error;
};

// Configuration/input problems.  The CLI maps these to exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cvpol
