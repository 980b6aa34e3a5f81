#pragma once

// Simulated determination chain: homodyne quadrature sampling, covariance
// estimation with shot-noise calibration uncertainty, parametric bootstrap
// error bars, and the PNRD direct-measurement scheme (per-manifold photon
// counting in three rotated polarisation bases).
//
// Randomness: one root seed, split into per-task substreams by hashing, so
// serial and parallel runs produce identical results.  Gaussian variates use
// an explicit Box-Muller transform on mt19937_64 output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "cvpol/gaussian.hpp"
#include "cvpol/parallel.hpp"
#include "cvpol/polarimetry.hpp"
#include "cvpol/types.hpp"

namespace cvpol {

namespace rng_detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace rng_detail

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(rng_detail::splitmix64(seed)) {}

  static RngStream substream(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = rng_detail::splitmix64(root);
    for (std::uint64_t t : tags) h = rng_detail::splitmix64(h ^ (t + 0x9e3779b97f4a7c15ULL));
    return RngStream(h);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * kPi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct CalibrationModel {
  double shot_noise_rel_uncertainty = 0.01;
};

inline void validate_calibration(const CalibrationModel& cal) {
  if (!(cal.shot_noise_rel_uncertainty >= 0.0) || !(cal.shot_noise_rel_uncertainty < 0.5))
    throw std::invalid_argument("CalibrationModel: relative uncertainty must be in [0, 0.5)");
}

// Homodyne samples (x_H, p_H, x_V, p_V) in calibrated shot-noise units
// (vacuum column variance 1).  Note that a GaussianState mean m corresponds
// to a dataset column mean of sqrt(2) m.
struct QuadratureDataset {
  Eigen::Matrix<double, Eigen::Dynamic, 4> samples;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return samples.rows(); }
};

inline void validate_dataset(const QuadratureDataset& ds) {
  if (ds.samples.rows() < 2) throw std::invalid_argument("QuadratureDataset: need M >= 2");
  if (!ds.samples.allFinite())
    throw std::invalid_argument("QuadratureDataset: non-finite entries");
}

// Independent multivariate-Gaussian draws with the mean and covariance of g;
// bit-identical for identical seeds.
inline QuadratureDataset sample_homodyne(const GaussianState<double>& g, Eigen::Index m,
                                         std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("sample_homodyne: need M >= 2");
  validate_gaussian(g);
  Eigen::SelfAdjointEigenSolver<Matrix4R<double>> es(g.cov);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-12)
    throw physicality_error("sample_homodyne: covariance not positive semidefinite");
  Vector4R<double> lam = es.eigenvalues().cwiseMax(0.0);
  const Matrix4R<double> l = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  const Vector4R<double> mu = std::sqrt(2.0) * g.mean;

  QuadratureDataset ds;
  ds.seed = seed;
  ds.samples.resize(m, 4);
  RngStream stream = RngStream::substream(seed, {0x686f6d6fULL});  // "homo"
  Vector4R<double> z;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (int k = 0; k < 4; ++k) z(k) = stream.normal();
    ds.samples.row(i) = (mu + l * z).transpose();
  }
  return ds;
}

// Unbiased sample mean/covariance in shot-noise units, rescaled by the
// calibration factor 1 + eps: quadratures are divided by sqrt(1 + eps), so
// the covariance picks up 1/(1 + eps) and the mean 1/sqrt(1 + eps).
inline GaussianState<double> estimate_covariance(const QuadratureDataset& ds,
                                                 const CalibrationModel& cal,
                                                 std::optional<double> cal_draw = std::nullopt) {
  validate_dataset(ds);
  validate_calibration(cal);
  const Eigen::Index m = ds.samples.rows();
  if (m < 5) throw std::invalid_argument("estimate_covariance: need M >= 5");
  const double scale = 1.0 + cal_draw.value_or(0.0);
  if (!(scale > 0.5)) throw std::invalid_argument("estimate_covariance: calibration draw too low");

  const Eigen::RowVector4d mean = ds.samples.colwise().mean();
  Eigen::Matrix<double, Eigen::Dynamic, 4> centered = ds.samples.rowwise() - mean;
  Matrix4R<double> cov =
      (centered.transpose() * centered) / static_cast<double>(m - 1);
  for (int k = 0; k < 4; ++k)
    if (!(cov(k, k) > 0.0))
      throw numerical_error("estimate_covariance: degenerate dataset (zero-variance column)");
  cov = ((cov + cov.transpose()) * 0.5).eval();

  GaussianState<double> g;
  g.mean = mean.transpose() / std::sqrt(2.0) / std::sqrt(scale);
  g.cov = cov / scale;
  return g;
}

// Re-expresses a state in shot-noise units misjudged by the factor 1 + eps.
inline GaussianState<double> rescale_shot_noise(const GaussianState<double>& g, double eps) {
  if (!(1.0 + eps > 0.5)) throw std::invalid_argument("rescale_shot_noise: scale too low");
  GaussianState<double> out;
  out.mean = g.mean / std::sqrt(1.0 + eps);
  out.cov = g.cov / (1.0 + eps);
  return out;
}

struct BootstrapOptions {
  int dim = 0;      // 0: choose from the photon moments of the estimate
  int n_max = 50;   // manifold cap (clamped to dim - 2)
  bool resample_data = false;
  int threads = 1;
  double repair_clip = 0.05;  // symplectic-eigenvalue clip for noisy estimates
};

struct BootstrapResult {
  double p1_mean = 0, p1_std = 0;
  double p1sc_mean = 0, p1sc_std = 0;
  int replicates_used = 0;
  int replicates_aborted = 0;
};

namespace detail {

struct DegreePair {
  double p1 = 0, p1sc = 0;
};

inline DegreePair degrees_of_gaussian(const GaussianState<double>& g, int dim, int n_max,
                                      const RepairPolicy<double>& policy) {
  const int nm = std::min(n_max, 2 * (dim - 1));
  ManifoldDecomposition<double> dec;
  if (is_block_diagonal(g.cov, 1e-12)) {
    const TwoModeProduct<double> prod = gaussian_to_fock_product(g, dim, policy);
    dec = decompose(prod, nm);
  } else {
    const DensityMatrix<double> rho = gaussian_to_fock(g, FockSpace::two(dim), policy);
    dec = decompose(rho, nm);
  }
  return DegreePair{degree_p1(dec).value, degree_p1sc(dec)};
}

inline void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0;
  sd = 0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double acc = 0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  sd = std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

// B replicates, each rescaling the covariance by an independent calibration
// draw (Gaussian, sigma = shot_noise_rel_uncertainty) and, when a dataset is
// supplied with resample_data set, re-estimating from a row-resampled copy.
// Replicates whose covariance cannot be repaired are dropped and counted.
inline BootstrapResult bootstrap_polarisation(const GaussianState<double>& g_est,
                                              const CalibrationModel& cal, int b,
                                              std::uint64_t seed, const BootstrapOptions& opts = {},
                                              const QuadratureDataset* ds = nullptr) {
  if (b < 50) throw std::invalid_argument("bootstrap_polarisation: need B >= 50");
  validate_calibration(cal);
  if (opts.resample_data && ds == nullptr)
    throw std::invalid_argument("bootstrap_polarisation: data resampling requires a dataset");

  const int dim = opts.dim > 0 ? opts.dim : auto_dim(g_est) + 2;
  const int n_max = std::max(1, std::min(opts.n_max, dim - 2));
  const RepairPolicy<double> policy{opts.repair_clip};

  std::vector<std::optional<detail::DegreePair>> results(b);
  parallel_for(b, opts.threads, [&](int rep) {
    RngStream stream = RngStream::substream(seed, {0x626f6f74ULL, static_cast<std::uint64_t>(rep)});
    const double eps = cal.shot_noise_rel_uncertainty * stream.normal();
    GaussianState<double> g_rep;
    if (opts.resample_data) {
      QuadratureDataset resampled;
      const Eigen::Index m = ds->samples.rows();
      resampled.samples.resize(m, 4);
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto j = static_cast<Eigen::Index>(stream.uniform() * static_cast<double>(m));
        resampled.samples.row(i) = ds->samples.row(std::min(j, m - 1));
      }
      g_rep = estimate_covariance(resampled, cal, eps);
    } else {
      g_rep = rescale_shot_noise(g_est, eps);
    }
    try {
      results[rep] = detail::degrees_of_gaussian(g_rep, dim, n_max, policy);
    } catch (const physicality_error&) {
      results[rep] = std::nullopt;  // replicate aborted
    }
  });

  std::vector<double> p1s, p1scs;
  BootstrapResult out;
  for (const auto& r : results) {
    if (!r) {
      ++out.replicates_aborted;
      continue;
    }
    p1s.push_back(r->p1);
    p1scs.push_back(r->p1sc);
  }
  out.replicates_used = static_cast<int>(p1s.size());
  if (out.replicates_used < b / 2)
    throw numerical_error("bootstrap_polarisation: unphysical estimate not repairable");
  detail::mean_std(p1s, out.p1_mean, out.p1_std);
  detail::mean_std(p1scs, out.p1sc_mean, out.p1sc_std);
  return out;
}

// --- PNRD direct measurement -------------------------------------------------

// Measurement bases: photon counting after a fixed SU(2) rotation, chosen so
// the recorded number difference measures S3, S1 or S2 of the input state.
enum class PnrdBasis { intensity = 0, diagonal = 1, circular = 2 };

inline const char* pnrd_basis_name(PnrdBasis b) {
  switch (b) {
    case PnrdBasis::intensity: return "intensity";
    case PnrdBasis::diagonal: return "diagonal";
    case PnrdBasis::circular: return "circular";
  }
  return "?";
}

// Generator h of the basis rotation U = exp(-i h):
// U^dag S3 U = S1 (diagonal) or S2 (circular).
inline Matrix2C<double> pnrd_rotation_generator(PnrdBasis basis) {
  Matrix2C<double> h = Matrix2C<double>::Zero();
  switch (basis) {
    case PnrdBasis::intensity:
      break;
    case PnrdBasis::diagonal:
      h(0, 1) = cxd(0, 1) * (kPi / 4.0);
      h(1, 0) = cxd(0, -1) * (kPi / 4.0);
      break;  // -(pi/4) sigma_y
    case PnrdBasis::circular:
      h(0, 1) = cxd(kPi / 4.0, 0);
      h(1, 0) = cxd(kPi / 4.0, 0);
      break;  // +(pi/4) sigma_x
  }
  return h;
}

struct CountRecord {
  PnrdBasis basis = PnrdBasis::intensity;
  std::map<std::pair<int, int>, long long> counts;  // (m, n) -> occurrences
  long long shots = 0;
};

inline void validate_counts(const CountRecord& rec) {
  long long total = 0;
  for (const auto& [mn, c] : rec.counts) {
    if (c < 0 || mn.first < 0 || mn.second < 0)
      throw std::invalid_argument("CountRecord: negative entry");
    total += c;
  }
  if (total != rec.shots) throw std::invalid_argument("CountRecord: counts do not sum to shots");
}

// Joint photon-number samples from the diagonal of the basis-rotated state.
inline CountRecord sample_pnrd(const DensityMatrix<double>& rho, PnrdBasis basis, long long shots,
                               std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample_pnrd: shots >= 1 required");
  if (rho.space.modes != 2) throw std::invalid_argument("sample_pnrd: two-mode state required");
  const DensityMatrix<double>* state = &rho;
  DensityMatrix<double> rotated{rho.space, {}};
  if (basis != PnrdBasis::intensity) {
    rotated = apply_passive(rho, pnrd_rotation_generator(basis));
    state = &rotated;
  }
  const int d = rho.space.dim_per_mode;
  std::vector<double> cdf;
  std::vector<std::pair<int, int>> outcome;
  cdf.reserve(rho.space.total_dim());
  double total = 0;
  for (int m = 0; m < d; ++m) {
    for (int n = 0; n < d; ++n) {
      double p = state->mat(rho.space.index(m, n), rho.space.index(m, n)).real();
      if (p < -1e-9) throw numerical_error("sample_pnrd: negative diagonal probability");
      if (p <= 0) continue;
      total += p;
      cdf.push_back(total);
      outcome.emplace_back(m, n);
    }
  }
  const double tail = std::max(0.0, rho.trace_deficit());
  if (total < 1.0 - tail - 1e-9)
    throw numerical_error("sample_pnrd: diagonal probabilities sum below 1 - tail");

  CountRecord rec;
  rec.basis = basis;
  rec.shots = shots;
  RngStream stream = RngStream::substream(seed, {0x706e7264ULL, static_cast<std::uint64_t>(basis)});
  for (long long s = 0; s < shots; ++s) {
    const double u = stream.uniform() * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const std::size_t k = std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    ++rec.counts[outcome[k]];
  }
  return rec;
}

struct CountsEstimate {
  ManifoldDecomposition<double> dec;
  double skipped_mass = 0;  // manifolds with data missing in some basis
  double p1 = 0;
  double p1sc = 0;
};

// Reconstruction from three mutually unbiased bases: pooled manifold
// probabilities, per-basis conditional count differences for the Stokes
// components, then the two degrees.
inline CountsEstimate estimate_p1_from_counts(const std::array<CountRecord, 3>& records) {
  for (const auto& rec : records) {
    if (rec.shots < 1) throw std::invalid_argument("estimate_p1_from_counts: empty record");
    validate_counts(rec);
  }
  if (records[0].basis == records[1].basis || records[0].basis == records[2].basis ||
      records[1].basis == records[2].basis)
    throw std::invalid_argument("estimate_p1_from_counts: three distinct bases required");

  int n_top = 0;
  for (const auto& rec : records)
    for (const auto& [mn, c] : rec.counts)
      if (c > 0) n_top = std::max(n_top, mn.first + mn.second);

  // stokes component index measured by each basis
  const auto component = [](PnrdBasis b) {
    switch (b) {
      case PnrdBasis::intensity: return 2;
      case PnrdBasis::diagonal: return 0;
      case PnrdBasis::circular: return 1;
    }
    return 2;
  };

  std::vector<double> pooled(n_top + 1, 0.0);
  long long total_shots = 0;
  for (const auto& rec : records) {
    total_shots += rec.shots;
    for (const auto& [mn, c] : rec.counts) pooled[mn.first + mn.second] += static_cast<double>(c);
  }

  CountsEstimate est;
  est.dec.n_max = n_top;
  est.dec.rows.resize(n_top + 1);
  double mass = 0;
  for (int n = 0; n <= n_top; ++n) {
    auto& row = est.dec.rows[n];
    row.n = n;
    row.p = pooled[n] / static_cast<double>(total_shots);
    mass += row.p;
    if (row.p <= 0) continue;
    bool complete = true;
    Vector3R<double> s = Vector3R<double>::Zero();
    for (const auto& rec : records) {
      long long in_manifold = 0;
      long long diff = 0;
      for (const auto& [mn, c] : rec.counts) {
        if (mn.first + mn.second != n) continue;
        in_manifold += c;
        diff += static_cast<long long>(2 * mn.first - n) * c;
      }
      if (in_manifold == 0 && n > 0) {
        complete = false;
        break;
      }
      if (in_manifold > 0)
        s(component(rec.basis)) = static_cast<double>(diff) / static_cast<double>(in_manifold);
    }
    if (complete || n == 0) {
      row.defined = true;
      row.stokes = s;
    } else if (n > 0) {
      est.skipped_mass += row.p;
    }
  }
  est.dec.tail = 1.0 - mass;
  est.p1 = degree_p1(est.dec).value;
  est.p1sc = degree_p1sc(est.dec);
  return est;
}

// Multinomial bootstrap over the empirical count distributions.
inline BootstrapResult bootstrap_counts(const std::array<CountRecord, 3>& records, int b,
                                        std::uint64_t seed, int threads = 1) {
  if (b < 50) throw std::invalid_argument("bootstrap_counts: need B >= 50");
  struct BasisCdf {
    std::vector<double> cdf;
    std::vector<std::pair<int, int>> outcome;
    long long shots = 0;
    PnrdBasis basis;
  };
  std::array<BasisCdf, 3> cdfs;
  for (int k = 0; k < 3; ++k) {
    validate_counts(records[k]);
    cdfs[k].basis = records[k].basis;
    cdfs[k].shots = records[k].shots;
    double run = 0;
    for (const auto& [mn, c] : records[k].counts) {
      if (c == 0) continue;
      run += static_cast<double>(c);
      cdfs[k].cdf.push_back(run);
      cdfs[k].outcome.push_back(mn);
    }
  }

  std::vector<detail::DegreePair> results(b);
  parallel_for(b, threads, [&](int rep) {
    std::array<CountRecord, 3> replica;
    for (int k = 0; k < 3; ++k) {
      RngStream stream = RngStream::substream(
          seed, {0x63627374ULL, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(k)});
      replica[k].basis = cdfs[k].basis;
      replica[k].shots = cdfs[k].shots;
      const double total = cdfs[k].cdf.back();
      for (long long s = 0; s < cdfs[k].shots; ++s) {
        const double u = stream.uniform() * total;
        const auto it = std::lower_bound(cdfs[k].cdf.begin(), cdfs[k].cdf.end(), u);
        const std::size_t j =
            std::min(static_cast<std::size_t>(it - cdfs[k].cdf.begin()), cdfs[k].cdf.size() - 1);
        ++replica[k].counts[cdfs[k].outcome[j]];
      }
    }
    const CountsEstimate est = estimate_p1_from_counts(replica);
    results[rep] = detail::DegreePair{est.p1, est.p1sc};
  });

  std::vector<double> p1s(b), p1scs(b);
  for (int i = 0; i < b; ++i) {
    p1s[i] = results[i].p1;
    p1scs[i] = results[i].p1sc;
  }
  BootstrapResult out;
  out.replicates_used = b;
  detail::mean_std(p1s, out.p1_mean, out.p1_std);
  detail::mean_std(p1scs, out.p1sc_mean, out.p1sc_std);
  return out;
}

}  // namespace cvpol
