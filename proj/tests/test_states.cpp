#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvpol/gaussian.hpp"
#include "cvpol/states.hpp"
#include "oracles.hpp"

using namespace cvpol;
using oracles::cxd;

namespace {

double fock_mean_n(const DensityMatrix<double>& rho) {
  double acc = 0;
  for (int m = 0; m < rho.space.dim_per_mode; ++m) acc += m * rho.mat(m, m).real();
  return acc;
}

double fock_var_n(const DensityMatrix<double>& rho) {
  const double mean = fock_mean_n(rho);
  double acc = 0;
  for (int m = 0; m < rho.space.dim_per_mode; ++m)
    acc += (m - mean) * (m - mean) * rho.mat(m, m).real();
  return acc;
}

}  // namespace

TEST_CASE("coherent state construction") {
  SUBCASE("alpha = 0 is the vacuum") {
    const DensityMatrix<double> rho = coherent_fock(cxd(0, 0), FockSpace::two(4));
    CHECK(std::abs(rho.mat(0, 0).real() - 1.0) < 1e-15);
    CHECK(rho.trace_deficit() < 1e-15);
  }

  SUBCASE("alpha = 1 vacuum population matches the Poisson oracle") {
    const DensityMatrix<double> rho = coherent_fock(cxd(1, 0), FockSpace::single(24));
    CHECK(rho.mat(0, 0).real() == doctest::Approx(0.36787944117144233).epsilon(1e-12));
    for (int n = 0; n < 12; ++n)
      CHECK(rho.mat(n, n).real() == doctest::Approx(oracles::poisson_pmf(1.0, n)).epsilon(1e-12));
  }

  SUBCASE("alpha = 2 has mean photon number 4") {
    const DensityMatrix<double> rho = coherent_fock(cxd(2, 0), FockSpace::single(40));
    CHECK(std::abs(fock_mean_n(rho) - 4.0) < 1e-8);
  }

  SUBCASE("cutoff too small is rejected") {
    CHECK_THROWS_AS(coherent_fock(cxd(6, 0), FockSpace::single(16)), truncation_error);
  }
}

TEST_CASE("displaced squeezed thermal construction") {
  const FockSpace mode = FockSpace::single(48);

  SUBCASE("all parameters zero gives the vacuum") {
    const DensityMatrix<double> rho = displaced_squeezed_thermal_fock(StateSpec<double>{}, mode);
    CHECK(std::abs(rho.mat(0, 0).real() - 1.0) < 1e-14);
  }

  SUBCASE("squeezed vacuum r = 1: <0|rho|0> = 1/cosh(1)") {
    StateSpec<double> spec;
    spec.r = 1.0;
    const DensityMatrix<double> rho = displaced_squeezed_thermal_fock(spec, mode);
    CHECK(rho.mat(0, 0).real() == doctest::Approx(0.6480542736638855).epsilon(1e-10));
  }

  SUBCASE("squeezed vacuum r = 0.5: quadrature variances e^{-1} and e^{+1}") {
    StateSpec<double> spec;
    spec.r = 0.5;
    const DensityMatrix<double> rho = displaced_squeezed_thermal_fock(spec, mode);
    Vector2R<double> mean;
    Matrix2R<double> cov;
    mode_moments_from_fock(rho, mean, cov);
    CHECK(cov(0, 0) == doctest::Approx(0.36787944117144233).epsilon(1e-9));
    CHECK(cov(1, 1) == doctest::Approx(2.718281828459045).epsilon(1e-9));
    CHECK(std::abs(cov(0, 1)) < 1e-10);
    CHECK(mean.norm() < 1e-12);
  }

  SUBCASE("pure states have unit purity, thermal states do not") {
    StateSpec<double> pure;
    pure.alpha = cxd(0.7, -0.4);
    pure.r = 0.6;
    pure.theta = 1.3;
    const DensityMatrix<double> rho = displaced_squeezed_thermal_fock(pure, mode);
    CHECK(std::abs((rho.mat * rho.mat).trace().real() - 1.0) < 1e-8);

    StateSpec<double> th;
    th.n_th = 0.5;
    const DensityMatrix<double> rho_th = displaced_squeezed_thermal_fock(th, mode);
    CHECK((rho_th.mat * rho_th.mat).trace().real() < 0.9);
    CHECK(fock_mean_n(rho_th) == doctest::Approx(0.5).epsilon(1e-10));
  }

  SUBCASE("predicted photon moments match the Fock-space values") {
    StateSpec<double> spec;
    spec.alpha = cxd(1.0, 0.5);
    spec.r = 0.7;
    spec.theta = 1.1;
    spec.n_th = 0.4;
    const DensityMatrix<double> rho = displaced_squeezed_thermal_fock(spec, mode);
    const PhotonMoments<double> pm = spec_photon_moments(spec);
    CHECK(fock_mean_n(rho) == doctest::Approx(pm.mean).epsilon(1e-8));
    CHECK(fock_var_n(rho) == doctest::Approx(pm.var).epsilon(1e-7));
  }

  SUBCASE("truncation gate fires when the cutoff is too small") {
    StateSpec<double> spec;
    spec.r = 3.0;
    CHECK_THROWS_AS(displaced_squeezed_thermal_fock(spec, FockSpace::single(16)),
                    truncation_error);
  }
}

TEST_CASE("xi state") {
  const FockSpace two = FockSpace::two(5);

  SUBCASE("populations are 2/3 on |1,0> and 1/3 on |0,2>") {
    const DensityMatrix<double> rho = xi_state(0.4, two);
    CHECK(rho.mat(two.index(1, 0), two.index(1, 0)).real() ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(rho.mat(two.index(0, 2), two.index(0, 2)).real() ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }

  SUBCASE("trace is exactly one") {
    const DensityMatrix<double> rho = xi_state(1.7, two);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-15));
  }

  SUBCASE("phase does not affect the photon-number distribution") {
    const DensityMatrix<double> a = xi_state(0.0, two);
    const DensityMatrix<double> b = xi_state(3.14159, two);
    for (int i = 0; i < two.total_dim(); ++i)
      CHECK(std::abs(a.mat(i, i).real() - b.mat(i, i).real()) < 1e-14);
  }

  SUBCASE("needs at least three levels") {
    CHECK_THROWS_AS(xi_state(0.0, FockSpace::two(2)), std::invalid_argument);
  }
}

TEST_CASE("fock superpositions and products") {
  const FockSpace two = FockSpace::two(4);

  SUBCASE("superposition is normalised and validated") {
    std::vector<FockTerm<double>> terms = {{1, 0, cxd(2, 0)}, {0, 1, cxd(0, 2)}};
    const DensityMatrix<double> rho = fock_superposition(terms, two);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rho.mat(two.index(1, 0), two.index(1, 0)).real() == doctest::Approx(0.5).epsilon(1e-14));
    std::vector<FockTerm<double>> bad = {{5, 0, cxd(1, 0)}};
    CHECK_THROWS_AS(fock_superposition(bad, two), std::invalid_argument);
  }

  SUBCASE("product materialisation equals the Kronecker product") {
    StateSpec<double> h;
    h.alpha = cxd(0.6, 0.2);
    StateSpec<double> v;
    v.r = 0.4;
    const TwoModeProduct<double> prod = product_from_specs(h, v, 12);
    const DensityMatrix<double> full = prod.materialise();
    const MatrixC<double> expected = tensor_product<double>(prod.mode_h.mat, prod.mode_v.mat);
    CHECK((full.mat - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(full.space.total_dim() == 144);
  }

  SUBCASE("population above a level") {
    const DensityMatrix<double> rho = coherent_fock(cxd(1, 0), FockSpace::single(24));
    double expected = 0;
    for (int n = 5; n < 24; ++n) expected += oracles::poisson_pmf(1.0, n);
    CHECK(population_above(rho, 4) == doctest::Approx(expected).epsilon(1e-10));
  }
}
