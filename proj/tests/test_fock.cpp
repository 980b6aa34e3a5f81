#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvpol/fock.hpp"
#include "cvpol/states.hpp"
#include "oracles.hpp"

using namespace cvpol;
using oracles::cxd;

namespace {

double max_abs_diff(const MatrixC<double>& a, const MatrixC<double>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("fock space basics and basis ordering") {
  const FockSpace two = FockSpace::two(5);
  CHECK(two.total_dim() == 25);
  CHECK(two.index(0, 0) == 0);
  CHECK(two.index(1, 0) == 5);  // H is the slow index
  CHECK(two.index(0, 1) == 1);
  CHECK(two.max_total_photons() == 8);
  CHECK_THROWS_AS(FockSpace::single(1), std::invalid_argument);

  int covered = 0;
  for (int n = 0; n <= two.max_total_photons(); ++n) covered += manifold_range(two, n).size();
  CHECK(covered == two.total_dim());
  CHECK_THROWS_AS(manifold_range(two, 9), std::invalid_argument);
}

TEST_CASE("ladder operators") {
  const FockSpace space = FockSpace::single(6);
  const MatrixC<double> a = ladder_lower(space);

  SUBCASE("a|1> = |0>") {
    VectorC<double> one = VectorC<double>::Zero(6);
    one(1) = 1.0;
    VectorC<double> out = a * one;
    CHECK(std::abs(out(0) - cxd(1, 0)) < 1e-15);
    CHECK(out.tail(5).norm() < 1e-15);
  }

  SUBCASE("number operator is a^dag a") {
    const MatrixC<double> n = a.adjoint() * a;
    for (int k = 0; k < 6; ++k) CHECK(std::abs(n(k, k) - cxd(k, 0)) < 1e-14);
    CHECK(max_abs_diff(n, number_op(space)) < 1e-14);
  }

  SUBCASE("[a, a^dag] = I - d P_{d-1} on the truncated space") {
    const MatrixC<double> comm = commutator<double>(a, a.adjoint().eval());
    MatrixC<double> expected = MatrixC<double>::Identity(6, 6);
    expected(5, 5) = 1.0 - 6.0;
    CHECK(max_abs_diff(comm, expected) < 1e-14);
  }

  SUBCASE("invalid mode id") {
    CHECK_THROWS_AS(ladder_lower(space, Mode::V), std::invalid_argument);
  }

  SUBCASE("two-mode embedding acts with identity on the other mode") {
    const FockSpace two = FockSpace::two(4);
    const MatrixC<double> ah = ladder_lower(two, Mode::H);
    const MatrixC<double> av = ladder_lower(two, Mode::V);
    VectorC<double> psi = VectorC<double>::Zero(16);
    psi(two.index(2, 3)) = 1.0;
    VectorC<double> hh = ah * psi;
    CHECK(std::abs(hh(two.index(1, 3)) - std::sqrt(cxd(2, 0))) < 1e-14);
    VectorC<double> vv = av * psi;
    CHECK(std::abs(vv(two.index(2, 2)) - std::sqrt(cxd(3, 0))) < 1e-14);
  }
}

TEST_CASE("operator exponential") {
  const FockSpace space = FockSpace::single(32);

  SUBCASE("exp(0) = identity") {
    const MatrixC<double> zero = MatrixC<double>::Zero(8, 8);
    CHECK(max_abs_diff(op_exponential(zero), MatrixC<double>::Identity(8, 8)) < 1e-14);
  }

  SUBCASE("displacement of vacuum reproduces the coherent amplitudes") {
    const cxd alpha(1.0, 0.0);
    const MatrixC<double> d = op_exponential(displacement_generator(alpha, space));
    VectorC<double> vac = VectorC<double>::Zero(32);
    vac(0) = 1.0;
    const VectorC<double> psi = d * vac;
    CHECK(std::abs(psi(0)) == doctest::Approx(0.60653065971263342).epsilon(1e-10));
    for (int n = 0; n < 20; ++n)
      CHECK(std::abs(psi(n) - oracles::coherent_amplitude(alpha, n)) < 1e-10);
  }

  SUBCASE("squeezed vacuum has support on even levels only") {
    const MatrixC<double> s = op_exponential(squeeze_generator(cxd(0.5, 0.0), space));
    VectorC<double> vac = VectorC<double>::Zero(32);
    vac(0) = 1.0;
    const VectorC<double> psi = s * vac;
    for (int n = 1; n < 32; n += 2) CHECK(std::abs(psi(n)) < 1e-13);
    for (int n = 0; n < 16; n += 2)
      CHECK(std::abs(psi(n) - oracles::squeezed_vacuum_amplitude(0.5, 0.0, n)) < 1e-10);
  }

  SUBCASE("rejects non-square and non-anti-Hermitian input") {
    MatrixC<double> rect = MatrixC<double>::Zero(3, 4);
    CHECK_THROWS_AS(op_exponential(rect), std::invalid_argument);
    MatrixC<double> herm = MatrixC<double>::Identity(4, 4);
    CHECK_THROWS_AS(op_exponential(herm), numerical_error);
  }

  SUBCASE("exp(G) exp(-G) = I for bounded generators") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
      MatrixC<double> g = MatrixC<double>::Zero(32, 32);
      g.topLeftCorner(20, 20) = oracles::random_anti_hermitian(20, rng);
      const MatrixC<double> u = op_exponential(g);
      const MatrixC<double> v = op_exponential((-g).eval());
      CHECK(max_abs_diff(u * v, MatrixC<double>::Identity(32, 32)) < 1e-8);
      CHECK(max_abs_diff(u * u.adjoint(), MatrixC<double>::Identity(32, 32)) < 1e-12);
    }
  }

  SUBCASE("double result matches a long double reference") {
    const FockSpace small = FockSpace::single(24);
    const cxd alpha(1.5, 0.0);
    const MatrixC<double> u64 = op_exponential(displacement_generator(alpha, small));
    const MatrixC<long double> gld =
        displacement_generator<long double>(std::complex<long double>(1.5L, 0.0L), small);
    const MatrixC<long double> uld = op_exponential(gld);
    double dev = 0;
    for (int i = 0; i < 24; ++i)
      for (int j = 0; j < 24; ++j)
        dev = std::max(dev, static_cast<double>(std::abs(uld(i, j) -
                                                         std::complex<long double>(u64(i, j)))));
    CHECK(dev < 1e-12);
  }
}

TEST_CASE("tensor products") {
  const FockSpace two = FockSpace::two(4);
  const FockSpace mode = FockSpace::single(4);
  const MatrixC<double> id = identity_op<double>(mode);
  const MatrixC<double> a = ladder_lower(mode);

  SUBCASE("identity factors") {
    CHECK(max_abs_diff(tensor_product<double>(id, id), identity_op<double>(two)) == 0.0);
  }

  SUBCASE("total number operator eigenvalue on |2,3>") {
    const FockSpace big = FockSpace::two(6);
    const MatrixC<double> idb = identity_op<double>(FockSpace::single(6));
    const MatrixC<double> nb = (ladder_lower(FockSpace::single(6)).adjoint() *
                                ladder_lower(FockSpace::single(6)))
                                   .eval();
    const MatrixC<double> total =
        tensor_product<double>(nb, idb) + tensor_product<double>(idb, nb);
    VectorC<double> psi = VectorC<double>::Zero(36);
    psi(big.index(2, 3)) = 1.0;
    CHECK(std::abs((total * psi)(big.index(2, 3)) - cxd(5, 0)) < 1e-14);
  }

  SUBCASE("a (x) a^dag maps |1,0> to |0,1> with coefficient sqrt(1)*sqrt(1)") {
    const MatrixC<double> op = tensor_product<double>(a, a.adjoint().eval());
    VectorC<double> psi = VectorC<double>::Zero(16);
    psi(two.index(1, 0)) = 1.0;
    const VectorC<double> out = op * psi;
    CHECK(std::abs(out(two.index(0, 1)) - cxd(1, 0)) < 1e-14);
    CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("dimension mismatch is rejected") {
    const MatrixC<double> small = MatrixC<double>::Identity(3, 3);
    CHECK_THROWS_AS(tensor_product<double>(a, small), std::invalid_argument);
  }

  SUBCASE("bilinear and associative on random sparse operators") {
    std::mt19937 rng(11);
    const auto rand_sparse = [&](int n) {
      MatrixC<double> m = MatrixC<double>::Zero(n, n);
      std::uniform_int_distribution<int> pick(0, n - 1);
      std::normal_distribution<double> g;
      for (int k = 0; k < n; ++k) m(pick(rng), pick(rng)) = cxd(g(rng), g(rng));
      return m;
    };
    const MatrixC<double> x = rand_sparse(3), y = rand_sparse(3), z = rand_sparse(3);
    const cxd lambda(0.7, -0.3);
    CHECK(max_abs_diff(tensor_product<double>((lambda * x + y).eval(), z),
                       (lambda * tensor_product<double>(x, z) + tensor_product<double>(y, z))
                           .eval()) < 1e-13);
    const MatrixC<double> left =
        Eigen::kroneckerProduct(tensor_product<double>(x, y), z).eval();
    const MatrixC<double> right =
        Eigen::kroneckerProduct(x, tensor_product<double>(y, z)).eval();
    CHECK(max_abs_diff(left, right) < 1e-13);
  }
}

TEST_CASE("expectation values") {
  SUBCASE("vacuum photon number is zero") {
    const FockSpace two = FockSpace::two(4);
    const DensityMatrix<double> vac = vacuum_fock(two);
    const MatrixC<double> total = (number_op(two, Mode::H) + number_op(two, Mode::V)).eval();
    CHECK(std::abs(expectation(vac, total)) < 1e-14);
  }

  SUBCASE("coherent (x) vacuum total photon number from the Poisson oracle") {
    const FockSpace two = FockSpace::two(32);
    const DensityMatrix<double> rho = coherent_fock(cxd(1.0, 0.0), two);
    const MatrixC<double> s0 = (number_op(two, Mode::H) + number_op(two, Mode::V)).eval();
    const double expected = oracles::poisson_mean_from_pmf(1.0, 31);
    CHECK(std::abs(expectation(rho, s0).real() - expected) < 1e-10);
    CHECK(std::abs(expectation(rho, s0).real() - 1.0) < 1e-8);
  }

  SUBCASE("dimension mismatch is rejected") {
    const DensityMatrix<double> vac = vacuum_fock(FockSpace::two(3));
    const MatrixC<double> wrong = MatrixC<double>::Identity(4, 4);
    CHECK_THROWS_AS(expectation(vac, wrong), std::invalid_argument);
  }

  SUBCASE("Hermitian operators give real expectations on random states") {
    std::mt19937 rng(3);
    const FockSpace two = FockSpace::two(5);
    for (int trial = 0; trial < 20; ++trial) {
      const auto rho = oracles::random_bounded_density(two, 4, 3, rng);
      const MatrixC<double> h = oracles::random_hermitian(25, rng);
      CHECK(std::abs(expectation(rho, h).imag()) < 1e-10 * h.cwiseAbs().maxCoeff() * 25);
    }
  }
}

TEST_CASE("density matrix validation") {
  const FockSpace two = FockSpace::two(3);

  SUBCASE("rejects non-Hermitian input") {
    MatrixC<double> bad = MatrixC<double>::Zero(9, 9);
    bad(0, 0) = 1.0;
    bad(0, 1) = cxd(0.1, 0.0);
    CHECK_THROWS_AS(make_density_matrix(two, std::move(bad)), physicality_error);
  }

  SUBCASE("rejects trace outside (0, 1]") {
    MatrixC<double> bad = 2.0 * MatrixC<double>::Identity(9, 9);
    CHECK_THROWS_AS(make_density_matrix(two, std::move(bad)), physicality_error);
  }

  SUBCASE("trace deficit reports truncation loss") {
    MatrixC<double> sub = MatrixC<double>::Zero(9, 9);
    sub(0, 0) = 0.75;
    sub(4, 4) = 0.20;
    const auto rho = make_density_matrix(two, std::move(sub));
    CHECK(rho.trace_deficit() == doctest::Approx(0.05).epsilon(1e-12));
    assert_physical(rho);
  }
}

TEST_CASE("blockwise passive application agrees with the dense exponential") {
  std::mt19937 rng(17);
  const FockSpace two = FockSpace::two(6);
  const MatrixC<double> ah = ladder_lower(two, Mode::H);
  const MatrixC<double> av = ladder_lower(two, Mode::V);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix2C<double> h;
    const Eigen::MatrixXcd h_small = oracles::random_hermitian(2, rng);
    h = h_small;
    const auto rho = oracles::random_bounded_density(two, 10, 3, rng);

    const MatrixC<double> big_gen =
        (cxd(0, -1) * (h(0, 0) * (ah.adjoint() * ah) + h(1, 1) * (av.adjoint() * av) +
                       h(0, 1) * (ah.adjoint() * av) + h(1, 0) * (av.adjoint() * ah)))
            .eval();
    const MatrixC<double> u = op_exponential(big_gen);
    const MatrixC<double> expected = (u * rho.mat * u.adjoint()).eval();
    const DensityMatrix<double> got = apply_passive(rho, h);
    CHECK((expected - got.mat).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("product-unitary application agrees with the Kronecker conjugation") {
  std::mt19937 rng(23);
  const FockSpace two = FockSpace::two(5);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixC<double> a = oracles::random_unitary(5, rng);
    const MatrixC<double> b = oracles::random_unitary(5, rng);
    const auto rho = oracles::random_bounded_density(two, 8, 3, rng);
    const MatrixC<double> big = tensor_product<double>(a, b);
    const MatrixC<double> expected = (big * rho.mat * big.adjoint()).eval();
    const DensityMatrix<double> got = apply_product_unitary(rho, a, b);
    CHECK((expected - got.mat).cwiseAbs().maxCoeff() < 1e-12);
  }
}
