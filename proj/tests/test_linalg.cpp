#include "doctest.h"

#include "donorcnot/linalg.hpp"
#include "support.hpp"

using namespace donorcnot;

TEST_SUITE("linalg") {

TEST_CASE("single-site Pauli Z") {
  const ComplexMatrix z = embed_pauli(PauliAxis::Z, 0, 1).matrix();
  CHECK(z(0, 0) == Complex(1.0));
  CHECK(z(1, 1) == Complex(-1.0));
  CHECK(z(0, 1) == Complex(0.0));
}

TEST_CASE("X on the second of two sites") {
  const ComplexMatrix x = embed_pauli(PauliAxis::X, 1, 2).matrix();
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 1) = expected(1, 0) = expected(2, 3) = expected(3, 2) = 1.0;
  CHECK(max_abs(x - expected) == 0.0);
}

TEST_CASE("embedding matches an explicit Kronecker product") {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  for (PauliAxis axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
    for (int site = 0; site < 3; ++site) {
      ComplexMatrix expected = ComplexMatrix::Identity(1, 1);
      for (int k = 0; k < 3; ++k) expected = test::kron_by_hand(expected, k == site ? pauli(axis) : i2);
      CHECK(max_abs(embed_pauli(axis, site, 3).matrix() - expected) == 0.0);
    }
  }
  const ComplexMatrix y0 = embed_pauli(PauliAxis::Y, 0, 3).matrix();
  CHECK(max_abs(y0 * y0 - ComplexMatrix::Identity(8, 8)) == 0.0);
  CHECK(std::abs(y0.trace()) == 0.0);
}

TEST_CASE("Pauli algebra") {
  const ComplexMatrix x = pauli(PauliAxis::X), y = pauli(PauliAxis::Y), z = pauli(PauliAxis::Z);
  CHECK(max_abs(x * y - Complex(0, 1) * z) < 1e-15);
  CHECK(max_abs(commutator(y, z) - Complex(0, 2) * x) < 1e-15);
}

TEST_CASE("site range is checked") {
  CHECK_THROWS_AS(embed_pauli(PauliAxis::X, 3, 3), std::out_of_range);
  CHECK_THROWS_AS(embed_pauli(PauliAxis::X, -1, 3), std::out_of_range);
  CHECK_THROWS_AS(exchange_coupling(1, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(exchange_coupling(0, 4, 3), std::out_of_range);
}

TEST_CASE("exchange coupling has singlet -3 and triplet +1") {
  const EigenSystem es = hermitian_eigensystem(exchange_coupling(0, 1, 2));
  CHECK(es.values(0) == doctest::Approx(-3.0));
  for (int k = 1; k < 4; ++k) CHECK(es.values(k) == doctest::Approx(1.0));
  // Singlet (|01> - |10>)/sqrt 2
  const ComplexVector s = es.vectors.matrix().col(0);
  CHECK(std::abs(s(0)) < 1e-12);
  CHECK(std::abs(std::abs(s(1)) - M_SQRT1_2) < 1e-12);
  CHECK(std::abs(s(1) + s(2)) < 1e-12);
}

TEST_CASE("operators reject invalid matrices") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianOperator{m}, std::invalid_argument);
  CHECK_THROWS_AS(Unitary{2.0 * ComplexMatrix::Identity(2, 2)}, std::invalid_argument);
  CHECK_THROWS_AS(PureState{ComplexVector::Ones(2)}, std::invalid_argument);
  CHECK_THROWS_AS(PureState::normalized(ComplexVector::Zero(2)), std::invalid_argument);
  CHECK_NOTHROW(PureState::normalized(ComplexVector::Ones(2)));
}

TEST_CASE("Pauli X eigenvectors") {
  const EigenSystem es = hermitian_eigensystem(HermitianOperator(pauli(PauliAxis::X)));
  CHECK(es.values(0) == doctest::Approx(-1.0));
  CHECK(es.values(1) == doctest::Approx(1.0));
  const ComplexVector minus = es.vectors.matrix().col(0);
  CHECK(std::abs(minus(0) + minus(1)) < 1e-12);
}

TEST_CASE("eigendecomposition reconstructs random Hermitian matrices") {
  Rng rng(7);
  for (Eigen::Index dim : {2, 8, 64}) {
    for (int trial = 0; trial < 5; ++trial) {
      const HermitianOperator h = test::random_hermitian(dim, rng, 100.0);
      const EigenSystem es = hermitian_eigensystem(h);
      const ComplexMatrix& v = es.vectors.matrix();
      const ComplexMatrix back = v * es.values.cast<Complex>().asDiagonal() * v.adjoint();
      CHECK(max_abs(back - h.matrix()) <= 1e-9 * max_abs(h.matrix()));
      for (Eigen::Index k = 1; k < dim; ++k) CHECK(es.values(k - 1) <= es.values(k));
    }
  }
}

TEST_CASE("propagator of a scalar gap") {
  // Z/2: gap of 1 MHz, half a period -> diag(e^{-i pi/2}, e^{i pi/2})
  const Unitary u = propagator(HermitianOperator(0.5 * pauli(PauliAxis::Z)), 0.5);
  CHECK(std::abs(u(0, 0) - Complex(0, -1)) < 1e-12);
  CHECK(std::abs(u(1, 1) - Complex(0, 1)) < 1e-12);
  CHECK(std::abs(u(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("propagator agrees with a Taylor-series exponential") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const HermitianOperator h = test::random_hermitian(8, rng, 30.0);
    const double t = rng.uniform(0.0, 0.2);
    const Unitary u = propagator(h, t);
    CHECK(max_abs(u.matrix() - test::taylor_propagator(h.matrix(), t)) < 1e-10);
    CHECK(u.unitarity_error() <= 1e-12);
  }
}

TEST_CASE("propagator edge cases") {
  const HermitianOperator h = exchange_coupling(0, 1, 2);
  CHECK(max_abs(propagator(h, 0.0).matrix() - ComplexMatrix::Identity(4, 4)) == 0.0);
  CHECK_THROWS_AS(propagator(h, -1e-9), std::invalid_argument);
}

TEST_CASE("state overlap and unitary action") {
  const PureState zero = PureState::basis(2, 0);
  const Unitary x(pauli(PauliAxis::X));
  const PureState one = x * zero;
  CHECK(overlap_probability(one, PureState::basis(2, 1)) == doctest::Approx(1.0));
  CHECK(overlap_probability(one, zero) == doctest::Approx(0.0));
  CHECK_THROWS(PureState::basis(2, 2));
}

}  // TEST_SUITE
