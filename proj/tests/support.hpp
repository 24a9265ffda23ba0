#pragma once

#include <cmath>

#include "donorcnot/linalg.hpp"
#include "donorcnot/random.hpp"

namespace donorcnot::test {

inline ComplexMatrix random_matrix(Eigen::Index dim, Rng& rng) {
  ComplexMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  return m;
}

inline HermitianOperator random_hermitian(Eigen::Index dim, Rng& rng, double scale = 1.0) {
  const ComplexMatrix m = random_matrix(dim, rng);
  return HermitianOperator(0.5 * scale * (m + m.adjoint()));
}

// exp(-i 2 pi H t) by scaling and squaring of a truncated Taylor series;
// independent of the eigendecomposition used by the library.
inline ComplexMatrix taylor_propagator(const ComplexMatrix& h, double t) {
  const ComplexMatrix a = Complex(0.0, -2.0 * M_PI * t) * h;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.1) ++squarings;
  const ComplexMatrix small = a / std::pow(2.0, squarings);
  ComplexMatrix term = ComplexMatrix::Identity(h.rows(), h.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * small / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Kronecker product written out index by index.
inline ComplexMatrix kron_by_hand(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

}  // namespace donorcnot::test
