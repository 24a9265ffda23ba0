#pragma once

// Dense complex linear algebra over small spin registers.
//
// Conventions used throughout the library:
//   * operators are linear frequencies in MHz (h = 1), times are in us;
//   * a propagator is exp(-i 2 pi H t);
//   * register site 0 is the most significant tensor factor, and the
//     single-spin basis is (|0>, |1>) with Z|0> = +|0>.

#include <complex>
#include <cstddef>
#include <initializer_list>

#include <Eigen/Dense>

namespace donorcnot {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class PauliAxis { X, Y, Z };

/// Largest absolute entry of a matrix (0 for an empty matrix).
double max_abs(const ComplexMatrix& m);

/// Hermitian operator in MHz. Construction checks Hermiticity to 1e-12
/// relative and then stores the exactly symmetrized matrix.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const ComplexMatrix& m);

  static HermitianOperator zero(Eigen::Index dim);
  static HermitianOperator identity(Eigen::Index dim);

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator-=(const HermitianOperator& other);
  HermitianOperator& operator*=(double s);

 private:
  ComplexMatrix m_;
};

HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b);
HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b);
HermitianOperator operator*(double s, HermitianOperator a);
HermitianOperator operator*(HermitianOperator a, double s);

/// Unitary matrix; construction checks U^dagger U = I to 1e-10 max-entry.
class Unitary {
 public:
  Unitary() = default;
  explicit Unitary(const ComplexMatrix& m);

  static Unitary identity(Eigen::Index dim);

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  Unitary adjoint() const;
  /// Max-entry deviation of U^dagger U from the identity.
  double unitarity_error() const;

 private:
  ComplexMatrix m_;
};

/// Matrix product; the result is re-validated as unitary.
Unitary operator*(const Unitary& a, const Unitary& b);

/// Normalized state vector (squared norm 1 within 1e-12).
class PureState {
 public:
  PureState() = default;
  explicit PureState(const ComplexVector& amplitudes);

  /// Renormalizes a nonzero vector instead of rejecting it.
  static PureState normalized(const ComplexVector& amplitudes);
  /// Computational basis state |index> of the given dimension.
  static PureState basis(Eigen::Index dim, Eigen::Index index);

  const ComplexVector& amplitudes() const { return v_; }
  Eigen::Index dim() const { return v_.size(); }
  Complex operator[](Eigen::Index i) const { return v_(i); }

 private:
  ComplexVector v_;
};

PureState operator*(const Unitary& u, const PureState& s);

/// |<a|b>|^2
double overlap_probability(const PureState& a, const PureState& b);

/// Single-spin Pauli matrix.
ComplexMatrix pauli(PauliAxis axis);

/// Kronecker product a (x) b, a being the more significant factor.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// I (x) ... (x) sigma_axis (x) ... (x) I with sigma at `site`.
/// Throws std::out_of_range unless 0 <= site < n_sites.
HermitianOperator embed_pauli(PauliAxis axis, int site, int n_sites);

/// X_i X_j + Y_i Y_j + Z_i Z_j on an n-spin register.
/// Throws std::invalid_argument for equal sites, std::out_of_range otherwise.
HermitianOperator exchange_coupling(int site_i, int site_j, int n_sites);

/// Sum of one Pauli axis over the listed sites.
HermitianOperator total_pauli(PauliAxis axis, std::initializer_list<int> sites, int n_sites);

struct EigenSystem {
  RealVector values;  // ascending
  Unitary vectors;    // columns are eigenvectors
};

/// H = V diag(values) V^dagger with ascending eigenvalues.
EigenSystem hermitian_eigensystem(const HermitianOperator& h);

/// exp(-i 2 pi H t) for t >= 0 (us), built from the eigendecomposition.
/// Throws std::invalid_argument for negative durations.
Unitary propagator(const HermitianOperator& h, double duration_us);

/// AB - BA
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace donorcnot
