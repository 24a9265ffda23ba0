#include "donorcnot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace donorcnot {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kUnitaryTol = 1e-10;
constexpr double kNormTol = 1e-12;

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  }
}

void check_sites(int n_sites, std::initializer_list<int> sites) {
  if (n_sites <= 0) throw std::out_of_range("register must have at least one site");
  for (int s : sites) {
    if (s < 0 || s >= n_sites) {
      throw std::out_of_range("site " + std::to_string(s) + " outside register of " +
                              std::to_string(n_sites) + " sites");
    }
  }
}

}  // namespace

double max_abs(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// HermitianOperator

HermitianOperator::HermitianOperator(const ComplexMatrix& m) {
  require_square(m, "HermitianOperator");
  const double scale = std::max(1.0, max_abs(m));
  const double asym = max_abs(m - m.adjoint());
  if (asym > kHermitianTol * scale) {
    throw std::invalid_argument("matrix is not Hermitian (deviation " + std::to_string(asym) + ")");
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
  return HermitianOperator(ComplexMatrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::identity(Eigen::Index dim) {
  return HermitianOperator(ComplexMatrix::Identity(dim, dim));
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw std::invalid_argument("operator dimension mismatch");
  m_ += other.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw std::invalid_argument("operator dimension mismatch");
  m_ -= other.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }

// ---------------------------------------------------------------------------
// Unitary

Unitary::Unitary(const ComplexMatrix& m) : m_(m) {
  require_square(m, "Unitary");
  const double err = unitarity_error();
  if (!(err <= kUnitaryTol)) {
    throw std::invalid_argument("matrix is not unitary (deviation " + std::to_string(err) + ")");
  }
}

Unitary Unitary::identity(Eigen::Index dim) { return Unitary(ComplexMatrix::Identity(dim, dim)); }

Unitary Unitary::adjoint() const { return Unitary(m_.adjoint()); }

double Unitary::unitarity_error() const {
  return max_abs(m_.adjoint() * m_ - ComplexMatrix::Identity(m_.rows(), m_.cols()));
}

Unitary operator*(const Unitary& a, const Unitary& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("unitary dimension mismatch");
  return Unitary(a.matrix() * b.matrix());
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(const ComplexVector& amplitudes) : v_(amplitudes) {
  if (v_.size() == 0) throw std::invalid_argument("state must be non-empty");
  const double n2 = v_.squaredNorm();
  if (!(std::abs(n2 - 1.0) <= kNormTol)) {
    throw std::invalid_argument("state is not normalized (squared norm " + std::to_string(n2) + ")");
  }
}

PureState PureState::normalized(const ComplexVector& amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
  return PureState(amplitudes / n);
}

PureState PureState::basis(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) throw std::out_of_range("basis index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return PureState(v);
}

PureState operator*(const Unitary& u, const PureState& s) {
  if (u.dim() != s.dim()) throw std::invalid_argument("state/unitary dimension mismatch");
  return PureState::normalized(u.matrix() * s.amplitudes());
}

double overlap_probability(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("state dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

// ---------------------------------------------------------------------------
// Register operators

ComplexMatrix pauli(PauliAxis axis) {
  ComplexMatrix p(2, 2);
  switch (axis) {
    case PauliAxis::X:
      p << 0.0, 1.0, 1.0, 0.0;
      break;
    case PauliAxis::Y:
      p << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
      break;
    case PauliAxis::Z:
      p << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return p;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

HermitianOperator embed_pauli(PauliAxis axis, int site, int n_sites) {
  check_sites(n_sites, {site});
  // Diagonal/permutation structure: build entries directly instead of
  // chaining Kronecker products.
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  const Eigen::Index bit = Eigen::Index{1} << (n_sites - 1 - site);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const bool one = (col & bit) != 0;
    switch (axis) {
      case PauliAxis::X:
        m(col ^ bit, col) = 1.0;
        break;
      case PauliAxis::Y:
        // Y|0> = i|1>, Y|1> = -i|0>
        m(col ^ bit, col) = one ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
        break;
      case PauliAxis::Z:
        m(col, col) = one ? -1.0 : 1.0;
        break;
    }
  }
  return HermitianOperator(m);
}

HermitianOperator exchange_coupling(int site_i, int site_j, int n_sites) {
  check_sites(n_sites, {site_i, site_j});
  if (site_i == site_j) throw std::invalid_argument("exchange coupling needs two distinct sites");
  ComplexMatrix m = ComplexMatrix::Zero(Eigen::Index{1} << n_sites, Eigen::Index{1} << n_sites);
  for (PauliAxis a : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
    m += embed_pauli(a, site_i, n_sites).matrix() * embed_pauli(a, site_j, n_sites).matrix();
  }
  return HermitianOperator(m);
}

HermitianOperator total_pauli(PauliAxis axis, std::initializer_list<int> sites, int n_sites) {
  HermitianOperator out = HermitianOperator::zero(Eigen::Index{1} << n_sites);
  for (int s : sites) out += embed_pauli(axis, s, n_sites);
  return out;
}

EigenSystem hermitian_eigensystem(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Hermitian eigensolver failed to converge");
  }
  return EigenSystem{solver.eigenvalues(), Unitary(solver.eigenvectors())};
}

Unitary propagator(const HermitianOperator& h, double duration_us) {
  if (!(duration_us >= 0.0)) throw std::invalid_argument("propagation time must be non-negative");
  if (duration_us == 0.0) return Unitary::identity(h.dim());
  const EigenSystem es = hermitian_eigensystem(h);
  const Complex k(0.0, -2.0 * std::numbers::pi * duration_us);
  const ComplexVector phases = (es.values.cast<Complex>() * k).array().exp().matrix();
  const ComplexMatrix& v = es.vectors.matrix();
  return Unitary(v * phases.asDiagonal() * v.adjoint());
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

}  // namespace donorcnot
