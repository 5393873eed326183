// Finite-dimensional operator algebra: projections, rays, states, spectral
// decomposition and the lattice / Jordan operations on B(H) for dim H = n.
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace contextua {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kDefaultTol = 1e-9;

/// Gap below which sorted eigenvalues are merged into one eigenspace.
inline constexpr double kEigenClusterGap = 1e-7;

/// Decimal places kept in a projection's canonical key.
inline constexpr int kKeyDecimals = 6;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two projections are closer than the canonicalization grid but not equal
/// within tolerance, so cross-context identity cannot be decided reliably.
class NearDuplicateError : public Error {
 public:
  using Error::Error;
};

double max_abs(const ComplexMatrix& m);
bool is_square(const ComplexMatrix& m);
bool is_finite(const ComplexMatrix& m);
bool is_self_adjoint(const ComplexMatrix& m, double tol = kDefaultTol);

bool is_projection(const ComplexMatrix& m, double tol = kDefaultTol);

/// Self-adjoint idempotent matrix. The rank is the rounded trace.
class Projection {
 public:
  Projection() = default;

  /// Throws Error if m is not a projection within tol.
  explicit Projection(ComplexMatrix m, double tol = kDefaultTol);

  static Projection zero(std::size_t dim);
  static Projection identity(std::size_t dim);

  const ComplexMatrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t rank() const { return rank_; }
  bool is_zero() const { return rank_ == 0; }

  Projection complement() const;

  /// p <= q in the lattice order, i.e. pq = p.
  bool leq(const Projection& other, double tol = kDefaultTol) const;
  bool orthogonal_to(const Projection& other, double tol = kDefaultTol) const;
  bool approx_equal(const Projection& other, double tol = kDefaultTol) const;

  /// Entries rounded to kKeyDecimals; equal projections share a key up to
  /// rounding-boundary effects (the registry also compares matrices).
  std::string key() const;

 private:
  ComplexMatrix matrix_;
  std::size_t rank_ = 0;
};

/// Unit vector up to global phase.
class Ray {
 public:
  Ray() = default;

  /// Normalizes v; throws Error("degenerate ray") on a zero vector.
  explicit Ray(const ComplexVector& v);

  std::size_t dim() const { return static_cast<std::size_t>(vector_.size()); }
  const ComplexVector& vector() const { return vector_; }

  /// |<u,v>| = 1 within tol.
  bool equivalent(const Ray& other, double tol = kDefaultTol) const;

  /// Representative with the dominant entry real and positive.
  ComplexVector canonical_vector() const;

 private:
  ComplexVector vector_;
};

Projection projection_from_ray(const Ray& r);

/// Self-adjoint, unit trace, eigenvalues >= -tol.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix m, double tol = kDefaultTol);

  static DensityMatrix maximally_mixed(std::size_t dim);
  static DensityMatrix pure(const Ray& r);

  const ComplexMatrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

  /// Born weight tr(rho p).
  double probability(const Projection& p) const;
  double expectation(const ComplexMatrix& a) const;

 private:
  ComplexMatrix matrix_;
};

Projection meet(const Projection& p, const Projection& q, double tol = kDefaultTol);
Projection join(const Projection& p, const Projection& q, double tol = kDefaultTol);

struct SpectralAtom {
  double eigenvalue;
  Projection projection;
};

/// Eigenvalues in ascending order, one atom per cluster of eigenvalues with
/// gaps below kEigenClusterGap. Throws Error on non-self-adjoint input.
std::vector<SpectralAtom> spectral_atoms(const ComplexMatrix& a, double tol = kDefaultTol);

/// Eigenvalues of a self-adjoint matrix, ascending.
RealVector hermitian_eigenvalues(const ComplexMatrix& a);

/// f(a) through the spectral decomposition.
template <typename F>
ComplexMatrix spectral_apply(const ComplexMatrix& a, F&& f, double tol = kDefaultTol) {
  ComplexMatrix out = ComplexMatrix::Zero(a.rows(), a.cols());
  for (const auto& atom : spectral_atoms(a, tol)) {
    out += f(atom.eigenvalue) * atom.projection.matrix();
  }
  return out;
}

ComplexMatrix jordan_product(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
bool commutes(const ComplexMatrix& a, const ComplexMatrix& b, double tol = kDefaultTol);

/// True iff c = f(a) for some real function f, i.e. c is constant on every
/// spectral atom of a.
bool is_function_of(const ComplexMatrix& c, const ComplexMatrix& a, double tol = kDefaultTol);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Transpose of the second tensor factor of an operator on C^left (x) C^right.
ComplexMatrix partial_transpose_second(const ComplexMatrix& w, std::size_t left_dim,
                                       std::size_t right_dim);

/// Real orthonormal (Hilbert-Schmidt) basis of the n x n self-adjoint matrices:
/// n diagonal units, then symmetric and antisymmetric off-diagonal pairs.
std::vector<ComplexMatrix> hermitian_basis(std::size_t dim);

/// Coordinates of tr(x e_k) for each element e_k of hermitian_basis.
RealVector hermitian_coordinates(const ComplexMatrix& x);
ComplexMatrix from_hermitian_coordinates(const RealVector& coords, std::size_t dim);

/// Number of singular values above threshold * max(1, largest).
std::size_t numerical_rank(const RealMatrix& m, double threshold);

}  // namespace contextua
