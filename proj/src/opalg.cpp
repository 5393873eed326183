#include "contextua/opalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace contextua {

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_square(const ComplexMatrix& m) { return m.rows() == m.cols() && m.rows() > 0; }

bool is_finite(const ComplexMatrix& m) { return m.allFinite(); }

bool is_self_adjoint(const ComplexMatrix& m, double tol) {
  return is_square(m) && max_abs(m - m.adjoint()) <= tol;
}

bool is_projection(const ComplexMatrix& m, double tol) {
  if (!is_square(m) || !is_finite(m)) return false;
  return is_self_adjoint(m, tol) && max_abs(m * m - m) <= tol;
}

// ---------------------------------------------------------------------------
// Projection

Projection::Projection(ComplexMatrix m, double tol) : matrix_(std::move(m)) {
  if (!is_projection(matrix_, tol)) throw Error("matrix is not a projection within tolerance");
  const double tr = matrix_.trace().real();
  rank_ = static_cast<std::size_t>(std::llround(std::max(0.0, tr)));
}

Projection Projection::zero(std::size_t dim) {
  Projection p;
  p.matrix_ = ComplexMatrix::Zero(dim, dim);
  p.rank_ = 0;
  return p;
}

Projection Projection::identity(std::size_t dim) {
  Projection p;
  p.matrix_ = ComplexMatrix::Identity(dim, dim);
  p.rank_ = dim;
  return p;
}

Projection Projection::complement() const {
  Projection p;
  p.matrix_ = ComplexMatrix::Identity(matrix_.rows(), matrix_.cols()) - matrix_;
  p.rank_ = dim() - rank_;
  return p;
}

bool Projection::leq(const Projection& other, double tol) const {
  return max_abs(other.matrix_ * matrix_ - matrix_) <= tol;
}

bool Projection::orthogonal_to(const Projection& other, double tol) const {
  return max_abs(matrix_ * other.matrix_) <= tol;
}

bool Projection::approx_equal(const Projection& other, double tol) const {
  return dim() == other.dim() && max_abs(matrix_ - other.matrix_) <= tol;
}

namespace {

double round_to_grid(double x) {
  const double scale = std::pow(10.0, kKeyDecimals);
  double r = std::round(x * scale) / scale;
  return r == 0.0 ? 0.0 : r;  // no "-0"
}

}  // namespace

std::string Projection::key() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(matrix_.size()) * 12);
  char buf[64];
  for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
      const Complex z = matrix_(i, j);
      std::snprintf(buf, sizeof buf, "%.*f,%.*f;", kKeyDecimals, round_to_grid(z.real()),
                    kKeyDecimals, round_to_grid(z.imag()));
      out += buf;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ray

Ray::Ray(const ComplexVector& v) {
  const double norm = v.norm();
  if (v.size() == 0 || !(norm > 1e-300) || !std::isfinite(norm)) throw Error("degenerate ray");
  vector_ = v / norm;
}

bool Ray::equivalent(const Ray& other, double tol) const {
  if (dim() != other.dim()) return false;
  return std::abs(std::abs(vector_.dot(other.vector_)) - 1.0) <= tol;
}

ComplexVector Ray::canonical_vector() const {
  Eigen::Index idx = 0;
  vector_.cwiseAbs().maxCoeff(&idx);
  const Complex z = vector_(idx);
  return vector_ * (std::abs(z) / z);
}

Projection projection_from_ray(const Ray& r) {
  if (r.dim() == 0) throw Error("degenerate ray");
  const ComplexVector& v = r.vector();
  return Projection(v * v.adjoint());
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(ComplexMatrix m, double tol) : matrix_(std::move(m)) {
  if (!is_self_adjoint(matrix_, tol)) throw Error("density matrix must be self-adjoint");
  if (std::abs(matrix_.trace().real() - 1.0) > tol) throw Error("density matrix must have unit trace");
  if (hermitian_eigenvalues(matrix_).minCoeff() < -tol) throw Error("density matrix must be positive semidefinite");
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return DensityMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Ray& r) {
  return DensityMatrix(projection_from_ray(r).matrix());
}

double DensityMatrix::probability(const Projection& p) const { return (matrix_ * p.matrix()).trace().real(); }

double DensityMatrix::expectation(const ComplexMatrix& a) const { return (matrix_ * a).trace().real(); }

// ---------------------------------------------------------------------------
// Lattice operations

namespace {

// Projection onto the span of eigenvectors of a PSD matrix with eigenvalue <= tol.
Projection kernel_projection(const ComplexMatrix& psd, double tol) {
  const auto n = psd.rows();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(psd);
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (es.eigenvalues()(k) <= tol) {
      const ComplexVector v = es.eigenvectors().col(k);
      out += v * v.adjoint();
    }
  }
  return Projection(out, std::max(tol, 1e-9));
}

}  // namespace

Projection meet(const Projection& p, const Projection& q, double tol) {
  if (p.dim() != q.dim()) throw Error("meet: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(p.dim());
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  ComplexMatrix m = (id - p.matrix()) + (id - q.matrix());
  m = 0.5 * (m + m.adjoint()).eval();
  return kernel_projection(m, tol);
}

Projection join(const Projection& p, const Projection& q, double tol) {
  return meet(p.complement(), q.complement(), tol).complement();
}

// ---------------------------------------------------------------------------
// Spectral calculus

RealVector hermitian_eigenvalues(const ComplexMatrix& a) {
  const ComplexMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

std::vector<SpectralAtom> spectral_atoms(const ComplexMatrix& a, double tol) {
  if (!is_square(a)) throw Error("spectral_atoms: matrix must be square");
  if (!is_self_adjoint(a, tol)) throw Error("spectral_atoms: matrix is not self-adjoint");
  const ComplexMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  const auto n = h.rows();

  std::vector<SpectralAtom> atoms;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && vals(end) - vals(end - 1) < kEigenClusterGap) ++end;
    ComplexMatrix proj = ComplexMatrix::Zero(n, n);
    double sum = 0.0;
    for (Eigen::Index k = start; k < end; ++k) {
      const ComplexVector v = vecs.col(k);
      proj += v * v.adjoint();
      sum += vals(k);
    }
    atoms.push_back({sum / static_cast<double>(end - start), Projection(proj, std::max(tol, 1e-9))});
    start = end;
  }
  return atoms;
}

ComplexMatrix jordan_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("jordan_product: dimension mismatch");
  return 0.5 * (a * b + b * a);
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

bool commutes(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return max_abs(commutator(a, b)) <= tol;
}

bool is_function_of(const ComplexMatrix& c, const ComplexMatrix& a, double tol) {
  if (c.rows() != a.rows() || !is_self_adjoint(c, tol)) return false;
  ComplexMatrix rebuilt = ComplexMatrix::Zero(c.rows(), c.cols());
  for (const auto& atom : spectral_atoms(a, tol)) {
    const ComplexMatrix& p = atom.projection.matrix();
    const double value = (p * c).trace().real() / static_cast<double>(atom.projection.rank());
    rebuilt += value * p;
  }
  // c must equal sum_i c_i p_i; this also forces [c, a] = 0.
  return max_abs(rebuilt - c) <= std::max(tol, 1e-9) * 10.0;
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

ComplexMatrix partial_transpose_second(const ComplexMatrix& w, std::size_t left_dim, std::size_t right_dim) {
  const auto n1 = static_cast<Eigen::Index>(left_dim);
  const auto n2 = static_cast<Eigen::Index>(right_dim);
  if (w.rows() != n1 * n2 || w.cols() != n1 * n2) throw Error("partial_transpose_second: dimension mismatch");
  ComplexMatrix out(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n1; ++j) {
      out.block(i * n2, j * n2, n2, n2) = w.block(i * n2, j * n2, n2, n2).transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Real parametrization of self-adjoint matrices

std::vector<ComplexMatrix> hermitian_basis(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  const double r = 1.0 / std::numbers::sqrt2;
  std::vector<ComplexMatrix> basis;
  basis.reserve(dim * dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(std::move(e));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      ComplexMatrix s = ComplexMatrix::Zero(n, n);
      s(i, j) = r;
      s(j, i) = r;
      basis.push_back(std::move(s));
      ComplexMatrix t = ComplexMatrix::Zero(n, n);
      t(i, j) = Complex(0.0, r);
      t(j, i) = Complex(0.0, -r);
      basis.push_back(std::move(t));
    }
  }
  return basis;
}

RealVector hermitian_coordinates(const ComplexMatrix& x) {
  const auto n = x.rows();
  RealVector out(n * n);
  const double r = 1.0 / std::numbers::sqrt2;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) out(k++) = x(i, i).real();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      // tr(x s_ij) and tr(x t_ij) for the basis elements above
      out(k++) = r * (x(i, j) + x(j, i)).real();
      out(k++) = r * (x(i, j).imag() - x(j, i).imag());
    }
  }
  return out;
}

ComplexMatrix from_hermitian_coordinates(const RealVector& coords, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (coords.size() != n * n) throw Error("from_hermitian_coordinates: size mismatch");
  const double r = 1.0 / std::numbers::sqrt2;
  ComplexMatrix x = ComplexMatrix::Zero(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) x(i, i) = coords(k++);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double sym = coords(k++);
      const double anti = coords(k++);
      x(i, j) += Complex(r * sym, r * anti);
      x(j, i) += Complex(r * sym, -r * anti);
    }
  }
  return x;
}

std::size_t numerical_rank(const RealMatrix& m, double threshold) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<RealMatrix> svd(m);
  const auto& sv = svd.singularValues();
  const double cut = threshold * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  return rank;
}

}  // namespace contextua
