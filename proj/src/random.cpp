#include "contextua/random.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/QR>

namespace contextua {

ComplexMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  }
  return g;
}

ComplexMatrix random_unitary(std::size_t dim, Rng& rng) {
  const ComplexMatrix g = random_ginibre(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

ComplexMatrix random_hermitian(std::size_t dim, Rng& rng) {
  const ComplexMatrix g = random_ginibre(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

DensityMatrix random_density(std::size_t dim, Rng& rng) {
  const ComplexMatrix g = random_ginibre(dim, dim, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

ComplexMatrix random_hermitian_trace_one(std::size_t dim, Rng& rng) {
  while (true) {
    ComplexMatrix h = random_hermitian(dim, rng);
    const double tr = h.trace().real();
    if (std::abs(tr) < 0.1) continue;
    return h / tr;
  }
}

Context basis_context(const ComplexMatrix& unitary) {
  std::vector<Projection> atoms;
  for (Eigen::Index k = 0; k < unitary.cols(); ++k) atoms.push_back(projection_from_ray(Ray(unitary.col(k))));
  return Context(std::move(atoms), 1e-8);
}

std::vector<Context> random_basis_catalog(std::size_t dim, std::size_t count, Rng& rng) {
  std::vector<Context> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(basis_context(random_unitary(dim, rng)));
  return out;
}

std::vector<Context> mutually_unbiased_bases(std::size_t d) {
  if (d < 2) throw Error("mutually_unbiased_bases: dimension must be at least 2");
  for (std::size_t f = 2; f * f <= d; ++f) {
    if (d % f == 0) throw Error("mutually_unbiased_bases: dimension must be prime");
  }
  const auto n = static_cast<Eigen::Index>(d);
  std::vector<Context> out;
  out.push_back(basis_context(ComplexMatrix::Identity(n, n)));
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t a = 0; a < d; ++a) {
    ComplexMatrix u(n, n);
    for (Eigen::Index b = 0; b < n; ++b) {
      for (Eigen::Index j = 0; j < n; ++j) {
        // |e_b^a>_j = omega^{a j^2 + b j} / sqrt(d); for d = 2 use i^{a j} instead
        double phase = 0.0;
        const auto jj = static_cast<double>(j);
        if (d == 2) {
          phase = two_pi * (static_cast<double>(a) * jj / 4.0 + static_cast<double>(b) * jj / 2.0);
        } else {
          phase = two_pi * (static_cast<double>(a) * jj * jj + static_cast<double>(b) * jj) / static_cast<double>(d);
        }
        u(j, b) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), phase);
      }
    }
    out.push_back(basis_context(u));
  }
  return out;
}

}  // namespace contextua
