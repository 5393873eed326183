#include "doctest.h"

#include "contextua/opalg.hpp"
#include "contextua/random.hpp"
#include "oracles.hpp"

using namespace contextua;

namespace {

Projection ray_projection(std::initializer_list<Complex> entries) {
  ComplexVector v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index k = 0;
  for (auto e : entries) v(k++) = e;
  return projection_from_ray(Ray(v));
}

Projection span_of(const std::vector<Projection>& ps) {
  ComplexMatrix sum = ComplexMatrix::Zero(static_cast<Eigen::Index>(ps[0].dim()), static_cast<Eigen::Index>(ps[0].dim()));
  for (const auto& p : ps) sum += p.matrix();
  return Projection(sum);
}

}  // namespace

TEST_CASE("projection validation") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2) * 0.5;
  CHECK_THROWS_AS(Projection{m}, Error);
  ComplexMatrix nonsa(2, 2);
  nonsa << 1, 1, 0, 0;
  CHECK_THROWS_AS(Projection{nonsa}, Error);
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Projection{bad}, Error);
  CHECK(Projection::identity(3).rank() == 3);
  CHECK(Projection::zero(3).is_zero());
  CHECK(Projection::identity(3).complement().is_zero());
}

TEST_CASE("degenerate ray") {
  CHECK_THROWS_AS(Ray(ComplexVector::Zero(3)), Error);
  ComplexVector v(2);
  v << Complex(0, 2), Complex(0, 2);
  Ray r(v);
  CHECK(r.vector().norm() == doctest::Approx(1.0));
  ComplexVector w(2);
  w << 1, 1;
  CHECK(r.equivalent(Ray(w)));
}

TEST_CASE("meet and join of rays") {
  const auto e0 = ray_projection({1, 0, 0});
  const auto e1 = ray_projection({0, 1, 0});
  // meet of distinct rays is zero, join is their plane
  CHECK(meet(e0, e1).is_zero());
  const auto plane = join(e0, e1);
  CHECK(plane.rank() == 2);
  CHECK(oracle::max_abs(plane.matrix() - span_of({e0, e1}).matrix()) < 1e-12);
  // meet with the identity and the zero projection
  CHECK(meet(e0, Projection::identity(3)).approx_equal(e0));
  CHECK(join(e0, Projection::zero(3)).approx_equal(e0));
}

TEST_CASE("meet of random planes matches the subspace intersection oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 3);
    const ComplexMatrix u = random_unitary(n, rng);
    const ComplexMatrix v = random_unitary(n, rng);
    // p spans u's first k columns, q spans the shared column u0 plus v's columns
    const Eigen::Index k = static_cast<Eigen::Index>(n) - 1;
    ComplexMatrix bp = u.leftCols(k);
    ComplexMatrix bq(static_cast<Eigen::Index>(n), 2);
    bq.col(0) = u.col(0);
    bq.col(1) = v.col(0);
    const Projection p(oracle::span_projection(bp, static_cast<Eigen::Index>(n)), 1e-8);
    const Projection q(oracle::span_projection(bq, static_cast<Eigen::Index>(n)), 1e-8);
    const ComplexMatrix expected = oracle::intersection(p.matrix(), q.matrix());
    const Projection got = meet(p, q);
    CHECK(oracle::max_abs(got.matrix() - expected) < 1e-8);
    // De Morgan and absorption
    CHECK(join(p, q).complement().approx_equal(meet(p.complement(), q.complement()), 1e-8));
    CHECK(meet(p, join(p, q)).approx_equal(p, 1e-8));
    CHECK(got.leq(p, 1e-8));
    CHECK(got.leq(q, 1e-8));
  }
}

TEST_CASE("spectral atoms cluster degenerate eigenvalues") {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a(0, 0) = 2.0;
  a(1, 1) = 2.0;
  a(2, 2) = -1.0;
  const auto atoms = spectral_atoms(a);
  REQUIRE(atoms.size() == 2);
  CHECK(atoms[0].eigenvalue == doctest::Approx(-1.0));
  CHECK(atoms[1].projection.rank() == 2);
  CHECK_THROWS_AS(spectral_atoms(ComplexMatrix::Random(3, 3)), Error);

  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix h = random_hermitian(4, rng);
    ComplexMatrix rebuilt = ComplexMatrix::Zero(4, 4);
    double last = -1e300;
    for (const auto& s : spectral_atoms(h)) {
      CHECK(s.eigenvalue > last);
      last = s.eigenvalue;
      rebuilt += s.eigenvalue * s.projection.matrix();
    }
    CHECK(oracle::max_abs(rebuilt - h) < 1e-10);
    const RealVector ev = oracle::eigenvalues(h);
    CHECK((hermitian_eigenvalues(h) - ev).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("functional calculus") {
  Rng rng(5);
  const ComplexMatrix h = random_hermitian(3, rng);
  const ComplexMatrix sq = spectral_apply(h, [](double x) { return x * x; });
  CHECK(oracle::max_abs(sq - h * h) < 1e-10);
  CHECK(is_function_of(sq, h));
  CHECK(commutes(sq, h));
  const ComplexMatrix other = random_hermitian(3, rng);
  CHECK_FALSE(commutes(h, other));
  CHECK_FALSE(is_function_of(other, h));
}

TEST_CASE("jordan product and commutator") {
  Rng rng(8);
  const ComplexMatrix a = random_hermitian(3, rng);
  const ComplexMatrix b = random_hermitian(3, rng);
  CHECK(oracle::max_abs(jordan_product(a, b) - 0.5 * (a * b + b * a)) < 1e-14);
  CHECK(oracle::max_abs(commutator(a, b) - (a * b - b * a)) < 1e-14);
  CHECK(oracle::max_abs(jordan_product(a, b) - jordan_product(b, a)) < 1e-14);
}

TEST_CASE("kron and partial transpose against index oracles") {
  Rng rng(21);
  for (auto [da, db] : {std::pair<std::size_t, std::size_t>{2, 2}, {2, 3}, {3, 2}, {3, 3}}) {
    const ComplexMatrix a = random_ginibre(da, da, rng);
    const ComplexMatrix b = random_ginibre(db, db, rng);
    CHECK(oracle::max_abs(kron(a, b) - oracle::kron(a, b)) < 1e-14);
    const ComplexMatrix w = random_ginibre(da * db, da * db, rng);
    CHECK(oracle::max_abs(partial_transpose_second(w, da, db) - oracle::partial_transpose(w, da, db)) < 1e-14);
    // (a ⊗ b)^{T_B} = a ⊗ b^T
    CHECK(oracle::max_abs(partial_transpose_second(kron(a, b), da, db) - oracle::kron(a, b.transpose())) < 1e-13);
  }
  CHECK_THROWS_AS(partial_transpose_second(ComplexMatrix::Identity(5, 5), 2, 2), Error);
}

TEST_CASE("hermitian basis is orthonormal and coordinates invert") {
  for (std::size_t n : {1u, 2u, 3u, 4u}) {
    const auto basis = hermitian_basis(n);
    REQUIRE(basis.size() == n * n);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      CHECK(is_self_adjoint(basis[i]));
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const Complex ip = (basis[i] * basis[j]).trace();
        CHECK(std::abs(ip - Complex(i == j ? 1.0 : 0.0, 0.0)) < 1e-14);
      }
    }
    Rng rng(n);
    const ComplexMatrix h = random_hermitian(n, rng);
    const RealVector c = hermitian_coordinates(h);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      CHECK(c(static_cast<Eigen::Index>(k)) == doctest::Approx((h * basis[k]).trace().real()).epsilon(1e-12));
    }
    CHECK(oracle::max_abs(from_hermitian_coordinates(c, n) - h) < 1e-13);
  }
}

TEST_CASE("density matrices") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{m}, Error);  // trace 2
  ComplexMatrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(DensityMatrix{neg}, Error);
  const auto mixed = DensityMatrix::maximally_mixed(4);
  CHECK(mixed.probability(Projection::identity(4)) == doctest::Approx(1.0));
  Rng rng(2);
  const auto rho = random_density(3, rng);
  CHECK(oracle::min_eigenvalue(rho.matrix()) > -1e-12);
  CHECK(rho.matrix().trace().real() == doctest::Approx(1.0));
}

TEST_CASE("random unitaries are unitary") {
  Rng rng(4);
  for (std::size_t n : {2u, 3u, 5u}) {
    const ComplexMatrix u = random_unitary(n, rng);
    CHECK(oracle::max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())) < 1e-12);
  }
}
