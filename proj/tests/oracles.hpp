// Reference computations used to check the library. Each one is written from
// first principles and avoids the library routine it is compared against.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "contextua/contexts.hpp"

namespace oracle {

using contextua::ComplexMatrix;
using contextua::ComplexVector;
using contextua::RealMatrix;
using contextua::RealVector;

inline double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Columns spanning the range of a projection (eigenvalues above 1/2).
inline ComplexMatrix range_basis(const ComplexMatrix& p) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(p);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < p.rows(); ++k) {
    if (es.eigenvalues()(k) > 0.5) cols.push_back(k);
  }
  ComplexMatrix b(p.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) b.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(cols[k]);
  return b;
}

/// Orthogonal projection onto the column span of b.
inline ComplexMatrix span_projection(const ComplexMatrix& b, Eigen::Index n) {
  if (b.cols() == 0) return ComplexMatrix::Zero(n, n);
  Eigen::JacobiSVD<ComplexMatrix> svd(b, Eigen::ComputeThinU);
  Eigen::Index r = 0;
  const double top = svd.singularValues()(0);
  while (r < svd.singularValues().size() && svd.singularValues()(r) > 1e-9 * std::max(1.0, top)) ++r;
  const ComplexMatrix u = svd.matrixU().leftCols(r);
  return u * u.adjoint();
}

/// Projection onto range(p) ∩ range(q): vectors Bp x = Bq y, from the null
/// space of [Bp, -Bq].
inline ComplexMatrix intersection(const ComplexMatrix& p, const ComplexMatrix& q) {
  const ComplexMatrix bp = range_basis(p);
  const ComplexMatrix bq = range_basis(q);
  const Eigen::Index n = p.rows();
  if (bp.cols() == 0 || bq.cols() == 0) return ComplexMatrix::Zero(n, n);
  ComplexMatrix stacked(n, bp.cols() + bq.cols());
  stacked << bp, -bq;
  Eigen::JacobiSVD<ComplexMatrix> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index k = 0; k < stacked.cols(); ++k) {
    const double sv = k < s.size() ? s(k) : 0.0;
    if (sv < 1e-8) null_cols.push_back(k);
  }
  ComplexMatrix vecs(n, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t k = 0; k < null_cols.size(); ++k) {
    vecs.col(static_cast<Eigen::Index>(k)) = bp * svd.matrixV().col(null_cols[k]).head(bp.cols());
  }
  return span_projection(vecs, n);
}

/// Partial transpose on the second factor by explicit index swap.
inline ComplexMatrix partial_transpose(const ComplexMatrix& w, std::size_t da, std::size_t db) {
  ComplexMatrix out(w.rows(), w.cols());
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < db; ++j)
      for (std::size_t k = 0; k < da; ++k)
        for (std::size_t l = 0; l < db; ++l) {
          out(static_cast<Eigen::Index>(i * db + j), static_cast<Eigen::Index>(k * db + l)) =
              w(static_cast<Eigen::Index>(i * db + l), static_cast<Eigen::Index>(k * db + j));
        }
  return out;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline RealVector eigenvalues(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const ComplexMatrix& h) { return eigenvalues(h).minCoeff(); }

/// Bell numbers from the Bell triangle.
inline std::vector<std::uint64_t> bell_numbers(std::size_t count) {
  std::vector<std::uint64_t> out{1};
  std::vector<std::uint64_t> row{1};
  while (out.size() < count) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    out.push_back(next.front());
    row = std::move(next);
  }
  return out;
}

/// Pairs (a, b) with a < b and nothing strictly between, from a full order
/// relation leq[a][b].
inline std::vector<std::pair<std::size_t, std::size_t>> hasse_edges(const std::vector<std::vector<bool>>& leq) {
  const std::size_t n = leq.size();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || !leq[a][b]) continue;
      bool direct = true;
      for (std::size_t c = 0; c < n && direct; ++c) {
        if (c != a && c != b && leq[a][c] && leq[c][b]) direct = false;
      }
      if (direct) out.emplace_back(a, b);
    }
  std::sort(out.begin(), out.end());
  return out;
}

/// Order on contexts given as lists of atom matrices: a <= b iff every atom of
/// a is a sum of atoms of b.
inline bool coarser(const std::vector<ComplexMatrix>& a, const std::vector<ComplexMatrix>& b) {
  for (const auto& p : a) {
    ComplexMatrix sum = ComplexMatrix::Zero(p.rows(), p.cols());
    for (const auto& q : b) {
      if (max_abs(p * q - q) < 1e-8) sum += q;
    }
    if (max_abs(sum - p) > 1e-8) return false;
  }
  return true;
}

/// Exhaustive count of consistent atom choices over a catalog of maximal
/// contexts. A tuple (one atom per context) is consistent when, for every pair
/// of contexts and every projection that is a sum of atoms in both, the two
/// choices agree on lying under that projection. Stops at `cap` solutions.
struct ColoringCount {
  std::uint64_t solutions = 0;
  std::uint64_t tuples_checked = 0;
};

inline ColoringCount count_colorings(const std::vector<std::vector<ComplexMatrix>>& contexts,
                                     std::uint64_t cap = ~std::uint64_t{0}) {
  const std::size_t m = contexts.size();
  // constraints[i][j]: list of (mask_i, mask_j) with equal atom sums
  std::vector<std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>> constraints(
      m, std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>(m));
  auto subset_sum = [](const std::vector<ComplexMatrix>& atoms, std::uint32_t mask) {
    ComplexMatrix s = ComplexMatrix::Zero(atoms[0].rows(), atoms[0].cols());
    for (std::size_t k = 0; k < atoms.size(); ++k)
      if (mask & (1u << k)) s += atoms[k];
    return s;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto ni = static_cast<std::uint32_t>(contexts[i].size());
      const auto nj = static_cast<std::uint32_t>(contexts[j].size());
      for (std::uint32_t a = 1; a + 1 < (1u << ni); ++a)
        for (std::uint32_t b = 1; b + 1 < (1u << nj); ++b) {
          if (max_abs(subset_sum(contexts[i], a) - subset_sum(contexts[j], b)) < 1e-8) constraints[i][j].emplace_back(a, b);
        }
    }
  ColoringCount out;
  std::vector<std::size_t> pick(m, 0);
  while (true) {
    ++out.tuples_checked;
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i)
      for (std::size_t j = i + 1; j < m && ok; ++j)
        for (const auto& [a, b] : constraints[i][j]) {
          if (((a >> pick[i]) & 1u) != ((b >> pick[j]) & 1u)) {
            ok = false;
            break;
          }
        }
    if (ok && ++out.solutions >= cap) return out;
    std::size_t k = 0;
    while (k < m && ++pick[k] == contexts[k].size()) pick[k++] = 0;
    if (k == m) return out;
  }
}

/// Real-linear rank of a family of self-adjoint matrices, from the real and
/// imaginary parts of all entries.
inline std::size_t real_span_rank(const std::vector<ComplexMatrix>& ops) {
  if (ops.empty()) return 0;
  const Eigen::Index n = ops[0].rows();
  RealMatrix m(2 * n * n, static_cast<Eigen::Index>(ops.size()));
  for (std::size_t k = 0; k < ops.size(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        m(i * n + j, static_cast<Eigen::Index>(k)) = ops[k](i, j).real();
        m(n * n + i * n + j, static_cast<Eigen::Index>(k)) = ops[k](i, j).imag();
      }
  }
  Eigen::FullPivLU<RealMatrix> lu(m);
  lu.setThreshold(1e-9);
  return static_cast<std::size_t>(lu.rank());
}

/// Pauli-type binary observable p0 - p1 from two orthonormal rays.
inline ComplexMatrix binary_observable(const ComplexVector& plus, const ComplexVector& minus) {
  const ComplexVector u = plus.normalized();
  const ComplexVector v = minus.normalized();
  return u * u.adjoint() - v * v.adjoint();
}

/// Largest eigenvalue of the CHSH operator a0 b0 + a0 b1 + a1 b0 - a1 b1.
inline double chsh_max_eigenvalue(const ComplexMatrix& a0, const ComplexMatrix& a1, const ComplexMatrix& b0,
                                  const ComplexMatrix& b1) {
  const ComplexMatrix op = kron(a0, b0) + kron(a0, b1) + kron(a1, b0) - kron(a1, b1);
  return eigenvalues(op).maxCoeff();
}

/// Best deterministic +-1 assignment for the CHSH combination.
inline int chsh_classical_max(std::size_t* strategies = nullptr) {
  int best = -100;
  std::size_t count = 0;
  for (int a0 : {-1, 1})
    for (int a1 : {-1, 1})
      for (int b0 : {-1, 1})
        for (int b1 : {-1, 1}) {
          ++count;
          best = std::max(best, a0 * b0 + a0 * b1 + a1 * b0 - a1 * b1);
        }
  if (strategies) *strategies = count;
  return best;
}

}  // namespace oracle
