#include "contextua/wigner.hpp"

#include <algorithm>
#include <cmath>

namespace contextua {

SymmetryOp::SymmetryOp(SymmetryKind kind, ComplexMatrix u, double tol) : kind_(kind), u_(std::move(u)) {
  if (!is_square(u_)) throw Error("symmetry: matrix must be square");
  const auto n = u_.rows();
  if (max_abs(u_.adjoint() * u_ - ComplexMatrix::Identity(n, n)) > tol) throw Error("symmetry: matrix is not unitary");
}

ComplexMatrix SymmetryOp::apply(const ComplexMatrix& x) const {
  if (kind_ == SymmetryKind::unitary) return u_ * x * u_.adjoint();
  return u_ * x.transpose() * u_.adjoint();
}

Projection SymmetryOp::apply(const Projection& p, double tol) const {
  ComplexMatrix m = apply(p.matrix());
  m = 0.5 * (m + m.adjoint()).eval();
  if (!is_projection(m, tol)) throw Error("symmetry: image of an atom is not a projection");
  return Projection(std::move(m), tol);
}

SymmetryOp SymmetryOp::then(const SymmetryOp& next) const {
  // next(this(x)): the unitary parts compose, with the inner one conjugated
  // when the outer map is antiunitary.
  const ComplexMatrix inner = next.kind_ == SymmetryKind::antiunitary ? ComplexMatrix(u_.conjugate()) : u_;
  const bool anti = (kind_ == SymmetryKind::antiunitary) != (next.kind_ == SymmetryKind::antiunitary);
  return SymmetryOp(anti ? SymmetryKind::antiunitary : SymmetryKind::unitary, next.u_ * inner, 1e-8);
}

namespace {

std::optional<NodeId> image_node(const ContextPoset& source, NodeId i, const SymmetryOp& s,
                                 const ContextPoset& target) {
  std::vector<ProjectionId> ids;
  for (ProjectionId p : source.atoms(i)) {
    auto id = target.registry().find(s.apply(source.registry().at(p)));
    if (!id) return std::nullopt;
    ids.push_back(*id);
  }
  return target.find_atoms(std::move(ids));
}

}  // namespace

ConjugatedPoset conjugate_poset(const ContextPoset& poset, const SymmetryOp& s) {
  if (s.dim() != poset.dim()) throw Error("conjugate_poset: dimension mismatch");
  std::vector<Context> catalog;
  for (std::size_t k = 0; k < poset.catalog_size(); ++k) {
    std::vector<Projection> atoms;
    for (ProjectionId p : poset.atoms(poset.catalog_node(k))) atoms.push_back(s.apply(poset.registry().at(p)));
    catalog.emplace_back(std::move(atoms), 1e-8);
  }
  ConjugatedPoset out{generate_poset(poset.dim(), catalog, poset.tol()), {}};
  for (NodeId i = 0; i < poset.size(); ++i) {
    auto j = image_node(poset, i, s, out.image);
    if (!j) throw Error("conjugate_poset: node " + std::to_string(i) + " has no image");
    out.map.node_map.push_back(*j);
  }
  return out;
}

std::optional<PosetMap> induced_automorphism(const ContextPoset& poset, const SymmetryOp& s) {
  if (s.dim() != poset.dim()) throw Error("induced_automorphism: dimension mismatch");
  PosetMap m;
  for (NodeId i = 0; i < poset.size(); ++i) {
    auto j = image_node(poset, i, s, poset);
    if (!j) return std::nullopt;
    m.node_map.push_back(*j);
  }
  return m;
}

bool is_order_isomorphism(const ContextPoset& source, const ContextPoset& target, const PosetMap& m) {
  const std::size_t n = source.size();
  if (target.size() != n || m.node_map.size() != n) return false;
  std::vector<char> hit(n, 0);
  for (NodeId j : m.node_map) {
    if (j >= n || hit[j]) return false;
    hit[j] = 1;
  }
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 0; b < n; ++b) {
      if (source.leq(a, b) != target.leq(m.node_map[a], m.node_map[b])) return false;
    }
  }
  return true;
}

bool trivial_presheaf_automorphism(const ContextPoset& poset, const PosetMap& m) {
  return is_order_isomorphism(poset, poset, m);
}

bool trivial_presheaf_automorphism(const ContextPoset& source, const ContextPoset& target, const PosetMap& m) {
  return is_order_isomorphism(source, target, m);
}

JordanReport jordan_check(const SymmetryOp& s, const std::vector<std::pair<ComplexMatrix, ComplexMatrix>>& samples,
                          double tol) {
  JordanReport report;
  for (const auto& [a, b] : samples) {
    const ComplexMatrix fa = s.apply(a);
    const ComplexMatrix fb = s.apply(b);
    const double jordan = max_abs(s.apply(jordan_product(a, b)) - jordan_product(fa, fb));
    report.max_jordan_residual = std::max(report.max_jordan_residual, jordan);
    if (jordan > tol) report.jordan_preserved = false;

    const ComplexMatrix image_comm = s.apply(commutator(a, b));
    const ComplexMatrix comm_image = commutator(fa, fb);
    if (max_abs(comm_image) <= tol) {
      report.commutator_signs.push_back(0);
      continue;
    }
    const double plus = max_abs(image_comm - comm_image);
    const double minus = max_abs(image_comm + comm_image);
    report.commutator_signs.push_back(plus <= minus ? 1 : -1);
    report.max_commutator_residual = std::max(report.max_commutator_residual, std::min(plus, minus));
  }
  return report;
}

double transition_probability_defect(const SymmetryOp& s, const std::vector<Projection>& rank_one) {
  double worst = 0.0;
  std::vector<ComplexMatrix> images;
  for (const auto& p : rank_one) images.push_back(s.apply(p.matrix()));
  for (std::size_t i = 0; i < rank_one.size(); ++i) {
    for (std::size_t j = 0; j < rank_one.size(); ++j) {
      const double before = (rank_one[i].matrix() * rank_one[j].matrix()).trace().real();
      const double after = (images[i] * images[j]).trace().real();
      worst = std::max(worst, std::abs(after - before));
    }
  }
  return worst;
}

}  // namespace contextua
