// Symmetries of the context poset induced by unitary and antiunitary
// conjugation, and the Jordan-algebra checks that separate the two kinds.
#pragma once

#include <optional>
#include <vector>

#include "contextua/contexts.hpp"

namespace contextua {

enum class SymmetryKind { unitary, antiunitary };

/// Conjugation by u (unitary) or by u composed with complex conjugation in
/// the standard basis (antiunitary).
class SymmetryOp {
 public:
  SymmetryOp(SymmetryKind kind, ComplexMatrix u, double tol = 1e-9);

  SymmetryKind kind() const { return kind_; }
  const ComplexMatrix& matrix() const { return u_; }
  std::size_t dim() const { return static_cast<std::size_t>(u_.rows()); }

  /// Action on operators. On self-adjoint x this is u x u* or u conj(x) u*;
  /// general x is mapped by the complex-linear extension from the
  /// self-adjoint part, which for the antiunitary kind is x -> u x^T u*.
  ComplexMatrix apply(const ComplexMatrix& x) const;
  Projection apply(const Projection& p, double tol = 1e-8) const;

  /// `next` after this.
  SymmetryOp then(const SymmetryOp& next) const;

 private:
  SymmetryKind kind_;
  ComplexMatrix u_;
};

struct PosetMap {
  std::vector<NodeId> node_map;
};

struct ConjugatedPoset {
  ContextPoset image;
  PosetMap map;
};

/// Conjugates every catalog context, regenerates the poset from the images
/// and matches nodes by atom identity. Throws Error if an image atom fails the
/// projection check or a node has no image.
ConjugatedPoset conjugate_poset(const ContextPoset& poset, const SymmetryOp& s);

/// Node map of the symmetry on the poset itself, when every node's image is a
/// node of the same poset.
std::optional<PosetMap> induced_automorphism(const ContextPoset& poset, const SymmetryOp& s);

/// Bijective, order-preserving and order-reflecting between the two posets.
bool is_order_isomorphism(const ContextPoset& source, const ContextPoset& target, const PosetMap& m);

/// Automorphisms of the trivial presheaf have identity components, so they
/// are exactly the order automorphisms of the base.
bool trivial_presheaf_automorphism(const ContextPoset& poset, const PosetMap& m);
bool trivial_presheaf_automorphism(const ContextPoset& source, const ContextPoset& target, const PosetMap& m);

struct JordanReport {
  double max_jordan_residual = 0.0;
  double max_commutator_residual = 0.0;
  /// +1 if the commutator is preserved, -1 if reversed, 0 when [a, b] = 0.
  std::vector<int> commutator_signs;
  bool jordan_preserved = true;
};

JordanReport jordan_check(const SymmetryOp& s,
                          const std::vector<std::pair<ComplexMatrix, ComplexMatrix>>& samples,
                          double tol = 1e-9);

/// max |tr(s(p) s(q)) - tr(p q)| over all pairs.
double transition_probability_defect(const SymmetryOp& s, const std::vector<Projection>& rank_one);

}  // namespace contextua
