// Contexts (maximal-or-not commutative subalgebras, represented by their atoms)
// and finite down-closed fragments of the context poset.
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "contextua/opalg.hpp"

namespace contextua {

using NodeId = std::size_t;
using ProjectionId = std::size_t;

/// Orthogonal family of nonzero projections summing to the identity.
class Context {
 public:
  Context() = default;

  /// Throws Error unless the atoms are nonzero, pairwise orthogonal and
  /// complete within tol.
  Context(std::vector<Projection> atoms, double tol = kDefaultTol);

  static Context trivial(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Projection>& atoms() const { return atoms_; }
  const Projection& atom(std::size_t i) const { return atoms_.at(i); }
  bool is_maximal() const { return atoms_.size() == dim_; }

 private:
  std::size_t dim_ = 0;
  std::vector<Projection> atoms_;
};

/// Smallest context containing every observable: the common refinement of
/// their spectral atoms. Throws Error naming the first non-commuting pair.
Context context_from_observables(std::span<const ComplexMatrix> ops, double tol = kDefaultTol);

/// Grid spacing below which distinct projections are rejected as ambiguous.
inline constexpr double kCanonicalGrid = 1e-6;

/// Interns projections so that equal projections in different contexts share
/// one id.
class ProjectionRegistry {
 public:
  explicit ProjectionRegistry(std::size_t dim = 0, double tol = kDefaultTol) : dim_(dim), tol_(tol) {}

  /// Returns the id of an existing projection within tol, or registers p.
  /// Throws NearDuplicateError if p is within kCanonicalGrid of a registered
  /// projection without being equal to it.
  ProjectionId intern(const Projection& p);
  std::optional<ProjectionId> find(const Projection& p) const;

  const Projection& at(ProjectionId id) const { return projections_.at(id); }
  const std::string& key(ProjectionId id) const { return keys_.at(id); }
  std::size_t size() const { return projections_.size(); }
  std::size_t dim() const { return dim_; }
  double tol() const { return tol_; }

 private:
  std::size_t dim_;
  double tol_;
  std::vector<Projection> projections_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::vector<ProjectionId>> by_key_;
};

struct PosetNode {
  std::vector<ProjectionId> atoms;        ///< in construction order
  std::vector<ProjectionId> sorted_atoms;  ///< identity of the context
  std::vector<std::string> provenance;
};

/// Finite fragment of the context poset: the down-closure of a catalog of
/// contexts (every coarsening of every catalog context), which contains all
/// pairwise meets and the trivial context. Immutable after construction.
class ContextPoset {
 public:
  std::size_t dim() const { return registry_.dim(); }
  double tol() const { return registry_.tol(); }
  std::size_t size() const { return nodes_.size(); }

  const ProjectionRegistry& registry() const { return registry_; }
  const PosetNode& node(NodeId id) const;
  const std::vector<ProjectionId>& atoms(NodeId id) const { return node(id).atoms; }
  std::size_t atom_count(NodeId id) const { return node(id).atoms.size(); }
  Context context(NodeId id) const;

  /// Node i is a subcontext of node j. Throws Error on an unknown id.
  bool leq(NodeId i, NodeId j) const;

  /// Transitive reduction as (smaller, larger) pairs.
  const std::vector<std::pair<NodeId, NodeId>>& covers() const { return covers_; }

  NodeId trivial() const { return trivial_; }
  std::vector<NodeId> maximal_nodes() const;
  std::optional<NodeId> find(const Context& c) const;
  std::optional<NodeId> find_atoms(std::vector<ProjectionId> atom_ids) const;

  /// Node whose algebra is the intersection of the two algebras.
  NodeId meet(NodeId i, NodeId j) const;

  /// For small <= large: entry k is the index of the atom of `small` that
  /// dominates atom k of `large`.
  std::vector<std::size_t> restriction_map(NodeId small, NodeId large) const;

  /// Registry-level order p <= q between interned projections.
  bool projection_leq(ProjectionId p, ProjectionId q) const;

  /// (node, atom index) pairs in which the projection occurs as an atom.
  const std::vector<std::pair<NodeId, std::size_t>>& occurrences(ProjectionId p) const {
    return occurrences_.at(p);
  }

  /// All strictly increasing chains i < j < k.
  std::vector<std::array<NodeId, 3>> chains3() const;

  /// Number of catalog contexts the poset was generated from.
  std::size_t catalog_size() const { return catalog_nodes_.size(); }
  /// Node holding catalog context k.
  NodeId catalog_node(std::size_t k) const { return catalog_nodes_.at(k); }

 private:
  friend ContextPoset generate_poset(std::size_t dim, std::span<const Context> catalog, double tol);

  ProjectionRegistry registry_;
  std::vector<PosetNode> nodes_;
  std::map<std::vector<ProjectionId>, NodeId> index_;
  std::vector<std::vector<char>> projection_leq_;
  std::vector<std::vector<char>> order_;
  std::vector<std::pair<NodeId, NodeId>> covers_;
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> occurrences_;
  NodeId trivial_ = 0;
  std::vector<NodeId> catalog_nodes_;
};

/// Largest atom count for which a catalog context's coarsenings are expanded.
inline constexpr std::size_t kMaxDownsetAtoms = 10;

/// Throws Error on mixed dimensions or contexts with more than
/// kMaxDownsetAtoms atoms.
ContextPoset generate_poset(std::size_t dim, std::span<const Context> catalog, double tol = kDefaultTol);

/// All set partitions of {0..n-1} as restricted growth strings.
std::vector<std::vector<std::size_t>> set_partitions(std::size_t n);

/// DOT digraph of the transitive reduction, drawn from larger to smaller
/// contexts. Node provenance is written as "//" comments.
std::string export_dot(const ContextPoset& poset);

/// Shape of a presheaf whose component at V is indexed by the atoms of V and
/// whose restriction along i <= j is a map atoms(j) -> atoms(i).
struct PresheafShape {
  std::vector<std::size_t> component_size;
  std::map<std::pair<NodeId, NodeId>, std::vector<std::size_t>> restriction;
};

PresheafShape atom_presheaf(const ContextPoset& poset);

/// Number of chains i < j < k along which the restriction maps fail to compose.
std::size_t functoriality_violations(const ContextPoset& poset, const PresheafShape& shape);

}  // namespace contextua
