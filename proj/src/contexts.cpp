#include "contextua/contexts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace contextua {

// ---------------------------------------------------------------------------
// Context

Context::Context(std::vector<Projection> atoms, double tol) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw Error("context needs at least one atom");
  dim_ = atoms_.front().dim();
  const auto n = static_cast<Eigen::Index>(dim_);
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].dim() != dim_) throw Error("context atoms have mixed dimensions");
    if (atoms_[i].is_zero()) throw Error("context atom " + std::to_string(i) + " is zero");
    for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
      if (!atoms_[i].orthogonal_to(atoms_[j], tol)) {
        throw Error("context atoms " + std::to_string(i) + " and " + std::to_string(j) + " are not orthogonal");
      }
    }
    sum += atoms_[i].matrix();
  }
  if (max_abs(sum - ComplexMatrix::Identity(n, n)) > tol) throw Error("context atoms do not sum to the identity");
}

Context Context::trivial(std::size_t dim) { return Context({Projection::identity(dim)}); }

Context context_from_observables(std::span<const ComplexMatrix> ops, double tol) {
  if (ops.empty()) throw Error("context_from_observables: no observables given");
  const auto dim = static_cast<std::size_t>(ops.front().rows());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (!is_square(ops[i]) || static_cast<std::size_t>(ops[i].rows()) != dim) {
      throw Error("context_from_observables: observable " + std::to_string(i) + " has the wrong shape");
    }
    if (!is_self_adjoint(ops[i], tol)) {
      throw Error("context_from_observables: observable " + std::to_string(i) + " is not self-adjoint");
    }
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      if (!commutes(ops[i], ops[j], std::max(tol, 1e-9) * 10.0)) {
        throw Error("context_from_observables: observables " + std::to_string(i) + " and " + std::to_string(j) +
                    " do not commute");
      }
    }
  }

  std::vector<ComplexMatrix> atoms{ComplexMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))};
  for (const auto& op : ops) {
    const auto spectrum = spectral_atoms(op, tol);
    std::vector<ComplexMatrix> refined;
    for (const auto& a : atoms) {
      for (const auto& s : spectrum) {
        ComplexMatrix prod = 0.5 * (a * s.projection.matrix() + s.projection.matrix() * a);
        if (prod.trace().real() > 0.5) refined.push_back(std::move(prod));
      }
    }
    atoms = std::move(refined);
  }

  std::vector<Projection> out;
  out.reserve(atoms.size());
  for (auto& a : atoms) out.emplace_back(std::move(a), std::max(tol, 1e-9) * 10.0);
  return Context(std::move(out), std::max(tol, 1e-9) * 10.0);
}

// ---------------------------------------------------------------------------
// ProjectionRegistry

std::optional<ProjectionId> ProjectionRegistry::find(const Projection& p) const {
  if (auto it = by_key_.find(p.key()); it != by_key_.end()) {
    for (ProjectionId id : it->second) {
      if (projections_[id].approx_equal(p, tol_)) return id;
    }
  }
  // Keys can differ at a rounding boundary; fall back to a direct comparison.
  for (ProjectionId id = 0; id < projections_.size(); ++id) {
    if (projections_[id].approx_equal(p, tol_)) return id;
  }
  return std::nullopt;
}

ProjectionId ProjectionRegistry::intern(const Projection& p) {
  if (p.dim() != dim_) throw Error("projection registry: dimension mismatch");
  if (auto id = find(p)) return *id;
  for (ProjectionId id = 0; id < projections_.size(); ++id) {
    const double d = max_abs(projections_[id].matrix() - p.matrix());
    if (d < kCanonicalGrid) {
      throw NearDuplicateError("projection is within the canonicalization grid of registered projection " +
                               std::to_string(id) + " but not equal to it (distance " + std::to_string(d) + ")");
    }
  }
  const ProjectionId id = projections_.size();
  projections_.push_back(p);
  keys_.push_back(p.key());
  by_key_[keys_.back()].push_back(id);
  return id;
}

// ---------------------------------------------------------------------------
// ContextPoset

const PosetNode& ContextPoset::node(NodeId id) const {
  if (id >= nodes_.size()) throw Error("unknown context node " + std::to_string(id));
  return nodes_[id];
}

Context ContextPoset::context(NodeId id) const {
  std::vector<Projection> atoms;
  for (ProjectionId p : node(id).atoms) atoms.push_back(registry_.at(p));
  return Context(std::move(atoms), std::max(tol(), 1e-9) * 10.0);
}

bool ContextPoset::leq(NodeId i, NodeId j) const {
  node(i);
  node(j);
  return order_[i][j] != 0;
}

bool ContextPoset::projection_leq(ProjectionId p, ProjectionId q) const {
  return projection_leq_.at(p).at(q) != 0;
}

std::vector<NodeId> ContextPoset::maximal_nodes() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    bool maximal = true;
    for (NodeId j = 0; j < nodes_.size() && maximal; ++j) {
      if (j != i && order_[i][j]) maximal = false;
    }
    if (maximal) out.push_back(i);
  }
  return out;
}

std::optional<NodeId> ContextPoset::find_atoms(std::vector<ProjectionId> atom_ids) const {
  std::sort(atom_ids.begin(), atom_ids.end());
  if (auto it = index_.find(atom_ids); it != index_.end()) return it->second;
  return std::nullopt;
}

std::optional<NodeId> ContextPoset::find(const Context& c) const {
  std::vector<ProjectionId> ids;
  for (const auto& a : c.atoms()) {
    auto id = registry_.find(a);
    if (!id) return std::nullopt;
    ids.push_back(*id);
  }
  return find_atoms(std::move(ids));
}

NodeId ContextPoset::meet(NodeId i, NodeId j) const {
  const auto& ai = node(i).atoms;
  const auto& aj = node(j).atoms;
  // Union-find over atoms of i (0..m-1) and j (m..m+k-1); non-orthogonal
  // atoms end up in the same block of the common coarsening.
  const std::size_t m = ai.size();
  std::vector<std::size_t> parent(m + aj.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < aj.size(); ++b) {
      if (!registry_.at(ai[a]).orthogonal_to(registry_.at(aj[b]), tol())) parent[root(a)] = root(m + b);
    }
  }
  std::map<std::size_t, ComplexMatrix> blocks;
  for (std::size_t a = 0; a < m; ++a) {
    auto [it, inserted] = blocks.try_emplace(root(a), registry_.at(ai[a]).matrix());
    if (!inserted) it->second += registry_.at(ai[a]).matrix();
  }
  std::vector<ProjectionId> ids;
  for (auto& [r, mat] : blocks) {
    auto id = registry_.find(Projection(mat, std::max(tol(), 1e-9) * 10.0));
    if (!id) throw Error("meet: block projection is not registered");
    ids.push_back(*id);
  }
  auto found = find_atoms(std::move(ids));
  if (!found) throw Error("meet: meet context is not in the poset");
  return *found;
}

std::vector<std::size_t> ContextPoset::restriction_map(NodeId small, NodeId large) const {
  if (!leq(small, large)) {
    throw Error("restriction: node " + std::to_string(small) + " is not below node " + std::to_string(large));
  }
  const auto& as = node(small).atoms;
  const auto& al = node(large).atoms;
  std::vector<std::size_t> out(al.size());
  for (std::size_t k = 0; k < al.size(); ++k) {
    auto it = std::find_if(as.begin(), as.end(), [&](ProjectionId p) { return projection_leq(al[k], p); });
    if (it == as.end()) throw Error("restriction: no dominating atom");
    out[k] = static_cast<std::size_t>(it - as.begin());
  }
  return out;
}

std::vector<std::array<NodeId, 3>> ContextPoset::chains3() const {
  std::vector<std::array<NodeId, 3>> out;
  const std::size_t n = nodes_.size();
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j || !order_[i][j]) continue;
      for (NodeId k = 0; k < n; ++k) {
        if (k != j && k != i && order_[j][k]) out.push_back({i, j, k});
      }
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> set_partitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  if (n == 0) return {{}};
  std::vector<std::size_t> rgs(n, 0);
  std::vector<std::size_t> maxima(n, 0);  // maxima[i] = max(rgs[0..i-1])
  while (true) {
    out.push_back(rgs);
    // Next restricted growth string in lexicographic order.
    std::size_t i = n - 1;
    while (i > 0 && rgs[i] == maxima[i] + 1) --i;
    if (i == 0) break;
    ++rgs[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      rgs[k] = 0;
      maxima[k] = std::max(maxima[k - 1], rgs[k - 1]);
    }
  }
  return out;
}

ContextPoset generate_poset(std::size_t dim, std::span<const Context> catalog, double tol) {
  if (dim == 0) throw Error("generate_poset: dimension must be positive");
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    if (catalog[k].dim() != dim) throw Error("generate_poset: catalog context " + std::to_string(k) + " has mixed dimension");
    if (catalog[k].size() > kMaxDownsetAtoms) {
      throw Error("generate_poset: catalog context " + std::to_string(k) + " has too many atoms for down-closure");
    }
  }

  ContextPoset poset;
  poset.registry_ = ProjectionRegistry(dim, tol);
  const double build_tol = std::max(tol, 1e-9) * 10.0;

  auto add_node = [&](std::vector<ProjectionId> atoms, const std::string& why) {
    std::vector<ProjectionId> sorted = atoms;
    std::sort(sorted.begin(), sorted.end());
    if (auto it = poset.index_.find(sorted); it != poset.index_.end()) {
      auto& prov = poset.nodes_[it->second].provenance;
      if (std::find(prov.begin(), prov.end(), why) == prov.end()) prov.push_back(why);
      return it->second;
    }
    const NodeId id = poset.nodes_.size();
    poset.nodes_.push_back({std::move(atoms), sorted, {why}});
    poset.index_.emplace(std::move(sorted), id);
    return id;
  };

  std::vector<std::vector<ProjectionId>> catalog_ids;
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    std::vector<ProjectionId> ids;
    for (const auto& a : catalog[k].atoms()) ids.push_back(poset.registry_.intern(a));
    poset.catalog_nodes_.push_back(add_node(ids, "catalog[" + std::to_string(k) + "]"));
    catalog_ids.push_back(std::move(ids));
  }

  for (std::size_t k = 0; k < catalog.size(); ++k) {
    const auto& atoms = catalog[k].atoms();
    const std::string why = "coarsening of catalog[" + std::to_string(k) + "]";
    for (const auto& rgs : set_partitions(atoms.size())) {
      const std::size_t blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
      if (blocks == atoms.size()) continue;  // the context itself
      std::vector<ComplexMatrix> sums(blocks, ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
      for (std::size_t a = 0; a < atoms.size(); ++a) sums[rgs[a]] += atoms[a].matrix();
      std::vector<ProjectionId> ids;
      for (auto& s : sums) ids.push_back(poset.registry_.intern(Projection(std::move(s), build_tol)));
      add_node(std::move(ids), blocks == 1 ? "trivial" : why);
    }
  }
  poset.trivial_ = add_node({poset.registry_.intern(Projection::identity(dim))}, "trivial");

  const std::size_t r = poset.registry_.size();
  poset.projection_leq_.assign(r, std::vector<char>(r, 0));
  for (ProjectionId p = 0; p < r; ++p) {
    for (ProjectionId q = 0; q < r; ++q) {
      poset.projection_leq_[p][q] = poset.registry_.at(p).leq(poset.registry_.at(q), build_tol) ? 1 : 0;
    }
  }

  const std::size_t n = poset.nodes_.size();
  poset.order_.assign(n, std::vector<char>(n, 0));
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      bool below = true;
      for (ProjectionId big : poset.nodes_[i].atoms) {
        std::size_t rank = 0;
        for (ProjectionId small : poset.nodes_[j].atoms) {
          if (poset.projection_leq_[small][big]) rank += poset.registry_.at(small).rank();
        }
        if (rank != poset.registry_.at(big).rank()) {
          below = false;
          break;
        }
      }
      poset.order_[i][j] = below ? 1 : 0;
    }
  }

  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j || !poset.order_[i][j]) continue;
      bool covering = true;
      for (NodeId k = 0; k < n && covering; ++k) {
        if (k != i && k != j && poset.order_[i][k] && poset.order_[k][j]) covering = false;
      }
      if (covering) poset.covers_.emplace_back(i, j);
    }
  }

  poset.occurrences_.assign(r, {});
  for (NodeId i = 0; i < n; ++i) {
    const auto& atoms = poset.nodes_[i].atoms;
    for (std::size_t a = 0; a < atoms.size(); ++a) poset.occurrences_[atoms[a]].emplace_back(i, a);
  }
  return poset;
}

// ---------------------------------------------------------------------------
// DOT export

std::string export_dot(const ContextPoset& poset) {
  std::ostringstream out;
  out << "// context poset: dim=" << poset.dim() << " nodes=" << poset.size() << " covers=" << poset.covers().size()
      << "\n";
  out << "digraph contexts {\n";
  out << "  node [shape=box];\n";
  for (NodeId i = 0; i < poset.size(); ++i) {
    std::vector<std::size_t> ranks;
    for (ProjectionId p : poset.atoms(i)) ranks.push_back(poset.registry().at(p).rank());
    out << "  n" << i << " [label=\"{";
    for (std::size_t k = 0; k < ranks.size(); ++k) out << (k ? "," : "") << ranks[k];
    out << "}\"];";
    const auto& prov = poset.node(i).provenance;
    out << " // ";
    for (std::size_t k = 0; k < prov.size(); ++k) out << (k ? "; " : "") << prov[k];
    out << "\n";
  }
  for (const auto& [small, large] : poset.covers()) out << "  n" << large << " -> n" << small << ";\n";
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Presheaf shape

PresheafShape atom_presheaf(const ContextPoset& poset) {
  PresheafShape shape;
  for (NodeId i = 0; i < poset.size(); ++i) shape.component_size.push_back(poset.atom_count(i));
  for (NodeId i = 0; i < poset.size(); ++i) {
    for (NodeId j = 0; j < poset.size(); ++j) {
      if (poset.leq(i, j)) shape.restriction.emplace(std::make_pair(i, j), poset.restriction_map(i, j));
    }
  }
  return shape;
}

std::size_t functoriality_violations(const ContextPoset& poset, const PresheafShape& shape) {
  std::size_t bad = 0;
  for (const auto& [i, j, k] : poset.chains3()) {
    const auto& jk = shape.restriction.at({j, k});
    const auto& ij = shape.restriction.at({i, j});
    const auto& ik = shape.restriction.at({i, k});
    for (std::size_t x = 0; x < jk.size(); ++x) {
      if (ij[jk[x]] != ik[x]) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

}  // namespace contextua
