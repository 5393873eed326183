#include "contextua/spectral.hpp"

#include <algorithm>
#include <numeric>

namespace contextua {

std::set<NodeId> SpectralSection::domain() const {
  std::set<NodeId> out;
  for (const auto& [node, atom] : chosen) out.insert(node);
  return out;
}

const char* to_string(ColoringVerdict v) {
  return v == ColoringVerdict::colorable ? "colorable" : "non_colorable";
}

Character restrict_character(const ContextPoset& poset, const Character& ch, NodeId target) {
  if (ch.chosen_atom >= poset.atom_count(ch.context)) throw Error("restrict_character: atom index out of range");
  const auto map = poset.restriction_map(target, ch.context);
  return {target, map[ch.chosen_atom]};
}

// ---------------------------------------------------------------------------
// Backtracking search

namespace {

class ColoringSearch {
 public:
  explicit ColoringSearch(const ContextPoset& poset) : poset_(poset), values_(poset.registry().size(), -1) {
    order_.resize(poset.size());
    std::iota(order_.begin(), order_.end(), NodeId{0});
    // Degree in the sharing graph: number of other nodes sharing an atom.
    std::vector<std::size_t> degree(poset.size(), 0);
    for (NodeId i = 0; i < poset.size(); ++i) {
      std::set<NodeId> neighbours;
      for (ProjectionId p : poset.atoms(i)) {
        for (const auto& [other, idx] : poset.occurrences(p)) {
          if (other != i) neighbours.insert(other);
        }
      }
      degree[i] = neighbours.size();
    }
    std::stable_sort(order_.begin(), order_.end(),
                     [&](NodeId a, NodeId b) { return degree[a] > degree[b]; });
  }

  ColoringCertificate run() {
    ColoringCertificate cert;
    bool ok = true;
    for (NodeId i = 0; i < poset_.size() && ok; ++i) ok = check_node(i);
    ok = ok && propagate();
    const bool found = ok && search();
    cert.stats = stats_;
    cert.exhausted = !found;
    if (found) {
      cert.verdict = ColoringVerdict::colorable;
      SpectralSection s;
      for (NodeId i = 0; i < poset_.size(); ++i) {
        const auto& atoms = poset_.atoms(i);
        for (std::size_t a = 0; a < atoms.size(); ++a) {
          if (values_[atoms[a]] == 1) s.chosen[i] = a;
        }
      }
      cert.section = std::move(s);
    } else {
      cert.verdict = ColoringVerdict::non_colorable;
    }
    return cert;
  }

 private:
  bool assign(ProjectionId p, int v) {
    if (values_[p] == v) return true;
    if (values_[p] != -1) return false;
    values_[p] = static_cast<signed char>(v);
    trail_.push_back(p);
    queue_.push_back(p);
    ++stats_.propagations;
    return true;
  }

  // Exactly-one constraint on a node: at most one 1, and a forced 1 when only
  // one atom is still open.
  bool check_node(NodeId i) {
    const auto& atoms = poset_.atoms(i);
    std::size_t ones = 0;
    std::size_t open = 0;
    ProjectionId last_open = 0;
    for (ProjectionId q : atoms) {
      if (values_[q] == 1) ++ones;
      if (values_[q] == -1) {
        ++open;
        last_open = q;
      }
    }
    if (ones > 1) return false;
    if (ones == 1) {
      for (ProjectionId q : atoms) {
        if (values_[q] == -1 && !assign(q, 0)) return false;
      }
      return true;
    }
    if (open == 0) return false;
    if (open == 1) return assign(last_open, 1);
    return true;
  }

  bool propagate() {
    while (!queue_.empty()) {
      const ProjectionId p = queue_.back();
      queue_.pop_back();
      for (const auto& [node, idx] : poset_.occurrences(p)) {
        if (!check_node(node)) {
          queue_.clear();
          return false;
        }
      }
    }
    return true;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      values_[trail_.back()] = -1;
      trail_.pop_back();
    }
    queue_.clear();
  }

  bool search() {
    auto open = std::find_if(order_.begin(), order_.end(), [&](NodeId i) {
      const auto& atoms = poset_.atoms(i);
      return std::none_of(atoms.begin(), atoms.end(), [&](ProjectionId q) { return values_[q] == 1; });
    });
    if (open == order_.end()) return true;
    for (ProjectionId q : poset_.atoms(*open)) {
      if (values_[q] != -1) continue;
      ++stats_.nodes_expanded;
      const std::size_t mark = trail_.size();
      if (assign(q, 1) && propagate() && search()) return true;
      undo(mark);
      ++stats_.backtracks;
    }
    return false;
  }

  const ContextPoset& poset_;
  std::vector<signed char> values_;
  std::vector<NodeId> order_;
  std::vector<ProjectionId> trail_;
  std::vector<ProjectionId> queue_;
  SearchStats stats_;
};

}  // namespace

ColoringCertificate find_global_section(const ContextPoset& poset) { return ColoringSearch(poset).run(); }

// ---------------------------------------------------------------------------
// Enumeration over choices at maximal nodes

namespace {

class SectionEnumerator {
 public:
  SectionEnumerator(const ContextPoset& poset, std::size_t cap)
      : poset_(poset), cap_(cap), maximal_(poset.maximal_nodes()), derived_(poset.size(), -1) {
    for (NodeId m : maximal_) {
      std::vector<std::pair<NodeId, std::vector<std::size_t>>> below;
      for (NodeId i = 0; i < poset.size(); ++i) {
        if (poset.leq(i, m)) below.emplace_back(i, poset.restriction_map(i, m));
      }
      below_.push_back(std::move(below));
    }
  }

  SectionEnumeration run() {
    recurse(0);
    return std::move(result_);
  }

 private:
  // Returns false once the cap has been exceeded.
  bool recurse(std::size_t level) {
    if (level == maximal_.size()) {
      if (result_.sections.size() == cap_) {
        result_.truncated = true;
        return false;
      }
      SpectralSection s;
      for (NodeId i = 0; i < poset_.size(); ++i) s.chosen[i] = static_cast<std::size_t>(derived_[i]);
      result_.sections.push_back(std::move(s));
      return true;
    }
    const NodeId m = maximal_[level];
    for (std::size_t a = 0; a < poset_.atom_count(m); ++a) {
      std::vector<NodeId> touched;
      bool consistent = true;
      for (const auto& [node, map] : below_[level]) {
        const int want = static_cast<int>(map[a]);
        if (derived_[node] == -1) {
          derived_[node] = want;
          touched.push_back(node);
        } else if (derived_[node] != want) {
          consistent = false;
          break;
        }
      }
      bool keep_going = true;
      if (consistent) keep_going = recurse(level + 1);
      for (NodeId node : touched) derived_[node] = -1;
      if (!keep_going) return false;
    }
    return true;
  }

  const ContextPoset& poset_;
  std::size_t cap_;
  std::vector<NodeId> maximal_;
  std::vector<std::vector<std::pair<NodeId, std::vector<std::size_t>>>> below_;
  std::vector<int> derived_;
  SectionEnumeration result_;
};

}  // namespace

SectionEnumeration enumerate_global_sections(const ContextPoset& poset, std::size_t cap) {
  if (cap == 0) throw Error("enumerate_global_sections: cap must be at least 1");
  return SectionEnumerator(poset, cap).run();
}

// ---------------------------------------------------------------------------
// Verification

bool verify_section(const ContextPoset& poset, const SpectralSection& s) {
  for (const auto& [node, atom] : s.chosen) {
    if (node >= poset.size() || atom >= poset.atom_count(node)) return false;
  }
  for (const auto& [j, aj] : s.chosen) {
    for (NodeId i = 0; i < poset.size(); ++i) {
      if (!poset.leq(i, j)) continue;
      auto it = s.chosen.find(i);
      if (it == s.chosen.end()) return false;  // domain not down-closed
      if (poset.restriction_map(i, j)[aj] != it->second) return false;
    }
  }
  std::map<ProjectionId, int> values;
  for (const auto& [node, chosen] : s.chosen) {
    const auto& atoms = poset.atoms(node);
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const int v = a == chosen ? 1 : 0;
      auto [it, inserted] = values.emplace(atoms[a], v);
      if (!inserted && it->second != v) return false;
    }
  }
  return true;
}

std::map<ProjectionId, int> section_values(const ContextPoset& poset, const SpectralSection& s) {
  std::map<ProjectionId, int> values;
  for (const auto& [node, chosen] : s.chosen) {
    const auto& atoms = poset.atoms(node);
    for (std::size_t a = 0; a < atoms.size(); ++a) values.emplace(atoms[a], a == chosen ? 1 : 0);
  }
  return values;
}

double valuation(const ContextPoset& poset, const SpectralSection& s, NodeId node, const ComplexMatrix& a) {
  const auto& atoms = poset.atoms(node);
  ComplexMatrix rebuilt = ComplexMatrix::Zero(a.rows(), a.cols());
  std::vector<double> eigen(atoms.size());
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const Projection& p = poset.registry().at(atoms[k]);
    eigen[k] = (p.matrix() * a).trace().real() / static_cast<double>(p.rank());
    rebuilt += eigen[k] * p.matrix();
  }
  if (max_abs(rebuilt - a) > 1e-8) throw Error("valuation: observable is not in the context's algebra");
  return eigen[s.chosen.at(node)];
}

bool ks_triple_check(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c, double tol) {
  if (!is_self_adjoint(a, tol) || !is_self_adjoint(b, tol) || !is_self_adjoint(c, tol)) return false;
  if (a.rows() != b.rows() || a.rows() != c.rows()) return false;
  return is_function_of(c, a, tol) && is_function_of(c, b, tol);
}

}  // namespace contextua
