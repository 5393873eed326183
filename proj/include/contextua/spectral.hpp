// Spectral presheaf over a context poset. A character of a finite-dimensional
// context picks exactly one atom; a global section is a non-contextual 0/1
// assignment to every registered projection (a Kochen-Specker colouring).
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "contextua/contexts.hpp"

namespace contextua {

struct Character {
  NodeId context = 0;
  std::size_t chosen_atom = 0;

  friend bool operator==(const Character&, const Character&) = default;
};

/// Partial or global section: one chosen atom per node of a down-closed domain.
struct SpectralSection {
  std::map<NodeId, std::size_t> chosen;

  std::set<NodeId> domain() const;
  friend bool operator==(const SpectralSection&, const SpectralSection&) = default;
};

enum class ColoringVerdict { colorable, non_colorable };

struct SearchStats {
  std::uint64_t nodes_expanded = 0;
  std::uint64_t backtracks = 0;
  std::uint64_t propagations = 0;
};

struct ColoringCertificate {
  ColoringVerdict verdict = ColoringVerdict::non_colorable;
  std::optional<SpectralSection> section;
  SearchStats stats;
  bool exhausted = false;
};

/// The character at `target` whose atom dominates ch's chosen atom.
/// Throws Error if target is not below ch.context.
Character restrict_character(const ContextPoset& poset, const Character& ch, NodeId target);

/// Backtracking search over registered projections with unit propagation on
/// the per-context "exactly one atom is 1" constraints.
ColoringCertificate find_global_section(const ContextPoset& poset);

struct SectionEnumeration {
  std::vector<SpectralSection> sections;
  bool truncated = false;
};

/// All global sections up to cap, lexicographic in the choices at maximal
/// nodes (ordered by id). Independent of find_global_section's search.
SectionEnumeration enumerate_global_sections(const ContextPoset& poset, std::size_t cap);

/// Down-closed domain, atom indices in range, restriction compatibility along
/// every comparable pair, and equal values on shared projections.
bool verify_section(const ContextPoset& poset, const SpectralSection& s);

/// 0/1 value of every registered projection occurring in the section's domain.
std::map<ProjectionId, int> section_values(const ContextPoset& poset, const SpectralSection& s);

/// Value of an observable in node's algebra under the section: its eigenvalue
/// on the chosen atom. Throws Error if a is not a function of the node's atoms.
double valuation(const ContextPoset& poset, const SpectralSection& s, NodeId node, const ComplexMatrix& a);

/// c is a function of a and a function of b (a and b need not commute).
bool ks_triple_check(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c,
                     double tol = kDefaultTol);

const char* to_string(ColoringVerdict v);

}  // namespace contextua
