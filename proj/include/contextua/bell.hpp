// Bipartite composition through contexts: the product context poset, the Bell
// presheaf of correlation tables over it, no-signalling, local hidden variable
// factorisability, and classification of sections by the operator they fix
// on the tensor space.
#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contextua/contexts.hpp"
#include "contextua/gleason.hpp"
#include "contextua/spectral.hpp"

namespace contextua {

struct ProductContext {
  NodeId left = 0;
  NodeId right = 0;

  friend auto operator<=>(const ProductContext&, const ProductContext&) = default;
};

/// Product of two context posets with the componentwise order. Holds
/// references: both factors must outlive it.
class ProductPoset {
 public:
  ProductPoset(const ContextPoset& left, const ContextPoset& right);

  const ContextPoset& left() const { return *left_; }
  const ContextPoset& right() const { return *right_; }
  std::size_t size() const { return left_->size() * right_->size(); }

  ProductContext node(std::size_t index) const;
  std::size_t index(const ProductContext& pc) const;

  bool leq(const ProductContext& a, const ProductContext& b) const;

  /// One-step no-signalling relation: equal on one side, below on the other.
  bool ns_step(const ProductContext& a, const ProductContext& b) const;

  /// Covering pairs (smaller, larger) of the product order.
  const std::vector<std::pair<ProductContext, ProductContext>>& covers() const { return covers_; }

  std::vector<ProductContext> maximal_nodes() const;
  std::vector<ProductContext> all_nodes() const;

 private:
  const ContextPoset* left_;
  const ContextPoset* right_;
  std::vector<std::pair<ProductContext, ProductContext>> covers_;
};

ProductPoset product_poset(const ContextPoset& left, const ContextPoset& right);

/// Rows are atoms of the left context, columns atoms of the right context.
using CorrelationTable = RealMatrix;

struct BellSection {
  std::map<ProductContext, CorrelationTable> tables;
};

/// Table at `to` obtained by coarse-graining the table at `from` (to <= from).
CorrelationTable restrict_table(const ProductPoset& prod, const CorrelationTable& table, const ProductContext& from,
                                const ProductContext& to);

/// probs(p, q) = tr(W (p (x) q)) on every product context. W need not be PSD.
BellSection section_from_bipartite_state(const ProductPoset& prod, const ComplexMatrix& w);

/// Tables given on some product contexts; every context below one of them is
/// filled by marginalising the first given table above it (in key order).
BellSection section_from_tables(const ProductPoset& prod, const std::map<ProductContext, CorrelationTable>& given);

/// Left marginals independent of the right context and vice versa.
bool check_no_signalling(const BellSection& s, double tol = 1e-9);

/// Pairs (smaller, larger) of stored tables whose coarse-graining disagrees.
std::size_t marginalisation_violations(const ProductPoset& prod, const BellSection& s, double tol = 1e-9);

/// Chains a < b < c where restricting c -> b -> a differs from c -> a.
std::size_t bell_functoriality_violations(const ProductPoset& prod, const BellSection& s, double tol = 1e-12);

double min_probability(const BellSection& s);

/// One-sided marginal families as probabilistic sections on the factors.
ProbSection left_marginal_section(const ProductPoset& prod, const BellSection& s);
ProbSection right_marginal_section(const ProductPoset& prod, const BellSection& s);

struct TableEntry {
  ProductContext context;
  std::size_t left_atom = 0;
  std::size_t right_atom = 0;

  friend auto operator<=>(const TableEntry&, const TableEntry&) = default;
};

using BellCoefficients = std::map<TableEntry, double>;

/// Throws Error if a coefficient indexes a missing table or atom.
double bell_functional_value(const BellSection& s, const BellCoefficients& coeffs);

/// CHSH functional E00 + E01 + E10 - E11 for binary-outcome contexts, with
/// outcome values given per atom of each context.
struct ChshSettings {
  NodeId a0, a1, b0, b1;
  std::vector<double> a0_values, a1_values, b0_values, b1_values;
};

BellCoefficients chsh_coefficients(const ChshSettings& settings);

/// Settings with outcome +1 on atom 0 and -1 on atom 1 of each context.
ChshSettings binary_chsh_settings(NodeId a0, NodeId a1, NodeId b0, NodeId b1);

/// A0 (x) B0 + A0 (x) B1 + A1 (x) B0 - A1 (x) B1 for the observables given by
/// the settings' outcome values.
ComplexMatrix chsh_operator(const ProductPoset& prod, const ChshSettings& settings);

/// Joint deterministic local strategy: a global section of each factor's
/// spectral presheaf.
struct LocalStrategy {
  std::size_t left_section = 0;
  std::size_t right_section = 0;
};

inline constexpr std::size_t kMaxStrategies = 1000000;

struct FactorisabilityResult {
  bool factorisable = false;
  std::vector<SpectralSection> left_sections;
  std::vector<SpectralSection> right_sections;
  std::vector<LocalStrategy> strategies;
  /// Hull weights per strategy when factorisable.
  RealVector weights;
  double reconstruction_error = 0.0;
  /// Separating functional when not factorisable: value on the section
  /// exceeds the maximum over deterministic strategies.
  BellCoefficients dual_functional;
  double dual_value = 0.0;
  double dual_local_bound = 0.0;
  double infeasibility = 0.0;
};

/// Membership of the tables at `contexts` in the convex hull of deterministic
/// non-contextual local strategies. Throws Error("instance too large") above
/// kMaxStrategies joint strategies.
FactorisabilityResult factorisability_lp(const ProductPoset& prod, const BellSection& s,
                                         const std::vector<ProductContext>& contexts);

enum class SectionVerdict { quantum, quantum_time_reversed, non_quantum, underdetermined };

struct SectionClassification {
  SectionVerdict verdict = SectionVerdict::underdetermined;
  std::optional<ComplexMatrix> witness;
  double eigen_floor = 0.0;
  double partial_transpose_floor = 0.0;
  RealVector eigenvalues;
  double residual = 0.0;
  std::size_t solution_dim = 0;
  std::vector<std::string> warnings;
};

/// Solves tr(W (p (x) q)) = probs over self-adjoint W with tr W = 1 and
/// classifies by positivity of W and of its partial transpose on the second
/// factor.
SectionClassification classify_section(const ProductPoset& prod, const BellSection& s);

const char* to_string(SectionVerdict v);

}  // namespace contextua
