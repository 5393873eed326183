// Probabilistic presheaf: one finitely additive probability measure per
// context, restricted by marginalisation. Sections built from states by the
// Born rule, and the reverse reconstruction by linear inversion.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "contextua/contexts.hpp"

namespace contextua {

/// Probability weights on the atoms of one context.
struct ContextMeasure {
  NodeId context = 0;
  std::vector<double> weights;

  /// Clamps weights in [-tol, 0) to 0; throws Error on larger negatives or a
  /// total outside 1 +- tol.
  static ContextMeasure make(NodeId context, std::vector<double> weights, double tol = kDefaultTol);
};

struct ProbSection {
  std::map<NodeId, std::vector<double>> weights;

  std::set<NodeId> domain() const;
  ContextMeasure measure(NodeId node) const { return {node, weights.at(node)}; }
};

/// Push a measure on `large` forward to `small` (small <= large).
std::vector<double> marginalise(const ContextPoset& poset, const std::vector<double>& weights, NodeId small,
                                NodeId large);

/// Born weights tr(rho p) on every atom of every node.
ProbSection section_from_state(const ContextPoset& poset, const DensityMatrix& rho);

/// Born weights for an arbitrary self-adjoint operator; no positivity check.
ProbSection section_from_operator(const ContextPoset& poset, const ComplexMatrix& w);

struct ProbSectionCheck {
  bool normalised = true;
  bool nonnegative = true;
  bool marginalisation = true;
  bool noncontextual = true;
  bool down_closed = true;
  double max_defect = 0.0;

  bool ok() const { return normalised && nonnegative && marginalisation && noncontextual && down_closed; }
};

ProbSectionCheck verify_prob_section(const ContextPoset& poset, const ProbSection& s, double tol = 1e-9);

/// Chains i < j < k on which marginalising j -> i after k -> j differs from
/// k -> i by more than tol.
std::size_t marginalisation_functoriality_violations(const ContextPoset& poset, const ProbSection& s,
                                                     double tol = 1e-12);

enum class ReconstructionVerdict { density, underdetermined, infeasible };

/// Outcome of solving tr(X op_k) = value_k over self-adjoint X.
struct Reconstruction {
  ReconstructionVerdict verdict = ReconstructionVerdict::infeasible;
  /// Unique solution when the constraint family has full rank.
  std::optional<ComplexMatrix> state;
  std::size_t unknowns = 0;
  std::size_t rank = 0;
  std::size_t solution_dim = 0;
  double residual = 0.0;
  RealVector eigenvalues;
  std::string reason;
};

inline constexpr double kResidualThreshold = 1e-6;
inline constexpr double kRankThreshold = 1e-8;
inline constexpr double kPsdFloor = -1e-7;

/// Least-squares solve over self-adjoint dim x dim matrices. Classifies as
/// infeasible when the residual exceeds kResidualThreshold, underdetermined
/// when the family does not span, otherwise density iff min eigenvalue >=
/// kPsdFloor (infeasible with reason "negative eigenvalue" if not).
Reconstruction reconstruct_from_traces(const std::vector<ComplexMatrix>& ops, const std::vector<double>& values,
                                       std::size_t dim);

Reconstruction state_from_section(const ContextPoset& poset, const ProbSection& s);

/// Registered projections plus the identity span all self-adjoint matrices.
bool is_informationally_complete(const ContextPoset& poset);

/// Real dimension of the span of the registered projections and the identity.
std::size_t projection_span_rank(const ContextPoset& poset);

/// Per-context Naimark dilation: coordinate projections in C^k and the vector
/// of square-root weights.
struct Dilation {
  NodeId context = 0;
  std::size_t ancilla_dim = 0;
  std::vector<Projection> embedding;
  ComplexVector vector;
};

Dilation naimark_dilate(const ContextMeasure& m);

/// <v, phi(p_i) v> for each atom.
std::vector<double> recovered_weights(const Dilation& d);

struct QuasilinearityReport {
  std::size_t within_context_checks = 0;
  double within_context_residual = 0.0;
  ReconstructionVerdict reconstruction = ReconstructionVerdict::infeasible;
  bool cross_context_tested = false;
  std::size_t cross_context_checks = 0;
  double cross_context_residual = 0.0;
  std::string note;
};

/// Extends each measure linearly to its context's observables and samples
/// mu(a + b) = mu(a) + mu(b), within contexts always and across non-commuting
/// contexts when the section reconstructs to a state.
QuasilinearityReport quasilinearity_report(const ContextPoset& poset, const ProbSection& s, std::uint64_t seed,
                                           std::size_t samples = 20);

/// mu(a) = sum_i a_i mu(p_i) for a in the node's algebra.
double measure_observable(const ContextPoset& poset, const ProbSection& s, NodeId node, const ComplexMatrix& a);

const char* to_string(ReconstructionVerdict v);

}  // namespace contextua
