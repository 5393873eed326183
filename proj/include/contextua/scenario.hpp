// Scenario files: JSON catalogs of rays and contexts for one or two parties,
// with optional states, correlation tables and per-context measures.
//
// Complex entries are written as a number, a string expression, or a pair
// [re, im] of either. String expressions accept decimals, "a/b", "sqrt(c)",
// products and quotients of these, parentheses and a leading sign, e.g.
// "-sqrt(2)/2" or "1/sqrt(3)".
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "contextua/bell.hpp"
#include "contextua/contexts.hpp"
#include "contextua/gleason.hpp"

namespace contextua {

/// Ingest tolerance for orthogonality of rays within one context.
inline constexpr double kIngestTol = 1e-9;

class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& path, const std::string& message)
      : Error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct PartyCatalog {
  std::size_t dim = 0;
  std::vector<ComplexVector> rays;                 ///< normalized
  std::vector<std::vector<std::size_t>> contexts;  ///< ray indices
};

struct TableSpec {
  std::size_t left = 0;   ///< catalog context index, first party
  std::size_t right = 0;  ///< catalog context index, second party
  RealMatrix probs;
};

struct MeasureSpec {
  std::size_t context = 0;  ///< catalog context index
  std::vector<double> weights;
};

enum class ScenarioKind { single, bipartite };

struct Scenario {
  ScenarioKind kind = ScenarioKind::single;
  std::string name;
  nlohmann::ordered_json metadata;
  std::vector<PartyCatalog> parties;  ///< one or two
  std::optional<ComplexMatrix> state;
  std::vector<TableSpec> tables;
  std::vector<MeasureSpec> section;
  /// Catalog context indices a0, a1 (first party) and b0, b1 (second party).
  std::optional<std::array<std::size_t, 4>> chsh;
  std::vector<std::pair<std::size_t, std::size_t>> product_contexts;
};

/// Evaluates a scalar expression such as "sqrt(2)/2". Throws Error.
double parse_real_expression(std::string_view text);

/// Throws ScenarioError with a JSON path on schema violations, non-orthogonal
/// contexts (naming the ray indices) and near-duplicate rays.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

nlohmann::ordered_json scenario_to_json(const Scenario& s);
std::string emit_scenario(const Scenario& s);

/// Structural equality with entries compared within tol.
bool scenario_equal(const Scenario& a, const Scenario& b, double tol = 1e-12);

/// Contexts of one party: ray projections, padded with the orthogonal
/// complement when the rays do not span.
std::vector<Context> party_contexts(const PartyCatalog& party, double tol = kIngestTol);

ContextPoset party_poset(const PartyCatalog& party, double tol = kDefaultTol);

/// Number of catalog contexts each ray occurs in.
std::vector<std::size_t> ray_incidence(const PartyCatalog& party);

/// Probabilistic section on a single-party poset from the scenario's measures,
/// extended downwards by marginalisation.
ProbSection section_from_measures(const ContextPoset& poset, const std::vector<MeasureSpec>& measures);

}  // namespace contextua
