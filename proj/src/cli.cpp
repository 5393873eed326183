#include "contextua/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "contextua/bell.hpp"
#include "contextua/contexts.hpp"
#include "contextua/gleason.hpp"
#include "contextua/random.hpp"
#include "contextua/scenario.hpp"
#include "contextua/spectral.hpp"
#include "contextua/wigner.hpp"

namespace contextua::cli {

using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kRoundTripTol = 1e-8;
constexpr std::size_t kListedSections = 64;
constexpr std::size_t kJordanSamples = 20;

struct Options {
  std::string command;
  std::string scenario_path;
  std::string out_path;
  std::string format;
  double tol = kDefaultTol;
  std::size_t cap = 1000000;
  std::uint64_t seed = 1;
  std::size_t party = 0;
};

struct Outcome {
  std::string verdict;
  int exit_code = kExitOk;
  json result = json::object();
  std::string dot;  ///< poset-export only
};

struct Loaded {
  Scenario scenario;
  std::string digest;
};

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

json complex_matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

json real_vector_json(const RealVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json real_matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

const PartyCatalog& single_party(const Scenario& s, const std::string& command) {
  if (s.kind != ScenarioKind::single) throw Error(command + " needs a single-party scenario");
  return s.parties.at(0);
}

json poset_summary(const ContextPoset& poset) {
  return {{"dim", poset.dim()},
          {"nodes", poset.size()},
          {"covers", poset.covers().size()},
          {"maximal", poset.maximal_nodes().size()},
          {"projections", poset.registry().size()}};
}

/// Registry id of each ray's projection.
std::vector<ProjectionId> ray_ids(const ContextPoset& poset, const PartyCatalog& party) {
  std::vector<ProjectionId> ids;
  for (const auto& r : party.rays) {
    auto id = poset.registry().find(projection_from_ray(Ray(r)));
    if (!id) throw Error("ray missing from the generated poset");
    ids.push_back(*id);
  }
  return ids;
}

json describe_section(const ContextPoset& poset, const PartyCatalog& party, const SpectralSection& s) {
  const auto ids = ray_ids(poset, party);
  const auto values = section_values(poset, s);
  json true_rays = json::array();
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (auto it = values.find(ids[r]); it != values.end() && it->second == 1) true_rays.push_back(r);
  }
  json chosen = json::array();
  for (std::size_t k = 0; k < party.contexts.size(); ++k) {
    const NodeId node = poset.catalog_node(k);
    const ProjectionId pid = poset.atoms(node).at(s.chosen.at(node));
    json pick = "complement";
    for (std::size_t r : party.contexts[k]) {
      if (ids[r] == pid) pick = r;
    }
    chosen.push_back(pick);
  }
  return {{"true_rays", std::move(true_rays)}, {"chosen_per_context", std::move(chosen)}};
}

// ---------------------------------------------------------------------------
// Spectral commands

Outcome ks_check(const Loaded& in, const Options& opt) {
  const auto& party = single_party(in.scenario, "ks-check");
  const ContextPoset poset = party_poset(party, opt.tol);
  const auto cert = find_global_section(poset);
  Outcome o;
  o.verdict = to_string(cert.verdict);
  o.exit_code = cert.verdict == ColoringVerdict::colorable ? kExitOk : kExitNegative;
  o.result["rays"] = party.rays.size();
  o.result["contexts"] = party.contexts.size();
  o.result["ray_incidence"] = ray_incidence(party);
  o.result["poset"] = poset_summary(poset);
  o.result["search"] = {{"nodes_expanded", cert.stats.nodes_expanded},
                        {"backtracks", cert.stats.backtracks},
                        {"propagations", cert.stats.propagations},
                        {"exhausted", cert.exhausted}};
  o.result["section"] = cert.section ? describe_section(poset, party, *cert.section) : json(nullptr);
  if (cert.section) o.result["section_verified"] = verify_section(poset, *cert.section);
  return o;
}

Outcome ks_enumerate(const Loaded& in, const Options& opt) {
  const auto& party = single_party(in.scenario, "ks-enumerate");
  const ContextPoset poset = party_poset(party, opt.tol);
  const auto all = enumerate_global_sections(poset, opt.cap);
  const auto cert = find_global_section(poset);
  const bool oracle_colorable = !all.sections.empty();
  const bool agree = oracle_colorable == (cert.verdict == ColoringVerdict::colorable);

  Outcome o;
  if (!agree) {
    o.verdict = "disagreement";
    o.exit_code = kExitError;
  } else {
    o.verdict = oracle_colorable ? "colorable" : "non_colorable";
    o.exit_code = oracle_colorable ? kExitOk : kExitNegative;
  }
  o.result["poset"] = poset_summary(poset);
  o.result["sections"] = all.sections.size();
  o.result["truncated"] = all.truncated;
  o.result["cap"] = opt.cap;
  o.result["solver_verdict"] = to_string(cert.verdict);
  o.result["solver_agrees"] = agree;
  json listed = json::array();
  for (std::size_t k = 0; k < all.sections.size() && k < kListedSections; ++k) {
    listed.push_back(describe_section(poset, party, all.sections[k]));
  }
  o.result["listed"] = std::move(listed);
  return o;
}

// ---------------------------------------------------------------------------
// Gleason commands

json reconstruction_json(const Reconstruction& r) {
  json j = {{"verdict", to_string(r.verdict)},
            {"unknowns", r.unknowns},
            {"rank", r.rank},
            {"solution_dim", r.solution_dim},
            {"residual", r.residual}};
  if (!r.reason.empty()) j["reason"] = r.reason;
  if (r.eigenvalues.size() > 0) j["eigenvalues"] = real_vector_json(r.eigenvalues);
  j["state"] = r.state ? complex_matrix_json(*r.state) : json(nullptr);
  return j;
}

json section_check_json(const ProbSectionCheck& c) {
  return {{"normalised", c.normalised},   {"nonnegative", c.nonnegative},
          {"marginalisation", c.marginalisation}, {"noncontextual", c.noncontextual},
          {"down_closed", c.down_closed}, {"max_defect", c.max_defect}};
}

json quasilinearity_json(const QuasilinearityReport& q) {
  json j = {{"within_context_checks", q.within_context_checks},
            {"within_context_residual", q.within_context_residual},
            {"cross_context_tested", q.cross_context_tested},
            {"cross_context_checks", q.cross_context_checks},
            {"cross_context_residual", q.cross_context_residual}};
  if (!q.note.empty()) j["note"] = q.note;
  return j;
}

Outcome gleason_roundtrip(const Loaded& in, const Options& opt) {
  const auto& party = single_party(in.scenario, "gleason-roundtrip");
  const ContextPoset poset = party_poset(party, opt.tol);
  Outcome o;
  std::optional<DensityMatrix> rho;
  if (in.scenario.state) {
    rho.emplace(*in.scenario.state, 1e-8);
    o.result["state_source"] = "scenario";
  } else {
    Rng rng(opt.seed);
    rho.emplace(random_density(party.dim, rng));
    o.result["state_source"] = "random";
  }
  const ProbSection section = section_from_state(poset, *rho);
  const Reconstruction rec = state_from_section(poset, section);
  const double error = rec.state ? max_abs(*rec.state - rho->matrix()) : std::numeric_limits<double>::infinity();
  const bool ok = rec.verdict == ReconstructionVerdict::density && error <= kRoundTripTol;

  o.verdict = ok ? "round_trip_ok" : "round_trip_failed";
  o.exit_code = ok ? kExitOk : kExitNegative;
  o.result["poset"] = poset_summary(poset);
  o.result["informationally_complete"] = is_informationally_complete(poset);
  o.result["span_rank"] = projection_span_rank(poset);
  o.result["section_check"] = section_check_json(verify_prob_section(poset, section));
  o.result["reconstruction"] = reconstruction_json(rec);
  o.result["max_entry_error"] = rec.state ? json(error) : json(nullptr);
  o.result["threshold"] = kRoundTripTol;
  o.result["quasilinearity"] = quasilinearity_json(quasilinearity_report(poset, section, opt.seed));
  return o;
}

Outcome gleason_reconstruct(const Loaded& in, const Options& opt) {
  const auto& party = single_party(in.scenario, "gleason-reconstruct");
  if (in.scenario.section.empty()) throw Error("gleason-reconstruct needs a \"section\" in the scenario");
  const ContextPoset poset = party_poset(party, opt.tol);
  const ProbSection section = section_from_measures(poset, in.scenario.section);
  const auto check = verify_prob_section(poset, section);
  const Reconstruction rec = state_from_section(poset, section);

  Outcome o;
  o.verdict = to_string(rec.verdict);
  o.exit_code = rec.verdict == ReconstructionVerdict::infeasible ? kExitNegative : kExitOk;
  o.result["poset"] = poset_summary(poset);
  o.result["informationally_complete"] = is_informationally_complete(poset);
  o.result["section_check"] = section_check_json(check);
  o.result["reconstruction"] = reconstruction_json(rec);
  o.result["quasilinearity"] = quasilinearity_json(quasilinearity_report(poset, section, opt.seed));
  return o;
}

// ---------------------------------------------------------------------------
// Bell commands

struct Bipartite {
  ContextPoset left;
  ContextPoset right;
  std::unique_ptr<ProductPoset> prod;
};

std::unique_ptr<Bipartite> bipartite_setup(const Scenario& s, const Options& opt, const std::string& command) {
  if (s.kind != ScenarioKind::bipartite) throw Error(command + " needs a bipartite scenario");
  auto b = std::make_unique<Bipartite>();
  b->left = party_poset(s.parties.at(0), opt.tol);
  b->right = party_poset(s.parties.at(1), opt.tol);
  b->prod = std::make_unique<ProductPoset>(b->left, b->right);
  return b;
}

BellSection bell_section(const Scenario& s, const Bipartite& b) {
  if (s.state) return section_from_bipartite_state(*b.prod, *s.state);
  if (s.tables.empty()) throw Error("scenario has neither a state nor correlation tables");
  std::map<ProductContext, CorrelationTable> given;
  for (const auto& t : s.tables) {
    given[{b.left.catalog_node(t.left), b.right.catalog_node(t.right)}] = t.probs;
  }
  return section_from_tables(*b.prod, given);
}

json product_context_json(const Bipartite& b, const ProductContext& pc) {
  return json::array({b.left.node(pc.left).provenance.front(), b.right.node(pc.right).provenance.front()});
}

/// Largest value of the functional over deterministic local strategies.
double local_bound(const Bipartite& b, const BellCoefficients& coeffs, std::size_t cap) {
  const auto ls = enumerate_global_sections(b.left, cap);
  const auto rs = enumerate_global_sections(b.right, cap);
  if (ls.truncated || rs.truncated) throw Error("instance too large: local section enumeration hit the cap");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& l : ls.sections) {
    for (const auto& r : rs.sections) {
      double v = 0.0;
      for (const auto& [e, c] : coeffs) {
        if (l.chosen.at(e.context.left) == e.left_atom && r.chosen.at(e.context.right) == e.right_atom) v += c;
      }
      best = std::max(best, v);
    }
  }
  return best;
}

Outcome bell_analyze(const Loaded& in, const Options& opt) {
  const Scenario& s = in.scenario;
  const auto b = bipartite_setup(s, opt, "bell-analyze");
  const BellSection section = bell_section(s, *b);

  Outcome o;
  o.result["left_poset"] = poset_summary(b->left);
  o.result["right_poset"] = poset_summary(b->right);
  o.result["product_nodes"] = b->prod->size();
  o.result["product_covers"] = b->prod->covers().size();
  o.result["section_source"] = s.state ? "state" : "tables";
  const bool no_signalling = check_no_signalling(section, std::max(opt.tol, kIngestTol));
  o.result["no_signalling"] = no_signalling;
  o.result["marginalisation_violations"] = marginalisation_violations(*b->prod, section, std::max(opt.tol, kIngestTol));
  o.result["min_probability"] = min_probability(section);

  std::vector<ProductContext> contexts;
  if (s.chsh) {
    const auto& c = *s.chsh;
    const auto settings = binary_chsh_settings(b->left.catalog_node(c[0]), b->left.catalog_node(c[1]),
                                               b->right.catalog_node(c[2]), b->right.catalog_node(c[3]));
    const auto coeffs = chsh_coefficients(settings);
    json chsh = {{"value", bell_functional_value(section, coeffs)}, {"local_bound", local_bound(*b, coeffs, opt.cap)}};
    const ComplexMatrix op = chsh_operator(*b->prod, settings);
    chsh["operator_max_eigenvalue"] = hermitian_eigenvalues(op).maxCoeff();
    o.result["chsh"] = std::move(chsh);
    for (NodeId l : {settings.a0, settings.a1}) {
      for (NodeId r : {settings.b0, settings.b1}) contexts.push_back({l, r});
    }
  }
  if (!s.product_contexts.empty()) {
    contexts.clear();
    for (const auto& [l, r] : s.product_contexts) contexts.push_back({b->left.catalog_node(l), b->right.catalog_node(r)});
  }
  if (contexts.empty()) contexts = b->prod->maximal_nodes();

  if (!no_signalling) {
    o.verdict = "signalling";
    o.exit_code = kExitNegative;
    return o;
  }
  const auto fact = factorisability_lp(*b->prod, section, contexts);
  json lp = {{"contexts", contexts.size()},
             {"strategies", fact.strategies.size()},
             {"left_sections", fact.left_sections.size()},
             {"right_sections", fact.right_sections.size()}};
  if (fact.factorisable) {
    std::size_t support = 0;
    for (Eigen::Index k = 0; k < fact.weights.size(); ++k) support += fact.weights(k) > 1e-12 ? 1 : 0;
    lp["support"] = support;
    lp["reconstruction_error"] = fact.reconstruction_error;
  } else {
    json functional = json::array();
    for (const auto& [e, c] : fact.dual_functional) {
      functional.push_back({{"context", product_context_json(*b, e.context)},
                            {"left_atom", e.left_atom},
                            {"right_atom", e.right_atom},
                            {"coefficient", c}});
    }
    lp["dual_value"] = fact.dual_value;
    lp["dual_local_bound"] = fact.dual_local_bound;
    lp["infeasibility"] = fact.infeasibility;
    lp["dual_functional"] = std::move(functional);
  }
  o.result["factorisability"] = std::move(lp);
  o.verdict = fact.factorisable ? "factorisable" : "not_factorisable";
  o.exit_code = fact.factorisable ? kExitOk : kExitNegative;
  return o;
}

Outcome bell_classify(const Loaded& in, const Options& opt) {
  const auto b = bipartite_setup(in.scenario, opt, "bell-classify");
  const BellSection section = bell_section(in.scenario, *b);
  const auto cls = classify_section(*b->prod, section);

  Outcome o;
  o.verdict = to_string(cls.verdict);
  o.exit_code = cls.verdict == SectionVerdict::non_quantum ? kExitNegative : kExitOk;
  o.result["no_signalling"] = check_no_signalling(section, std::max(opt.tol, kIngestTol));
  o.result["solution_dim"] = cls.solution_dim;
  o.result["residual"] = cls.residual;
  o.result["eigen_floor"] = cls.eigen_floor;
  o.result["partial_transpose_floor"] = cls.partial_transpose_floor;
  o.result["eigenvalues"] = real_vector_json(cls.eigenvalues);
  o.result["warnings"] = cls.warnings;
  o.result["witness"] = cls.witness ? complex_matrix_json(*cls.witness) : json(nullptr);
  return o;
}

// ---------------------------------------------------------------------------
// Wigner

json symmetry_json(const ContextPoset& poset, const SymmetryOp& op, const std::vector<Projection>& rays, Rng& rng) {
  const auto conj = conjugate_poset(poset, op);
  std::vector<std::pair<ComplexMatrix, ComplexMatrix>> samples;
  for (std::size_t k = 0; k < kJordanSamples; ++k) {
    samples.emplace_back(random_hermitian(poset.dim(), rng), random_hermitian(poset.dim(), rng));
  }
  const auto jr = jordan_check(op, samples);
  std::size_t plus = 0, minus = 0, zero = 0;
  for (int sgn : jr.commutator_signs) (sgn > 0 ? plus : sgn < 0 ? minus : zero)++;
  return {{"kind", op.kind() == SymmetryKind::unitary ? "unitary" : "antiunitary"},
          {"image_nodes", conj.image.size()},
          {"order_isomorphism", trivial_presheaf_automorphism(poset, conj.image, conj.map)},
          {"node_map", conj.map.node_map},
          {"jordan_residual", jr.max_jordan_residual},
          {"commutator_residual", jr.max_commutator_residual},
          {"commutator_sign_plus", plus},
          {"commutator_sign_minus", minus},
          {"commuting_samples", zero},
          {"transition_probability_defect", transition_probability_defect(op, rays)}};
}

Outcome wigner_check(const Loaded& in, const Options& opt) {
  const auto& party = single_party(in.scenario, "wigner-check");
  const ContextPoset poset = party_poset(party, opt.tol);
  std::vector<Projection> rays;
  for (const auto& r : party.rays) rays.push_back(projection_from_ray(Ray(r)));

  Rng rng(opt.seed);
  const SymmetryOp unitary(SymmetryKind::unitary, random_unitary(party.dim, rng));
  const SymmetryOp anti(SymmetryKind::antiunitary, random_unitary(party.dim, rng));
  json u = symmetry_json(poset, unitary, rays, rng);
  json a = symmetry_json(poset, anti, rays, rng);

  auto passes = [](const json& j, bool antiunitary) {
    const std::size_t wrong = antiunitary ? j["commutator_sign_plus"].get<std::size_t>()
                                          : j["commutator_sign_minus"].get<std::size_t>();
    return j["order_isomorphism"].get<bool>() && j["jordan_residual"].get<double>() <= 1e-9 && wrong == 0 &&
           j["transition_probability_defect"].get<double>() <= 1e-9;
  };
  const bool ok = passes(u, false) && passes(a, true);
  Outcome o;
  o.verdict = ok ? "symmetries_consistent" : "symmetry_check_failed";
  o.exit_code = ok ? kExitOk : kExitNegative;
  o.result["poset"] = poset_summary(poset);
  o.result["unitary"] = std::move(u);
  o.result["antiunitary"] = std::move(a);
  return o;
}

// ---------------------------------------------------------------------------
// Poset export

Outcome poset_export(const Loaded& in, const Options& opt) {
  const Scenario& s = in.scenario;
  if (opt.party >= s.parties.size()) throw Error("--party out of range for this scenario");
  const ContextPoset poset = party_poset(s.parties[opt.party], opt.tol);
  Outcome o;
  o.verdict = "exported";
  o.dot = export_dot(poset);
  o.result["poset"] = poset_summary(poset);
  json nodes = json::array();
  for (NodeId i = 0; i < poset.size(); ++i) {
    json ranks = json::array();
    for (ProjectionId p : poset.atoms(i)) ranks.push_back(poset.registry().at(p).rank());
    nodes.push_back({{"id", i}, {"atoms", poset.atoms(i)}, {"ranks", std::move(ranks)}, {"provenance", poset.node(i).provenance}});
  }
  o.result["nodes"] = std::move(nodes);
  json covers = json::array();
  for (const auto& [small, large] : poset.covers()) covers.push_back({small, large});
  o.result["covers"] = std::move(covers);
  return o;
}

// ---------------------------------------------------------------------------
// Rendering

void render_text(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) render_text(v, prefix.empty() ? k : prefix + "." + k, out);
    return;
  }
  if (j.is_array()) {
    const bool scalars = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
    if (j.size() > 16) {
      out << prefix << ": [" << j.size() << " items]\n";
    } else if (scalars) {
      out << prefix << ": " << j.dump() << "\n";
    } else {
      for (std::size_t k = 0; k < j.size(); ++k) render_text(j[k], prefix + "[" + std::to_string(k) + "]", out);
    }
    return;
  }
  out << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
}

using Handler = std::function<Outcome(const Loaded&, const Options&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"ks-check", ks_check},
      {"ks-enumerate", ks_enumerate},
      {"gleason-roundtrip", gleason_roundtrip},
      {"gleason-reconstruct", gleason_reconstruct},
      {"bell-analyze", bell_analyze},
      {"bell-classify", bell_classify},
      {"wigner-check", wigner_check},
      {"poset-export", poset_export},
  };
  return table;
}

const char* summary(const std::string& command) {
  static const std::map<std::string, const char*> text = {
      {"ks-check", "search for a global section of the spectral presheaf"},
      {"ks-enumerate", "enumerate global sections exhaustively and compare with the solver"},
      {"gleason-roundtrip", "state -> Born section -> reconstructed state"},
      {"gleason-reconstruct", "reconstruct a state from the scenario's section"},
      {"bell-analyze", "no-signalling, CHSH value and factorisability LP"},
      {"bell-classify", "classify a bipartite section as quantum, time-reversed or neither"},
      {"wigner-check", "conjugate the poset by random (anti)unitaries and run the Jordan checks"},
      {"poset-export", "write the generated context poset (DOT by default)"},
  };
  return text.at(command);
}

Loaded load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return {parse_scenario(text), digest(text)};
}

}  // namespace

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : handlers()) v.push_back(k);
    return v;
  }();
  return names;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color) {
  CLI::App app{"Contextuality toolkit: context posets, Kochen-Specker search, Gleason reconstruction, "
               "Bell analysis and Wigner symmetries.",
               "contextua"};
  app.set_version_flag("--version", CONTEXTUA_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--scenario", opt.scenario_path, "scenario JSON file")->required();
  app.add_option("--out", opt.out_path, "also write the report to this file");
  app.add_option("--tol", opt.tol, "tolerance for projection identity and order")->check(CLI::PositiveNumber);
  app.add_option("--cap", opt.cap, "cap on enumerated global sections")->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "seed for sampled checks");
  app.add_option("--format", opt.format, "json, text or dot")->check(CLI::IsMember({"json", "text", "dot"}));
  app.add_option("--party", opt.party, "party index for poset-export");
  for (const auto& name : commands()) {
    app.add_subcommand(name, summary(name))->callback([&opt, name] { opt.command = name; });
  }

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' &&
      std::find(commands().begin(), commands().end(), args[0]) == commands().end()) {
    err << "error: unknown command '" << args[0] << "'\n" << app.help();
    return kExitError;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CONTEXTUA_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitError;
  }

  std::string format = opt.format;
  if (format.empty()) format = opt.command == "poset-export" ? "dot" : "json";
  if (format == "dot" && opt.command != "poset-export") {
    err << "error: --format dot is only available for poset-export\n";
    return kExitError;
  }

  const auto t0 = Clock::now();
  Loaded loaded;
  Outcome outcome;
  double parse_ms = 0.0;
  try {
    loaded = load(opt.scenario_path);
    parse_ms = ms_since(t0);
    outcome = handlers().at(opt.command)(loaded, opt);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  const double total_ms = ms_since(t0);

  std::string rendered;
  if (format == "dot") {
    rendered = outcome.dot;
  } else {
    json report;
    report["tool"] = "contextua";
    report["version"] = CONTEXTUA_VERSION;
    report["command"] = opt.command;
    report["scenario"] = {{"name", loaded.scenario.name},
                          {"kind", loaded.scenario.kind == ScenarioKind::single ? "single" : "bipartite"},
                          {"digest", loaded.digest}};
    report["parameters"] = {{"tol", opt.tol}, {"cap", opt.cap}, {"seed", opt.seed}};
    report["verdict"] = outcome.verdict;
    report["exit_code"] = outcome.exit_code;
    report["result"] = std::move(outcome.result);
    report["timings"] = {{"parse_ms", parse_ms}, {"total_ms", total_ms}};
    if (format == "json") {
      rendered = report.dump(2) + "\n";
    } else {
      std::ostringstream text;
      render_text(report, "", text);
      rendered = text.str();
    }
  }

  if (!opt.out_path.empty()) {
    std::ofstream file(opt.out_path, std::ios::binary);
    if (!file || !(file << rendered)) {
      err << "error: cannot write " << opt.out_path << "\n";
      return kExitError;
    }
  }
  if (color && format == "text") {
    const char* code = outcome.exit_code == kExitOk ? "\033[32m" : "\033[31m";
    const std::string key = "verdict: ";
    const auto pos = rendered.find("\n" + key);
    if (pos != std::string::npos) {
      const auto start = pos + 1 + key.size();
      const auto end = rendered.find('\n', start);
      rendered.insert(end, "\033[0m");
      rendered.insert(start, code);
    }
  }
  out << rendered;
  return outcome.exit_code;
}

}  // namespace contextua::cli
