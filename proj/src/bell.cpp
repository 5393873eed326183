#include "contextua/bell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "contextua/lp.hpp"

namespace contextua {

const char* to_string(SectionVerdict v) {
  switch (v) {
    case SectionVerdict::quantum: return "quantum";
    case SectionVerdict::quantum_time_reversed: return "quantum_time_reversed";
    case SectionVerdict::non_quantum: return "non_quantum";
    case SectionVerdict::underdetermined: return "underdetermined";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Product poset

ProductPoset::ProductPoset(const ContextPoset& left, const ContextPoset& right) : left_(&left), right_(&right) {
  for (const auto& [small, large] : left.covers()) {
    for (NodeId j = 0; j < right.size(); ++j) covers_.push_back({{small, j}, {large, j}});
  }
  for (const auto& [small, large] : right.covers()) {
    for (NodeId i = 0; i < left.size(); ++i) covers_.push_back({{i, small}, {i, large}});
  }
}

ProductPoset product_poset(const ContextPoset& left, const ContextPoset& right) { return ProductPoset(left, right); }

ProductContext ProductPoset::node(std::size_t index) const {
  if (index >= size()) throw Error("product poset: node index out of range");
  return {index / right_->size(), index % right_->size()};
}

std::size_t ProductPoset::index(const ProductContext& pc) const {
  if (pc.left >= left_->size() || pc.right >= right_->size()) throw Error("product poset: unknown product context");
  return pc.left * right_->size() + pc.right;
}

bool ProductPoset::leq(const ProductContext& a, const ProductContext& b) const {
  return left_->leq(a.left, b.left) && right_->leq(a.right, b.right);
}

bool ProductPoset::ns_step(const ProductContext& a, const ProductContext& b) const {
  return (a.left == b.left && right_->leq(a.right, b.right)) || (a.right == b.right && left_->leq(a.left, b.left));
}

std::vector<ProductContext> ProductPoset::maximal_nodes() const {
  std::vector<ProductContext> out;
  for (NodeId i : left_->maximal_nodes()) {
    for (NodeId j : right_->maximal_nodes()) out.push_back({i, j});
  }
  return out;
}

std::vector<ProductContext> ProductPoset::all_nodes() const {
  std::vector<ProductContext> out;
  for (std::size_t k = 0; k < size(); ++k) out.push_back(node(k));
  return out;
}

// ---------------------------------------------------------------------------
// Tables

CorrelationTable restrict_table(const ProductPoset& prod, const CorrelationTable& table, const ProductContext& from,
                                const ProductContext& to) {
  if (!prod.leq(to, from)) throw Error("restrict_table: target is not below the source context");
  const auto lmap = prod.left().restriction_map(to.left, from.left);
  const auto rmap = prod.right().restriction_map(to.right, from.right);
  if (static_cast<std::size_t>(table.rows()) != lmap.size() || static_cast<std::size_t>(table.cols()) != rmap.size()) {
    throw Error("restrict_table: table shape does not match the context");
  }
  CorrelationTable out = CorrelationTable::Zero(static_cast<Eigen::Index>(prod.left().atom_count(to.left)),
                                                static_cast<Eigen::Index>(prod.right().atom_count(to.right)));
  for (std::size_t a = 0; a < lmap.size(); ++a) {
    for (std::size_t b = 0; b < rmap.size(); ++b) {
      out(static_cast<Eigen::Index>(lmap[a]), static_cast<Eigen::Index>(rmap[b])) +=
          table(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return out;
}

BellSection section_from_bipartite_state(const ProductPoset& prod, const ComplexMatrix& w) {
  const ContextPoset& left = prod.left();
  const ContextPoset& right = prod.right();
  const auto n = static_cast<Eigen::Index>(left.dim() * right.dim());
  if (w.rows() != n || w.cols() != n) throw Error("section_from_bipartite_state: dimension mismatch");

  // Born weight of every pair of registered projections, computed once.
  const std::size_t rl = left.registry().size();
  const std::size_t rr = right.registry().size();
  RealMatrix born(static_cast<Eigen::Index>(rl), static_cast<Eigen::Index>(rr));
  for (ProjectionId p = 0; p < rl; ++p) {
    for (ProjectionId q = 0; q < rr; ++q) {
      born(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
          (w * kron(left.registry().at(p).matrix(), right.registry().at(q).matrix())).trace().real();
    }
  }

  BellSection s;
  for (const auto& pc : prod.all_nodes()) {
    const auto& la = left.atoms(pc.left);
    const auto& ra = right.atoms(pc.right);
    CorrelationTable t(static_cast<Eigen::Index>(la.size()), static_cast<Eigen::Index>(ra.size()));
    for (std::size_t a = 0; a < la.size(); ++a) {
      for (std::size_t b = 0; b < ra.size(); ++b) {
        t(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            born(static_cast<Eigen::Index>(la[a]), static_cast<Eigen::Index>(ra[b]));
      }
    }
    s.tables.emplace(pc, std::move(t));
  }
  return s;
}

BellSection section_from_tables(const ProductPoset& prod, const std::map<ProductContext, CorrelationTable>& given) {
  BellSection s;
  for (const auto& [pc, t] : given) {
    prod.index(pc);
    if (static_cast<std::size_t>(t.rows()) != prod.left().atom_count(pc.left) ||
        static_cast<std::size_t>(t.cols()) != prod.right().atom_count(pc.right)) {
      throw Error("section_from_tables: table shape does not match its product context");
    }
  }
  for (const auto& pc : prod.all_nodes()) {
    if (auto it = given.find(pc); it != given.end()) {
      s.tables.emplace(pc, it->second);
      continue;
    }
    for (const auto& [source, t] : given) {
      if (prod.leq(pc, source)) {
        s.tables.emplace(pc, restrict_table(prod, t, source, pc));
        break;
      }
    }
  }
  return s;
}

bool check_no_signalling(const BellSection& s, double tol) {
  std::map<NodeId, RealVector> left_marginal;
  std::map<NodeId, RealVector> right_marginal;
  for (const auto& [pc, t] : s.tables) {
    const RealVector lm = t.rowwise().sum();
    const RealVector rm = t.colwise().sum().transpose();
    auto [li, lnew] = left_marginal.emplace(pc.left, lm);
    if (!lnew && (li->second.size() != lm.size() || (li->second - lm).cwiseAbs().maxCoeff() > tol)) return false;
    auto [ri, rnew] = right_marginal.emplace(pc.right, rm);
    if (!rnew && (ri->second.size() != rm.size() || (ri->second - rm).cwiseAbs().maxCoeff() > tol)) return false;
  }
  return true;
}

std::size_t marginalisation_violations(const ProductPoset& prod, const BellSection& s, double tol) {
  std::size_t bad = 0;
  for (const auto& [large, t] : s.tables) {
    for (const auto& [small, u] : s.tables) {
      if (small == large || !prod.leq(small, large)) continue;
      const CorrelationTable r = restrict_table(prod, t, large, small);
      if ((r - u).cwiseAbs().maxCoeff() > tol) ++bad;
    }
  }
  return bad;
}

std::size_t bell_functoriality_violations(const ProductPoset& prod, const BellSection& s, double tol) {
  const auto nodes = prod.all_nodes();
  std::size_t bad = 0;
  for (const auto& [c, t] : s.tables) {
    for (const auto& b : nodes) {
      if (b == c || !prod.leq(b, c)) continue;
      const CorrelationTable tb = restrict_table(prod, t, c, b);
      for (const auto& a : nodes) {
        if (a == b || a == c || !prod.leq(a, b)) continue;
        const CorrelationTable via = restrict_table(prod, tb, b, a);
        const CorrelationTable direct = restrict_table(prod, t, c, a);
        if ((via - direct).cwiseAbs().maxCoeff() > tol) ++bad;
      }
    }
  }
  return bad;
}

double min_probability(const BellSection& s) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [pc, t] : s.tables) m = std::min(m, t.minCoeff());
  return m;
}

ProbSection left_marginal_section(const ProductPoset&, const BellSection& s) {
  ProbSection out;
  for (const auto& [pc, t] : s.tables) {
    if (out.weights.count(pc.left)) continue;
    const RealVector m = t.rowwise().sum();
    out.weights.emplace(pc.left, std::vector<double>(m.data(), m.data() + m.size()));
  }
  return out;
}

ProbSection right_marginal_section(const ProductPoset&, const BellSection& s) {
  ProbSection out;
  for (const auto& [pc, t] : s.tables) {
    if (out.weights.count(pc.right)) continue;
    const RealVector m = t.colwise().sum().transpose();
    out.weights.emplace(pc.right, std::vector<double>(m.data(), m.data() + m.size()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bell functionals

double bell_functional_value(const BellSection& s, const BellCoefficients& coeffs) {
  double value = 0.0;
  for (const auto& [entry, c] : coeffs) {
    auto it = s.tables.find(entry.context);
    if (it == s.tables.end()) {
      throw Error("bell_functional_value: no table at product context (" + std::to_string(entry.context.left) + ", " +
                  std::to_string(entry.context.right) + ")");
    }
    const auto& t = it->second;
    if (entry.left_atom >= static_cast<std::size_t>(t.rows()) || entry.right_atom >= static_cast<std::size_t>(t.cols())) {
      throw Error("bell_functional_value: atom index out of range");
    }
    value += c * t(static_cast<Eigen::Index>(entry.left_atom), static_cast<Eigen::Index>(entry.right_atom));
  }
  return value;
}

BellCoefficients chsh_coefficients(const ChshSettings& st) {
  BellCoefficients coeffs;
  auto add = [&](NodeId a, const std::vector<double>& av, NodeId b, const std::vector<double>& bv, double sign) {
    for (std::size_t i = 0; i < av.size(); ++i) {
      for (std::size_t j = 0; j < bv.size(); ++j) coeffs[{{a, b}, i, j}] += sign * av[i] * bv[j];
    }
  };
  add(st.a0, st.a0_values, st.b0, st.b0_values, 1.0);
  add(st.a0, st.a0_values, st.b1, st.b1_values, 1.0);
  add(st.a1, st.a1_values, st.b0, st.b0_values, 1.0);
  add(st.a1, st.a1_values, st.b1, st.b1_values, -1.0);
  return coeffs;
}

ChshSettings binary_chsh_settings(NodeId a0, NodeId a1, NodeId b0, NodeId b1) {
  const std::vector<double> pm{1.0, -1.0};
  return {a0, a1, b0, b1, pm, pm, pm, pm};
}

ComplexMatrix chsh_operator(const ProductPoset& prod, const ChshSettings& st) {
  auto observable = [](const ContextPoset& poset, NodeId node, const std::vector<double>& values) {
    const auto& atoms = poset.atoms(node);
    if (values.size() != atoms.size()) throw Error("chsh_operator: outcome count does not match the context");
    const auto n = static_cast<Eigen::Index>(poset.dim());
    ComplexMatrix o = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < atoms.size(); ++k) o += values[k] * poset.registry().at(atoms[k]).matrix();
    return o;
  };
  const ComplexMatrix a0 = observable(prod.left(), st.a0, st.a0_values);
  const ComplexMatrix a1 = observable(prod.left(), st.a1, st.a1_values);
  const ComplexMatrix b0 = observable(prod.right(), st.b0, st.b0_values);
  const ComplexMatrix b1 = observable(prod.right(), st.b1, st.b1_values);
  return kron(a0, b0) + kron(a0, b1) + kron(a1, b0) - kron(a1, b1);
}

// ---------------------------------------------------------------------------
// Factorisability

FactorisabilityResult factorisability_lp(const ProductPoset& prod, const BellSection& s,
                                         const std::vector<ProductContext>& contexts) {
  if (contexts.empty()) throw Error("factorisability_lp: no product contexts given");
  FactorisabilityResult result;
  auto left = enumerate_global_sections(prod.left(), kMaxStrategies);
  auto right = enumerate_global_sections(prod.right(), kMaxStrategies);
  if (left.truncated || right.truncated ||
      left.sections.size() * right.sections.size() > kMaxStrategies) {
    throw Error("factorisability_lp: instance too large");
  }
  result.left_sections = std::move(left.sections);
  result.right_sections = std::move(right.sections);
  for (std::size_t i = 0; i < result.left_sections.size(); ++i) {
    for (std::size_t j = 0; j < result.right_sections.size(); ++j) result.strategies.push_back({i, j});
  }

  std::vector<TableEntry> entries;
  for (const auto& pc : contexts) {
    auto it = s.tables.find(pc);
    if (it == s.tables.end()) throw Error("factorisability_lp: section has no table at a requested context");
    for (Eigen::Index a = 0; a < it->second.rows(); ++a) {
      for (Eigen::Index b = 0; b < it->second.cols(); ++b) {
        entries.push_back({pc, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
      }
    }
  }

  const auto rows = static_cast<Eigen::Index>(entries.size() + 1);
  const auto cols = static_cast<Eigen::Index>(result.strategies.size());
  RealMatrix a = RealMatrix::Zero(rows, cols);
  RealVector b(rows);
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const auto& e = entries[r];
    b(static_cast<Eigen::Index>(r)) =
        s.tables.at(e.context)(static_cast<Eigen::Index>(e.left_atom), static_cast<Eigen::Index>(e.right_atom));
    for (std::size_t k = 0; k < result.strategies.size(); ++k) {
      const auto& st = result.strategies[k];
      const bool hit = result.left_sections[st.left_section].chosen.at(e.context.left) == e.left_atom &&
                       result.right_sections[st.right_section].chosen.at(e.context.right) == e.right_atom;
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = hit ? 1.0 : 0.0;
    }
  }
  a.row(rows - 1).setOnes();
  b(rows - 1) = 1.0;

  if (cols == 0) {
    // No non-contextual local strategy exists at all.
    result.factorisable = false;
    result.infeasibility = 1.0;
    return result;
  }

  const auto lp_result = lp::solve_feasibility(a, b);
  result.infeasibility = lp_result.infeasibility;
  if (lp_result.feasible) {
    result.factorisable = true;
    result.weights = lp_result.x;
    result.reconstruction_error = (a * lp_result.x - b).cwiseAbs().maxCoeff();
    return result;
  }

  result.factorisable = false;
  const RealVector& y = lp_result.y;
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const double c = y(static_cast<Eigen::Index>(r));
    if (c != 0.0) result.dual_functional[entries[r]] = c;
  }
  const RealVector scores = a.topRows(rows - 1).transpose() * y.head(rows - 1);
  result.dual_local_bound = scores.maxCoeff();
  result.dual_value = b.head(rows - 1).dot(y.head(rows - 1));
  return result;
}

// ---------------------------------------------------------------------------
// Classification

SectionClassification classify_section(const ProductPoset& prod, const BellSection& s) {
  const ContextPoset& left = prod.left();
  const ContextPoset& right = prod.right();
  SectionClassification out;
  if (left.dim() < 3 || right.dim() < 3) out.warnings.push_back("Gleason uniqueness precondition violated");

  std::vector<ComplexMatrix> ops;
  std::vector<double> values;
  for (const auto& [pc, t] : s.tables) {
    const auto& la = left.atoms(pc.left);
    const auto& ra = right.atoms(pc.right);
    for (std::size_t a = 0; a < la.size(); ++a) {
      for (std::size_t b = 0; b < ra.size(); ++b) {
        ops.push_back(kron(left.registry().at(la[a]).matrix(), right.registry().at(ra[b]).matrix()));
        values.push_back(t(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
      }
    }
  }
  const std::size_t n = left.dim() * right.dim();
  ops.push_back(ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  values.push_back(1.0);

  const Reconstruction rec = reconstruct_from_traces(ops, values, n);
  out.residual = rec.residual;
  out.solution_dim = rec.solution_dim;
  if (rec.residual > kResidualThreshold) {
    out.verdict = SectionVerdict::non_quantum;
    out.warnings.push_back("inconsistent linear system");
    return out;
  }
  if (rec.verdict == ReconstructionVerdict::underdetermined) {
    out.verdict = SectionVerdict::underdetermined;
    return out;
  }
  const ComplexMatrix& w = *rec.state;
  out.eigenvalues = rec.eigenvalues;
  out.eigen_floor = rec.eigenvalues.minCoeff();
  out.partial_transpose_floor = hermitian_eigenvalues(partial_transpose_second(w, left.dim(), right.dim())).minCoeff();
  out.witness = w;
  if (out.eigen_floor >= kPsdFloor) {
    out.verdict = SectionVerdict::quantum;
  } else if (out.partial_transpose_floor >= kPsdFloor) {
    out.verdict = SectionVerdict::quantum_time_reversed;
  } else {
    out.verdict = SectionVerdict::non_quantum;
  }
  return out;
}

}  // namespace contextua
