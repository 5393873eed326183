#include "contextua/gleason.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "contextua/random.hpp"

namespace contextua {

const char* to_string(ReconstructionVerdict v) {
  switch (v) {
    case ReconstructionVerdict::density: return "density";
    case ReconstructionVerdict::underdetermined: return "underdetermined";
    case ReconstructionVerdict::infeasible: return "infeasible";
  }
  return "?";
}

ContextMeasure ContextMeasure::make(NodeId context, std::vector<double> weights, double tol) {
  double sum = 0.0;
  for (double& w : weights) {
    if (!std::isfinite(w) || w < -tol) throw Error("context measure: negative or non-finite weight");
    if (w < 0.0) w = 0.0;
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol) throw Error("context measure: weights do not sum to 1");
  return {context, std::move(weights)};
}

std::set<NodeId> ProbSection::domain() const {
  std::set<NodeId> out;
  for (const auto& [node, w] : weights) out.insert(node);
  return out;
}

std::vector<double> marginalise(const ContextPoset& poset, const std::vector<double>& weights, NodeId small,
                                NodeId large) {
  const auto map = poset.restriction_map(small, large);
  if (weights.size() != map.size()) throw Error("marginalise: weight vector has the wrong length");
  std::vector<double> out(poset.atom_count(small), 0.0);
  for (std::size_t k = 0; k < map.size(); ++k) out[map[k]] += weights[k];
  return out;
}

ProbSection section_from_operator(const ContextPoset& poset, const ComplexMatrix& w) {
  if (static_cast<std::size_t>(w.rows()) != poset.dim() || !is_square(w)) {
    throw Error("section_from_state: state dimension does not match poset dimension");
  }
  std::vector<double> born(poset.registry().size());
  for (ProjectionId p = 0; p < born.size(); ++p) born[p] = (w * poset.registry().at(p).matrix()).trace().real();
  ProbSection s;
  for (NodeId i = 0; i < poset.size(); ++i) {
    std::vector<double> weights;
    for (ProjectionId p : poset.atoms(i)) weights.push_back(born[p]);
    s.weights.emplace(i, std::move(weights));
  }
  return s;
}

ProbSection section_from_state(const ContextPoset& poset, const DensityMatrix& rho) {
  return section_from_operator(poset, rho.matrix());
}

ProbSectionCheck verify_prob_section(const ContextPoset& poset, const ProbSection& s, double tol) {
  ProbSectionCheck check;
  auto note = [&](double defect) { check.max_defect = std::max(check.max_defect, defect); };
  std::map<ProjectionId, double> value;
  for (const auto& [node, w] : s.weights) {
    if (node >= poset.size() || w.size() != poset.atom_count(node)) {
      check.down_closed = false;
      continue;
    }
    double sum = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a) {
      sum += w[a];
      if (w[a] < -tol) {
        check.nonnegative = false;
        note(-w[a]);
      }
      auto [it, inserted] = value.emplace(poset.atoms(node)[a], w[a]);
      if (!inserted && std::abs(it->second - w[a]) > tol) {
        check.noncontextual = false;
        note(std::abs(it->second - w[a]));
      }
    }
    if (std::abs(sum - 1.0) > tol) {
      check.normalised = false;
      note(std::abs(sum - 1.0));
    }
  }
  for (const auto& [large, w] : s.weights) {
    if (large >= poset.size() || w.size() != poset.atom_count(large)) continue;
    for (NodeId small = 0; small < poset.size(); ++small) {
      if (small == large || !poset.leq(small, large)) continue;
      auto it = s.weights.find(small);
      if (it == s.weights.end()) {
        check.down_closed = false;
        continue;
      }
      const auto pushed = marginalise(poset, w, small, large);
      for (std::size_t a = 0; a < pushed.size(); ++a) {
        const double d = std::abs(pushed[a] - it->second[a]);
        if (d > tol) {
          check.marginalisation = false;
          note(d);
        }
      }
    }
  }
  return check;
}

std::size_t marginalisation_functoriality_violations(const ContextPoset& poset, const ProbSection& s, double tol) {
  std::size_t bad = 0;
  for (const auto& [i, j, k] : poset.chains3()) {
    auto it = s.weights.find(k);
    if (it == s.weights.end()) continue;
    const auto via = marginalise(poset, marginalise(poset, it->second, j, k), i, j);
    const auto direct = marginalise(poset, it->second, i, k);
    for (std::size_t a = 0; a < via.size(); ++a) {
      if (std::abs(via[a] - direct[a]) > tol) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

// ---------------------------------------------------------------------------
// Reconstruction

Reconstruction reconstruct_from_traces(const std::vector<ComplexMatrix>& ops, const std::vector<double>& values,
                                       std::size_t dim) {
  if (ops.size() != values.size()) throw Error("reconstruct: constraint count mismatch");
  const auto unknowns = static_cast<Eigen::Index>(dim * dim);
  RealMatrix a(static_cast<Eigen::Index>(ops.size()), unknowns);
  RealVector b(static_cast<Eigen::Index>(ops.size()));
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (static_cast<std::size_t>(ops[k].rows()) != dim) throw Error("reconstruct: operator dimension mismatch");
    a.row(static_cast<Eigen::Index>(k)) = hermitian_coordinates(ops[k]).transpose();
    b(static_cast<Eigen::Index>(k)) = values[k];
  }

  Reconstruction out;
  out.unknowns = static_cast<std::size_t>(unknowns);
  Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = kRankThreshold * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  out.rank = rank;
  out.solution_dim = out.unknowns - rank;

  // Minimum-norm least-squares solution on the numerical range.
  RealVector x = RealVector::Zero(unknowns);
  if (rank > 0) {
    const auto r = static_cast<Eigen::Index>(rank);
    const RealVector ub = svd.matrixU().leftCols(r).transpose() * b;
    x = svd.matrixV().leftCols(r) * ub.cwiseQuotient(sv.head(r));
  }
  out.residual = ops.empty() ? 0.0 : (a * x - b).cwiseAbs().maxCoeff();

  if (out.residual > kResidualThreshold) {
    out.verdict = ReconstructionVerdict::infeasible;
    out.reason = "inconsistent constraints";
    return out;
  }
  if (out.solution_dim > 0) {
    out.verdict = ReconstructionVerdict::underdetermined;
    out.reason = "constraint family does not span the self-adjoint matrices";
    return out;
  }
  ComplexMatrix w = from_hermitian_coordinates(x, dim);
  out.eigenvalues = hermitian_eigenvalues(w);
  out.state = std::move(w);
  if (out.eigenvalues.minCoeff() < kPsdFloor) {
    out.verdict = ReconstructionVerdict::infeasible;
    out.reason = "negative eigenvalue";
  } else {
    out.verdict = ReconstructionVerdict::density;
  }
  return out;
}

Reconstruction state_from_section(const ContextPoset& poset, const ProbSection& s) {
  std::vector<ComplexMatrix> ops;
  std::vector<double> values;
  for (const auto& [node, w] : s.weights) {
    const auto& atoms = poset.atoms(node);
    if (w.size() != atoms.size()) throw Error("state_from_section: weight vector has the wrong length");
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      ops.push_back(poset.registry().at(atoms[a]).matrix());
      values.push_back(w[a]);
    }
  }
  const auto n = static_cast<Eigen::Index>(poset.dim());
  ops.push_back(ComplexMatrix::Identity(n, n));
  values.push_back(1.0);
  return reconstruct_from_traces(ops, values, poset.dim());
}

std::size_t projection_span_rank(const ContextPoset& poset) {
  const auto n = static_cast<Eigen::Index>(poset.dim());
  RealMatrix a(static_cast<Eigen::Index>(poset.registry().size()) + 1, n * n);
  for (ProjectionId p = 0; p < poset.registry().size(); ++p) {
    a.row(static_cast<Eigen::Index>(p)) = hermitian_coordinates(poset.registry().at(p).matrix()).transpose();
  }
  a.row(a.rows() - 1) = hermitian_coordinates(ComplexMatrix::Identity(n, n)).transpose();
  return numerical_rank(a, kRankThreshold);
}

bool is_informationally_complete(const ContextPoset& poset) {
  return projection_span_rank(poset) == poset.dim() * poset.dim();
}

// ---------------------------------------------------------------------------
// Dilation

Dilation naimark_dilate(const ContextMeasure& m) {
  const std::size_t k = m.weights.size();
  if (k == 0) throw Error("naimark_dilate: empty measure");
  Dilation d;
  d.context = m.context;
  d.ancilla_dim = k;
  d.vector = ComplexVector::Zero(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    d.embedding.emplace_back(std::move(e));
    d.vector(static_cast<Eigen::Index>(i)) = std::sqrt(std::max(0.0, m.weights[i]));
  }
  return d;
}

std::vector<double> recovered_weights(const Dilation& d) {
  std::vector<double> out;
  for (const auto& p : d.embedding) out.push_back(d.vector.dot(p.matrix() * d.vector).real());
  return out;
}

// ---------------------------------------------------------------------------
// Quasi-linearity

double measure_observable(const ContextPoset& poset, const ProbSection& s, NodeId node, const ComplexMatrix& a) {
  const auto& atoms = poset.atoms(node);
  const auto& w = s.weights.at(node);
  ComplexMatrix rebuilt = ComplexMatrix::Zero(a.rows(), a.cols());
  double mu = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const Projection& p = poset.registry().at(atoms[k]);
    const double value = (p.matrix() * a).trace().real() / static_cast<double>(p.rank());
    rebuilt += value * p.matrix();
    mu += value * w[k];
  }
  if (max_abs(rebuilt - a) > 1e-8) throw Error("measure_observable: observable is not in the context's algebra");
  return mu;
}

namespace {

ComplexMatrix random_observable(const ContextPoset& poset, NodeId node, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(poset.dim());
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (ProjectionId p : poset.atoms(node)) a += gauss(rng) * poset.registry().at(p).matrix();
  return a;
}

}  // namespace

QuasilinearityReport quasilinearity_report(const ContextPoset& poset, const ProbSection& s, std::uint64_t seed,
                                           std::size_t samples) {
  QuasilinearityReport report;
  Rng rng(seed);
  for (const auto& [node, w] : s.weights) {
    for (std::size_t k = 0; k < samples; ++k) {
      const ComplexMatrix a = random_observable(poset, node, rng);
      const ComplexMatrix b = random_observable(poset, node, rng);
      const double lhs = measure_observable(poset, s, node, a + b);
      const double rhs = measure_observable(poset, s, node, a) + measure_observable(poset, s, node, b);
      report.within_context_residual = std::max(report.within_context_residual, std::abs(lhs - rhs));
      ++report.within_context_checks;
    }
  }

  const Reconstruction rec = state_from_section(poset, s);
  report.reconstruction = rec.verdict;
  if (rec.verdict != ReconstructionVerdict::density) {
    report.note = "linearity untestable";
    return report;
  }
  const ComplexMatrix& rho = *rec.state;
  const auto maximal = poset.maximal_nodes();
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i : maximal) {
    for (NodeId j : maximal) {
      if (i < j) pairs.emplace_back(i, j);
    }
  }
  if (pairs.empty()) {
    report.note = "no pair of distinct maximal contexts";
    return report;
  }
  report.cross_context_tested = true;
  for (std::size_t k = 0; k < samples; ++k) {
    const auto [i, j] = pairs[k % pairs.size()];
    const ComplexMatrix a = random_observable(poset, i, rng);
    const ComplexMatrix b = random_observable(poset, j, rng);
    const double sum = (rho * (a + b)).trace().real();
    const double parts = measure_observable(poset, s, i, a) + measure_observable(poset, s, j, b);
    report.cross_context_residual = std::max(report.cross_context_residual, std::abs(sum - parts));
    ++report.cross_context_checks;
  }
  return report;
}

}  // namespace contextua
