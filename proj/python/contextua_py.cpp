#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "contextua/bell.hpp"
#include "contextua/cli.hpp"
#include "contextua/gleason.hpp"
#include "contextua/random.hpp"
#include "contextua/scenario.hpp"
#include "contextua/spectral.hpp"
#include "contextua/wigner.hpp"

namespace py = pybind11;
using namespace contextua;

namespace {

using PosetPtr = std::shared_ptr<ContextPoset>;

PosetPtr poset_from_bases(const std::vector<ComplexMatrix>& bases, std::size_t dim, double tol) {
  std::vector<Context> catalog;
  for (const auto& u : bases) catalog.push_back(basis_context(u));
  if (dim == 0) {
    if (bases.empty()) throw Error("dim is required for an empty catalog");
    dim = static_cast<std::size_t>(bases.front().rows());
  }
  return std::make_shared<ContextPoset>(generate_poset(dim, catalog, tol));
}

PosetPtr poset_from_scenario(const std::string& path, std::size_t party, double tol) {
  const auto s = load_scenario(path);
  if (party >= s.parties.size()) throw Error("party index out of range");
  return std::make_shared<ContextPoset>(party_poset(s.parties[party], tol));
}

SymmetryKind parse_kind(const std::string& kind) {
  if (kind == "unitary") return SymmetryKind::unitary;
  if (kind == "antiunitary") return SymmetryKind::antiunitary;
  throw Error("kind must be 'unitary' or 'antiunitary'");
}

py::dict coloring(const ContextPoset& p) {
  const auto cert = find_global_section(p);
  py::dict out;
  out["verdict"] = to_string(cert.verdict);
  out["section"] = cert.section ? py::cast(cert.section->chosen) : py::none();
  out["nodes_expanded"] = cert.stats.nodes_expanded;
  out["backtracks"] = cert.stats.backtracks;
  return out;
}

py::dict reconstruction(const Reconstruction& r) {
  py::dict out;
  out["verdict"] = to_string(r.verdict);
  out["state"] = r.state ? py::cast(*r.state) : py::none();
  out["rank"] = r.rank;
  out["solution_dim"] = r.solution_dim;
  out["residual"] = r.residual;
  out["reason"] = r.reason;
  return out;
}

py::dict classification(const SectionClassification& c) {
  py::dict out;
  out["verdict"] = to_string(c.verdict);
  out["witness"] = c.witness ? py::cast(*c.witness) : py::none();
  out["eigen_floor"] = c.eigen_floor;
  out["partial_transpose_floor"] = c.partial_transpose_floor;
  out["residual"] = c.residual;
  out["solution_dim"] = c.solution_dim;
  out["warnings"] = c.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Context posets, presheaf sections, Bell scenarios and Wigner symmetries";
  m.attr("__version__") = CONTEXTUA_VERSION;

  py::register_exception<Error>(m, "ContextuaError", PyExc_ValueError);

  py::class_<ContextPoset, PosetPtr>(m, "ContextPoset")
      .def(py::init(&poset_from_bases), py::arg("bases"), py::arg("dim") = 0, py::arg("tol") = kDefaultTol,
           "Poset generated by orthonormal bases given as unitary matrices (columns are the rays).")
      .def_static("from_scenario", &poset_from_scenario, py::arg("path"), py::arg("party") = 0,
                  py::arg("tol") = kDefaultTol)
      .def_property_readonly("dim", &ContextPoset::dim)
      .def("__len__", &ContextPoset::size)
      .def_property_readonly("covers", &ContextPoset::covers)
      .def_property_readonly("trivial", &ContextPoset::trivial)
      .def_property_readonly("maximal_nodes", &ContextPoset::maximal_nodes)
      .def("catalog_node", &ContextPoset::catalog_node)
      .def("leq", &ContextPoset::leq)
      .def("atoms",
           [](const ContextPoset& p, NodeId node) {
             std::vector<ComplexMatrix> out;
             for (ProjectionId a : p.atoms(node)) out.push_back(p.registry().at(a).matrix());
             return out;
           })
      .def("to_dot", &export_dot)
      .def("find_global_section", &coloring)
      .def(
          "count_global_sections",
          [](const ContextPoset& p, std::size_t cap) {
            const auto e = enumerate_global_sections(p, cap);
            return py::make_tuple(e.sections.size(), e.truncated);
          },
          py::arg("cap") = 1000)
      .def("is_informationally_complete", &is_informationally_complete)
      .def(
          "born_section",
          [](const ContextPoset& p, const ComplexMatrix& rho) { return section_from_state(p, DensityMatrix(rho)).weights; },
          py::arg("rho"))
      .def(
          "reconstruct",
          [](const ContextPoset& p, const std::map<NodeId, std::vector<double>>& weights) {
            ProbSection s;
            s.weights = weights;
            return reconstruction(state_from_section(p, s));
          },
          py::arg("section"))
      .def(
          "section_is_valid",
          [](const ContextPoset& p, const std::map<NodeId, std::vector<double>>& weights) {
            ProbSection s;
            s.weights = weights;
            return verify_prob_section(p, s).ok();
          },
          py::arg("section"));

  m.def("mutually_unbiased_bases", [](std::size_t p) {
    std::vector<ComplexMatrix> out;
    for (const auto& ctx : mutually_unbiased_bases(p)) {
      ComplexMatrix u(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
      for (std::size_t k = 0; k < ctx.size(); ++k) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ctx.atom(k).matrix());
        u.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(static_cast<Eigen::Index>(p) - 1);
      }
      out.push_back(std::move(u));
    }
    return out;
  });

  m.def(
      "bell_analysis",
      [](const PosetPtr& left, const PosetPtr& right, const ComplexMatrix& w) {
        const ProductPoset prod(*left, *right);
        const auto s = section_from_bipartite_state(prod, w);
        const auto fact = factorisability_lp(prod, s, prod.maximal_nodes());
        py::dict out;
        out["no_signalling"] = check_no_signalling(s);
        out["min_probability"] = min_probability(s);
        out["factorisable"] = fact.factorisable;
        out["reconstruction_error"] = fact.reconstruction_error;
        out["dual_value"] = fact.dual_value;
        out["dual_local_bound"] = fact.dual_local_bound;
        return out;
      },
      py::arg("left"), py::arg("right"), py::arg("w"),
      "Sections of tr(W (P x Q)) over the product poset and the factorisability LP on maximal contexts.");

  m.def(
      "chsh_value",
      [](const PosetPtr& left, const PosetPtr& right, const ComplexMatrix& w, std::array<std::size_t, 4> catalog) {
        const ProductPoset prod(*left, *right);
        const auto settings = binary_chsh_settings(left->catalog_node(catalog[0]), left->catalog_node(catalog[1]),
                                                   right->catalog_node(catalog[2]), right->catalog_node(catalog[3]));
        return bell_functional_value(section_from_bipartite_state(prod, w), chsh_coefficients(settings));
      },
      py::arg("left"), py::arg("right"), py::arg("w"), py::arg("catalog") = std::array<std::size_t, 4>{0, 1, 0, 1});

  m.def(
      "classify",
      [](const PosetPtr& left, const PosetPtr& right, const ComplexMatrix& w) {
        const ProductPoset prod(*left, *right);
        return classification(classify_section(prod, section_from_bipartite_state(prod, w)));
      },
      py::arg("left"), py::arg("right"), py::arg("w"));

  m.def(
      "symmetry_check",
      [](const PosetPtr& poset, const std::string& kind, const ComplexMatrix& u,
         const std::vector<std::pair<ComplexMatrix, ComplexMatrix>>& samples) {
        const SymmetryOp s(parse_kind(kind), u);
        const auto conj = conjugate_poset(*poset, s);
        const auto rep = jordan_check(s, samples);
        py::dict out;
        out["automorphism"] = trivial_presheaf_automorphism(*poset, conj.image, conj.map);
        out["node_map"] = conj.map.node_map;
        out["jordan_residual"] = rep.max_jordan_residual;
        out["commutator_signs"] = rep.commutator_signs;
        return out;
      },
      py::arg("poset"), py::arg("kind"), py::arg("u"), py::arg("samples") = std::vector<std::pair<ComplexMatrix, ComplexMatrix>>{});

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a contextua subcommand in-process; returns (exit_code, stdout, stderr).");
}
