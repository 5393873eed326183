#include "doctest.h"

#include "contextua/random.hpp"
#include "contextua/scenario.hpp"
#include "contextua/spectral.hpp"
#include "oracles.hpp"

using namespace contextua;

namespace {

std::vector<std::vector<ComplexMatrix>> catalog_atoms(const std::vector<Context>& catalog) {
  std::vector<std::vector<ComplexMatrix>> out;
  for (const auto& c : catalog) {
    out.emplace_back();
    for (const auto& p : c.atoms()) out.back().push_back(p.matrix());
  }
  return out;
}

std::vector<Context> cabello_catalog() {
  const auto s = load_scenario(CONTEXTUA_SCENARIO_DIR "/ks_cabello18_c4.json");
  return party_contexts(s.parties.at(0));
}

Context standard_basis(std::size_t n) {
  return basis_context(ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

}  // namespace

TEST_CASE("single basis in C^3 has three global sections") {
  const std::vector<Context> catalog{standard_basis(3)};
  const auto poset = generate_poset(3, catalog);
  const auto cert = find_global_section(poset);
  CHECK(cert.verdict == ColoringVerdict::colorable);
  REQUIRE(cert.section.has_value());
  CHECK(verify_section(poset, *cert.section));
  const auto all = enumerate_global_sections(poset, 100);
  CHECK(all.sections.size() == 3);
  CHECK_FALSE(all.truncated);
  CHECK(oracle::count_colorings(catalog_atoms(catalog)).solutions == 3);
  CHECK_THROWS_AS(enumerate_global_sections(poset, 0), Error);
  const auto capped = enumerate_global_sections(poset, 2);
  CHECK(capped.sections.size() == 2);
  CHECK(capped.truncated);
}

TEST_CASE("two generic bases in C^3 have nine global sections") {
  Rng rng(99);
  const std::vector<Context> catalog{standard_basis(3), basis_context(random_unitary(3, rng))};
  const auto poset = generate_poset(3, catalog);
  const auto all = enumerate_global_sections(poset, 1000);
  CHECK(all.sections.size() == 9);
  CHECK(oracle::count_colorings(catalog_atoms(catalog)).solutions == 9);
  for (const auto& s : all.sections) CHECK(verify_section(poset, s));
}

TEST_CASE("the 18-ray catalog in C^4 has no global section") {
  const auto catalog = cabello_catalog();
  REQUIRE(catalog.size() == 9);
  const auto poset = generate_poset(4, catalog);
  const auto cert = find_global_section(poset);
  CHECK(cert.verdict == ColoringVerdict::non_colorable);
  CHECK(cert.exhausted);
  CHECK_FALSE(cert.section.has_value());
  CHECK(enumerate_global_sections(poset, 1000000).sections.empty());
  const auto brute = oracle::count_colorings(catalog_atoms(catalog));
  CHECK(brute.tuples_checked == 262144);  // 4^9
  CHECK(brute.solutions == 0);
}

TEST_CASE("dropping one basis from the 18-ray catalog makes it colorable") {
  auto catalog = cabello_catalog();
  for (std::size_t drop = 0; drop < catalog.size(); ++drop) {
    std::vector<Context> sub;
    for (std::size_t k = 0; k < catalog.size(); ++k)
      if (k != drop) sub.push_back(catalog[k]);
    const auto poset = generate_poset(4, sub);
    const auto cert = find_global_section(poset);
    const auto brute = oracle::count_colorings(catalog_atoms(sub));
    CHECK((cert.verdict == ColoringVerdict::colorable) == (brute.solutions > 0));
    const auto all = enumerate_global_sections(poset, 1000000);
    CHECK(all.sections.size() == brute.solutions);
  }
}

TEST_CASE("solver and enumeration agree on random catalogs") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 2);
    // bases built around shared rays so constraints interact
    std::vector<Context> catalog{standard_basis(n)};
    for (int k = 0; k < 3; ++k) {
      ComplexMatrix u = random_unitary(n, rng);
      const Eigen::Index keep = static_cast<Eigen::Index>(rng() % n);
      u.col(0) = ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)).col(keep);
      Eigen::HouseholderQR<ComplexMatrix> qr(u);
      catalog.push_back(basis_context(ComplexMatrix(qr.householderQ())));
    }
    const auto poset = generate_poset(n, catalog);
    const auto cert = find_global_section(poset);
    const auto all = enumerate_global_sections(poset, 1000000);
    CHECK((cert.verdict == ColoringVerdict::colorable) == !all.sections.empty());
    CHECK(all.sections.size() == oracle::count_colorings(catalog_atoms(catalog)).solutions);
    if (cert.section) CHECK(verify_section(poset, *cert.section));
  }
}

TEST_CASE("random catalogs in C^2 are always colorable") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto catalog = random_basis_catalog(2, 1 + static_cast<std::size_t>(trial % 5), rng);
    const auto poset = generate_poset(2, catalog);
    CHECK(find_global_section(poset).verdict == ColoringVerdict::colorable);
  }
  const auto mub = mutually_unbiased_bases(2);
  CHECK(find_global_section(generate_poset(2, mub)).verdict == ColoringVerdict::colorable);
}

TEST_CASE("adding contexts never restores colorability") {
  const auto catalog = cabello_catalog();
  bool was_colorable = true;
  for (std::size_t k = 1; k <= catalog.size(); ++k) {
    std::vector<Context> prefix(catalog.begin(), catalog.begin() + static_cast<std::ptrdiff_t>(k));
    const bool colorable = find_global_section(generate_poset(4, prefix)).verdict == ColoringVerdict::colorable;
    if (!was_colorable) CHECK_FALSE(colorable);
    was_colorable = colorable;
  }
  CHECK_FALSE(was_colorable);
}

TEST_CASE("restriction of characters") {
  const std::vector<Context> catalog{standard_basis(3)};
  const auto poset = generate_poset(3, catalog);
  const NodeId top = poset.catalog_node(0);
  CHECK(restrict_character(poset, {top, 1}, top) == Character{top, 1});
  CHECK(restrict_character(poset, {top, 2}, poset.trivial()).chosen_atom == 0);
  // choosing p2 in {p1,p2,p3} restricts to 1-p1 in {p1, 1-p1}
  ComplexMatrix p1 = ComplexMatrix::Zero(3, 3);
  p1(0, 0) = 1;
  const auto v1 = poset.find(Context({Projection(p1), Projection(p1).complement()}));
  REQUIRE(v1.has_value());
  const auto r = restrict_character(poset, {top, 1}, *v1);
  const auto& picked = poset.registry().at(poset.atoms(*v1)[r.chosen_atom]);
  CHECK(picked.rank() == 2);
  CHECK(oracle::max_abs(picked.matrix() - (ComplexMatrix::Identity(3, 3) - p1)) < 1e-12);
}

TEST_CASE("character restriction composes along chains") {
  Rng rng(31);
  const auto catalog = random_basis_catalog(3, 2, rng);
  for (const auto& poset : {generate_poset(3, catalog), generate_poset(4, cabello_catalog())}) {
    std::size_t chains = 0;
    for (const auto& [i, j, k] : poset.chains3()) {
      for (std::size_t a = 0; a < poset.atom_count(k); ++a) {
        const Character top{k, a};
        const auto via = restrict_character(poset, restrict_character(poset, top, j), i);
        CHECK(via == restrict_character(poset, top, i));
      }
      ++chains;
    }
    CHECK(chains > 0);
  }
}

TEST_CASE("verify_section rejects inconsistent choices") {
  Rng rng(1);
  ComplexMatrix id = ComplexMatrix::Identity(3, 3);
  ComplexMatrix u = random_unitary(3, rng);
  u.col(0) = id.col(0);
  Eigen::HouseholderQR<ComplexMatrix> qr(u);
  const std::vector<Context> catalog{basis_context(id), basis_context(ComplexMatrix(qr.householderQ()))};
  const auto poset = generate_poset(3, catalog);
  const auto all = enumerate_global_sections(poset, 100);
  REQUIRE_FALSE(all.sections.empty());
  SpectralSection s = all.sections.front();
  CHECK(verify_section(poset, s));

  // shared ray chosen in one basis only
  const NodeId a = poset.catalog_node(0);
  const NodeId b = poset.catalog_node(1);
  const auto shared = oracle::count_colorings(catalog_atoms(catalog));
  CHECK(all.sections.size() == shared.solutions);
  SpectralSection bad = s;
  bad.chosen[b] = (bad.chosen[b] + 1) % poset.atom_count(b);
  bool consistent_pair = false;
  for (const auto& t : all.sections) consistent_pair |= t.chosen.at(a) == bad.chosen.at(a) && t.chosen.at(b) == bad.chosen.at(b);
  if (!consistent_pair) CHECK_FALSE(verify_section(poset, bad));

  // mismatch only on an edge: a lower node disagreeing with its upper node
  SpectralSection edge = s;
  for (NodeId i = 0; i < poset.size(); ++i) {
    if (i != a && poset.leq(i, a) && poset.atom_count(i) > 1) {
      edge.chosen[i] = (edge.chosen[i] + 1) % poset.atom_count(i);
      break;
    }
  }
  CHECK_FALSE(verify_section(poset, edge));
  SpectralSection partial = s;
  partial.chosen.erase(poset.trivial());
  CHECK_FALSE(verify_section(poset, partial));
}

TEST_CASE("global sections obey the spectrum rule and functional composition") {
  Rng rng(12);
  const auto catalog = random_basis_catalog(3, 2, rng);
  const auto poset = generate_poset(3, catalog);
  const auto all = enumerate_global_sections(poset, 1000);
  for (const auto& s : all.sections) {
    for (NodeId node : poset.maximal_nodes()) {
      ComplexMatrix a = ComplexMatrix::Zero(3, 3);
      std::vector<double> spectrum;
      for (std::size_t k = 0; k < poset.atom_count(node); ++k) {
        const double e = static_cast<double>(k) * 1.5 - 1.0;
        spectrum.push_back(e);
        a += e * poset.registry().at(poset.atoms(node)[k]).matrix();
      }
      const double v = valuation(poset, s, node, a);
      CHECK(std::find_if(spectrum.begin(), spectrum.end(), [&](double e) { return std::abs(e - v) < 1e-9; }) !=
            spectrum.end());
      const ComplexMatrix fa = a * a * a - 2.0 * a;
      CHECK(valuation(poset, s, node, fa) == doctest::Approx(v * v * v - 2.0 * v));
    }
  }
}

TEST_CASE("Kochen-Specker triples") {
  Rng rng(14);
  const ComplexMatrix a = random_hermitian(3, rng);
  CHECK(ks_triple_check(a, a, a));
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d.diagonal() << 1, 2, 3;
  ComplexMatrix e = ComplexMatrix::Zero(3, 3);
  e.diagonal() << 4, 4, 1;
  CHECK(ks_triple_check(d, e, ComplexMatrix::Identity(3, 3)));

  // a = diag(1,2,3) and b with eigenbasis {e1, (e2±e3)/√2}: c = p1 is a
  // function of both while a and b do not commute
  ComplexMatrix b = ComplexMatrix::Zero(3, 3);
  b(0, 0) = 5;
  b(1, 2) = b(2, 1) = 1;
  ComplexMatrix p1 = ComplexMatrix::Zero(3, 3);
  p1(0, 0) = 1;
  CHECK_FALSE(commutes(d, b));
  CHECK(ks_triple_check(d, b, p1));
  CHECK_FALSE(ks_triple_check(d, b, b));
}
