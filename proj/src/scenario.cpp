#include "contextua/scenario.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace contextua {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalar expressions

namespace {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  double parse() {
    const double v = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    if (!std::isfinite(v)) fail("value is not finite");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error("bad expression \"" + std::string(text_) + "\": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    while (true) {
      if (accept('+')) {
        v += term();
      } else if (accept('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = unary();
    while (true) {
      if (accept('*')) {
        v *= unary();
      } else if (accept('/')) {
        const double d = unary();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return primary();
  }

  double primary() {
    skip_space();
    if (accept('(')) {
      const double v = expr();
      if (!accept(')')) fail("missing ')'");
      return v;
    }
    if (text_.substr(pos_, 4) == "sqrt") {
      pos_ += 4;
      if (!accept('(')) fail("expected '(' after sqrt");
      const double v = expr();
      if (!accept(')')) fail("missing ')'");
      if (v < 0.0) fail("sqrt of a negative number");
      return std::sqrt(v);
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' || text_[pos_] == 'e' ||
            text_[pos_] == 'E' ||
            ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    if (start == pos_) fail("expected a number");
    const std::string token(text_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      fail("bad number '" + token + "'");
    }
    if (used != token.size()) fail("bad number '" + token + "'");
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ScenarioError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError(path, "missing required key \"" + key + "\"");
  return *it;
}

const json& require_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ScenarioError(path, "expected an array");
  return v;
}

std::size_t parse_index(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ScenarioError(path, "expected a non-negative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

double parse_real(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return parse_real_expression(v.get<std::string>());
    } catch (const Error& e) {
      throw ScenarioError(path, e.what());
    }
  }
  throw ScenarioError(path, "expected a number or expression string");
}

Complex parse_complex(const json& v, const std::string& path) {
  if (v.is_array()) {
    if (v.size() != 2) throw ScenarioError(path, "complex entry must be [re, im]");
    return {parse_real(v[0], path + "[0]"), parse_real(v[1], path + "[1]")};
  }
  return {parse_real(v, path), 0.0};
}

ComplexMatrix parse_matrix(const json& v, std::size_t n, const std::string& path) {
  require_array(v, path);
  if (v.size() != n) throw ScenarioError(path, "expected " + std::to_string(n) + " rows");
  ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row_path = index_path(path, i);
    require_array(v[i], row_path);
    if (v[i].size() != n) throw ScenarioError(row_path, "expected " + std::to_string(n) + " entries");
    for (std::size_t j = 0; j < n; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_complex(v[i][j], index_path(row_path, j));
    }
  }
  return m;
}

std::size_t atom_count(const PartyCatalog& party, std::size_t context) {
  const std::size_t k = party.contexts.at(context).size();
  return k < party.dim ? k + 1 : k;
}

PartyCatalog parse_party(const json& obj, const std::string& path) {
  PartyCatalog party;
  const json& dim = require(obj, "dim", path);
  if (!dim.is_number_integer() || dim.get<long long>() < 1) throw ScenarioError(path + ".dim", "expected a positive integer");
  party.dim = static_cast<std::size_t>(dim.get<long long>());

  const std::string rays_path = path + ".rays";
  const json& rays = require_array(require(obj, "rays", path), rays_path);
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const auto ray_path = index_path(rays_path, r);
    require_array(rays[r], ray_path);
    if (rays[r].size() != party.dim) {
      throw ScenarioError(ray_path, "vector has length " + std::to_string(rays[r].size()) + ", expected " +
                                        std::to_string(party.dim));
    }
    ComplexVector v(static_cast<Eigen::Index>(party.dim));
    for (std::size_t k = 0; k < party.dim; ++k) v(static_cast<Eigen::Index>(k)) = parse_complex(rays[r][k], index_path(ray_path, k));
    try {
      party.rays.push_back(Ray(v).vector());
    } catch (const Error&) {
      throw ScenarioError(ray_path, "degenerate ray");
    }
  }

  for (std::size_t i = 0; i < party.rays.size(); ++i) {
    const ComplexMatrix pi = party.rays[i] * party.rays[i].adjoint();
    for (std::size_t j = i + 1; j < party.rays.size(); ++j) {
      const double d = max_abs(pi - party.rays[j] * party.rays[j].adjoint());
      if (d <= kIngestTol) {
        throw ScenarioError(index_path(rays_path, j), "duplicate of ray " + std::to_string(i));
      }
      if (d < kCanonicalGrid) {
        throw ScenarioError(index_path(rays_path, j),
                            "near-duplicate of ray " + std::to_string(i) + " below the canonicalization grid");
      }
    }
  }

  const std::string ctx_path = path + ".contexts";
  const json& contexts = require_array(require(obj, "contexts", path), ctx_path);
  for (std::size_t c = 0; c < contexts.size(); ++c) {
    const auto cpath = index_path(ctx_path, c);
    require_array(contexts[c], cpath);
    if (contexts[c].empty()) throw ScenarioError(cpath, "context has no rays");
    if (contexts[c].size() > party.dim) throw ScenarioError(cpath, "more rays than the dimension");
    std::vector<std::size_t> idx;
    std::set<std::size_t> seen;
    for (std::size_t k = 0; k < contexts[c].size(); ++k) {
      const std::size_t r = parse_index(contexts[c][k], index_path(cpath, k));
      if (r >= party.rays.size()) throw ScenarioError(index_path(cpath, k), "ray index out of range");
      if (!seen.insert(r).second) throw ScenarioError(index_path(cpath, k), "ray listed twice");
      idx.push_back(r);
    }
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        if (std::abs(party.rays[idx[a]].dot(party.rays[idx[b]])) > kIngestTol) {
          throw ScenarioError(cpath, "rays " + std::to_string(idx[a]) + " and " + std::to_string(idx[b]) +
                                         " are not orthogonal");
        }
      }
    }
    party.contexts.push_back(std::move(idx));
  }
  return party;
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const ComplexMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

json party_to_json(const PartyCatalog& p) {
  json out;
  out["dim"] = p.dim;
  json rays = json::array();
  for (const auto& r : p.rays) {
    json ray = json::array();
    for (Eigen::Index k = 0; k < r.size(); ++k) ray.push_back(complex_to_json(r(k)));
    rays.push_back(std::move(ray));
  }
  out["rays"] = std::move(rays);
  out["contexts"] = p.contexts;
  return out;
}

}  // namespace

double parse_real_expression(std::string_view text) { return ExpressionParser(text).parse(); }

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("$", "expected an object");

  Scenario s;
  const json& kind = require(doc, "kind", "$");
  if (kind == "single") {
    s.kind = ScenarioKind::single;
  } else if (kind == "bipartite") {
    s.kind = ScenarioKind::bipartite;
  } else {
    throw ScenarioError("$.kind", "expected \"single\" or \"bipartite\"");
  }
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw ScenarioError("$.name", "expected a string");
    s.name = it->get<std::string>();
  }
  if (auto it = doc.find("metadata"); it != doc.end()) s.metadata = *it;

  if (s.kind == ScenarioKind::single) {
    s.parties.push_back(parse_party(doc, "$"));
  } else {
    const json& parties = require_array(require(doc, "parties", "$"), "$.parties");
    if (parties.size() != 2) throw ScenarioError("$.parties", "expected exactly two parties");
    for (std::size_t k = 0; k < 2; ++k) s.parties.push_back(parse_party(parties[k], index_path("$.parties", k)));
  }

  const std::size_t total_dim = s.kind == ScenarioKind::single ? s.parties[0].dim : s.parties[0].dim * s.parties[1].dim;
  if (auto it = doc.find("state"); it != doc.end()) {
    ComplexMatrix m = parse_matrix(*it, total_dim, "$.state");
    if (!is_self_adjoint(m, kIngestTol)) throw ScenarioError("$.state", "state is not self-adjoint");
    s.state = 0.5 * (m + m.adjoint());
  }

  if (auto it = doc.find("section"); it != doc.end()) {
    if (s.kind != ScenarioKind::single) throw ScenarioError("$.section", "only single-party scenarios carry a section");
    require_array(*it, "$.section");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto path = index_path("$.section", k);
      MeasureSpec m;
      m.context = parse_index(require((*it)[k], "context", path), path + ".context");
      if (m.context >= s.parties[0].contexts.size()) throw ScenarioError(path + ".context", "context index out of range");
      const json& w = require_array(require((*it)[k], "weights", path), path + ".weights");
      if (w.size() != atom_count(s.parties[0], m.context)) {
        throw ScenarioError(path + ".weights", "expected " + std::to_string(atom_count(s.parties[0], m.context)) + " weights");
      }
      for (std::size_t a = 0; a < w.size(); ++a) m.weights.push_back(parse_real(w[a], index_path(path + ".weights", a)));
      s.section.push_back(std::move(m));
    }
  }

  if (s.kind == ScenarioKind::bipartite) {
    const auto& pl = s.parties[0];
    const auto& pr = s.parties[1];
    if (auto it = doc.find("tables"); it != doc.end()) {
      require_array(*it, "$.tables");
      for (std::size_t k = 0; k < it->size(); ++k) {
        const auto path = index_path("$.tables", k);
        TableSpec t;
        t.left = parse_index(require((*it)[k], "left", path), path + ".left");
        t.right = parse_index(require((*it)[k], "right", path), path + ".right");
        if (t.left >= pl.contexts.size()) throw ScenarioError(path + ".left", "context index out of range");
        if (t.right >= pr.contexts.size()) throw ScenarioError(path + ".right", "context index out of range");
        const std::size_t rows = atom_count(pl, t.left);
        const std::size_t cols = atom_count(pr, t.right);
        const json& probs = require_array(require((*it)[k], "probs", path), path + ".probs");
        if (probs.size() != rows) throw ScenarioError(path + ".probs", "expected " + std::to_string(rows) + " rows");
        t.probs.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t a = 0; a < rows; ++a) {
          const auto rpath = index_path(path + ".probs", a);
          require_array(probs[a], rpath);
          if (probs[a].size() != cols) throw ScenarioError(rpath, "expected " + std::to_string(cols) + " entries");
          for (std::size_t b = 0; b < cols; ++b) {
            t.probs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = parse_real(probs[a][b], index_path(rpath, b));
          }
        }
        s.tables.push_back(std::move(t));
      }
    }
    if (auto it = doc.find("chsh"); it != doc.end()) {
      const json& l = require_array(require(*it, "left", "$.chsh"), "$.chsh.left");
      const json& r = require_array(require(*it, "right", "$.chsh"), "$.chsh.right");
      if (l.size() != 2) throw ScenarioError("$.chsh.left", "expected two context indices");
      if (r.size() != 2) throw ScenarioError("$.chsh.right", "expected two context indices");
      std::array<std::size_t, 4> idx{parse_index(l[0], "$.chsh.left[0]"), parse_index(l[1], "$.chsh.left[1]"),
                                     parse_index(r[0], "$.chsh.right[0]"), parse_index(r[1], "$.chsh.right[1]")};
      for (int k = 0; k < 4; ++k) {
        const auto& party = k < 2 ? pl : pr;
        const std::string where = k < 2 ? "$.chsh.left" : "$.chsh.right";
        if (idx[static_cast<std::size_t>(k)] >= party.contexts.size()) throw ScenarioError(where, "context index out of range");
        if (atom_count(party, idx[static_cast<std::size_t>(k)]) != 2) throw ScenarioError(where, "CHSH contexts must have two atoms");
      }
      s.chsh = idx;
    }
    if (auto it = doc.find("product_contexts"); it != doc.end()) {
      require_array(*it, "$.product_contexts");
      for (std::size_t k = 0; k < it->size(); ++k) {
        const auto path = index_path("$.product_contexts", k);
        require_array((*it)[k], path);
        if ((*it)[k].size() != 2) throw ScenarioError(path, "expected [left, right]");
        const std::size_t l = parse_index((*it)[k][0], path + "[0]");
        const std::size_t r = parse_index((*it)[k][1], path + "[1]");
        if (l >= pl.contexts.size() || r >= pr.contexts.size()) throw ScenarioError(path, "context index out of range");
        s.product_contexts.emplace_back(l, r);
      }
    }
  } else {
    for (const char* key : {"tables", "chsh", "product_contexts", "parties"}) {
      if (doc.contains(key)) throw ScenarioError(std::string("$.") + key, "only valid in bipartite scenarios");
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

json scenario_to_json(const Scenario& s) {
  json out;
  out["kind"] = s.kind == ScenarioKind::single ? "single" : "bipartite";
  if (!s.name.empty()) out["name"] = s.name;
  if (!s.metadata.is_null()) out["metadata"] = s.metadata;
  if (s.kind == ScenarioKind::single) {
    const json party = party_to_json(s.parties.at(0));
    for (const auto& [k, v] : party.items()) out[k] = v;
  } else {
    out["parties"] = json::array({party_to_json(s.parties.at(0)), party_to_json(s.parties.at(1))});
  }
  if (s.state) out["state"] = matrix_to_json(*s.state);
  if (!s.section.empty()) {
    json sec = json::array();
    for (const auto& m : s.section) sec.push_back({{"context", m.context}, {"weights", m.weights}});
    out["section"] = std::move(sec);
  }
  if (!s.tables.empty()) {
    json tables = json::array();
    for (const auto& t : s.tables) {
      json probs = json::array();
      for (Eigen::Index a = 0; a < t.probs.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < t.probs.cols(); ++b) row.push_back(t.probs(a, b));
        probs.push_back(std::move(row));
      }
      tables.push_back({{"left", t.left}, {"right", t.right}, {"probs", std::move(probs)}});
    }
    out["tables"] = std::move(tables);
  }
  if (s.chsh) {
    const auto& c = *s.chsh;
    out["chsh"] = {{"left", {c[0], c[1]}}, {"right", {c[2], c[3]}}};
  }
  if (!s.product_contexts.empty()) {
    json pcs = json::array();
    for (const auto& [l, r] : s.product_contexts) pcs.push_back({l, r});
    out["product_contexts"] = std::move(pcs);
  }
  return out;
}

std::string emit_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

namespace {

bool close(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || max_abs(a - b) <= tol);
}

}  // namespace

bool scenario_equal(const Scenario& a, const Scenario& b, double tol) {
  if (a.kind != b.kind || a.name != b.name || a.metadata != b.metadata || a.parties.size() != b.parties.size()) return false;
  for (std::size_t k = 0; k < a.parties.size(); ++k) {
    const auto& pa = a.parties[k];
    const auto& pb = b.parties[k];
    if (pa.dim != pb.dim || pa.contexts != pb.contexts || pa.rays.size() != pb.rays.size()) return false;
    for (std::size_t r = 0; r < pa.rays.size(); ++r) {
      if (!close(pa.rays[r], pb.rays[r], tol)) return false;
    }
  }
  if (a.state.has_value() != b.state.has_value() || (a.state && !close(*a.state, *b.state, tol))) return false;
  if (a.section.size() != b.section.size() || a.tables.size() != b.tables.size()) return false;
  for (std::size_t k = 0; k < a.section.size(); ++k) {
    if (a.section[k].context != b.section[k].context || a.section[k].weights.size() != b.section[k].weights.size()) return false;
    for (std::size_t w = 0; w < a.section[k].weights.size(); ++w) {
      if (std::abs(a.section[k].weights[w] - b.section[k].weights[w]) > tol) return false;
    }
  }
  for (std::size_t k = 0; k < a.tables.size(); ++k) {
    const auto& ta = a.tables[k];
    const auto& tb = b.tables[k];
    if (ta.left != tb.left || ta.right != tb.right || ta.probs.rows() != tb.probs.rows() || ta.probs.cols() != tb.probs.cols()) {
      return false;
    }
    if (ta.probs.size() > 0 && (ta.probs - tb.probs).cwiseAbs().maxCoeff() > tol) return false;
  }
  return a.chsh == b.chsh && a.product_contexts == b.product_contexts;
}

std::vector<Context> party_contexts(const PartyCatalog& party, double tol) {
  std::vector<Context> out;
  const auto n = static_cast<Eigen::Index>(party.dim);
  for (const auto& idx : party.contexts) {
    std::vector<Projection> atoms;
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (std::size_t r : idx) {
      atoms.push_back(projection_from_ray(Ray(party.rays.at(r))));
      sum += atoms.back().matrix();
    }
    if (idx.size() < party.dim) {
      ComplexMatrix rest = ComplexMatrix::Identity(n, n) - sum;
      rest = 0.5 * (rest + rest.adjoint()).eval();
      atoms.emplace_back(std::move(rest), std::max(tol, 1e-9) * 10.0);
    }
    out.emplace_back(std::move(atoms), std::max(tol, 1e-9) * 10.0);
  }
  return out;
}

ContextPoset party_poset(const PartyCatalog& party, double tol) {
  const auto contexts = party_contexts(party, kIngestTol);
  return generate_poset(party.dim, contexts, tol);
}

std::vector<std::size_t> ray_incidence(const PartyCatalog& party) {
  std::vector<std::size_t> out(party.rays.size(), 0);
  for (const auto& c : party.contexts) {
    for (std::size_t r : c) ++out[r];
  }
  return out;
}

ProbSection section_from_measures(const ContextPoset& poset, const std::vector<MeasureSpec>& measures) {
  std::map<NodeId, std::vector<double>> given;
  for (const auto& m : measures) {
    const NodeId node = poset.catalog_node(m.context);
    if (m.weights.size() != poset.atom_count(node)) throw Error("section_from_measures: weight count mismatch");
    given.emplace(node, m.weights);
  }
  ProbSection s;
  for (NodeId i = 0; i < poset.size(); ++i) {
    if (auto it = given.find(i); it != given.end()) {
      s.weights.emplace(i, it->second);
      continue;
    }
    for (const auto& [large, w] : given) {
      if (poset.leq(i, large)) {
        s.weights.emplace(i, marginalise(poset, w, i, large));
        break;
      }
    }
  }
  return s;
}

}  // namespace contextua
