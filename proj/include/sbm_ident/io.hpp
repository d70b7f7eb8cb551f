#pragma once

// File formats: JSON parameter files and reports, tab-separated edge lists.
//
// Edge list:
//   # n=<N> kind=<binary|finite|weighted>
//   i<TAB>j<TAB>value        1 <= i < j <= N, one line per pair
// Binary values are 0/1, finite values are states 0..kappa-1 and weighted
// values are edge weights with 0 for an absent edge. Pairs without a line
// read as 0.

#include <sbm_ident/mixture_recovery.hpp>
#include <sbm_ident/moments.hpp>
#include <sbm_ident/sampler.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace sbm_ident {

using Json = nlohmann::json;

inline constexpr const char* kReportSchema = "sbm-ident/1";

using AnyParams = std::variant<BinaryBlockParams, AffiliationParams, FiniteStateParams, WeightedParams>;

namespace detail {

[[noreturn]] inline void bad_params(const std::string& what) {
  throw Error(ErrorCode::InvalidParams, "parameter file: " + what);
}

inline const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) bad_params(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline double number(const Json& j, const std::string& what) {
  if (!j.is_number()) bad_params(what + " must be a number");
  return j.get<double>();
}

inline std::vector<double> number_array(const Json& j, const std::string& what) {
  if (!j.is_array()) bad_params(what + " must be an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, what));
  return out;
}

inline Matrix square_matrix(const Json& j, int Q, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != Q) bad_params(what + " must be a " + std::to_string(Q) + "x" + std::to_string(Q) + " array");
  Matrix m(Q, Q);
  for (int q = 0; q < Q; ++q) {
    const auto row = number_array(j[static_cast<std::size_t>(q)], what);
    if (static_cast<int>(row.size()) != Q) bad_params(what + " rows must have " + std::to_string(Q) + " entries");
    for (int l = 0; l < Q; ++l) m(q, l) = row[static_cast<std::size_t>(l)];
  }
  return m;
}

inline Json matrix_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

}  // namespace detail

/// Parses and validates a parameter object.
inline AnyParams params_from_json(const Json& j) {
  if (!j.is_object()) detail::bad_params("top level must be an object");
  const auto model = detail::field(j, "model").get<std::string>();
  const auto pi = detail::number_array(detail::field(j, "pi"), "pi");
  const int Q = static_cast<int>(pi.size());
  if (j.contains("Q") && j.at("Q").get<int>() != Q) detail::bad_params("Q does not match the length of pi");

  AnyParams out;
  if (model == "binary") {
    out = BinaryBlockParams{pi, detail::square_matrix(detail::field(j, "P"), Q, "P")};
  } else if (model == "affiliation") {
    out = AffiliationParams{pi, detail::number(detail::field(j, "alpha"), "alpha"),
                            detail::number(detail::field(j, "beta"), "beta")};
  } else if (model == "finite") {
    FiniteStateParams f;
    f.pi = pi;
    f.kappa = detail::field(j, "kappa").get<int>();
    const auto& pv = detail::field(j, "Pvec");
    if (!pv.is_array() || static_cast<int>(pv.size()) != Q) detail::bad_params("Pvec must be a QxQ array of state vectors");
    for (int q = 0; q < Q; ++q) {
      const auto& row = pv[static_cast<std::size_t>(q)];
      if (!row.is_array() || static_cast<int>(row.size()) != Q) detail::bad_params("Pvec must be a QxQ array of state vectors");
      for (int l = 0; l < Q; ++l) f.probs.push_back(detail::number_array(row[static_cast<std::size_t>(l)], "Pvec entry"));
    }
    out = std::move(f);
  } else if (model == "weighted") {
    WeightedParams w;
    w.pi = pi;
    const auto family = j.value("family", std::string("truncated_poisson"));
    if (family != "truncated_poisson") detail::bad_params("unsupported weight family \"" + family + "\"");
    w.sparsity = detail::square_matrix(detail::field(j, "sparsity"), Q, "sparsity");
    w.theta = detail::square_matrix(detail::field(j, "theta"), Q, "theta");
    out = std::move(w);
  } else {
    detail::bad_params("unknown model \"" + model + "\" (binary, affiliation, finite, weighted)");
  }
  std::visit([](const auto& p) { require_valid(p); }, out);
  return out;
}

inline Json to_json(const BinaryBlockParams& p) {
  return {{"model", "binary"}, {"Q", p.groups()}, {"pi", p.pi}, {"P", detail::matrix_json(p.P)}};
}
inline Json to_json(const AffiliationParams& p) {
  return {{"model", "affiliation"}, {"Q", p.groups()}, {"pi", p.pi}, {"alpha", p.alpha}, {"beta", p.beta}};
}
inline Json to_json(const FiniteStateParams& p) {
  Json pv = Json::array();
  for (int q = 0; q < p.groups(); ++q) {
    Json row = Json::array();
    for (int l = 0; l < p.groups(); ++l) row.push_back(p.at(q, l));
    pv.push_back(row);
  }
  return {{"model", "finite"}, {"Q", p.groups()}, {"pi", p.pi}, {"kappa", p.kappa}, {"Pvec", pv}};
}
inline Json to_json(const WeightedParams& p) {
  return {{"model", "weighted"},
          {"Q", p.groups()},
          {"pi", p.pi},
          {"sparsity", detail::matrix_json(p.sparsity)},
          {"family", "truncated_poisson"},
          {"theta", detail::matrix_json(p.theta)}};
}
inline Json to_json(const AnyParams& p) {
  return std::visit([](const auto& x) { return to_json(x); }, p);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidParams, path + ": " + e.what());
  }
}

inline AnyParams read_params(const std::string& path) {
  const Json j = read_json_file(path);
  try {
    return params_from_json(j);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidParams, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Moment sets.

inline Json to_json(const MomentSet& ms) {
  Json out = Json::object();
  for (Motif m : kAllMotifs)
    if (const auto& v = moment(ms, m)) out[std::string(motif_name(m))] = *v;
  return out;
}

/// Reads m1..m6 from `j`, or from j["moments"] when present.
inline MomentSet moments_from_json(const Json& j) {
  const Json& src = j.contains("moments") ? j.at("moments") : j;
  MomentSet ms;
  ms.provenance = j.value("provenance", std::string("theoretical")) == "empirical" ? Provenance::Empirical
                                                                                    : Provenance::Theoretical;
  for (Motif m : kAllMotifs) {
    const std::string key(motif_name(m));
    if (src.contains(key)) moment(ms, m) = detail::number(src.at(key), key);
  }
  return ms;
}

// ---------------------------------------------------------------------------
// Mixture components. An atom is the string "zero" or {"theta": x}.

inline Json to_json(const MixtureComponentSet& s) {
  Json comps = Json::array();
  for (const auto& c : s.components) {
    Json atoms = Json::array();
    for (const auto& a : c.atoms) atoms.push_back(a.dirac ? Json("zero") : Json{{"theta", a.theta}});
    comps.push_back({{"weight", c.weight}, {"atoms", atoms}});
  }
  return {{"arity", s.arity}, {"components", comps}};
}

inline MixtureComponentSet mixture_from_json(const Json& j) {
  MixtureComponentSet s;
  s.arity = detail::field(j, "arity").get<int>();
  for (const auto& c : detail::field(j, "components")) {
    Component comp;
    comp.weight = detail::number(detail::field(c, "weight"), "weight");
    for (const auto& a : detail::field(c, "atoms")) {
      if (a.is_string() && a.get<std::string>() == "zero") comp.atoms.push_back(Atom::zero());
      else comp.atoms.push_back(Atom::family(detail::number(detail::field(a, "theta"), "theta")));
    }
    s.components.push_back(std::move(comp));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Edge lists.

constexpr std::string_view kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Binary: return "binary";
    case EdgeKind::Finite: return "finite";
    case EdgeKind::Weighted: return "weighted";
  }
  return "";
}

namespace detail {

inline void append_number(std::string& out, double v) {
  char buf[32];
  const double r = std::round(v);
  auto res = r == v && std::abs(v) < 9e15 ? std::to_chars(buf, buf + sizeof buf, static_cast<long long>(r))
                                          : std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace detail

inline void write_edge_list(std::ostream& os, const SampledGraph& g) {
  os << "# n=" << g.n << " kind=" << kind_name(g.kind) << '\n';
  std::string line;
  std::size_t e = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j, ++e) {
      line.clear();
      detail::append_number(line, i + 1);
      line += '\t';
      detail::append_number(line, j + 1);
      line += '\t';
      detail::append_number(line, g.values[e]);
      line += '\n';
      os << line;
    }
}

inline SampledGraph read_edge_list(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::Io, "edge list is empty");
  SampledGraph g;
  {
    std::istringstream hs(line);
    std::string hash, ntok, ktok;
    hs >> hash >> ntok >> ktok;
    if (hash != "#" || ntok.rfind("n=", 0) != 0 || ktok.rfind("kind=", 0) != 0)
      throw Error(ErrorCode::Io, "edge list header must read \"# n=<N> kind=<binary|finite|weighted>\"");
    g.n = std::stoi(ntok.substr(2));
    const auto kind = ktok.substr(5);
    if (kind == "binary") g.kind = EdgeKind::Binary;
    else if (kind == "finite") g.kind = EdgeKind::Finite;
    else if (kind == "weighted") g.kind = EdgeKind::Weighted;
    else throw Error(ErrorCode::Io, "unknown edge kind \"" + kind + "\"");
  }
  if (g.n < 2) throw Error(ErrorCode::Io, "edge list needs n >= 2");
  g.values.assign(edge_count(g.n), 0.0);
  std::vector<char> seen(g.values.size(), 0);
  int max_state = 1;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long i = 0, j = 0;
    double v = 0.0;
    if (!(ls >> i >> j >> v) || i < 1 || j <= i || j > g.n)
      throw Error(ErrorCode::Io, "edge list line " + std::to_string(lineno) + ": expected i<TAB>j<TAB>value with 1 <= i < j <= n");
    const std::size_t e = edge_index(static_cast<int>(i - 1), static_cast<int>(j - 1), g.n);
    if (seen[e]) throw Error(ErrorCode::Io, "edge list line " + std::to_string(lineno) + ": duplicate pair");
    seen[e] = 1;
    if (g.kind == EdgeKind::Binary && v != 0.0 && v != 1.0)
      throw Error(ErrorCode::Io, "edge list line " + std::to_string(lineno) + ": binary value must be 0 or 1");
    if (g.kind == EdgeKind::Finite) {
      if (v < 0 || v != std::floor(v))
        throw Error(ErrorCode::Io, "edge list line " + std::to_string(lineno) + ": state must be a nonnegative integer");
      max_state = std::max(max_state, static_cast<int>(v));
    }
    g.values[e] = v;
  }
  g.kappa = g.kind == EdgeKind::Finite ? max_state + 1 : g.kind == EdgeKind::Binary ? 2 : 0;
  return g;
}

inline SampledGraph read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_edge_list(in);
}

/// node<TAB>group, both 1-based.
inline void write_latent(std::ostream& os, const std::vector<int>& z) {
  os << "# n=" << z.size() << " latent\n";
  for (std::size_t i = 0; i < z.size(); ++i) os << i + 1 << '\t' << z[i] + 1 << '\n';
}

}  // namespace sbm_ident
