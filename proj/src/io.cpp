#include "eqot/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "eqot/error.hpp"

namespace eqot::io {

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Validation, where + ": " + what);
}

double number_at(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  invalid(where, "expected a number");
}

Index index_at(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    invalid(where, "expected a nonnegative integer");
  return static_cast<Index>(j.get<long long>());
}

const Json& member(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) invalid(where, "expected an object");
  if (!j.contains(key)) invalid(where, std::string("missing key \"") + key + "\"");
  return j.at(key);
}

std::vector<std::string> labels_from(const Json& j, const std::string& where) {
  if (!j.is_array()) invalid(where, "expected an array of labels");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& e = j[i];
    if (e.is_string()) out.push_back(e.get<std::string>());
    else if (e.is_number_integer()) out.push_back(std::to_string(e.get<long long>()));
    else invalid(where + "/" + std::to_string(i), "expected a string label");
  }
  return out;
}

std::vector<std::string> default_labels(Index n) {
  std::vector<std::string> out;
  for (Index i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

void dump_into(const Json& v, std::string& out) {
  switch (v.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        dump_into(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ',';
        dump_into(v[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_double(x) : "\"" + format_double(x) + "\"";
      break;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1,
                                                   text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    // Keep only the parser's description, after its own location prefix.
    std::string what = e.what();
    const auto cut = what.find(": ");
    if (cut != std::string::npos) what = what.substr(cut + 2);
    throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ":" +
                                           std::to_string(column) + ": " + what);
  }
}

Json load_json(const std::string& path) { return parse_json(read_file(path), path); }

std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // folds -0 into 0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string canonical_dump(const Json& value) {
  std::string out;
  dump_into(value, out);
  return out;
}

// ---------------------------------------------------------------------------
// Arrays

Vector vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) invalid(where, "expected an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(i) = number_at(j[i], where + "/" + std::to_string(i));
  return v;
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) invalid(where, "expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : (j[0].is_array() ? j[0].size() : 0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string at = where + "/" + std::to_string(r);
    if (!j[r].is_array() || j[r].size() != cols)
      invalid(at, "expected a row of length " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = number_at(j[r][c], at + "/" + std::to_string(c));
  }
  return m;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < static_cast<Index>(v.size()); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index r = 0; r < static_cast<Index>(m.rows()); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < static_cast<Index>(m.cols()); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spaces, groups, partitions, measures

FiniteMetricMeasureSpace space_from_json(const Json& j) {
  const Matrix d = matrix_from_json(member(j, "distance", ""), "/distance");
  const Index n = static_cast<Index>(d.rows());
  if (static_cast<Index>(d.cols()) != n) invalid("/distance", "table must be square");
  Vector m = j.contains("measure") ? vector_from_json(j.at("measure"), "/measure")
                                   : Vector::Ones(n);
  if (static_cast<Index>(m.size()) != n)
    invalid("/measure", "length does not match the distance table");
  std::vector<std::string> labels =
      j.contains("labels") ? labels_from(j.at("labels"), "/labels") : default_labels(n);
  if (labels.size() != n) invalid("/labels", "length does not match the distance table");
  return FiniteMetricMeasureSpace(std::move(labels), d, m);
}

Json to_json(const FiniteMetricMeasureSpace& space) {
  return Json{{"labels", space.labels()},
              {"distance", to_json(space.distance())},
              {"measure", to_json(space.masses())}};
}

std::vector<Permutation> generators_from_json(const Json& j, Index degree) {
  const Json& gens = member(j, "generators", "");
  if (!gens.is_array()) invalid("/generators", "expected an array");
  std::vector<Permutation> out;
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const std::string at = "/generators/" + std::to_string(g);
    if (!gens[g].is_array()) invalid(at, "expected an index array");
    Permutation perm;
    for (std::size_t i = 0; i < gens[g].size(); ++i)
      perm.push_back(index_at(gens[g][i], at + "/" + std::to_string(i)));
    try {
      require_permutation(perm, degree);
    } catch (const Error& e) {
      invalid(at, e.what());
    }
    out.push_back(std::move(perm));
  }
  return out;
}

Json generators_to_json(const std::vector<Permutation>& generators) {
  return Json{{"generators", generators}};
}

LeafPartition partition_from_json(const Json& j,
                                  const FiniteMetricMeasureSpace& space) {
  const Json& leaves_j = member(j, "leaves", "");
  if (!leaves_j.is_array()) invalid("/leaves", "expected an array");
  std::vector<std::vector<Index>> leaves;
  for (std::size_t f = 0; f < leaves_j.size(); ++f) {
    const std::string at = "/leaves/" + std::to_string(f);
    if (!leaves_j[f].is_array()) invalid(at, "expected an index array");
    std::vector<Index> leaf;
    for (std::size_t i = 0; i < leaves_j[f].size(); ++i)
      leaf.push_back(index_at(leaves_j[f][i], at + "/" + std::to_string(i)));
    leaves.push_back(std::move(leaf));
  }
  std::optional<std::vector<Vector>> conditionals;
  if (j.contains("conditionals")) {
    const Json& c = j.at("conditionals");
    if (!c.is_array()) invalid("/conditionals", "expected an array");
    conditionals.emplace();
    for (std::size_t f = 0; f < c.size(); ++f)
      conditionals->push_back(
          vector_from_json(c[f], "/conditionals/" + std::to_string(f)));
  }
  return LeafPartition(space, std::move(leaves), std::move(conditionals));
}

Measure measure_from_json(const Json& j, Index size) {
  const Json& w = j.is_object() ? member(j, "weights", "") : j;
  const std::string where = j.is_object() ? "/weights" : "";
  Vector v = vector_from_json(w, where);
  if (static_cast<Index>(v.size()) != size)
    invalid(where, "measure has " + std::to_string(v.size()) +
                       " weights, space has " + std::to_string(size) + " points");
  return Measure(std::move(v));
}

Json to_json(const Measure& mu) { return Json{{"weights", to_json(mu.weights())}}; }

Json coupling_to_json(const Coupling& pi, const Measure& mu0, const Measure& mu1) {
  return Json{{"plan", to_json(pi.plan)},
              {"p", pi.p},
              {"marginal_residual", pi.marginal_residual(mu0, mu1)}};
}

// ---------------------------------------------------------------------------
// Chains and graphs

MarkovChain markov_chain_from_json(const Json& j,
                                   const FiniteMetricMeasureSpace& space) {
  return MarkovChain(space, matrix_from_json(member(j, "kernel", ""), "/kernel"));
}

ReversibleChain reversible_chain_from_json(const Json& j) {
  Matrix k = matrix_from_json(member(j, "kernel", ""), "/kernel");
  std::optional<Vector> pi;
  if (j.contains("stationary")) pi = vector_from_json(j.at("stationary"), "/stationary");
  return ReversibleChain(std::move(k), std::move(pi));
}

Json kernel_to_json(const Matrix& kernel, const std::optional<Vector>& stationary) {
  Json out{{"kernel", to_json(kernel)}};
  if (stationary) out["stationary"] = to_json(*stationary);
  return out;
}

WeightedGraph graph_from_json(const Json& j) {
  const Json& v = member(j, "vertices", "");
  std::vector<std::string> labels =
      v.is_number_integer() ? default_labels(index_at(v, "/vertices"))
                            : labels_from(v, "/vertices");
  const Index n = labels.size();
  Matrix omega = Matrix::Zero(n, n);
  const Json& edges = member(j, "edges", "");
  if (!edges.is_array()) invalid("/edges", "expected an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string at = "/edges/" + std::to_string(e);
    const Json& ed = edges[e];
    if (!ed.is_array() || (ed.size() != 2 && ed.size() != 3))
      invalid(at, "expected [i, j] or [i, j, weight]");
    const Index a = index_at(ed[0], at + "/0"), b = index_at(ed[1], at + "/1");
    if (a >= n || b >= n) invalid(at, "vertex index out of range");
    if (a == b) invalid(at, "self-loops are not allowed");
    const double w = ed.size() == 3 ? number_at(ed[2], at + "/2") : 1.0;
    if (!(w > 0.0) || !std::isfinite(w)) invalid(at, "weight must be positive");
    if (omega(a, b) != 0.0) invalid(at, "duplicate edge");
    omega(a, b) = omega(b, a) = w;
  }
  if (j.contains("measure")) {
    Vector m = vector_from_json(j.at("measure"), "/measure");
    if (static_cast<Index>(m.size()) != n)
      invalid("/measure", "length does not match the vertex count");
    return WeightedGraph(std::move(labels), std::move(omega), std::move(m));
  }
  return WeightedGraph::with_degree_measure(std::move(labels), std::move(omega));
}

Json to_json(const WeightedGraph& g) {
  Json edges = Json::array();
  for (Index x = 0; x < g.size(); ++x)
    for (Index y : g.neighbors(x))
      if (x < y) edges.push_back(Json{x, y, g.weight(x, y)});
  return Json{{"vertices", g.labels()},
              {"edges", std::move(edges)},
              {"measure", to_json(g.measures())}};
}

// ---------------------------------------------------------------------------
// Reports and tables

Json to_json(const CheckResult& c) {
  return Json{{"name", c.name},     {"lhs", c.lhs},
              {"rhs", c.rhs},       {"diff", c.diff},
              {"tolerance", c.tolerance}, {"pass", c.pass}};
}

Json to_json(const RunReport& report) {
  Json digests = Json::object();
  for (const auto& [name, digest] : report.input_digests) digests[name] = digest;
  Json checks = Json::array();
  for (const auto& c : report.checks) checks.push_back(to_json(c));
  Json out{{"command", report.command},
           {"inputs", std::move(digests)},
           {"checks", std::move(checks)},
           {"pass", report.all_passed()}};
  if (report.wall_time_seconds) out["wall_time_seconds"] = *report.wall_time_seconds;
  return out;
}

std::string curvature_csv(const std::vector<CurvatureEntry>& table) {
  std::string out = "x,y,kappa\n";
  for (const auto& e : table)
    out += std::to_string(e.x) + "," + std::to_string(e.y) + "," +
           format_double(e.kappa) + "\n";
  return out;
}

std::string cd_curvature_csv(const std::vector<std::pair<Index, double>>& rows,
                             const std::vector<std::string>& labels, double N) {
  std::string out = "vertex,N,K\n";
  for (const auto& [x, k] : rows)
    out += labels[x] + "," + format_double(N) + "," + format_double(k) + "\n";
  return out;
}

}  // namespace eqot::io
