#ifndef NGCS_HARNESS_IO_HPP
#define NGCS_HARNESS_IO_HPP

// File formats.
//
//   graphs   Matrix Market coordinate files (pattern, real or integer;
//            symmetric or general) with 1-based indices, or edge-list CSV with
//            0-based node ids "i,j" per line and an optional header line. Any
//            nonzero entry is an edge; explicit zeros are skipped.
//   matrices headerless CSV, one subject per row.
//   results  results.csv plus results.json, which also embeds the config.
//
// Numbers are written with 17 significant digits through std::to_chars, so
// the output does not depend on the process locale.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ngcs/error.hpp"
#include "ngcs/harness/config.hpp"
#include "ngcs/harness/experiment.hpp"
#include "ngcs/matrix.hpp"
#include "ngcs/select.hpp"

namespace ngcs::harness {

namespace detail_io {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  return out;
}

struct RawArc {
  std::uint32_t i, j;
  std::size_t line;
};

struct RawGraph {
  std::size_t n = 0;
  std::vector<RawArc> arcs;
  /// Each stored entry stands for both orientations (Matrix Market symmetric).
  bool symmetric_storage = false;
};

inline RawGraph read_matrix_market(const std::string& path) {
  auto in = open_in(path);
  RawGraph g;
  std::string line;
  std::size_t ln = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++ln;
  {
    std::string lower = line;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto tok = split_ws(lower);
    if (tok.size() != 5 || tok[0] != "%%matrixmarket" || tok[1] != "matrix")
      throw ParseError(path, ln, "expected a '%%MatrixMarket matrix ...' banner");
    if (tok[2] != "coordinate") throw ParseError(path, ln, "only coordinate format is supported");
    if (tok[3] != "pattern" && tok[3] != "real" && tok[3] != "integer")
      throw ParseError(path, ln, "unsupported field '" + std::string(tok[3]) + "'");
    if (tok[4] == "symmetric") {
      g.symmetric_storage = true;
    } else if (tok[4] != "general") {
      throw ParseError(path, ln, "unsupported symmetry '" + std::string(tok[4]) + "'");
    }
  }
  bool have_size = false;
  std::size_t rows = 0, cols = 0, nnz = 0, seen = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    const auto tok = split_ws(t);
    if (!have_size) {
      if (tok.size() != 3 || !parse_int(tok[0], rows) || !parse_int(tok[1], cols) || !parse_int(tok[2], nnz))
        throw ParseError(path, ln, "expected 'rows cols entries'");
      if (rows != cols) throw ParseError(path, ln, "adjacency matrix must be square");
      g.n = rows;
      have_size = true;
      continue;
    }
    if (tok.size() < 2 || tok.size() > 3) throw ParseError(path, ln, "expected 'i j [value]'");
    std::size_t i = 0, j = 0;
    if (!parse_int(tok[0], i) || !parse_int(tok[1], j))
      throw ParseError(path, ln, "non-integer index");
    if (i < 1 || j < 1 || i > rows || j > cols) throw ParseError(path, ln, "index out of range");
    ++seen;
    if (tok.size() == 3) {
      double v = 0.0;
      if (!parse_double(tok[2], v)) throw ParseError(path, ln, "non-numeric value");
      if (v == 0.0) continue;
    }
    if (i == j) throw ParseError(path, ln, "self-loop at node " + std::to_string(i));
    g.arcs.push_back({static_cast<std::uint32_t>(i - 1), static_cast<std::uint32_t>(j - 1), ln});
  }
  if (!have_size) throw ParseError(path, ln, "missing size line");
  if (seen != nnz)
    throw ParseError(path, ln, "size line announces " + std::to_string(nnz) + " entries, found " +
                                   std::to_string(seen));
  return g;
}

inline RawGraph read_edge_list(const std::string& path, std::size_t n_hint) {
  auto in = open_in(path);
  RawGraph g;
  std::string line;
  std::size_t ln = 0;
  bool first = true;
  std::size_t max_id = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    // Comma-separated, or whitespace-separated when the line has no comma.
    const auto f = t.find(',') != std::string_view::npos ? split(t, ',') : split_ws(t);
    std::uint32_t i = 0, j = 0;
    const bool numeric = f.size() >= 2 && parse_int(f[0], i) && parse_int(f[1], j);
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ParseError(path, ln, "expected 'i,j' or 'i j' with non-negative integer node ids");
    }
    first = false;
    if (f.size() > 3) throw ParseError(path, ln, "too many fields");
    if (f.size() == 3) {
      double v = 0.0;
      if (!parse_double(f[2], v)) throw ParseError(path, ln, "non-numeric weight");
      if (v == 0.0) continue;
    }
    if (i == j) throw ParseError(path, ln, "self-loop at node " + std::to_string(i));
    max_id = std::max<std::size_t>(max_id, std::max(i, j));
    g.arcs.push_back({i, j, ln});
  }
  g.n = g.arcs.empty() ? n_hint : std::max(n_hint, max_id + 1);
  if (n_hint > 0 && max_id >= n_hint && !g.arcs.empty())
    throw InvalidArgument(path + ": node id " + std::to_string(max_id) + " exceeds the node count " +
                          std::to_string(n_hint));
  return g;
}

inline bool is_matrix_market(const std::string& path) {
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  return first.rfind("%%MatrixMarket", 0) == 0 || first.rfind("%%matrixmarket", 0) == 0;
}

}  // namespace detail_io

/// An input network: undirected for the adj and lap bases, directed for dsvd.
struct LoadedGraph {
  std::optional<SparseSymGraph> undirected;
  std::optional<DirectedGraph> directed;
  std::size_t size() const { return undirected ? undirected->size() : (directed ? directed->size() : 0); }
};

/// Reads a graph. Duplicate entries raise ParseError at the repeated line.
/// Asymmetric input is accepted only for the directed (dsvd) basis. For edge
/// lists `n_nodes` may fix the node count (0 infers max id + 1).
inline LoadedGraph load_graph(const std::string& path, BasisSource source, std::size_t n_nodes = 0) {
  const bool directed = source == BasisSource::DirectedLeftSVD;
  ngcs::detail::require(directed || source == BasisSource::AdjacencyEigen || source == BasisSource::LaplacianEigen,
                  "load_graph: basis must be adj, lap or dsvd");
  const bool mm = detail_io::is_matrix_market(path);
  detail_io::RawGraph raw = mm ? detail_io::read_matrix_market(path) : detail_io::read_edge_list(path, n_nodes);

  LoadedGraph out;
  if (directed) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> seen;
    std::vector<DirectedGraph::Arc> arcs;
    auto add = [&](std::uint32_t i, std::uint32_t j, std::size_t ln) {
      if (!seen.emplace(std::make_pair(i, j), ln).second)
        throw ParseError(path, ln, "duplicate arc (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      arcs.emplace_back(i, j);
    };
    for (const auto& a : raw.arcs) {
      add(a.i, a.j, a.line);
      if (raw.symmetric_storage) add(a.j, a.i, a.line);
    }
    out.directed.emplace(raw.n, std::move(arcs));
    return out;
  }

  // Undirected: edge lists and symmetric Matrix Market list each edge once; a
  // general Matrix Market file must list both orientations.
  const bool both_orientations = mm && !raw.symmetric_storage;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> seen;
  for (const auto& a : raw.arcs) {
    const auto key = both_orientations ? std::make_pair(a.i, a.j)
                                       : std::make_pair(std::min(a.i, a.j), std::max(a.i, a.j));
    if (!seen.emplace(key, a.line).second)
      throw ParseError(path, a.line, "duplicate edge (" + std::to_string(a.i) + ", " + std::to_string(a.j) + ")");
  }
  std::vector<SparseSymGraph::Edge> edges;
  if (both_orientations) {
    for (const auto& [key, ln] : seen) {
      if (!seen.count({key.second, key.first}))
        throw ParseError(path, ln, "asymmetric entry (" + std::to_string(key.first + 1) + ", " +
                                       std::to_string(key.second + 1) +
                                       "); directed input needs the dsvd basis");
      if (key.first < key.second) edges.push_back(key);
    }
  } else {
    for (const auto& [key, ln] : seen) edges.push_back(key);
  }
  out.undirected.emplace(raw.n, std::move(edges));
  return out;
}

/// Headerless numeric CSV.
inline DenseMatrix load_matrix(const std::string& path) {
  auto in = detail_io::open_in(path);
  std::vector<double> data;
  std::size_t cols = 0, rows = 0, ln = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++ln;
    const auto t = detail_io::trim(line);
    if (t.empty()) continue;
    const auto f = detail_io::split(t, ',');
    if (rows == 0) {
      cols = f.size();
    } else if (f.size() != cols) {
      throw ParseError(path, ln, "expected " + std::to_string(cols) + " fields, found " + std::to_string(f.size()));
    }
    for (std::size_t k = 0; k < f.size(); ++k) {
      double v = 0.0;
      if (!detail_io::parse_double(f[k], v))
        throw ParseError(path, ln, "field " + std::to_string(k + 1) + " is not a number: '" + std::string(f[k]) + "'");
      if (!std::isfinite(v)) throw ParseError(path, ln, "non-finite value in field " + std::to_string(k + 1));
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path, std::max<std::size_t>(ln, 1), "no data rows");
  return DenseMatrix(rows, cols, std::move(data));
}

/// A vector stored as one column or one row of CSV.
inline std::vector<double> load_vector(const std::string& path) {
  const DenseMatrix m = load_matrix(path);
  if (m.cols() != 1 && m.rows() != 1)
    throw InvalidArgument(path + ": expected a single row or a single column");
  const auto d = m.data();
  return {d.begin(), d.end()};
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

inline void write_matrix(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void save_matrix(const std::string& path, const DenseMatrix& m) {
  auto out = detail_io::open_out(path);
  write_matrix(out, m);
  if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

inline void save_edge_list(const std::string& path, const SparseSymGraph& g) {
  auto out = detail_io::open_out(path);
  out << "i,j\n";
  for (auto [i, j] : g.edges()) out << i << ',' << j << '\n';
}

inline constexpr const char* kResultsHeader = "scenario,mu,method,metric,mean,std,R,failures";

inline void write_results_csv(std::ostream& out, const ResultTable& t) {
  out << kResultsHeader << '\n';
  for (const auto& r : t.rows)
    out << r.scenario << ',' << format_double(r.mu) << ',' << r.method << ',' << r.metric << ','
        << format_double(r.mean) << ',' << format_double(r.std) << ',' << r.R << ',' << r.failures << '\n';
}

inline json results_to_json(const ResultTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json o;
    o["scenario"] = r.scenario;
    o["mu"] = r.mu;
    o["method"] = r.method;
    o["metric"] = r.metric;
    o["mean"] = std::isfinite(r.mean) ? json(r.mean) : json(nullptr);
    o["std"] = r.std;
    o["R"] = r.R;
    o["failures"] = r.failures;
    rows.push_back(std::move(o));
  }
  return rows;
}

struct ResultPaths {
  std::string csv, json;
};

/// Writes <dir>/results.csv and <dir>/results.json (rows plus the full config).
inline ResultPaths save_results(const std::string& dir, const ResultTable& t, const ExperimentConfig& cfg) {
  std::filesystem::create_directories(dir);
  ResultPaths p{(std::filesystem::path(dir) / "results.csv").string(),
                (std::filesystem::path(dir) / "results.json").string()};
  {
    auto out = detail_io::open_out(p.csv);
    write_results_csv(out, t);
  }
  {
    json doc;
    doc["config"] = config_to_json(cfg);
    doc["results"] = results_to_json(t);
    auto out = detail_io::open_out(p.json);
    out << doc.dump(2) << '\n';
  }
  return p;
}

inline ResultTable load_results_csv(const std::string& path) {
  auto in = detail_io::open_in(path);
  ResultTable t;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto s = detail_io::trim(line);
    if (s.empty()) continue;
    if (ln == 1) {
      if (s != kResultsHeader) throw ParseError(path, ln, std::string("expected header '") + kResultsHeader + "'");
      continue;
    }
    const auto f = detail_io::split(s, ',');
    if (f.size() != 8) throw ParseError(path, ln, "expected 8 fields");
    ResultRow r;
    r.scenario = f[0];
    r.method = f[2];
    r.metric = f[3];
    if (!detail_io::parse_double(f[1], r.mu) || !detail_io::parse_double(f[5], r.std) ||
        !detail_io::parse_int(f[6], r.R) || !detail_io::parse_int(f[7], r.failures))
      throw ParseError(path, ln, "malformed numeric field");
    if (f[4] == "nan" || f[4] == "-nan") {
      r.mean = std::numeric_limits<double>::quiet_NaN();
    } else if (!detail_io::parse_double(f[4], r.mean)) {
      throw ParseError(path, ln, "malformed mean");
    }
    t.rows.push_back(std::move(r));
  }
  if (t.rows.empty()) throw ParseError(path, std::max<std::size_t>(ln, 1), "no result rows");
  return t;
}

inline ExperimentConfig load_config(const std::string& path) {
  auto in = detail_io::open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace ngcs::harness

#endif  // NGCS_HARNESS_IO_HPP
