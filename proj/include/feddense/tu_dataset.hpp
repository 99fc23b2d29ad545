#pragma once

// TUDataset text format:
//   NAME_A.txt               one "i, j" pair per line, 1-based global node ids
//   NAME_graph_indicator.txt line k holds the 1-based graph id of node k
//   NAME_graph_labels.txt    line g holds the label of graph g
//   NAME_node_labels.txt     optional, one integer per node (one-hot encoded)
//   NAME_node_attributes.txt optional, comma-separated reals per node
// Node features are [attributes | one-hot(node label)].

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "feddense/error.hpp"
#include "feddense/graph.hpp"

namespace feddense {

namespace tu_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Non-blank records of a file, each split on commas, with 1-based line numbers.
struct Record {
  std::size_t line;
  std::vector<std::string> tokens;
};

inline std::vector<Record> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open required file " + path.string());
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    Record rec{lineno, {}};
    std::size_t start = 0;
    while (true) {
      auto comma = sv.find(',', start);
      auto tok = trim(sv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      rec.tokens.emplace_back(tok);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline long long parse_int(const std::string& tok, const std::string& file, std::size_t line) {
  if (tok.empty()) throw ParseError(file, line, "empty token");
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || errno != 0) {
    // Some TU files write integral labels as reals ("1.0").
    double d = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || d != static_cast<double>(static_cast<long long>(d))) {
      throw ParseError(file, line, "non-integer token '" + tok + "'");
    }
    v = static_cast<long long>(d);
  }
  return v;
}

inline double parse_real(const std::string& tok, const std::string& file, std::size_t line) {
  if (tok.empty()) throw ParseError(file, line, "empty token");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE) {
    throw ParseError(file, line, "non-numeric token '" + tok + "'");
  }
  return v;
}

inline std::filesystem::path file_for(const std::filesystem::path& dir, const std::string& name,
                                      const char* suffix) {
  return dir / (name + "_" + suffix + ".txt");
}

}  // namespace tu_detail

inline GraphDataset load_tu_dataset(const std::filesystem::path& dir, const std::string& name) {
  using namespace tu_detail;
  const auto a_path = file_for(dir, name, "A");
  const auto ind_path = file_for(dir, name, "graph_indicator");
  const auto glabel_path = file_for(dir, name, "graph_labels");
  const auto nlabel_path = file_for(dir, name, "node_labels");
  const auto attr_path = file_for(dir, name, "node_attributes");
  for (const auto& p : {a_path, ind_path, glabel_path}) {
    if (!std::filesystem::exists(p)) throw IngestionError("missing required file " + p.string());
  }
  const bool has_nlabels = std::filesystem::exists(nlabel_path);
  const bool has_attrs = std::filesystem::exists(attr_path);
  if (!has_nlabels && !has_attrs) {
    throw IngestionError("missing node feature file: need " + nlabel_path.string() + " or " +
                         attr_path.string());
  }

  // Graph labels, remapped ascending.
  const auto glabel_recs = read_records(glabel_path);
  const std::string glabel_file = glabel_path.filename().string();
  std::vector<long long> raw_labels;
  for (const auto& r : glabel_recs) raw_labels.push_back(parse_int(r.tokens.at(0), glabel_file, r.line));
  const std::size_t num_graphs = raw_labels.size();
  if (num_graphs == 0) throw MalformedDataset(glabel_file + " lists no graphs");
  std::map<long long, std::size_t> label_map;
  for (auto l : raw_labels) label_map.emplace(l, 0);
  {
    std::size_t k = 0;
    for (auto& [raw, id] : label_map) id = k++;
  }

  // Node -> graph assignment and per-graph local indices.
  const auto ind_recs = read_records(ind_path);
  const std::string ind_file = ind_path.filename().string();
  const std::size_t num_nodes = ind_recs.size();
  std::vector<std::size_t> node_graph(num_nodes), node_local(num_nodes);
  std::vector<std::size_t> graph_size(num_graphs, 0);
  for (std::size_t k = 0; k < num_nodes; ++k) {
    const auto& r = ind_recs[k];
    long long gid = parse_int(r.tokens.at(0), ind_file, r.line);
    if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs) {
      throw MalformedDataset(ind_file + ":" + std::to_string(r.line) + ": graph id " +
                             std::to_string(gid) + " outside [1," + std::to_string(num_graphs) + "]");
    }
    node_graph[k] = static_cast<std::size_t>(gid - 1);
    node_local[k] = graph_size[node_graph[k]]++;
  }
  for (std::size_t g = 0; g < num_graphs; ++g) {
    if (graph_size[g] == 0) {
      throw MalformedDataset("graph " + std::to_string(g + 1) + " has no nodes");
    }
  }

  // Node features.
  std::size_t attr_dim = 0;
  std::vector<std::vector<double>> attrs;
  if (has_attrs) {
    const auto recs = read_records(attr_path);
    const std::string f = attr_path.filename().string();
    if (recs.size() != num_nodes) {
      throw MalformedDataset(f + " has " + std::to_string(recs.size()) + " rows, expected " +
                             std::to_string(num_nodes));
    }
    attr_dim = recs.front().tokens.size();
    attrs.reserve(num_nodes);
    for (const auto& r : recs) {
      if (r.tokens.size() != attr_dim) {
        throw MalformedDataset(f + ":" + std::to_string(r.line) + ": expected " +
                               std::to_string(attr_dim) + " attributes");
      }
      std::vector<double> row;
      row.reserve(attr_dim);
      for (const auto& t : r.tokens) row.push_back(parse_real(t, f, r.line));
      attrs.push_back(std::move(row));
    }
  }
  std::vector<std::size_t> node_label_idx;
  std::size_t onehot_dim = 0;
  if (has_nlabels) {
    const auto recs = read_records(nlabel_path);
    const std::string f = nlabel_path.filename().string();
    if (recs.size() != num_nodes) {
      throw MalformedDataset(f + " has " + std::to_string(recs.size()) + " rows, expected " +
                             std::to_string(num_nodes));
    }
    std::vector<long long> raw;
    raw.reserve(num_nodes);
    for (const auto& r : recs) raw.push_back(parse_int(r.tokens.at(0), f, r.line));
    std::map<long long, std::size_t> m;
    for (auto l : raw) m.emplace(l, 0);
    std::size_t k = 0;
    for (auto& [rl, id] : m) id = k++;
    onehot_dim = m.size();
    node_label_idx.reserve(num_nodes);
    for (auto l : raw) node_label_idx.push_back(m.at(l));
  }
  const std::size_t fdim = attr_dim + onehot_dim;

  // Edges.
  const auto a_recs = read_records(a_path);
  const std::string a_file = a_path.filename().string();
  std::vector<std::vector<Edge>> graph_edges(num_graphs);
  std::size_t self_loops = 0;
  for (const auto& r : a_recs) {
    if (r.tokens.size() != 2) {
      throw ParseError(a_file, r.line, "expected two comma-separated node ids");
    }
    long long i = parse_int(r.tokens[0], a_file, r.line);
    long long j = parse_int(r.tokens[1], a_file, r.line);
    for (long long x : {i, j}) {
      if (x < 1 || static_cast<std::size_t>(x) > num_nodes) {
        throw MalformedDataset(a_file + ":" + std::to_string(r.line) + ": node " +
                               std::to_string(x) + " outside [1," + std::to_string(num_nodes) + "]");
      }
    }
    const auto gi = static_cast<std::size_t>(i - 1), gj = static_cast<std::size_t>(j - 1);
    if (node_graph[gi] != node_graph[gj]) {
      throw MalformedDataset(a_file + ":" + std::to_string(r.line) + ": edge joins graphs " +
                             std::to_string(node_graph[gi] + 1) + " and " +
                             std::to_string(node_graph[gj] + 1));
    }
    if (gi == gj) {
      ++self_loops;
      continue;
    }
    graph_edges[node_graph[gi]].push_back(
        {static_cast<NodeId>(node_local[gi]), static_cast<NodeId>(node_local[gj])});
  }

  std::vector<std::vector<double>> graph_features(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) graph_features[g].resize(graph_size[g] * fdim, 0.0);
  for (std::size_t k = 0; k < num_nodes; ++k) {
    double* row = graph_features[node_graph[k]].data() + node_local[k] * fdim;
    if (has_attrs) std::copy(attrs[k].begin(), attrs[k].end(), row);
    if (has_nlabels) row[attr_dim + node_label_idx[k]] = 1.0;
  }

  GraphDataset ds;
  ds.name = name;
  ds.num_classes = label_map.size();
  ds.feature_dim = fdim;
  ds.dropped_self_loops = self_loops;
  ds.graphs.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    ds.graphs.emplace_back(graph_size[g], std::move(graph_edges[g]), std::move(graph_features[g]),
                           fdim, label_map.at(raw_labels[g]));
  }
  ds.validate();
  return ds;
}

/// Writes `ds` in TU layout under dir (created if needed). Features go to
/// NAME_node_attributes.txt; edges are written in both orientations.
inline void write_tu_dataset(const GraphDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* suffix) {
    auto p = tu_detail::file_for(dir, ds.name, suffix);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestionError("cannot write " + p.string());
    out << std::setprecision(17);
    return out;
  };
  auto a = open("A");
  auto ind = open("graph_indicator");
  auto labels = open("graph_labels");
  auto attrs = open("node_attributes");
  std::size_t base = 1;
  for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
    const Graph& gr = ds.graphs[g];
    for (const auto& e : gr.edges()) {
      a << base + e.u << ", " << base + e.v << '\n';
      a << base + e.v << ", " << base + e.u << '\n';
    }
    for (std::size_t v = 0; v < gr.num_nodes(); ++v) {
      ind << g + 1 << '\n';
      auto row = gr.feature_row(v);
      for (std::size_t c = 0; c < row.size(); ++c) attrs << (c ? ", " : "") << row[c];
      attrs << '\n';
    }
    labels << gr.label() << '\n';
    base += gr.num_nodes();
  }
}

}  // namespace feddense
