#pragma once

// Dataset container, the four-file on-disk format, fixed-size splits and the
// stochastic-block-model generator used for desk-scale experiments.
//
// Directory layout:
//   graph.tsv     "u\tv" per undirected edge, 0-based
//   features.tsv  one node per line, tab-separated decimal floats
//   labels.tsv    one class index per line
//   split.json    {"train": [...], "val": [...], "test": [...]}

#include "cgnn/core.hpp"
#include "cgnn/graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace cgnn {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct Dataset {
  Graph graph;
  Matrix features;          // |V| x |F|
  std::vector<int> labels;  // class index per node
  Split split;

  std::size_t num_nodes() const noexcept { return graph.num_nodes(); }
  std::size_t num_classes() const {
    int c = -1;
    for (int l : labels) c = std::max(c, l);
    return static_cast<std::size_t>(c + 1);
  }
};

/// Throws when the split lists overlap or reference missing nodes.
inline void validate_split(const Split& split, std::size_t num_nodes) {
  std::vector<int> owner(num_nodes, -1);
  const std::vector<const std::vector<std::size_t>*> parts{&split.train, &split.val, &split.test};
  const char* names[] = {"train", "val", "test"};
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (std::size_t idx : *parts[p]) {
      if (idx >= num_nodes) {
        throw ParseError(std::string("split: ") + names[p] + " index " + std::to_string(idx) + " >= " +
                         std::to_string(num_nodes) + " nodes");
      }
      if (owner[idx] >= 0) {
        throw ParseError(std::string("split: node ") + std::to_string(idx) + " appears in both " +
                         names[owner[idx]] + " and " + names[p]);
      }
      owner[idx] = static_cast<int>(p);
    }
  }
}

inline void validate_dataset(const Dataset& ds) {
  const std::size_t n = ds.num_nodes();
  if (static_cast<std::size_t>(ds.features.rows()) != n) {
    throw ParseError("dataset: features have " + std::to_string(ds.features.rows()) + " rows for " +
                     std::to_string(n) + " nodes");
  }
  if (ds.labels.size() != n) {
    throw ParseError("dataset: " + std::to_string(ds.labels.size()) + " labels for " + std::to_string(n) + " nodes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.labels[i] < 0) throw ParseError("dataset: label of node " + std::to_string(i) + " is negative");
  }
  if (n > 0 && ds.num_classes() < 2) throw ParseError("dataset: fewer than two classes");
  validate_split(ds.split, n);
}

// ---------------------------------------------------------------------------
// Text I/O

namespace detail {

inline std::string format_roundtrip(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError("cannot open " + p.string());
  return in;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

inline double parse_double(std::string_view field, const std::string& where) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(where + ": expected a number, got '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

inline Matrix read_features(std::istream& in, const std::string& name = "features.tsv") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = name + " line " + std::to_string(line_no);
    std::vector<double> row;
    if (!line.empty()) {
      for (auto field : detail::split_tabs(line)) row.push_back(detail::parse_double(field, where));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(where + ": expected " + std::to_string(rows.front().size()) + " values, got " +
                       std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  const Index n = static_cast<Index>(rows.size());
  const Index f = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Matrix m(n, f);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < f; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

inline std::vector<int> read_labels(std::istream& in, const std::string& name = "labels.tsv") {
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    int value = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size() || line.empty() || value < 0) {
      throw ParseError(name + " line " + std::to_string(line_no) + ": expected a class index, got '" + line + "'");
    }
    labels.push_back(value);
  }
  return labels;
}

inline Split split_from_json(const nlohmann::json& j) {
  Split s;
  for (const char* key : {"train", "val", "test"}) {
    if (!j.contains(key) || !j.at(key).is_array()) {
      throw ParseError(std::string("split.json: missing integer array '") + key + "'");
    }
  }
  try {
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.val = j.at("val").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("split.json: ") + e.what());
  }
  return s;
}

inline nlohmann::json split_to_json(const Split& s) {
  return nlohmann::json{{"train", s.train}, {"val", s.val}, {"test", s.test}};
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ParseError("dataset directory not found: " + dir.string());
  for (const char* f : {"graph.tsv", "features.tsv", "labels.tsv", "split.json"}) {
    if (!fs::exists(dir / f)) throw ParseError("dataset: missing file " + (dir / f).string());
  }

  Dataset ds;
  {
    auto in = detail::open_input(dir / "features.tsv");
    ds.features = read_features(in);
  }
  {
    auto in = detail::open_input(dir / "labels.tsv");
    ds.labels = read_labels(in);
  }
  std::vector<Edge> raw;
  {
    auto in = detail::open_input(dir / "graph.tsv");
    try {
      raw = read_edge_list(in);
    } catch (const ParseError& e) {
      throw ParseError(std::string("graph.tsv ") + e.what());
    }
  }
  const std::size_t n = ds.labels.size();
  try {
    ds.graph = Graph::from_raw_edges(n, std::move(raw));
  } catch (const DomainError& e) {
    throw ParseError(std::string("graph.tsv: ") + e.what());
  }
  {
    auto in = detail::open_input(dir / "split.json");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("split.json: ") + e.what());
    }
    ds.split = split_from_json(j);
  }
  validate_dataset(ds);
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  validate_dataset(ds);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "graph.tsv", std::ios::binary);
    write_edge_list(out, ds.graph);
  }
  {
    std::ofstream out(dir / "features.tsv", std::ios::binary);
    std::string line;
    for (Index i = 0; i < ds.features.rows(); ++i) {
      line.clear();
      for (Index j = 0; j < ds.features.cols(); ++j) {
        if (j) line += '\t';
        line += detail::format_roundtrip(ds.features(i, j));
      }
      line += '\n';
      out << line;
    }
  }
  {
    std::ofstream out(dir / "labels.tsv", std::ios::binary);
    for (int l : ds.labels) out << l << '\n';
  }
  {
    std::ofstream out(dir / "split.json", std::ios::binary);
    out << split_to_json(ds.split).dump() << '\n';
  }
}

/// Divides each feature row by its sum; all-zero rows are left unchanged.
inline Matrix row_normalize(const Matrix& x) {
  Matrix out = x;
  for (Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    if (s != 0.0) out.row(i) /= s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits

/// `per_class` training nodes from every class, then `val_size` and
/// `test_size` nodes from the shuffled remainder.
inline Split make_fixed_split(const std::vector<int>& labels, std::size_t per_class, std::size_t val_size,
                              std::size_t test_size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  const std::size_t classes = static_cast<std::size_t>(max_label + 1);

  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);

  Split s;
  std::vector<char> used(labels.size(), 0);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& m = members[c];
    if (m.size() < per_class) {
      throw DomainError("make_fixed_split: class " + std::to_string(c) + " has " + std::to_string(m.size()) +
                        " nodes, need " + std::to_string(per_class));
    }
    std::shuffle(m.begin(), m.end(), rng);
    for (std::size_t k = 0; k < per_class; ++k) {
      s.train.push_back(m[k]);
      used[m[k]] = 1;
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!used[i]) rest.push_back(i);
  if (rest.size() < val_size + test_size) {
    throw DomainError("make_fixed_split: " + std::to_string(rest.size()) + " nodes remain, need " +
                      std::to_string(val_size + test_size));
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  s.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(val_size));
  s.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(val_size),
                rest.begin() + static_cast<std::ptrdiff_t>(val_size + test_size));
  return s;
}

// ---------------------------------------------------------------------------
// Stochastic block model

struct SbmSpec {
  std::size_t blocks = 4;
  std::size_t nodes_per_block = 100;
  double p_in = 0.05;
  double p_out = 0.005;
  std::size_t feature_dim = 16;
  double signal = 0.3;
  /// Euclidean norm of each class direction. 5 makes per-node features
  /// informative but well short of separable (see README).
  double direction_norm = 5.0;
  std::uint64_t seed = 7;

  void validate() const {
    if (blocks == 0 || nodes_per_block == 0) throw DomainError("sbm: need at least one block and one node per block");
    if (blocks < 2) throw DomainError("sbm: need at least two blocks (classes)");
    if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
      throw DomainError("sbm: edge probabilities must lie in [0, 1]");
    }
    if (!(signal >= 0.0 && signal <= 1.0)) throw DomainError("sbm: signal must lie in [0, 1]");
    if (feature_dim == 0) throw DomainError("sbm: feature_dim must be > 0");
  }
};

/// Features are signal * direction(class) + (1 - signal) * N(0, I); the
/// split is 20 training nodes per class, 25% of all nodes for validation and
/// the rest for testing.
inline Dataset generate_sbm(const SbmSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t n = spec.blocks * spec.nodes_per_block;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / spec.nodes_per_block);

  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? spec.p_in : spec.p_out;
      if (unif(rng) < p) edges.push_back({u, v});
    }
  }

  const Index f = static_cast<Index>(spec.feature_dim);
  Matrix directions(static_cast<Index>(spec.blocks), f);
  for (Index c = 0; c < directions.rows(); ++c) {
    for (Index j = 0; j < f; ++j) directions(c, j) = normal(rng);
    directions.row(c) *= spec.direction_norm / directions.row(c).norm();
  }
  Matrix x(static_cast<Index>(n), f);
  for (std::size_t i = 0; i < n; ++i) {
    for (Index j = 0; j < f; ++j) {
      x(static_cast<Index>(i), j) = spec.signal * directions(labels[i], j) + (1.0 - spec.signal) * normal(rng);
    }
  }

  Dataset ds;
  ds.graph = Graph(n, std::move(edges));
  ds.features = std::move(x);
  ds.labels = std::move(labels);
  const std::size_t per_class = std::min<std::size_t>(20, spec.nodes_per_block);
  const std::size_t val = n / 4;
  const std::size_t train = per_class * spec.blocks;
  const std::size_t test = n > train + val ? n - train - val : 0;
  ds.split = make_fixed_split(ds.labels, per_class, std::min(val, n - train), test, rng());
  return ds;
}

}  // namespace cgnn
