#pragma once

// Experiment configuration (JSON), dataset resolution, run orchestration and
// metrics / summary emission. Schema: see docs/config.md.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "feddense/checkpoint.hpp"
#include "feddense/error.hpp"
#include "feddense/fed.hpp"
#include "feddense/graph.hpp"
#include "feddense/resources.hpp"
#include "feddense/struct_encode.hpp"
#include "feddense/tu_dataset.hpp"

namespace feddense {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Synthetic dataset recipes

struct SyntheticGroup {
  SyntheticKind kind = SyntheticKind::cycle;
  std::size_t label = 0;
  std::size_t count = 1;
  std::size_t min_nodes = 3;
  std::size_t max_nodes = 3;
  double edge_prob = 0.5;
  friend bool operator==(const SyntheticGroup&, const SyntheticGroup&) = default;
};

struct SyntheticRecipe {
  std::string name = "synthetic";
  std::uint64_t seed = 0;
  FeatureMode feature_mode = FeatureMode::constant;
  std::size_t feature_dim = 1;
  std::vector<SyntheticGroup> groups;
  friend bool operator==(const SyntheticRecipe&, const SyntheticRecipe&) = default;
};

/// Graph counts are drawn per group with node counts uniform in
/// [min_nodes, max_nodes]; labels must cover 0..K-1.
inline GraphDataset generate_dataset(const SyntheticRecipe& recipe) {
  if (recipe.groups.empty()) throw ConfigError("recipe '" + recipe.name + "' has no groups");
  GraphDataset ds;
  ds.name = recipe.name;
  std::set<std::size_t> labels;
  Rng sizes = make_rng({recipe.seed, 0x512eULL});
  for (std::size_t gi = 0; gi < recipe.groups.size(); ++gi) {
    const auto& grp = recipe.groups[gi];
    if (grp.min_nodes < 1 || grp.max_nodes < grp.min_nodes) {
      throw ConfigError("recipe '" + recipe.name + "' group " + std::to_string(gi) + ": bad node range");
    }
    labels.insert(grp.label);
    for (std::size_t k = 0; k < grp.count; ++k) {
      SyntheticSpec spec;
      spec.kind = grp.kind;
      spec.n_nodes = grp.min_nodes + uniform_index(sizes, grp.max_nodes - grp.min_nodes + 1);
      spec.feature_mode = recipe.feature_mode;
      spec.feature_dim = recipe.feature_dim;
      spec.edge_prob = grp.edge_prob;
      spec.label = grp.label;
      ds.graphs.push_back(generate_synthetic(spec, derive_seed({recipe.seed, gi, k})));
    }
  }
  std::size_t expect = 0;
  for (auto l : labels) {
    if (l != expect++) throw ConfigError("recipe '" + recipe.name + "' labels must be 0..K-1");
  }
  ds.num_classes = labels.size();
  ds.feature_dim = ds.graphs.front().feature_dim();
  ds.validate();
  return ds;
}

struct DatasetSpec {
  enum class Kind { tu, synthetic };
  Kind kind = Kind::synthetic;
  std::string dir;   // tu
  std::string name;  // tu
  SyntheticRecipe recipe;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct ExperimentConfig {
  FederationConfig federation;
  std::vector<DatasetSpec> clients;
  StructEncodingConfig encoding;
  std::string output_dir = "out";
  std::size_t repetitions = 5;

  void validate() const {
    if (clients.empty()) throw ConfigError("at least one client dataset is required");
    if (federation.num_clients != clients.size()) {
      throw ConfigError("num_clients " + std::to_string(federation.num_clients) + " != number of client datasets " +
                        std::to_string(clients.size()));
    }
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    federation.validate();
    encoding.validate();
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------------------------
// JSON (de)serialization. Unknown keys are errors.

namespace config_detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(path_ + ": missing key '" + key + "'");
    return convert<T>(key);
  }

  const json& sub(const std::string& key) {
    if (!has(key)) throw ConfigError(path_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  template <class T>
  T convert(const std::string& key) {
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
          throw ConfigError(path(key) + ": expected a non-negative integer");
        }
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path(key) + ": " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace config_detail

inline json to_json(const ModelConfig& m) {
  return {{"variant", to_string(m.variant)},    {"num_layers", m.num_layers},
          {"hidden", m.hidden},                 {"feature_dim", m.feature_dim},
          {"struct_dim", m.struct_dim},         {"num_classes", m.num_classes},
          {"dropout", m.dropout},               {"gin_epsilon", m.gin_epsilon},
          {"detach_cross_channel", m.detach_cross_channel}};
}

inline ModelConfig model_from_json(const json& j, const std::string& where = "model") {
  config_detail::Reader r(j, where);
  ModelConfig m;
  m.variant = config_detail::wrap(where, [&] { return parse_model_variant(r.get<std::string>("variant", "ddc")); });
  m.num_layers = r.get<std::size_t>("num_layers", m.num_layers);
  m.hidden = r.get<std::size_t>("hidden", m.hidden);
  m.feature_dim = r.get<std::size_t>("feature_dim", m.feature_dim);
  m.struct_dim = r.get<std::size_t>("struct_dim", m.struct_dim);
  m.num_classes = r.get<std::size_t>("num_classes", m.num_classes);
  m.dropout = r.get<double>("dropout", m.dropout);
  m.gin_epsilon = r.get<double>("gin_epsilon", m.gin_epsilon);
  m.detach_cross_channel = r.get<bool>("detach_cross_channel", m.detach_cross_channel);
  r.finish();
  config_detail::wrap(where, [&] {
    m.validate();
    return 0;
  });
  return m;
}

inline json to_json(const nn::AdamOptions& o) {
  return {{"lr", o.lr}, {"beta1", o.beta1}, {"beta2", o.beta2}, {"eps", o.eps}, {"weight_decay", o.weight_decay}};
}

inline nn::AdamOptions adam_from_json(const json& j, const std::string& where) {
  config_detail::Reader r(j, where);
  nn::AdamOptions o;
  o.lr = r.get<double>("lr", o.lr);
  o.beta1 = r.get<double>("beta1", o.beta1);
  o.beta2 = r.get<double>("beta2", o.beta2);
  o.eps = r.get<double>("eps", o.eps);
  o.weight_decay = r.get<double>("weight_decay", o.weight_decay);
  r.finish();
  return o;
}

inline json to_json(const StructEncodingConfig& e) {
  return {{"degree_dim", e.degree_dim}, {"rwpe_dim", e.rwpe_dim}, {"fusion", "concat"}};
}

inline StructEncodingConfig encoding_from_json(const json& j, const std::string& where = "encoding") {
  config_detail::Reader r(j, where);
  StructEncodingConfig e;
  e.degree_dim = r.get<std::size_t>("degree_dim", e.degree_dim);
  e.rwpe_dim = r.get<std::size_t>("rwpe_dim", e.rwpe_dim);
  if (r.get<std::string>("fusion", "concat") != "concat") throw ConfigError(where + ".fusion: only 'concat' is supported");
  r.finish();
  config_detail::wrap(where, [&] {
    e.validate();
    return 0;
  });
  return e;
}

inline json to_json(const SyntheticRecipe& rc) {
  json groups = json::array();
  for (const auto& g : rc.groups) {
    groups.push_back({{"kind", to_string(g.kind)},
                      {"label", g.label},
                      {"count", g.count},
                      {"min_nodes", g.min_nodes},
                      {"max_nodes", g.max_nodes},
                      {"edge_prob", g.edge_prob}});
  }
  return {{"name", rc.name},
          {"seed", rc.seed},
          {"feature_mode", to_string(rc.feature_mode)},
          {"feature_dim", rc.feature_dim},
          {"groups", groups}};
}

inline SyntheticRecipe recipe_from_json(const json& j, const std::string& where = "recipe") {
  config_detail::Reader r(j, where);
  SyntheticRecipe rc;
  rc.name = r.get<std::string>("name", rc.name);
  rc.seed = r.get<std::uint64_t>("seed", rc.seed);
  rc.feature_mode =
      config_detail::wrap(where, [&] { return parse_feature_mode(r.get<std::string>("feature_mode", "constant")); });
  rc.feature_dim = r.get<std::size_t>("feature_dim", rc.feature_dim);
  const json& groups = r.sub("groups");
  if (!groups.is_array()) throw ConfigError(where + ".groups: expected an array");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string gw = where + ".groups[" + std::to_string(i) + "]";
    config_detail::Reader gr(groups[i], gw);
    SyntheticGroup g;
    g.kind = config_detail::wrap(gw, [&] { return parse_synthetic_kind(gr.require<std::string>("kind")); });
    g.label = gr.get<std::size_t>("label", g.label);
    g.count = gr.get<std::size_t>("count", g.count);
    g.min_nodes = gr.get<std::size_t>("min_nodes", g.min_nodes);
    g.max_nodes = gr.get<std::size_t>("max_nodes", std::max(g.min_nodes, g.max_nodes));
    g.edge_prob = gr.get<double>("edge_prob", g.edge_prob);
    gr.finish();
    rc.groups.push_back(g);
  }
  r.finish();
  return rc;
}

inline json to_json(const DatasetSpec& d) {
  if (d.kind == DatasetSpec::Kind::tu) return {{"tu", {{"dir", d.dir}, {"name", d.name}}}};
  return {{"synthetic", to_json(d.recipe)}};
}

inline DatasetSpec dataset_from_json(const json& j, const std::string& where) {
  config_detail::Reader r(j, where);
  DatasetSpec d;
  if (r.has("tu")) {
    config_detail::Reader t(r.sub("tu"), where + ".tu");
    d.kind = DatasetSpec::Kind::tu;
    d.dir = t.require<std::string>("dir");
    d.name = t.require<std::string>("name");
    t.finish();
    if (r.has("synthetic")) throw ConfigError(where + ": give either 'tu' or 'synthetic', not both");
  } else if (r.has("synthetic")) {
    d.kind = DatasetSpec::Kind::synthetic;
    d.recipe = recipe_from_json(r.sub("synthetic"), where + ".synthetic");
  } else {
    throw ConfigError(where + ": expected a 'tu' or 'synthetic' dataset");
  }
  r.finish();
  return d;
}

inline json to_json(const ExperimentConfig& c) {
  const auto& f = c.federation;
  json clients = json::array();
  for (const auto& d : c.clients) clients.push_back(to_json(d));
  return {{"federation",
           {{"num_clients", f.num_clients},
            {"rounds", f.rounds},
            {"local_epochs", f.local_epochs},
            {"batch_size", f.batch_size},
            {"strategy", to_string(f.strategy)},
            {"mu", f.mu},
            {"seed", f.seed},
            {"split", {f.split.train, f.split.val, f.split.test}},
            {"optimizer", to_json(f.optimizer)},
            {"model", to_json(f.model)}}},
          {"clients", clients},
          {"encoding", to_json(c.encoding)},
          {"output_dir", c.output_dir},
          {"repetitions", c.repetitions}};
}

inline ExperimentConfig experiment_from_json(const json& j) {
  config_detail::Reader r(j, "config");
  ExperimentConfig c;
  {
    config_detail::Reader f(r.sub("federation"), "config.federation");
    auto& fc = c.federation;
    fc.rounds = f.get<std::size_t>("rounds", fc.rounds);
    fc.local_epochs = f.get<std::size_t>("local_epochs", fc.local_epochs);
    fc.batch_size = f.get<std::size_t>("batch_size", fc.batch_size);
    fc.strategy = config_detail::wrap("config.federation.strategy",
                                      [&] { return parse_strategy(f.get<std::string>("strategy", "feddense")); });
    fc.mu = f.get<double>("mu", fc.mu);
    fc.seed = f.get<std::uint64_t>("seed", fc.seed);
    if (f.has("split")) {
      auto v = f.require<std::vector<double>>("split");
      if (v.size() != 3) throw ConfigError("config.federation.split: expected [train, val, test]");
      fc.split = {v[0], v[1], v[2]};
    }
    if (f.has("optimizer")) fc.optimizer = adam_from_json(f.sub("optimizer"), "config.federation.optimizer");
    if (f.has("model")) fc.model = model_from_json(f.sub("model"), "config.federation.model");
    const bool explicit_n = f.has("num_clients");
    std::size_t n = explicit_n ? f.require<std::size_t>("num_clients") : 0;
    f.finish();
    const json& clients = r.sub("clients");
    if (!clients.is_array()) throw ConfigError("config.clients: expected an array");
    for (std::size_t i = 0; i < clients.size(); ++i) {
      c.clients.push_back(dataset_from_json(clients[i], "config.clients[" + std::to_string(i) + "]"));
    }
    fc.num_clients = explicit_n ? n : c.clients.size();
  }
  if (r.has("encoding")) c.encoding = encoding_from_json(r.sub("encoding"), "config.encoding");
  c.output_dir = r.get<std::string>("output_dir", c.output_dir);
  c.repetitions = r.get<std::size_t>("repetitions", c.repetitions);
  r.finish();
  c.federation.model.struct_dim = c.encoding.width();
  config_detail::wrap("config", [&] {
    c.validate();
    return 0;
  });
  return c;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Running

inline GraphDataset resolve_dataset(const DatasetSpec& spec, const std::filesystem::path& base_dir) {
  if (spec.kind == DatasetSpec::Kind::synthetic) return generate_dataset(spec.recipe);
  std::filesystem::path dir(spec.dir);
  if (dir.is_relative()) dir = base_dir / dir;
  return load_tu_dataset(dir, spec.name);
}

/// Writes the per-round CSV stream: header once, then whole rows, with the
/// file closed after every round.
class MetricsCsv {
 public:
  static constexpr const char* kHeader = "round,client_id,strategy,split,loss,accuracy,payload_bytes,flops";

  explicit MetricsCsv(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::trunc | std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path_.string());
    out << kHeader << '\n';
  }

  void append(const RoundMetrics& rm, Strategy strategy) {
    std::ostringstream os;
    for (const auto& c : rm.clients) {
      const std::uint64_t payload = c.upload_bytes;
      const std::uint64_t train_flops = rm.round == 0 ? c.train.forward_flops : c.train_flops;
      row(os, rm.round, c.client_id, strategy, "train", c.train.loss, c.train.accuracy, payload, train_flops);
      row(os, rm.round, c.client_id, strategy, "val", c.val.loss, c.val.accuracy, payload, c.val.forward_flops);
      row(os, rm.round, c.client_id, strategy, "test", c.test.loss, c.test.accuracy, payload, c.test.forward_flops);
    }
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << os.str();
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  static void row(std::ostringstream& os, std::size_t round, std::size_t client, Strategy s, const char* split,
                  double loss, double acc, std::uint64_t payload, std::uint64_t flops) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%s,%s,%.9g,%.9g,%llu,%llu\n", round, client, to_string(s), split, loss, acc,
                  static_cast<unsigned long long>(payload), static_cast<unsigned long long>(flops));
    os << buf;
  }

  std::filesystem::path path_;
};

inline void write_json_atomic(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

struct RunOptions {
  bool parallel_clients = false;
  bool with_local_baseline = false;
  std::filesystem::path base_dir = ".";
  std::ostream* log = nullptr;
};

struct RunResult {
  std::vector<double> final_test_accuracy;  // per client
  std::vector<RoundMetrics> history;
};

/// One federation run; metrics go to out_dir/metrics.csv.
inline RunResult run_federation(const ExperimentConfig& cfg, const std::vector<GraphDataset>& datasets,
                                std::uint64_t seed, const std::filesystem::path& out_dir, const RunOptions& opts) {
  FederationConfig fc = cfg.federation;
  fc.seed = seed;
  std::vector<std::shared_ptr<const ClientData>> data;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    data.push_back(prepare_client_data(i, datasets[i], cfg.encoding, fc.split, seed, fc.model.has_struct_channel()));
  }
  Federation fed(fc, data, opts.parallel_clients);
  MetricsCsv csv(out_dir / "metrics.csv");

  ExperimentConfig effective = cfg;
  effective.federation.seed = seed;
  json manifest = {{"config", to_json(effective)},
                   {"seed", seed},
                   {"rounds", fc.rounds},
                   {"round", 0},
                   {"status", "running"},
                   {"metrics", "metrics.csv"}};
  auto& mclients = manifest["clients"] = json::array();
  for (const auto& c : fed.clients()) {
    mclients.push_back({{"client_id", c.id},
                        {"dataset", c.data->dataset.name},
                        {"checkpoint", "checkpoints/client_" + std::to_string(c.id) + ".bin"}});
  }
  manifest["shared_tensors"] = fed.shared_names();

  RunResult result;
  auto init = fed.evaluate_initial();
  csv.append(init, fc.strategy);
  write_json_atomic(out_dir / "manifest.json", manifest);
  result.history.push_back(std::move(init));
  for (std::size_t t = 0; t < fc.rounds; ++t) {
    auto rm = fed.run_round();
    csv.append(rm, fc.strategy);
    manifest["round"] = rm.round;
    write_json_atomic(out_dir / "manifest.json", manifest);
    if (opts.log && (rm.round % 10 == 0 || rm.round == fc.rounds)) {
      double acc = 0;
      for (const auto& c : rm.clients) acc += c.test.accuracy;
      *opts.log << "  round " << rm.round << " mean test acc " << acc / static_cast<double>(rm.clients.size()) << '\n';
    }
    result.history.push_back(std::move(rm));
  }
  for (const auto& c : fed.clients()) {
    save_checkpoint(out_dir / "checkpoints" / ("client_" + std::to_string(c.id) + ".bin"), c.params, c.model);
  }
  for (const auto& c : result.history.back().clients) result.final_test_accuracy.push_back(c.test.accuracy);
  manifest["status"] = "complete";
  write_json_atomic(out_dir / "manifest.json", manifest);
  return result;
}

namespace experiment_detail {

inline json mean_std(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  return {{"mean", mean}, {"std", std::sqrt(var)}, {"values", v}};
}

struct ArmSummary {
  json clients = json::array();
  std::vector<double> avg_per_rep;
};

inline ArmSummary summarize(const std::vector<RunResult>& runs, const std::vector<GraphDataset>& datasets) {
  ArmSummary s;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.final_test_accuracy.at(i));
    s.clients.push_back({{"client_id", i}, {"dataset", datasets[i].name}, {"final_test_accuracy", mean_std(v)}});
  }
  for (const auto& r : runs) {
    double a = 0;
    for (double x : r.final_test_accuracy) a += x;
    s.avg_per_rep.push_back(a / static_cast<double>(r.final_test_accuracy.size()));
  }
  return s;
}

}  // namespace experiment_detail

/// Runs every repetition (seed + rep) and writes summary.json. Returns the
/// summary document.
inline json run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  cfg.validate();
  std::vector<GraphDataset> datasets;
  for (std::size_t i = 0; i < cfg.clients.size(); ++i) {
    try {
      datasets.push_back(resolve_dataset(cfg.clients[i], opts.base_dir));
    } catch (const Error& e) {
      throw ConfigError("client " + std::to_string(i) + ": " + e.what());
    }
  }
  const std::filesystem::path out(cfg.output_dir);
  std::filesystem::create_directories(out);
  write_json_atomic(out / "config.json", to_json(cfg));

  auto run_arm = [&](const ExperimentConfig& arm, const std::filesystem::path& dir) {
    std::vector<RunResult> runs;
    for (std::size_t rep = 0; rep < arm.repetitions; ++rep) {
      const std::uint64_t seed = arm.federation.seed + rep;
      if (opts.log) *opts.log << to_string(arm.federation.strategy) << " repetition " << rep << " (seed " << seed << ")\n";
      runs.push_back(run_federation(arm, datasets, seed, dir / ("rep_" + std::to_string(rep)), opts));
    }
    return runs;
  };

  auto main_runs = run_arm(cfg, out);
  auto main = experiment_detail::summarize(main_runs, datasets);
  std::vector<std::uint64_t> seeds;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) seeds.push_back(cfg.federation.seed + rep);
  json summary = {{"strategy", to_string(cfg.federation.strategy)},
                  {"variant", to_string(cfg.federation.model.variant)},
                  {"repetitions", cfg.repetitions},
                  {"seeds", seeds},
                  {"clients", main.clients},
                  {"avg_acc", experiment_detail::mean_std(main.avg_per_rep)}};
  if (opts.with_local_baseline) {
    ExperimentConfig local = cfg;
    local.federation.strategy = Strategy::local;
    auto local_runs = run_arm(local, out / "local_baseline");
    auto base = experiment_detail::summarize(local_runs, datasets);
    auto local_avg = experiment_detail::mean_std(base.avg_per_rep);
    summary["local_baseline"] = {{"clients", base.clients}, {"avg_acc", local_avg}};
    summary["avg_gain"] = summary["avg_acc"]["mean"].get<double>() - local_avg["mean"].get<double>();
  }
  write_json_atomic(out / "summary.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------
// count-resources input

struct ResourceQuery {
  ModelConfig model;
  Strategy strategy = Strategy::feddense;
  StructEncodingConfig encoding;
  GraphStats graph;
};

inline ResourceQuery resource_query_from_json(const json& j) {
  config_detail::Reader r(j, "resources");
  ResourceQuery q;
  if (r.has("encoding")) q.encoding = encoding_from_json(r.sub("encoding"), "resources.encoding");
  q.model = model_from_json(r.sub("model"), "resources.model");
  q.model.struct_dim = q.encoding.width();
  q.strategy = config_detail::wrap("resources.strategy", [&] { return parse_strategy(r.get<std::string>("strategy", "feddense")); });
  config_detail::Reader g(r.sub("graph"), "resources.graph");
  q.graph.num_nodes = g.require<std::uint64_t>("num_nodes");
  q.graph.num_edges = g.require<std::uint64_t>("num_edges");
  q.graph.graphs_per_round = g.get<std::uint64_t>("graphs_per_round", 1);
  g.finish();
  r.finish();
  return q;
}

}  // namespace feddense
