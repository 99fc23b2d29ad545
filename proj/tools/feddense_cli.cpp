// feddense: command-line front end.
//
//   feddense run <config.json> [--seed N] [--out DIR] [--strategy S]
//                              [--with-local-baseline] [--parallel-clients]
//   feddense gen-data <recipe.json> <out-dir>
//   feddense analyze-hetero <dataset>... [--out DIR]
//   feddense count-resources <config.json> [--strategy S]
//
// Errors are reported on stderr as a single line
//   error: <category>: <message>
// with exit status 1 (2 for usage errors).

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "feddense/feddense.hpp"

namespace fs = std::filesystem;
using namespace feddense;

namespace {

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

fs::path parent_or_dot(const fs::path& p) { return p.has_parent_path() ? p.parent_path() : fs::path("."); }

// A dataset argument is a TU directory (name taken from its *_A.txt file), a
// DIR:NAME pair, or a synthetic recipe (.json).
GraphDataset load_dataset_arg(const std::string& arg) {
  const fs::path p(arg);
  if (p.extension() == ".json" && fs::is_regular_file(p)) return generate_dataset(recipe_from_json(read_json_file(p)));
  if (fs::is_directory(p)) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(p)) {
      const std::string f = entry.path().filename().string();
      if (f.size() > 6 && f.compare(f.size() - 6, 6, "_A.txt") == 0) names.push_back(f.substr(0, f.size() - 6));
    }
    if (names.size() != 1) throw IngestionError(arg + ": expected exactly one *_A.txt file, found " + std::to_string(names.size()));
    return load_tu_dataset(p, names.front());
  }
  const auto colon = arg.rfind(':');
  if (colon != std::string::npos && fs::is_directory(arg.substr(0, colon))) {
    return load_tu_dataset(arg.substr(0, colon), arg.substr(colon + 1));
  }
  throw IngestionError(arg + ": not a dataset directory or recipe file");
}

void write_matrix_csv(const fs::path& path, const std::vector<std::string>& names, const Matrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "dataset";
  for (const auto& n : names) out << ',' << n;
  out << '\n' << std::setprecision(10);
  for (std::size_t i = 0; i < m.rows; ++i) {
    out << names[i];
    for (std::size_t j = 0; j < m.cols; ++j) out << ',' << m(i, j);
    out << '\n';
  }
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
            const std::string& strategy, bool local_baseline, bool parallel) {
  json j = read_json_file(config_path);
  if (seed) j["federation"]["seed"] = *seed;
  if (!strategy.empty()) j["federation"]["strategy"] = strategy;
  if (!out.empty()) j["output_dir"] = out;
  auto cfg = experiment_from_json(j);
  RunOptions opts;
  opts.parallel_clients = parallel;
  opts.with_local_baseline = local_baseline;
  opts.base_dir = parent_or_dot(config_path);
  opts.log = &std::cerr;
  auto summary = run_experiment(cfg, opts);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_gen_data(const std::string& recipe_path, const std::string& out_dir) {
  auto recipe = recipe_from_json(read_json_file(recipe_path));
  auto ds = generate_dataset(recipe);
  write_tu_dataset(ds, out_dir);
  std::cout << json{{"name", ds.name},
                    {"graphs", ds.size()},
                    {"num_classes", ds.num_classes},
                    {"feature_dim", ds.feature_dim},
                    {"dir", out_dir}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_analyze(const std::vector<std::string>& paths, const std::string& out, const HeteroBins& bins) {
  std::vector<GraphDataset> datasets;
  std::vector<std::string> names;
  for (const auto& p : paths) {
    datasets.push_back(load_dataset_arg(p));
    names.push_back(datasets.back().name);
  }
  const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  fs::create_directories(dir);
  write_matrix_csv(dir / "feature_jsd.csv", names, heatmap(datasets, HeteroMode::feature, bins));
  write_matrix_csv(dir / "structure_jsd.csv", names, heatmap(datasets, HeteroMode::structure, bins));
  const auto& ref = datasets.front();
  json meta = {{"datasets", names},
               {"divergence", "jensen-shannon, base 2"},
               {"feature",
                {{"statistic", "cosine similarity of node features across each edge"},
                 {"bins", bins.similarity},
                 {"bin_edges", feature_similarity_distribution(ref, bins.similarity).bin_edges}}},
               {"structure",
                {{"statistic", "node degree histogram (clipped) followed by clustering-coefficient histogram"},
                 {"degree_bins", bins.degree},
                 {"clustering_bins", bins.clustering},
                 {"bin_edges", structure_distribution(ref, bins.degree, bins.clustering).bin_edges}}}};
  write_json_atomic(dir / "binning.json", meta);
  std::cout << json{{"feature", (dir / "feature_jsd.csv").string()},
                    {"structure", (dir / "structure_jsd.csv").string()},
                    {"binning", (dir / "binning.json").string()}}
                   .dump()
            << '\n';
  return 0;
}

// Accepts a resource query ({model, strategy, encoding, graph}) or a full
// experiment config; for the latter every client's dataset is resolved and
// its mean graph size used.
int cmd_count(const std::string& config_path, const std::string& strategy) {
  json j = read_json_file(config_path);
  if (!j.contains("federation")) {
    if (!strategy.empty()) j["strategy"] = strategy;
    auto q = resource_query_from_json(j);
    std::cout << to_json(model_report(q.model, q.strategy, q.graph, q.encoding)).dump(2) << '\n';
    return 0;
  }
  if (!strategy.empty()) j["federation"]["strategy"] = strategy;
  auto cfg = experiment_from_json(j);
  json out = json::array();
  for (std::size_t i = 0; i < cfg.clients.size(); ++i) {
    auto ds = resolve_dataset(cfg.clients[i], parent_or_dot(config_path));
    ModelConfig m = cfg.federation.model;
    m.feature_dim = ds.feature_dim;
    m.num_classes = ds.num_classes;
    std::uint64_t nodes = 0, edges = 0;
    for (const auto& g : ds.graphs) {
      nodes += g.num_nodes();
      edges += g.num_edges();
    }
    GraphStats stats;
    stats.num_nodes = std::max<std::uint64_t>(1, (nodes + ds.size() / 2) / ds.size());
    stats.num_edges = std::min<std::uint64_t>((edges + ds.size() / 2) / ds.size(), stats.num_nodes * (stats.num_nodes - 1) / 2);
    stats.graphs_per_round = split_indices(ds.size(), cfg.federation.split, 0).train.size() * cfg.federation.local_epochs;
    auto report = to_json(model_report(m, cfg.federation.strategy, stats, cfg.encoding));
    report["client_id"] = i;
    report["dataset"] = ds.name;
    report["graph_stats"] = {{"num_nodes", stats.num_nodes}, {"num_edges", stats.num_edges},
                             {"graphs_per_round", stats.graphs_per_round}};
    out.push_back(report);
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated graph classification with dual-channel GNNs"};
  app.require_subcommand(1);

  std::string config, out, strategy, recipe, out_dir;
  std::optional<std::uint64_t> seed;
  bool local_baseline = false, parallel = false;
  std::vector<std::string> paths;
  HeteroBins bins;

  auto* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override federation.seed");
  run->add_option("--out", out, "Override output_dir");
  run->add_option("--strategy", strategy, "Override federation.strategy");
  run->add_flag("--with-local-baseline", local_baseline, "Also run Local with the same seeds and report avg_gain");
  run->add_flag("--parallel-clients", parallel, "Train clients of a round on separate threads");

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset in TU format");
  gen->add_option("recipe", recipe, "Synthetic recipe (JSON)")->required();
  gen->add_option("out-dir", out_dir, "Output directory")->required();

  auto* hetero = app.add_subcommand("analyze-hetero", "Pairwise feature/structure divergence between datasets");
  hetero->add_option("datasets", paths, "TU dataset directories, DIR:NAME pairs or recipe files")->required();
  hetero->add_option("--out", out, "Output directory");
  hetero->add_option("--similarity-bins", bins.similarity, "Bins for the feature-similarity histogram");
  hetero->add_option("--degree-bins", bins.degree, "Bins for the degree histogram");
  hetero->add_option("--clustering-bins", bins.clustering, "Bins for the clustering-coefficient histogram");

  auto* count = app.add_subcommand("count-resources", "Print the FLOP/parameter/payload report");
  count->add_option("config", config, "Resource query or experiment config (JSON)")->required();
  count->add_option("--strategy", strategy, "Override the strategy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*run) return cmd_run(config, seed, out, strategy, local_baseline, parallel);
    if (*gen) return cmd_gen_data(recipe, out_dir);
    if (*hetero) return cmd_analyze(paths, out, bins);
    if (*count) return cmd_count(config, strategy);
  } catch (const Error& e) {
    std::cerr << "error: " << e.category() << ": " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
