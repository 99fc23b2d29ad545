#pragma once

// Small synthetic federations shared by the federation, experiment and
// acceptance tests.

#include <memory>
#include <vector>

#include "feddense/feddense.hpp"

namespace fixtures {

using namespace feddense;

/// Two classes: cycles (label 0) and paths (label 1).
inline SyntheticRecipe cycle_path(std::uint64_t seed, std::size_t per_class, std::size_t min_n = 6,
                                  std::size_t max_n = 16, FeatureMode mode = FeatureMode::constant,
                                  std::size_t fdim = 1) {
  SyntheticRecipe rc;
  rc.name = "cycle_path_" + std::to_string(seed);
  rc.seed = seed;
  rc.feature_mode = mode;
  rc.feature_dim = fdim;
  rc.groups = {{SyntheticKind::cycle, 0, per_class, min_n, max_n, 0.5},
               {SyntheticKind::path, 1, per_class, min_n, max_n, 0.5}};
  return rc;
}

/// Stars vs random graphs with random features of width `fdim`.
inline SyntheticRecipe star_er(std::uint64_t seed, std::size_t per_class, std::size_t fdim = 3) {
  SyntheticRecipe rc;
  rc.name = "star_er_" + std::to_string(seed);
  rc.seed = seed;
  rc.feature_mode = FeatureMode::random;
  rc.feature_dim = fdim;
  rc.groups = {{SyntheticKind::star, 0, per_class, 4, 9, 0.5}, {SyntheticKind::erdos_renyi, 1, per_class, 4, 9, 0.4}};
  return rc;
}

inline FederationConfig small_federation(Strategy s, std::size_t clients, std::size_t rounds,
                                         ModelVariant v = ModelVariant::ddc, std::size_t hidden = 8) {
  FederationConfig fc;
  fc.num_clients = clients;
  fc.rounds = rounds;
  fc.batch_size = 16;
  fc.strategy = s;
  fc.model.variant = v;
  fc.model.num_layers = 2;
  fc.model.hidden = hidden;
  fc.model.struct_dim = StructEncodingConfig{}.width();
  fc.seed = 3;
  return fc;
}

inline std::vector<std::shared_ptr<const ClientData>> client_data(const std::vector<GraphDataset>& ds,
                                                                  const FederationConfig& fc,
                                                                  const StructEncodingConfig& enc = {}) {
  std::vector<std::shared_ptr<const ClientData>> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out.push_back(prepare_client_data(i, ds[i], enc, fc.split, fc.seed, fc.model.has_struct_channel()));
  }
  return out;
}

inline ExperimentConfig experiment(const std::vector<SyntheticRecipe>& recipes, const FederationConfig& fc,
                                   std::size_t reps, const std::string& out) {
  ExperimentConfig cfg;
  cfg.federation = fc;
  cfg.federation.num_clients = recipes.size();
  for (const auto& r : recipes) {
    DatasetSpec d;
    d.kind = DatasetSpec::Kind::synthetic;
    d.recipe = r;
    cfg.clients.push_back(d);
  }
  cfg.repetitions = reps;
  cfg.output_dir = out;
  return cfg;
}

}  // namespace fixtures
