#pragma once

// Simulated federation: one parameter server, N clients, synchronous rounds of
// broadcast -> local training -> upload -> weighted aggregation.

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "feddense/checkpoint.hpp"
#include "feddense/error.hpp"
#include "feddense/graph.hpp"
#include "feddense/model.hpp"
#include "feddense/nn/adam.hpp"
#include "feddense/nn/parameters.hpp"
#include "feddense/rng.hpp"
#include "feddense/struct_encode.hpp"

namespace feddense {

enum class Strategy { local, fedavg, fedprox, feddense };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::local: return "local";
    case Strategy::fedavg: return "fedavg";
    case Strategy::fedprox: return "fedprox";
    case Strategy::feddense: return "feddense";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "local") return Strategy::local;
  if (s == "fedavg") return Strategy::fedavg;
  if (s == "fedprox") return Strategy::fedprox;
  if (s == "feddense") return Strategy::feddense;
  throw InvalidArgument("unknown strategy '" + s + "'");
}

struct FederationConfig {
  std::size_t num_clients = 1;
  std::size_t rounds = 200;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 128;
  Strategy strategy = Strategy::feddense;
  double mu = 0.01;
  /// feature_dim, struct_dim and num_classes are filled in per client from its data.
  ModelConfig model;
  nn::AdamOptions optimizer;
  SplitRatios split;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_clients < 1) throw ConfigError("num_clients must be >= 1");
    if (rounds < 1) throw ConfigError("rounds must be >= 1");
    if (local_epochs < 1) throw ConfigError("local_epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(mu >= 0.0)) throw ConfigError("mu must be >= 0");
    if (strategy == Strategy::feddense && !model.has_struct_channel()) {
      throw ConfigError("feddense requires a model with a structural channel");
    }
  }

  friend bool operator==(const FederationConfig&, const FederationConfig&) = default;
};

/// A client's private data with precomputed structural vectors.
struct ClientData {
  std::size_t id = 0;
  GraphDataset dataset;
  std::vector<Matrix> struct_vectors;  // one per graph; empty when unused
  SplitDataset split;

  /// |d_i|: the number of training graphs.
  std::size_t num_samples() const noexcept { return split.train.size(); }
};

inline std::shared_ptr<const ClientData> prepare_client_data(std::size_t id, GraphDataset ds,
                                                             const StructEncodingConfig& enc,
                                                             const SplitRatios& ratios, std::uint64_t seed,
                                                             bool with_struct = true) {
  ds.validate();
  auto data = std::make_shared<ClientData>();
  data->id = id;
  data->split = split_dataset(ds, ratios, derive_seed({seed, id, 0x517ULL}));
  if (with_struct) {
    data->struct_vectors.reserve(ds.size());
    for (const auto& g : ds.graphs) data->struct_vectors.push_back(build_structural_vectors(g, enc));
  }
  data->dataset = std::move(ds);
  return data;
}

struct ClientState {
  std::size_t id = 0;
  std::shared_ptr<const ClientData> data;
  ModelConfig model;
  nn::ParameterSet<float> params;
  nn::AdamState<float> optimizer;
  std::uint64_t seed = 0;

  /// Private stream for (client, round); independent of execution schedule.
  Rng rng_for_round(std::size_t round) const { return make_rng({seed, id, round}); }
};

struct ServerState {
  std::size_t round = 0;
  /// Aggregated shared tensors (all shared tensors for fedavg/fedprox, the
  /// structural subset for feddense; empty for local).
  nn::ParameterSet<float> global;
  std::size_t total_samples = 0;
};

template <class T>
struct ParamUpdate {
  std::size_t client_id = 0;
  const nn::ParameterSet<T>* params = nullptr;
  std::size_t samples = 0;
};

/// Element-wise sum_i (|d_i| / |D|) w_i, accumulated in double.
template <class T>
nn::ParameterSet<T> weighted_average(std::span<const ParamUpdate<T>> updates) {
  if (updates.empty()) throw AggregationError("no updates to aggregate");
  const auto& ref = *updates.front().params;
  double total = 0;
  for (const auto& u : updates) {
    if (u.samples == 0) throw AggregationError("client " + std::to_string(u.client_id) + " reported zero samples");
    total += static_cast<double>(u.samples);
    const auto& p = *u.params;
    bool ok = p.size() == ref.size();
    for (std::size_t i = 0; ok && i < p.size(); ++i) {
      ok = p.tensors[i].name == ref.tensors[i].name && p.tensors[i].shape == ref.tensors[i].shape;
    }
    if (!ok) throw AggregationError("client " + std::to_string(u.client_id) + " sent parameters of mismatched shape");
  }
  nn::ParameterSet<T> out = ref;
  std::vector<double> acc;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    acc.assign(ref.tensors[i].numel(), 0.0);
    for (const auto& u : updates) {
      const double w = static_cast<double>(u.samples) / total;
      const auto& vals = u.params->tensors[i].values;
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * static_cast<double>(vals[k]);
    }
    for (std::size_t k = 0; k < acc.size(); ++k) out.tensors[i].values[k] = static_cast<T>(acc[k]);
  }
  return out;
}

template <class T>
nn::ParameterSet<T> weighted_average(const std::vector<ParamUpdate<T>>& updates) {
  return weighted_average(std::span<const ParamUpdate<T>>(updates));
}

enum class SplitKind { train, val, test };

inline const char* to_string(SplitKind s) {
  switch (s) {
    case SplitKind::train: return "train";
    case SplitKind::val: return "val";
    case SplitKind::test: return "test";
  }
  return "?";
}

struct EpochMetrics {
  double loss = 0;      // mean graph cross-entropy over the epoch
  double accuracy = 0;  // training-mode accuracy
  std::size_t graphs = 0;
  std::uint64_t forward_flops = 0;
};

struct EvalMetrics {
  double loss = 0;
  double accuracy = 0;
  std::uint64_t forward_flops = 0;
};

namespace fed_detail {

inline GraphBatch assemble(const ClientState& c, std::span<const std::size_t> idx) {
  const auto& data = *c.data;
  std::vector<const Graph*> gs;
  std::vector<const Matrix*> ss;
  for (auto i : idx) {
    gs.push_back(&data.dataset.graphs.at(i));
    if (c.model.has_struct_channel()) ss.push_back(&data.struct_vectors.at(i));
  }
  return make_batch(gs, ss);
}

inline const std::vector<std::size_t>& split_of(const ClientData& d, SplitKind s) {
  switch (s) {
    case SplitKind::train: return d.split.train;
    case SplitKind::val: return d.split.val;
    case SplitKind::test: return d.split.test;
  }
  return d.split.train;
}

}  // namespace fed_detail

/// One shuffled pass over the client's train split with an Adam step per
/// batch. With `prox_ref` set, adds (mu/2)||w - w_ref||^2 over the tensors
/// present in prox_ref.
inline EpochMetrics local_train_epoch(ClientState& client, const FederationConfig& cfg,
                                      const nn::ParameterSet<float>* prox_ref, Rng& rng) {
  std::vector<std::size_t> order = client.data->split.train;
  if (order.empty()) throw ConfigError("client " + std::to_string(client.id) + " has an empty train split");
  shuffle(order.begin(), order.end(), rng);

  std::vector<std::size_t> prox_idx;
  if (prox_ref) {
    for (const auto& t : prox_ref->tensors) prox_idx.push_back(client.params.index_of(t.name));
  }

  EpochMetrics m;
  nn::FlopCounter flops;
  double loss_sum = 0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(order.size(), start + cfg.batch_size);
    std::span<const std::size_t> idx(order.data() + start, end - start);
    auto batch = fed_detail::assemble(client, idx);
    BatchResult<float> res;
    {
      nn::FlopScope scope(flops);
      res = batch_loss(batch, client.params, client.model, Mode::train, rng, true);
    }
    if (prox_ref) {
      for (std::size_t k = 0; k < prox_idx.size(); ++k) {
        auto& w = client.params.tensors.at(prox_idx[k]).values;
        const auto& w0 = prox_ref->tensors[k].values;
        auto& g = res.grads[prox_idx[k]];
        for (std::size_t e = 0; e < w.size(); ++e) g[e] += static_cast<float>(cfg.mu) * (w[e] - w0[e]);
      }
    }
    nn::adam_step(client.params, res.grads, client.optimizer);
    loss_sum += res.loss * static_cast<double>(idx.size());
    correct += res.correct;
    m.graphs += idx.size();
  }
  m.loss = loss_sum / static_cast<double>(m.graphs);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.graphs);
  m.forward_flops = flops.total();
  return m;
}

/// (mu/2)||w - w_ref||^2 over the tensors of ref.
inline double proximal_term(const nn::ParameterSet<float>& params, const nn::ParameterSet<float>& ref, double mu) {
  double s = 0;
  for (const auto& t : ref.tensors) {
    const auto& w = params.at(t.name).values;
    for (std::size_t e = 0; e < w.size(); ++e) {
      const double d = static_cast<double>(w[e]) - static_cast<double>(t.values[e]);
      s += d * d;
    }
  }
  return 0.5 * mu * s;
}

/// Eval-mode loss and accuracy over a split; ties in argmax go to the lowest class.
inline EvalMetrics evaluate(const ClientState& client, SplitKind split, std::size_t batch_size = 128) {
  const auto& idx = fed_detail::split_of(*client.data, split);
  if (idx.empty()) {
    throw ConfigError("client " + std::to_string(client.id) + " has an empty " + to_string(split) + " split");
  }
  EvalMetrics m;
  nn::FlopCounter flops;
  double loss_sum = 0;
  std::size_t correct = 0;
  Rng unused(0);
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    auto batch = fed_detail::assemble(client, std::span<const std::size_t>(idx.data() + start, end - start));
    nn::FlopScope scope(flops);
    auto res = batch_loss(batch, client.params, client.model, Mode::eval, unused, false);
    loss_sum += res.loss * static_cast<double>(end - start);
    correct += res.correct;
  }
  m.loss = loss_sum / static_cast<double>(idx.size());
  m.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
  m.forward_flops = flops.total();
  return m;
}

struct ClientRoundMetrics {
  std::size_t client_id = 0;
  EpochMetrics train;  // last local epoch
  EvalMetrics val;
  EvalMetrics test;
  std::uint64_t upload_bytes = 0;
  std::uint64_t download_bytes = 0;
  /// Forward FLOPs of local training times 3 (backward estimated as 2x forward).
  std::uint64_t train_flops = 0;
};

struct RoundMetrics {
  std::size_t round = 0;
  std::vector<ClientRoundMetrics> clients;
};

class Federation {
 public:
  Federation(FederationConfig cfg, std::vector<std::shared_ptr<const ClientData>> data, bool parallel_clients = false)
      : cfg_(std::move(cfg)), parallel_(parallel_clients) {
    cfg_.validate();
    if (data.size() != cfg_.num_clients) {
      throw ConfigError("num_clients is " + std::to_string(cfg_.num_clients) + " but " + std::to_string(data.size()) +
                        " client datasets were given");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      ClientState c;
      c.id = i;
      c.data = data[i];
      c.model = cfg_.model;
      c.model.feature_dim = data[i]->dataset.feature_dim;
      c.model.num_classes = data[i]->dataset.num_classes;
      if (c.model.has_struct_channel()) {
        if (data[i]->struct_vectors.size() != data[i]->dataset.size()) {
          throw ConfigError("client " + std::to_string(i) + " is missing structural vectors");
        }
        c.model.struct_dim = data[i]->struct_vectors.front().cols;
      }
      c.params = init_params<float>(c.model, cfg_.seed);
      c.optimizer = nn::AdamState<float>(cfg_.optimizer);
      c.seed = cfg_.seed;
      if (c.data->num_samples() == 0) throw ConfigError("client " + std::to_string(i) + " has an empty train split");
      server_.total_samples += c.data->num_samples();
      clients_.push_back(std::move(c));
    }
    shared_names_ = compute_shared_names();
    nn::ParamSelection sel = selection_for(clients_.front());
    server_.global = nn::extract(clients_.front().params, sel);
  }

  const FederationConfig& config() const noexcept { return cfg_; }
  const ServerState& server() const noexcept { return server_; }
  const std::vector<ClientState>& clients() const noexcept { return clients_; }
  std::vector<ClientState>& mutable_clients() noexcept { return clients_; }
  const std::vector<std::string>& shared_names() const noexcept { return shared_names_; }

  /// Tensors of `c` that travel between client and server.
  nn::ParamSelection selection_for(const ClientState& c) const {
    nn::ParamSelection sel;
    for (const auto& name : shared_names_) sel.indices.push_back(c.params.index_of(name));
    return sel;
  }

  std::size_t shared_param_count() const { return server_.global.count(); }

  using RoundStartHook = std::function<void(std::size_t, const ServerState&, const std::vector<ClientState>&)>;
  /// Called after the broadcast and before local training of each round.
  void set_round_start_hook(RoundStartHook hook) { on_round_start_ = std::move(hook); }

  /// Eval-mode metrics before any training (round 0).
  RoundMetrics evaluate_initial() const {
    RoundMetrics rm;
    rm.round = 0;
    for (const auto& c : clients_) {
      ClientRoundMetrics m;
      m.client_id = c.id;
      auto tr = evaluate(c, SplitKind::train, cfg_.batch_size);
      m.train.loss = tr.loss;
      m.train.accuracy = tr.accuracy;
      m.train.forward_flops = tr.forward_flops;
      m.train.graphs = c.data->split.train.size();
      m.val = evaluate(c, SplitKind::val, cfg_.batch_size);
      m.test = evaluate(c, SplitKind::test, cfg_.batch_size);
      rm.clients.push_back(m);
    }
    return rm;
  }

  /// Broadcast, local training, upload and aggregation for one round.
  RoundMetrics run_round() {
    if (server_.round >= cfg_.rounds) throw ConfigError("federation already completed " + std::to_string(cfg_.rounds) + " rounds");
    const std::size_t round = server_.round + 1;
    const bool communicate = cfg_.strategy != Strategy::local;
    RoundMetrics rm;
    rm.round = round;
    rm.clients.resize(clients_.size());

    // Broadcast.
    if (communicate) {
      const auto wire = encode_values(server_.global);
      for (std::size_t i = 0; i < clients_.size(); ++i) {
        nn::overwrite(clients_[i].params, decode_values(wire, server_.global));
        rm.clients[i].download_bytes = wire.size();
      }
    }
    if (on_round_start_) on_round_start_(round, server_, clients_);

    // Local training and evaluation.
    const nn::ParameterSet<float>* prox = cfg_.strategy == Strategy::fedprox ? &server_.global : nullptr;
    auto work = [&](std::size_t i) {
      auto& c = clients_[i];
      auto& m = rm.clients[i];
      m.client_id = c.id;
      Rng rng = c.rng_for_round(round);
      std::uint64_t fwd = 0;
      for (std::size_t e = 0; e < cfg_.local_epochs; ++e) {
        m.train = local_train_epoch(c, cfg_, prox, rng);
        fwd += m.train.forward_flops;
      }
      m.train_flops = 3 * fwd;
      m.val = evaluate(c, SplitKind::val, cfg_.batch_size);
      m.test = evaluate(c, SplitKind::test, cfg_.batch_size);
    };
    if (parallel_ && clients_.size() > 1) {
      std::vector<std::exception_ptr> errors(clients_.size());
      std::vector<std::thread> pool;
      pool.reserve(clients_.size());
      for (std::size_t i = 0; i < clients_.size(); ++i) {
        pool.emplace_back([&, i] {
          try {
            work(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    } else {
      for (std::size_t i = 0; i < clients_.size(); ++i) work(i);
    }

    // Upload and aggregate.
    if (communicate) {
      std::vector<nn::ParameterSet<float>> received;
      received.reserve(clients_.size());
      for (std::size_t i = 0; i < clients_.size(); ++i) {
        const auto wire = encode_values(nn::extract(clients_[i].params, selection_for(clients_[i])));
        rm.clients[i].upload_bytes = wire.size();
        received.push_back(decode_values(wire, server_.global));
      }
      std::vector<ParamUpdate<float>> updates;
      for (std::size_t i = 0; i < clients_.size(); ++i) {
        updates.push_back({clients_[i].id, &received[i], clients_[i].data->num_samples()});
      }
      server_.global = weighted_average(updates);
    }
    server_.round = round;
    return rm;
  }

 private:
  std::vector<std::string> compute_shared_names() const {
    std::vector<std::string> names;
    const auto& first = clients_.front().params;
    switch (cfg_.strategy) {
      case Strategy::local:
        break;
      case Strategy::feddense:
        for (auto i : structural_subset(first, clients_.front().model).indices) {
          const auto& t = first.tensors[i];
          for (const auto& c : clients_) {
            if (!c.params.contains(t.name) || c.params.at(t.name).shape != t.shape) {
              throw ConfigError("structural tensor '" + t.name + "' differs in shape on client " + std::to_string(c.id));
            }
          }
          names.push_back(t.name);
        }
        break;
      case Strategy::fedavg:
      case Strategy::fedprox:
        // Tensors whose shape depends on client data (input or class count)
        // stay private when clients disagree.
        for (const auto& t : first.tensors) {
          bool congruent = true;
          for (const auto& c : clients_) {
            congruent = congruent && c.params.contains(t.name) && c.params.at(t.name).shape == t.shape;
          }
          if (congruent) names.push_back(t.name);
        }
        break;
    }
    return names;
  }

  FederationConfig cfg_;
  bool parallel_ = false;
  ServerState server_;
  std::vector<ClientState> clients_;
  std::vector<std::string> shared_names_;
  RoundStartHook on_round_start_;
};

}  // namespace feddense
