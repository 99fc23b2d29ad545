#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "feddense/fed.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace feddense;

namespace {

nn::ParameterSet<float> scalar_set(float v) {
  nn::ParameterSet<float> p;
  p.tensors.push_back({"w", {1, 1}, {v}});
  return p;
}

bool bitwise_equal(const nn::ParamTensor<float>& a, const nn::ParamTensor<float>& b) {
  return a.shape == b.shape && std::memcmp(a.values.data(), b.values.data(), 4 * a.numel()) == 0;
}

std::vector<nn::ParameterSet<float>> random_sets(std::uint64_t seed, std::size_t clients) {
  Rng rng = make_rng({seed, 0xa6});
  std::vector<nn::Shape> shapes;
  const std::size_t ntensors = 1 + uniform_index(rng, 4);
  for (std::size_t t = 0; t < ntensors; ++t) shapes.push_back({1 + uniform_index(rng, 6), 1 + uniform_index(rng, 6)});
  std::vector<nn::ParameterSet<float>> sets(clients);
  for (auto& s : sets) {
    for (std::size_t t = 0; t < ntensors; ++t) {
      std::vector<float> v(nn::numel(shapes[t]));
      for (auto& x : v) x = static_cast<float>(20.0 * uniform01(rng) - 10.0);
      s.tensors.push_back({"t" + std::to_string(t), shapes[t], v});
    }
  }
  return sets;
}

std::vector<GraphDataset> four_clients(std::size_t per_class = 20) {
  std::vector<GraphDataset> ds;
  for (std::uint64_t i = 0; i < 4; ++i) ds.push_back(generate_dataset(fixtures::star_er(10 + i, per_class)));
  return ds;
}

}  // namespace

TEST(WeightedAverage, Examples) {
  auto a = scalar_set(2), b = scalar_set(4);
  std::vector<ParamUpdate<float>> u = {{0, &a, 1}, {1, &b, 1}};
  EXPECT_EQ(weighted_average(u).tensors[0].values[0], 3.0f);
  u = {{0, &a, 1}, {1, &b, 3}};
  EXPECT_EQ(weighted_average(u).tensors[0].values[0], 3.5f);
  u = {{0, &a, 7}};
  EXPECT_EQ(weighted_average(u), a);
}

TEST(WeightedAverage, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = make_rng({seed, 0x5a});
    const std::size_t clients = 1 + uniform_index(rng, 6);
    auto sets = random_sets(seed, clients);
    std::vector<std::size_t> samples;
    std::vector<ParamUpdate<float>> u;
    for (std::size_t c = 0; c < clients; ++c) {
      samples.push_back(1 + uniform_index(rng, 500));
      u.push_back({c, &sets[c], samples[c]});
    }
    auto avg = weighted_average(u);
    std::vector<double> got, expect;
    for (std::size_t t = 0; t < avg.size(); ++t) {
      for (std::size_t i = 0; i < avg.tensors[t].numel(); ++i) {
        got.push_back(avg.tensors[t].values[i]);
        expect.push_back(oracle::weighted_mean(sets, samples, t, i));
      }
    }
    EXPECT_LT(oracle::relative_error(got, expect), 1e-7) << "seed " << seed;
  }
}

TEST(WeightedAverage, DoublePrecisionIsExactToRounding) {
  auto sets = random_sets(4, 5);
  std::vector<nn::ParameterSet<double>> ds;
  for (const auto& s : sets) ds.push_back(s.cast<double>());
  std::vector<std::size_t> samples = {3, 1, 4, 1, 5};
  std::vector<ParamUpdate<double>> u;
  for (std::size_t c = 0; c < 5; ++c) u.push_back({c, &ds[c], samples[c]});
  auto avg = weighted_average(u);
  for (std::size_t t = 0; t < avg.size(); ++t)
    for (std::size_t i = 0; i < avg.tensors[t].numel(); ++i)
      EXPECT_NEAR(avg.tensors[t].values[i], oracle::weighted_mean(sets, samples, t, i), 1e-13);
}

TEST(WeightedAverage, ErrorsNameTheClient) {
  auto a = scalar_set(1);
  nn::ParameterSet<float> b;
  b.tensors.push_back({"w", {1, 2}, {1, 2}});
  std::vector<ParamUpdate<float>> u = {{0, &a, 1}, {7, &b, 1}};
  try {
    weighted_average(u);
    FAIL();
  } catch (const AggregationError& e) {
    EXPECT_NE(std::string(e.what()).find("client 7"), std::string::npos);
  }
  u = {{0, &a, 1}, {3, &a, 0}};
  try {
    weighted_average(u);
    FAIL();
  } catch (const AggregationError& e) {
    EXPECT_NE(std::string(e.what()).find("client 3"), std::string::npos);
  }
  EXPECT_THROW(weighted_average(std::vector<ParamUpdate<float>>{}), AggregationError);
}

TEST(LocalTraining, ZeroLearningRateLeavesParameters) {
  auto fc = fixtures::small_federation(Strategy::local, 1, 1);
  fc.optimizer.lr = 0;
  Federation fed(fc, fixtures::client_data({generate_dataset(fixtures::star_er(1, 10))}, fc));
  auto& c = fed.mutable_clients()[0];
  const auto before = c.params;
  Rng rng(0);
  auto m = local_train_epoch(c, fc, nullptr, rng);
  EXPECT_EQ(c.params, before);
  EXPECT_EQ(m.graphs, c.data->split.train.size());
  EXPECT_GT(m.forward_flops, 0u);
}

TEST(LocalTraining, ProximalTermVanishesAtReference) {
  auto fc = fixtures::small_federation(Strategy::fedprox, 1, 1);
  fc.mu = 0.5;
  Federation fed(fc, fixtures::client_data({generate_dataset(fixtures::star_er(1, 40))}, fc));
  ClientState a = fed.clients()[0], b = fed.clients()[0];
  const auto ref = a.params;
  Rng ra(9), rb(9);
  local_train_epoch(a, fc, &ref, ra);
  local_train_epoch(b, fc, nullptr, rb);
  // First batch sees w == w_ref; later batches do not, so only compare one step.
  ClientState c = fed.clients()[0], d = fed.clients()[0];
  auto one_batch = fc;
  one_batch.batch_size = 1000;
  Rng rc(9), rd(9);
  local_train_epoch(c, one_batch, &ref, rc);
  local_train_epoch(d, one_batch, nullptr, rd);
  EXPECT_EQ(c.params, d.params);
  EXPECT_FALSE(a.params == b.params);
}

TEST(LocalTraining, ProximalTermValue) {
  nn::ParameterSet<float> p, r;
  p.tensors.push_back({"w", {1, 2}, {1, 2}});
  r.tensors.push_back({"w", {1, 2}, {0, 0}});
  EXPECT_DOUBLE_EQ(proximal_term(p, r, 0.5), 1.25);
  EXPECT_EQ(proximal_term(p, p, 0.5), 0.0);
}

TEST(LocalTraining, ProximalGradientPullsTowardsReference) {
  // A large mu dominates the loss gradient, so the step moves towards the reference.
  auto fc = fixtures::small_federation(Strategy::fedprox, 1, 1);
  fc.mu = 100.0;
  fc.batch_size = 1000;
  fc.optimizer.weight_decay = 0;
  Federation fed(fc, fixtures::client_data({generate_dataset(fixtures::star_er(1, 10))}, fc));
  ClientState c = fed.clients()[0];
  auto ref = c.params;
  for (auto& t : ref.tensors)
    for (auto& v : t.values) v += 1.0f;
  const double before = proximal_term(c.params, ref, 1.0);
  Rng rng(1);
  local_train_epoch(c, fc, &ref, rng);
  EXPECT_LT(proximal_term(c.params, ref, 1.0), before);
}

TEST(Evaluate, ZeroLogitsPredictClassZero) {
  auto fc = fixtures::small_federation(Strategy::local, 1, 1);
  fc.split = {0.5, 0.25, 0.25};
  Federation fed(fc, fixtures::client_data({generate_dataset(fixtures::star_er(1, 10))}, fc));
  auto& c = fed.mutable_clients()[0];
  for (auto& t : c.params.tensors)
    if (t.name.rfind("classifier", 0) == 0) std::fill(t.values.begin(), t.values.end(), 0.0f);
  for (auto s : {SplitKind::train, SplitKind::val, SplitKind::test}) {
    const auto& idx = s == SplitKind::train ? c.data->split.train : s == SplitKind::val ? c.data->split.val : c.data->split.test;
    std::size_t zeros = 0;
    for (auto i : idx) zeros += c.data->dataset.graphs[i].label() == 0;
    auto m = evaluate(c, s, 3);
    EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(zeros) / static_cast<double>(idx.size()));
    EXPECT_NEAR(m.loss, std::log(2.0), 1e-6);
  }
}

TEST(Evaluate, BatchSizeDoesNotChangeMetrics) {
  auto fc = fixtures::small_federation(Strategy::local, 1, 1);
  Federation fed(fc, fixtures::client_data({generate_dataset(fixtures::star_er(2, 15))}, fc));
  const auto& c = fed.clients()[0];
  auto a = evaluate(c, SplitKind::train, 1), b = evaluate(c, SplitKind::train, 1000);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_NEAR(a.loss, b.loss, 1e-6);
  EXPECT_EQ(a.forward_flops, b.forward_flops);
}

TEST(Federation, FeddenseBroadcastsOnlyStructuralTensors) {
  auto fc = fixtures::small_federation(Strategy::feddense, 4, 6);
  Federation fed(fc, fixtures::client_data(four_clients(), fc));
  std::size_t checked = 0;
  fed.set_round_start_hook([&](std::size_t round, const ServerState& s, const std::vector<ClientState>& cs) {
    for (const auto& t : s.global.tensors) {
      EXPECT_EQ(t.group, nn::ParamGroup::structural);
      for (const auto& c : cs) EXPECT_TRUE(bitwise_equal(c.params.at(t.name), t)) << t.name << " round " << round;
    }
    if (round > 1) {
      for (const auto& t : cs[0].params.tensors) {
        if (t.group != nn::ParamGroup::feature) continue;
        for (std::size_t j = 1; j < cs.size(); ++j) EXPECT_FALSE(bitwise_equal(cs[j].params.at(t.name), t)) << t.name;
      }
    }
    ++checked;
  });
  for (std::size_t t = 0; t < 6; ++t) {
    auto rm = fed.run_round();
    for (const auto& c : rm.clients) {
      EXPECT_EQ(c.upload_bytes, 4 * fed.shared_param_count());
      EXPECT_EQ(c.download_bytes, 4 * fed.shared_param_count());
    }
  }
  EXPECT_EQ(checked, 6u);
  EXPECT_EQ(fed.shared_param_count(), nn::count(fed.clients()[0].params, structural_subset(fed.clients()[0].params, fed.clients()[0].model)));
  EXPECT_THROW(fed.run_round(), ConfigError);
}

TEST(Federation, ServerHoldsWeightedAverageOfUploads) {
  auto fc = fixtures::small_federation(Strategy::feddense, 4, 1);
  Federation fed(fc, fixtures::client_data(four_clients(), fc));
  fed.run_round();
  std::vector<nn::ParameterSet<float>> sets;
  std::vector<std::size_t> samples;
  for (const auto& c : fed.clients()) {
    sets.push_back(nn::extract(c.params, fed.selection_for(c)));
    samples.push_back(c.data->num_samples());
  }
  const auto& g = fed.server().global;
  for (std::size_t t = 0; t < g.size(); ++t)
    for (std::size_t i = 0; i < g.tensors[t].numel(); ++i)
      EXPECT_EQ(g.tensors[t].values[i], static_cast<float>(oracle::weighted_mean(sets, samples, t, i)));
}

TEST(Federation, FedavgWithIdenticalClientsStaysSymmetric) {
  auto fc = fixtures::small_federation(Strategy::fedavg, 3, 3);
  auto ds = generate_dataset(fixtures::star_er(5, 10));
  std::vector<std::shared_ptr<const ClientData>> data;
  auto one = prepare_client_data(0, ds, {}, fc.split, fc.seed);
  for (std::size_t i = 0; i < 3; ++i) {
    auto copy = std::make_shared<ClientData>(*one);
    copy->id = i;
    data.push_back(copy);
  }
  Federation fed(fc, data);
  EXPECT_EQ(fed.shared_names().size(), fed.clients()[0].params.size());
  fed.set_round_start_hook([&](std::size_t, const ServerState&, const std::vector<ClientState>& cs) {
    for (const auto& c : cs) EXPECT_EQ(c.params, cs[0].params);
  });
  for (int t = 0; t < 3; ++t) fed.run_round();
}

TEST(Federation, FedavgKeepsIncongruentTensorsPrivate) {
  auto fc = fixtures::small_federation(Strategy::fedavg, 2, 1);
  std::vector<GraphDataset> ds = {generate_dataset(fixtures::star_er(1, 10, 3)),
                                  generate_dataset(fixtures::star_er(2, 10, 5))};
  Federation fed(fc, fixtures::client_data(ds, fc));
  const auto& names = fed.shared_names();
  EXPECT_EQ(std::count(names.begin(), names.end(), "feature_init.weight"), 0);
  EXPECT_EQ(std::count(names.begin(), names.end(), "classifier.weight"), 1);
  EXPECT_EQ(names.size() + 1, fed.clients()[0].params.size());
  fed.run_round();
}

TEST(Federation, LocalStrategyNeverCommunicates) {
  auto fc = fixtures::small_federation(Strategy::local, 4, 2);
  Federation fed(fc, fixtures::client_data(four_clients(), fc));
  EXPECT_EQ(fed.shared_param_count(), 0u);
  for (int t = 0; t < 2; ++t)
    for (const auto& c : fed.run_round().clients) {
      EXPECT_EQ(c.upload_bytes, 0u);
      EXPECT_EQ(c.download_bytes, 0u);
    }
}

TEST(Federation, SampleCountsAreConserved) {
  auto fc = fixtures::small_federation(Strategy::feddense, 4, 1);
  auto data = fixtures::client_data(four_clients(), fc);
  Federation fed(fc, data);
  std::size_t total = 0;
  for (const auto& d : data) {
    total += d->num_samples();
    EXPECT_EQ(d->split.size(), d->dataset.size());
  }
  EXPECT_EQ(fed.server().total_samples, total);
}

TEST(Federation, ParallelClientsMatchSequential) {
  auto fc = fixtures::small_federation(Strategy::fedprox, 4, 3);
  auto data = fixtures::client_data(four_clients(), fc);
  Federation seq(fc, data), par(fc, data, true);
  for (int t = 0; t < 3; ++t) {
    auto a = seq.run_round(), b = par.run_round();
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(a.clients[i].train.loss, b.clients[i].train.loss);
      EXPECT_EQ(a.clients[i].test.accuracy, b.clients[i].test.accuracy);
      EXPECT_EQ(a.clients[i].train_flops, b.clients[i].train_flops);
    }
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(seq.clients()[i].params, par.clients()[i].params);
  EXPECT_EQ(seq.server().global, par.server().global);
}

TEST(Federation, ConfigurationErrors) {
  auto ds = four_clients();
  auto fc = fixtures::small_federation(Strategy::feddense, 3, 1);
  EXPECT_THROW(Federation(fc, fixtures::client_data(ds, fc)), ConfigError);
  fc = fixtures::small_federation(Strategy::feddense, 4, 1, ModelVariant::single);
  EXPECT_THROW(Federation(fc, fixtures::client_data(ds, fc)), ConfigError);
  fc = fixtures::small_federation(Strategy::fedavg, 1, 1);
  fc.rounds = 0;
  EXPECT_THROW(fc.validate(), ConfigError);
  EXPECT_THROW(parse_strategy("fedsgd"), InvalidArgument);
}

TEST(Federation, EmptySplitIsAConfigError) {
  auto fc = fixtures::small_federation(Strategy::local, 1, 1);
  GraphDataset tiny = generate_dataset(fixtures::star_er(1, 1));  // two graphs: val/test empty
  Federation fed(fc, fixtures::client_data({tiny}, fc));
  try {
    fed.evaluate_initial();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("client 0"), std::string::npos);
  }
}
