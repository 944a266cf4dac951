#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "emtk/error.hpp"
#include "emtk/grid.hpp"
#include "emtk/model_io.hpp"
#include "emtk/mtnn.hpp"
#include "emtk/registry.hpp"
#include "emtk/smiles.hpp"
#include "emtk/standardizer.hpp"
#include "emtk/train.hpp"
#include "support.hpp"

namespace emtk {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

MTNetConfig config(std::size_t input, std::vector<std::size_t> hidden, std::size_t selector, std::size_t index,
                   std::uint64_t seed = 1) {
  MTNetConfig c;
  c.input_dim = input;
  c.hidden_sizes = std::move(hidden);
  c.selector_dim = selector;
  c.selector_layer_index = index;
  c.seed = seed;
  return c;
}

TEST(Init, ShapesAndDeterminism) {
  const auto net = init_network(config(5, {8, 4}, 3, 2));
  ASSERT_EQ(net.layers().size(), 3u);
  EXPECT_EQ(net.layers()[0].in, 5u);
  EXPECT_EQ(net.layers()[1].in, 8u + 3u);
  EXPECT_EQ(net.layers()[2].in, 4u);
  EXPECT_EQ(net.layers()[2].out, 1u);
  EXPECT_EQ(net.selector_column_offset(), 8u);
  EXPECT_EQ(net, init_network(config(5, {8, 4}, 3, 2)));
  EXPECT_NE(net, init_network(config(5, {8, 4}, 3, 2, 2)));
  const auto st = init_network(config(5, {8, 4}, 0, 1));
  EXPECT_EQ(st.layers()[0].in, 5u);
  EXPECT_EQ(st.layers()[1].in, 8u);
  for (const auto& layer : net.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (double w : layer.weights) EXPECT_LE(std::abs(w), limit);
    for (double b : layer.bias) EXPECT_EQ(b, 0.0);
  }
}

TEST(Init, InvalidConfigs) {
  EXPECT_EQ(code_of([] { init_network(config(0, {4}, 0, 1)); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { init_network(config(3, {}, 0, 1)); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { init_network(config(3, {4, 0}, 0, 1)); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { init_network(config(3, {4, 4}, 2, 3)); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { init_network(config(3, {4, 4}, 2, 0)); }), ErrorCode::InvalidConfig);
  auto c = config(3, {4}, 0, 1);
  c.l2_penalty = -1.0;
  EXPECT_EQ(code_of([&] { init_network(c); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(MTNetConfig::from_json(config(3, {4, 2}, 2, 2).to_json()), config(3, {4, 2}, 2, 2));
}

TEST(Forward, HandTraced) {
  auto net = init_network(config(1, {1}, 0, 1));
  for (auto& layer : net.layers()) {
    std::fill(layer.weights.begin(), layer.weights.end(), 1.0);
  }
  EXPECT_EQ(net.forward(std::vector<double>{2.0}, {}), 2.0);
  EXPECT_EQ(net.forward(std::vector<double>{-5.0}, {}), 0.0);
  EXPECT_EQ(code_of([&] { net.forward(std::vector<double>{1.0, 2.0}, {}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { net.forward(std::vector<double>{1.0}, std::vector<double>{1.0}); }),
            ErrorCode::DimensionMismatch);
}

TEST(Forward, SelectorEntersChosenLayer) {
  // Hidden [1, 1]; the selector feeds layer 2 with weight k on column k.
  auto net = init_network(config(1, {1, 1}, 3, 2));
  for (auto& layer : net.layers()) std::fill(layer.weights.begin(), layer.weights.end(), 1.0);
  auto& widened = net.layers()[1];
  for (std::size_t k = 0; k < 3; ++k) widened.w(0, net.selector_column_offset() + k) = static_cast<double>(k);
  const std::vector<double> x{2.0};
  EXPECT_EQ(net.forward_channel(x, 0), 2.0);
  EXPECT_EQ(net.forward_channel(x, 1), 3.0);
  EXPECT_EQ(net.forward_channel(x, 2), 4.0);
}

TEST(Selector, ZeroedColumnsMakeOutputInvariant) {
  for (std::size_t index : {1u, 2u, 3u}) {
    auto net = init_network(config(4, {6, 5, 3}, 4, index, 40 + index));
    auto& layer = net.layers()[net.selector_layer()];
    for (std::size_t o = 0; o < layer.out; ++o) {
      for (std::size_t k = 0; k < 4; ++k) layer.w(o, net.selector_column_offset() + k) = 0.0;
    }
    SplitMix64 rng(index);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(4);
      for (double& v : x) v = testing::normal(rng);
      const double ref = net.forward_channel(x, 0);
      for (std::size_t c = 1; c < 4; ++c) EXPECT_EQ(net.forward_channel(x, c), ref);
    }
  }
}

TEST(Selector, NonzeroColumnsSeparateChannels) {
  auto net = init_network(config(3, {5, 4}, 3, 2, 9));
  for (auto& layer : net.layers()) {
    for (double& b : layer.bias) b = 1.0;
    for (double& w : layer.weights) w = std::abs(w);
  }
  auto& layer = net.layers()[1];
  for (std::size_t o = 0; o < layer.out; ++o) {
    for (std::size_t k = 0; k < 3; ++k) layer.w(o, net.selector_column_offset() + k) = static_cast<double>(k);
  }
  const std::vector<double> x{0.5, 1.0, 1.5};
  EXPECT_NE(net.forward_channel(x, 0), net.forward_channel(x, 1));
  EXPECT_NE(net.forward_channel(x, 1), net.forward_channel(x, 2));
}

TEST(Gradients, MatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto c = testing::random_gradient_case(seed);
    EXPECT_LT(testing::max_gradient_error(c), 1e-5) << "seed " << seed;
  }
}

TEST(Gradients, EverySelectorLayerIndex) {
  for (std::size_t index = 1; index <= 3; ++index) {
    auto c = testing::random_gradient_case(1000 + index);
    auto cfg = config(3, {4, 5, 3}, 3, index, 77);
    cfg.l2_penalty = 0.01;
    c.net = init_network(cfg);
    SplitMix64 rng(index);
    testing::randomize_biases(c.net, rng);
    c.batch = testing::linear_dataset(4, 3, 3, index);
    EXPECT_LT(testing::max_gradient_error(c), 1e-5) << index;
  }
}

TEST(Gradients, ZeroResidualGivesZero) {
  auto net = init_network(config(2, {3}, 2, 1, 5));
  auto data = testing::linear_dataset(5, 2, 2, 3);
  for (std::size_t i = 0; i < data.size(); ++i) data.y[i] = net.forward_channel(data.x.row(i), data.channel[i]);
  const auto g = gradients(net, data);
  for (const auto& layer : g.weights)
    for (double v : layer) EXPECT_EQ(v, 0.0);
  for (const auto& layer : g.bias)
    for (double v : layer) EXPECT_EQ(v, 0.0);
}

TEST(Gradients, L2TermAlone) {
  auto cfg = config(2, {3}, 0, 1, 5);
  cfg.l2_penalty = 0.25;
  auto net = init_network(cfg);
  auto data = testing::linear_dataset(3, 2, 1, 3);
  for (std::size_t i = 0; i < data.size(); ++i) data.y[i] = net.forward(data.x.row(i), {});
  const auto g = gradients(net, data);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    for (std::size_t k = 0; k < net.layers()[l].weights.size(); ++k) {
      EXPECT_NEAR(g.weights[l][k], 2 * 0.25 * net.layers()[l].weights[k], 1e-15);
    }
    for (double b : g.bias[l]) EXPECT_EQ(b, 0.0);
  }
}

TEST(Gradients, BatchOrderInvariant) {
  const auto net = init_network(config(3, {6, 4}, 2, 2, 8));
  const auto data = testing::linear_dataset(6, 3, 2, 4);
  std::vector<std::size_t> forward_order(data.size());
  std::iota(forward_order.begin(), forward_order.end(), 0);
  auto reversed = forward_order;
  std::reverse(reversed.begin(), reversed.end());
  const auto a = gradients(net, data, forward_order);
  const auto b = gradients(net, data, reversed);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    for (std::size_t k = 0; k < a.weights[l].size(); ++k) EXPECT_NEAR(a.weights[l][k], b.weights[l][k], 1e-14);
  }
  EXPECT_EQ(code_of([&] { gradients(net, SampleTable{}); }), ErrorCode::EmptyData);
}

TEST(Train, IdentityToyConverges) {
  const auto toy = testing::identity_toy();
  TrainConfig tc;
  tc.learning_rate = 1e-2;
  tc.batch_size = 4;
  tc.max_epochs = 2000;
  tc.seed = 3;
  const auto r = train(init_network(config(1, {16, 16}, 0, 1, 3)), toy, nullptr, tc);
  EXPECT_EQ(r.epochs_run, 2000u);
  EXPECT_LT(std::sqrt(mse(r.net, toy)), 1e-2);
}

TEST(Train, PatienceZeroStopsAtFirstNonImprovement) {
  const auto data = testing::linear_dataset(30, 3, 1, 6);
  std::vector<std::size_t> tr(20);
  std::iota(tr.begin(), tr.end(), 0);
  std::vector<std::size_t> va(10);
  std::iota(va.begin(), va.end(), 20);
  TrainConfig tc;
  tc.learning_rate = 0.3;
  tc.batch_size = 4;
  tc.max_epochs = 200;
  tc.patience = 0;
  const auto train_set = data.rows(tr);
  const auto val_set = data.rows(va);
  const auto r = train(init_network(config(3, {8}, 0, 1, 2)), train_set, &val_set, tc);
  ASSERT_LT(r.epochs_run, 200u);
  ASSERT_EQ(r.val_mse.size(), r.epochs_run);
  for (std::size_t e = 1; e + 1 < r.epochs_run; ++e) EXPECT_LT(r.val_mse[e], r.val_mse[e - 1]);
  EXPECT_GE(r.val_mse.back(), r.val_mse[r.epochs_run - 2]);
  EXPECT_EQ(r.best_epoch, r.epochs_run - 1);
  EXPECT_EQ(mse(r.net, val_set), r.val_mse[r.best_epoch - 1]);
}

TEST(Train, Deterministic) {
  const auto data = testing::linear_dataset(20, 3, 2, 1);
  TrainConfig tc;
  tc.max_epochs = 30;
  tc.batch_size = 7;
  tc.seed = 12;
  const auto net = init_network(config(3, {5, 4}, 2, 2, 4));
  const auto a = train(net, data, nullptr, tc);
  const auto b = train(net, data, nullptr, tc);
  EXPECT_EQ(a.train_loss, b.train_loss);
  EXPECT_EQ(a.net, b.net);
  tc.seed = 13;
  EXPECT_NE(train(net, data, nullptr, tc).train_loss, a.train_loss);
}

TEST(Train, DivergenceReportsEpoch) {
  const auto data = testing::linear_dataset(20, 3, 1, 1);
  TrainConfig tc;
  tc.learning_rate = 1e300;
  tc.max_epochs = 50;
  try {
    train(init_network(config(3, {4}, 0, 1)), data, nullptr, tc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteLoss);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

NnGrid small_grid() {
  NnGrid g;
  g.hidden_sizes = {{8}};
  g.selector_positions = {{SelectorPosition::Kind::Last, 0}};
  g.learning_rates = {1e-2};
  g.batch_sizes = {8};
  g.l2_penalties = {0.0};
  g.max_epochs = 60;
  g.patience = 10;
  return g;
}

TEST(Grid, CellEnumeration) {
  NnGrid g;
  g.hidden_sizes = {{4}, {4, 4}};
  g.l2_penalties = {0.0, 1e-3};
  const auto mt = g.cells(true);
  // [4]: last and second-to-last both resolve to layer 1 only for "last".
  ASSERT_EQ(mt.size(), 6u);
  EXPECT_EQ(mt[0].selector_layer_index, 1u);
  EXPECT_EQ(mt[2].hidden_sizes, (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(mt[2].selector_layer_index, 2u);
  EXPECT_EQ(mt[4].selector_layer_index, 1u);
  EXPECT_EQ(g.cells(false).size(), 4u);
  EXPECT_EQ(NnGrid::from_json(g.to_json()).cells(true), mt);
  EXPECT_EQ(code_of([] { NnGrid::from_json(nlohmann::json{{"depth", 3}}); }), ErrorCode::InvalidConfig);
}

TEST(Grid, SingleCellWins) {
  const auto data = testing::linear_dataset(20, 3, 2, 2);
  const auto r = grid_search(small_grid(), data, true, 4, 1);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.best, 0u);
  EXPECT_GE(r.refit_epochs, 1u);
  EXPECT_TRUE(std::isfinite(r.scores[0]));
}

TEST(Grid, CripplingPenaltyLoses) {
  auto g = small_grid();
  g.l2_penalties = {1e6, 0.0};
  const auto data = testing::linear_dataset(25, 3, 2, 2);
  const auto r = grid_search(g, data, true, 5, 4);
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.best, 1u);
  EXPECT_GT(r.scores[0], r.scores[1]);
  const auto again = grid_search(g, data, true, 5, 4);
  EXPECT_EQ(again.scores, r.scores);
  EXPECT_EQ(again.best, r.best);
  EXPECT_EQ(grid_search(g, data, true, 5, 4, 2).scores, r.scores);
}

class ModelIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<MolGraph> graphs;
    for (const auto& m : testing::corpus()) graphs.push_back(parse_smiles(m.smiles));
    bundle_.schema = fit_schema(std::span<const MolGraph>(graphs), false);
    bundle_.registry = default_registry();
    bundle_.model_id = "MT-NN-all";
    const std::size_t dim = bundle_.schema.size();
    SampleTable t;
    t.n_channels = bundle_.registry.size();
    SplitMix64 rng(5);
    for (std::size_t i = 0; i < 40; ++i) {
      std::vector<double> x(dim);
      for (double& v : x) v = testing::normal(rng);
      t.append(x, i % t.n_channels, testing::normal(rng), std::to_string(i));
    }
    bundle_.standardizers = {Standardizer::fit(t)};
    bundle_.nets = {init_network(config(dim, {8, 6}, bundle_.registry.size(), 2, 21))};
    for (auto& layer : bundle_.nets[0].layers())
      for (double& b : layer.bias) b = 0.1 * testing::normal(rng);
  }
  std::vector<double> random_input(SplitMix64& rng) const {
    std::vector<double> x(bundle_.schema.size());
    for (double& v : x) v = 3.0 * testing::normal(rng);
    return x;
  }
  ModelBundle bundle_;
};

TEST_F(ModelIoTest, RoundTripIsBitExact) {
  const auto dir = testing::temp_dir("model_io");
  const auto path = (dir / "m.emmt").string();
  save_model(bundle_, path);
  const auto back = load_model(path);
  EXPECT_EQ(back.nets, bundle_.nets);
  EXPECT_EQ(back.standardizers, bundle_.standardizers);
  EXPECT_EQ(back.schema, bundle_.schema);
  EXPECT_EQ(back.registry, bundle_.registry);
  SplitMix64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_input(rng);
    const auto a = predict_matrix(bundle_, x);
    const auto b = predict_matrix(back, x);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t c = 0; c < a.size(); ++c) EXPECT_EQ(a[c].value, b[c].value);
  }
  EXPECT_EQ(serialize_model(back), serialize_model(bundle_));
}

TEST_F(ModelIoTest, CorruptionIsDetected) {
  const auto bytes = serialize_model(bundle_);
  EXPECT_EQ(bytes.substr(0, 4), "EMMT");
  EXPECT_EQ(code_of([&] { deserialize_model(bytes.substr(0, bytes.size() / 2)); }), ErrorCode::CorruptFile);
  EXPECT_EQ(code_of([&] { deserialize_model(bytes.substr(0, 6)); }), ErrorCode::CorruptFile);
  auto flipped = bytes;
  flipped[bytes.size() - 3] ^= 0x10;
  EXPECT_EQ(code_of([&] { deserialize_model(flipped); }), ErrorCode::CorruptFile);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(code_of([&] { deserialize_model(magic); }), ErrorCode::CorruptFile);
  auto bumped = bytes;
  bumped[4] = static_cast<char>(kModelFormatVersion + 1);
  EXPECT_EQ(code_of([&] { deserialize_model(bumped); }), ErrorCode::VersionMismatch);
  EXPECT_EQ(code_of([] { load_model("/nonexistent/model.emmt"); }), ErrorCode::IoError);
}

TEST_F(ModelIoTest, PredictMatrixInvertsEachChannel) {
  SplitMix64 rng(3);
  const auto x = random_input(rng);
  const auto preds = predict_matrix(bundle_, x);
  ASSERT_EQ(preds.size(), bundle_.registry.size());
  const auto z = bundle_.standardizers[0].apply_features(x);
  for (std::size_t c = 0; c < preds.size(); ++c) {
    EXPECT_EQ(preds[c].channel, bundle_.registry.at(c).name());
    const double manual = bundle_.standardizers[0].invert_target(c, bundle_.nets[0].forward_channel(z, c), bundle_.registry);
    EXPECT_EQ(preds[c].value, manual);
    if (bundle_.registry.at(c).transform == Transform::Log10) {
      EXPECT_GT(preds[c].value, 0.0);
    }
  }
  EXPECT_EQ(code_of([&] { predict_matrix(bundle_, std::vector<double>(3)); }), ErrorCode::SchemaMismatch);
}

}  // namespace
}  // namespace emtk
