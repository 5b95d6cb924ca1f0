#include <gtest/gtest.h>

#include "lineart/checkpoint.hpp"
#include "lineart/config.hpp"
#include "lineart/data.hpp"
#include "lineart/errors.hpp"
#include "lineart/line_extractor.hpp"
#include "support.hpp"

using namespace lineart;
using lineart::testing::grad_check;
using lineart::testing::leaf;
using lineart::testing::probe;
using lineart::testing::TempDir;

namespace {

Dataset four_pairs(int64_t size) {
  auto ds = load_dataset(lineart::testing::sample_dir(), size, true);
  ds.names.resize(4);
  ds.colors.resize(4);
  ds.sketches.resize(4);
  return ds;
}

TrainConfig le_config(int64_t steps) {
  auto config = TrainConfig::desk();
  config.le_iterations = steps;
  config.seed = 3;
  return config;
}

}  // namespace

TEST(ExtractLines, ShapeRangeDeterminism) {
  torch::manual_seed(50);
  LineExtractor net;
  const auto color = torch::rand({3, 256, 256}) * 2 - 1;
  const auto a = extract_lines(net, color);
  EXPECT_EQ(a.sizes(), (std::vector<int64_t>{1, 256, 256}));
  EXPECT_LE(a.abs().max().item<double>(), 1.0);
  EXPECT_TRUE(torch::equal(a, extract_lines(net, color)));
  EXPECT_THROW(extract_lines(net, torch::zeros({3, 64, 64})), ValidationError);
  EXPECT_THROW(extract_lines(net, torch::zeros({1, 256, 256})), ValidationError);
}

TEST(LineExtractorGradients, EveryParameterLearnsAndMatchesFiniteDifferences) {
  torch::manual_seed(51);
  LineExtractor net(LineExtractorOptions{16, 4});
  net->to(torch::kFloat64);
  net->train();
  const auto color = leaf(torch::rand({2, 3, 16, 16}) * 2 - 1);
  probe(net->forward(color)).backward();
  for (const auto& item : net->named_parameters()) {
    ASSERT_TRUE(item.value().grad().defined()) << item.key();
    EXPECT_GT(item.value().grad().norm().item<double>(), 0.0) << item.key();
  }
  std::vector<torch::Tensor> inputs{color};
  for (const auto& p : net->parameters()) inputs.push_back(p);
  // Step near the float64 central-difference optimum (ε^(1/3)); at 1e-6 rounding noise
  // dominates on near-zero deep-layer gradients.
  const auto r = grad_check([&] { return probe(net->forward(color)); }, inputs, 4, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(TrainLineExtractor, Errors) {
  Dataset empty;
  empty.image_size = 64;
  EXPECT_THROW(train_line_extractor(empty, le_config(1)), ValidationError);
  auto unpaired = four_pairs(64);
  unpaired.sketches.clear();
  EXPECT_THROW(train_line_extractor(unpaired, le_config(1)), ValidationError);
}

TEST(TrainLineExtractor, SeededRunsAreIdentical) {
  const auto ds = four_pairs(64);
  const auto a = train_line_extractor(ds, le_config(15));
  const auto b = train_line_extractor(ds, le_config(15));
  ASSERT_EQ(a.loss_history.size(), 15u);
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(TrainLineExtractor, OverfitsFourPairs) {
  const auto ds = four_pairs(64);
  const auto run = train_line_extractor(ds, le_config(500));
  ASSERT_EQ(run.loss_history.size(), 500u);
  EXPECT_LT(run.loss_history.back(), 0.08);

  // Means over consecutive 100-step windows never increase.
  double previous = 1e9;
  for (size_t start = 0; start + 100 <= run.loss_history.size(); start += 100) {
    double mean = 0.0;
    for (size_t i = start; i < start + 100; ++i) mean += run.loss_history[i] / 100.0;
    EXPECT_LE(mean, previous) << "window at " << start;
    previous = mean;
  }

  auto net = run.net;
  double mae = 0.0;
  for (size_t i = 0; i < ds.size(); ++i) {
    mae += (extract_lines(net, ds.colors[i]) - ds.sketches[i]).abs().mean().item<double>() / ds.size();
  }
  EXPECT_LT(mae, 0.08);

  TempDir dir("le");
  save_checkpoint(line_extractor_checkpoint(net, 3, run.loss_history), dir / "le.safetensors");
  auto loaded = load_line_extractor(dir / "le.safetensors");
  EXPECT_TRUE(torch::equal(extract_lines(loaded, ds.colors[0]), extract_lines(net, ds.colors[0])));
  const auto ckpt = load_checkpoint(dir / "le.safetensors");
  EXPECT_EQ(ckpt.meta("seed"), "3");
  EXPECT_EQ(ckpt.tensor("__loss_history__").numel(), 500);
}
