#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "lineart/discriminator.hpp"
#include "lineart/errors.hpp"
#include "support.hpp"

using namespace lineart;
using lineart::testing::grad_check;
using lineart::testing::leaf;
using lineart::testing::probe;

namespace {

Eigen::MatrixXd to_eigen(const torch::Tensor& w) {
  const auto m = w.detach().reshape({w.size(0), -1}).to(torch::kFloat64).contiguous();
  Eigen::MatrixXd out(m.size(0), m.size(1));
  for (int64_t i = 0; i < m.size(0); ++i) {
    for (int64_t j = 0; j < m.size(1); ++j) out(i, j) = m[i][j].item<double>();
  }
  return out;
}

double top_singular_value(const torch::Tensor& w) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(to_eigen(w)).singularValues()(0);
}

}  // namespace

TEST(SpectralNormalize, AnalyticExamples) {
  const auto eye = torch::eye(3, torch::kFloat64);
  EXPECT_TRUE(torch::allclose(spectral_normalize(eye, 1), eye, 0, 1e-12));
  const auto d = torch::tensor({{2.0, 0.0}, {0.0, 1.0}}, torch::kFloat64);
  EXPECT_TRUE(torch::allclose(spectral_normalize(d, 50), torch::tensor({{1.0, 0.0}, {0.0, 0.5}}, torch::kFloat64),
                              0, 1e-9));
}

TEST(SpectralNormalize, MatchesSvdOracle) {
  torch::manual_seed(30);
  for (int t = 0; t < 50; ++t) {
    const auto w = torch::randn({8, 12}, torch::kFloat64);
    const auto w_sn = spectral_normalize(w, 50);
    EXPECT_NEAR(top_singular_value(w_sn), 1.0, 1e-3);
    const double sigma_hat = (w / w_sn).mean().item<double>();
    EXPECT_NEAR(sigma_hat, top_singular_value(w), 1e-3 * top_singular_value(w));
  }
}

TEST(SpectralNormalize, ConvKernelTreatedAsMatrix) {
  torch::manual_seed(31);
  const auto k = torch::randn({4, 3, 3, 3}, torch::kFloat64);
  EXPECT_NEAR(top_singular_value(spectral_normalize(k, 100)), 1.0, 1e-6);
}

TEST(SpectralNormalize, Errors) {
  EXPECT_THROW(spectral_normalize(torch::zeros({3, 3}), 1), ValidationError);
  EXPECT_THROW(spectral_normalize(torch::eye(2), 0), ValidationError);
  EXPECT_THROW(spectral_normalize(torch::ones({3}), 1), ValidationError);
}

TEST(SpectralConv, PersistentVectorsTrackSigmaDuringTraining) {
  torch::manual_seed(32);
  SpectralConv2d conv(torch::nn::Conv2dOptions(4, 8, 4).stride(2).padding(1));
  conv->train();
  const auto x = torch::randn({2, 4, 8, 8});
  const auto u0 = conv->u.clone();
  conv->forward(x);
  EXPECT_FALSE(torch::equal(u0, conv->u));
  EXPECT_LE(top_singular_value(conv->normalized_weight()), 1.0 + 1e-3);
  conv->eval();
  const auto u1 = conv->u.clone();
  conv->forward(x);
  EXPECT_TRUE(torch::equal(u1, conv->u));
  conv->train();
  conv->set_power_iteration_frozen(true);
  conv->forward(x);
  EXPECT_TRUE(torch::equal(u1, conv->u));
}

TEST(Discriminator, PatchShapeAndDeterminism) {
  torch::manual_seed(33);
  Discriminator d(DiscriminatorOptions{8});
  d->eval();
  const auto img = torch::rand({3, 256, 256}) * 2 - 1;
  const auto cond = torch::rand({1, 256, 256}) * 2 - 1;
  const auto out = discriminate(d, img, cond);
  EXPECT_EQ(out.sizes(), (std::vector<int64_t>{1, 16, 16}));
  EXPECT_TRUE(torch::equal(out, discriminate(d, img, cond)));
  EXPECT_THROW(discriminate(d, img, torch::zeros({1, 128, 256})), ValidationError);
  EXPECT_THROW(discriminate(d, torch::zeros({1, 256, 256}), cond), ValidationError);
}

TEST(Discriminator, ConditioningIsNonDegenerate) {
  torch::manual_seed(34);
  Discriminator d(DiscriminatorOptions{8});
  const auto img = torch::rand({2, 3, 32, 32});
  const auto cond = torch::rand({2, 1, 32, 32}).requires_grad_(true);
  d->forward(img, cond).sum().backward();
  EXPECT_GT(cond.grad().abs().max().item<double>(), 0.0);
}

TEST(Discriminator, FinalLayerExemptFromNormalization) {
  torch::manual_seed(35);
  Discriminator d(DiscriminatorOptions{4});
  EXPECT_EQ(d->normalized_layers().size(), 4u);
  EXPECT_FALSE(std::dynamic_pointer_cast<SpectralConv2dImpl>(d->final.ptr()));
  const auto before = d->final->weight.clone();
  d->train();
  for (int i = 0; i < 3; ++i) d->forward(torch::rand({2, 3, 32, 32}), torch::rand({2, 1, 32, 32}));
  EXPECT_TRUE(torch::equal(before, d->final->weight));
  for (const auto& layer : d->normalized_layers()) {
    EXPECT_LE(top_singular_value(layer->normalized_weight()), 1.0 + 1e-3);
  }
}

TEST(Discriminator, MicroConfigGradientCheck) {
  torch::manual_seed(36);
  Discriminator d(DiscriminatorOptions{2});
  d->to(torch::kFloat64);
  d->set_power_iteration_frozen(true);
  const auto img = leaf(torch::rand({2, 3, 16, 16}) * 2 - 1);
  const auto cond = leaf(torch::rand({2, 1, 16, 16}) * 2 - 1);
  std::vector<torch::Tensor> inputs{img, cond};
  for (const auto& p : d->parameters()) inputs.push_back(p);
  const auto r = grad_check([&] { return probe(d->forward(img, cond)); }, inputs, 12);
  EXPECT_LT(r.max_rel_error, 1e-3);
}
