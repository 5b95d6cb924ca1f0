#include "lineart/losses.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <array>
#include <cmath>

#include "lineart/checkpoint.hpp"
#include "lineart/errors.hpp"

namespace lineart {

namespace nn = torch::nn;

namespace {

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (!a.defined() || !b.defined() || a.sizes() != b.sizes()) {
    throw ValidationError(std::string(what) + ": shape mismatch");
  }
}

// VGG-19 convolutions up to conv5_1: (torchvision features index, in, out).
struct VggConv {
  int index;
  int64_t in;
  int64_t out;
};
constexpr std::array<VggConv, 13> kVggConvs{{{0, 3, 64},
                                              {2, 64, 64},
                                              {5, 64, 128},
                                              {7, 128, 128},
                                              {10, 128, 256},
                                              {12, 256, 256},
                                              {14, 256, 256},
                                              {16, 256, 256},
                                              {19, 256, 512},
                                              {21, 512, 512},
                                              {23, 512, 512},
                                              {25, 512, 512},
                                              {28, 512, 512}}};
// Position in kVggConvs after which the stage ends with a max-pool.
constexpr std::array<size_t, 4> kPoolAfter{1, 3, 7, 11};
// Positions whose ReLU output is tapped: relu1_1 .. relu5_1.
constexpr std::array<size_t, 5> kTaps{0, 2, 4, 8, 12};

}  // namespace

void LossWeights::validate() const {
  for (double w : {adv, rec, perc, style}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("loss weights must be finite and >= 0");
    }
  }
}

const char* to_string(LsganTargets targets) {
  return targets == LsganTargets::Standard ? "standard" : "inverted";
}

LsganTargets lsgan_targets_from_string(const std::string& text) {
  if (text == "standard") return LsganTargets::Standard;
  if (text == "inverted") return LsganTargets::Inverted;
  throw ConfigError("lsgan_targets must be 'standard' or 'inverted', got '" + text + "'");
}

torch::Tensor l1_loss(const torch::Tensor& generated, const torch::Tensor& target) {
  require_same_shape(generated, target, "l1_loss");
  return (generated - target).abs().mean();
}

torch::Tensor gram_matrix(const torch::Tensor& features) {
  if (features.dim() == 3) {
    return gram_matrix(features.unsqueeze(0)).squeeze(0);
  }
  if (features.dim() != 4 || features.size(2) * features.size(3) < 1) {
    throw ValidationError("gram_matrix: expected [B×]C×H×W features with H·W >= 1");
  }
  const auto channels = features.size(1);
  const auto flat = features.flatten(2);
  const double norm = static_cast<double>(channels * features.size(2) * features.size(3));
  return torch::bmm(flat, flat.transpose(1, 2)) / norm;
}

FeatureExtractorImpl::FeatureExtractorImpl() {
  convs = register_module("convs", nn::ModuleList());
  for (const auto& conv : kVggConvs) {
    convs->push_back(nn::Conv2d(nn::Conv2dOptions(conv.in, conv.out, 3).padding(1)));
  }
  for (auto& p : parameters()) p.set_requires_grad(false);
  eval();
}

std::vector<torch::Tensor> FeatureExtractorImpl::forward(const torch::Tensor& image) {
  if (image.dim() != 4 || image.size(1) != 3) {
    throw ValidationError("feature extractor expects B×3×H×W input");
  }
  const auto opts = image.options();
  const auto mean = torch::tensor({0.485, 0.456, 0.406}, opts).view({1, 3, 1, 1});
  const auto std = torch::tensor({0.229, 0.224, 0.225}, opts).view({1, 3, 1, 1});
  auto x = ((image + 1.0) * 0.5 - mean) / std;

  std::vector<torch::Tensor> taps;
  size_t next_tap = 0;
  size_t next_pool = 0;
  for (size_t i = 0; i < kVggConvs.size(); ++i) {
    x = torch::relu(convs[i]->as<nn::Conv2d>()->forward(x));
    if (next_tap < kTaps.size() && kTaps[next_tap] == i) {
      taps.push_back(x);
      ++next_tap;
    }
    if (next_pool < kPoolAfter.size() && kPoolAfter[next_pool] == i) {
      x = torch::max_pool2d(x, 2, 2);
      ++next_pool;
    }
  }
  return taps;
}

FeatureExtractor load_feature_extractor(const std::filesystem::path& path) {
  const auto checkpoint = load_checkpoint(path);
  FeatureExtractor fx;
  torch::NoGradGuard no_grad;
  for (size_t i = 0; i < kVggConvs.size(); ++i) {
    auto conv = fx->convs[i]->as<nn::Conv2d>();
    const auto prefix = "features." + std::to_string(kVggConvs[i].index);
    const auto& weight = checkpoint.tensor(prefix + ".weight");
    const auto& bias = checkpoint.tensor(prefix + ".bias");
    if (weight.sizes() != conv->weight.sizes() || bias.sizes() != conv->bias.sizes()) {
      throw ValidationError("feature extractor weights have unexpected shape at " + prefix);
    }
    conv->weight.copy_(weight);
    conv->bias.copy_(bias);
  }
  return fx;
}

FeatureExtractor random_feature_extractor(uint64_t seed) {
  FeatureExtractor fx;
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  torch::NoGradGuard no_grad;
  for (size_t i = 0; i < kVggConvs.size(); ++i) {
    auto conv = fx->convs[i]->as<nn::Conv2d>();
    const double fan_in = static_cast<double>(kVggConvs[i].in * 9);
    conv->weight.copy_(at::normal(0.0, std::sqrt(2.0 / fan_in), conv->weight.sizes(), gen));
    conv->bias.zero_();
  }
  return fx;
}

FeatureLosses feature_losses(const torch::Tensor& generated, const torch::Tensor& target,
                             FeatureExtractor& fx) {
  require_same_shape(generated, target, "feature_losses");
  if (!fx) throw ConfigError("feature extractor is not loaded");
  const auto gen_feats = fx->forward(generated);
  std::vector<torch::Tensor> target_feats;
  {
    torch::NoGradGuard no_grad;
    target_feats = fx->forward(target);
  }
  auto perceptual = torch::zeros({}, generated.options());
  auto style = torch::zeros({}, generated.options());
  for (size_t l = 0; l < gen_feats.size(); ++l) {
    perceptual = perceptual + (gen_feats[l] - target_feats[l]).abs().mean();
    style = style + (gram_matrix(gen_feats[l]) - gram_matrix(target_feats[l])).abs().mean();
  }
  return {perceptual, style};
}

torch::Tensor perceptual_loss(const torch::Tensor& generated, const torch::Tensor& target,
                              FeatureExtractor& fx) {
  return feature_losses(generated, target, fx).perceptual;
}

torch::Tensor style_loss(const torch::Tensor& generated, const torch::Tensor& target,
                         FeatureExtractor& fx) {
  return feature_losses(generated, target, fx).style;
}

torch::Tensor discriminator_adv_loss(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                                     LsganTargets targets) {
  const double real_target = targets == LsganTargets::Standard ? 1.0 : 0.0;
  const double fake_target = targets == LsganTargets::Standard ? 0.0 : 1.0;
  return (d_real - real_target).square().mean() + (d_fake - fake_target).square().mean();
}

torch::Tensor generator_adv_loss(const torch::Tensor& d_fake) {
  return (1.0 - d_fake).square().mean();
}

AdversarialLosses adv_losses(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                             LsganTargets targets) {
  return {discriminator_adv_loss(d_real, d_fake, targets), generator_adv_loss(d_fake)};
}

}  // namespace lineart
