#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <vector>

namespace lineart {

struct LossWeights {
  double adv = 1.0;
  double rec = 30.0;
  double perc = 0.01;
  double style = 50.0;

  void validate() const;
};

// Least-squares GAN label convention.
//   Standard: real → 1, fake → 0.
//   Inverted: real → 0, fake → 1 (kept for comparison; the discriminator then rewards
//             fakes while the generator still pushes them towards 1, so there is no
//             working game).
enum class LsganTargets { Standard, Inverted };

const char* to_string(LsganTargets targets);
LsganTargets lsgan_targets_from_string(const std::string& text);

// Mean absolute difference over all elements.
torch::Tensor l1_loss(const torch::Tensor& generated, const torch::Tensor& target);

// F̂ F̂ᵀ / (C·H·W) for F̂ the C×(H·W) flattening. Accepts C×H×W (→ C×C) or
// B×C×H×W (→ B×C×C).
torch::Tensor gram_matrix(const torch::Tensor& features);

// Frozen VGG-19 convolutional trunk exposing relu1_1, relu2_1, relu3_1, relu4_1 and
// relu5_1. Inputs in [-1,1] are remapped to ImageNet normalization internally.
class FeatureExtractorImpl : public torch::nn::Module {
 public:
  FeatureExtractorImpl();

  // B×3×H×W in [-1,1] → the five tapped activations.
  std::vector<torch::Tensor> forward(const torch::Tensor& image);

  torch::nn::ModuleList convs;
};
TORCH_MODULE(FeatureExtractor);

// Loads torchvision-named VGG-19 weights ("features.<i>.weight/bias") from a checkpoint
// file. Parameters are frozen. Throws IoError / ValidationError.
FeatureExtractor load_feature_extractor(const std::filesystem::path& path);

// VGG-19 layout with seeded random frozen weights; a stand-in when the pretrained file
// is not available (tests, smoke runs).
FeatureExtractor random_feature_extractor(uint64_t seed);

// Σ_l mean|φ_l(generated) − φ_l(target)|.
torch::Tensor perceptual_loss(const torch::Tensor& generated, const torch::Tensor& target,
                              FeatureExtractor& fx);

// Σ_l mean|gram(φ_l(generated)) − gram(φ_l(target))|.
torch::Tensor style_loss(const torch::Tensor& generated, const torch::Tensor& target,
                         FeatureExtractor& fx);

// Both terms from one feature pass of each image.
struct FeatureLosses {
  torch::Tensor perceptual;
  torch::Tensor style;
};
FeatureLosses feature_losses(const torch::Tensor& generated, const torch::Tensor& target,
                             FeatureExtractor& fx);

// Discriminator objective: mean((D_real − t_real)²) + mean((D_fake − t_fake)²).
torch::Tensor discriminator_adv_loss(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                                     LsganTargets targets);

// Generator objective: mean((1 − D_fake)²).
torch::Tensor generator_adv_loss(const torch::Tensor& d_fake);

struct AdversarialLosses {
  torch::Tensor discriminator;
  torch::Tensor generator;
};
AdversarialLosses adv_losses(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                             LsganTargets targets);

template <typename T>
struct LossParts {
  T adv{};
  T rec{};
  T perc{};
  T style{};
};

// λ_adv·adv + λ_rec·rec + λ_perc·perc + λ_style·style.
template <typename T>
T total_generator_loss(const LossParts<T>& parts, const LossWeights& weights) {
  return parts.adv * weights.adv + parts.rec * weights.rec + parts.perc * weights.perc +
         parts.style * weights.style;
}

}  // namespace lineart
