#pragma once

#include <torch/torch.h>

#include <vector>

namespace lineart {

// W / σ̂(W) with σ̂ from `iterations` power-iteration steps on the (out, in·kh·kw)
// matrix view of W. Throws ValidationError for a zero matrix or iterations < 1.
torch::Tensor spectral_normalize(const torch::Tensor& weight, int iterations);

// Conv2d whose effective kernel is weight / σ̂(weight). The left/right singular vector
// estimates u and v persist as buffers; in training mode each forward refines them with
// one power iteration unless power iteration is frozen. Construction warm-starts the
// vectors to convergence.
class SpectralConv2dImpl : public torch::nn::Module {
 public:
  SpectralConv2dImpl(torch::nn::Conv2dOptions options, int warmup_iterations = 5000);

  torch::Tensor forward(const torch::Tensor& x);

  // σ̂ = uᵀ W v with the current vectors.
  torch::Tensor sigma() const;
  torch::Tensor normalized_weight() const;

  // Runs `n` power-iteration steps on the current weight.
  void power_iterate(int n);
  void set_power_iteration_frozen(bool frozen) { frozen_ = frozen; }
  // Power iteration until σ̂ settles (relative change <= 1e-10) or `max_iterations`.
  void warm_start(int max_iterations);

  torch::Tensor weight, bias, u, v;

 private:
  torch::nn::Conv2dOptions options_;
  bool frozen_ = false;
};
TORCH_MODULE(SpectralConv2d);

struct DiscriminatorOptions {
  int64_t base_channels = 64;  // stage widths base·{1,2,4,8}
};

// Conditional patch discriminator on concat(image, condition line): four stride-2
// 4×4 conv stages with spectral normalization, batch norm and LeakyReLU(0.2), then a
// plain 3×3 conv to a single-channel score map (no BN, no SN).
class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(DiscriminatorOptions options = {});

  // image: B×3×H×W, condition: B×1×H×W → B×1×(H/16)×(W/16).
  torch::Tensor forward(const torch::Tensor& image, const torch::Tensor& condition);

  std::vector<SpectralConv2d> normalized_layers() const;
  void set_power_iteration_frozen(bool frozen);

  torch::nn::ModuleList convs;
  torch::nn::ModuleList norms;
  torch::nn::Conv2d final{nullptr};

 private:
  DiscriminatorOptions options_;
};
TORCH_MODULE(Discriminator);

// Single-pair convenience wrapper (no gradient): 3×H×W, 1×H×W → 1×(H/16)×(W/16).
torch::Tensor discriminate(Discriminator& net, const torch::Tensor& image,
                           const torch::Tensor& condition);

}  // namespace lineart
