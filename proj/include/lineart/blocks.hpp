#pragma once

#include <torch/torch.h>

#include <vector>

#include "lineart/attention.hpp"

namespace lineart {

// Channel widths of a 4-stage encoder: base·{1, 2, 4, 8}.
std::vector<int64_t> stage_channels(int64_t base);

// One encoder stage: stride-2 conv 3×3 → BN → LeakyReLU(0.2), optionally followed by
// a convolutional attention block.
class DownBlockImpl : public torch::nn::Module {
 public:
  DownBlockImpl(int64_t in_channels, int64_t out_channels, bool attention);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv{nullptr};
  torch::nn::BatchNorm2d norm{nullptr};
  ConvAttention attention{nullptr};
};
TORCH_MODULE(DownBlock);

// 4-stage encoder returning the output of every stage (finest first, coarsest last).
class EncoderImpl : public torch::nn::Module {
 public:
  EncoderImpl(int64_t in_channels, int64_t base, bool attention);
  std::vector<torch::Tensor> forward(const torch::Tensor& x);

  int64_t in_channels() const { return in_channels_; }

  torch::nn::ModuleList stages;

 private:
  int64_t in_channels_;
};
TORCH_MODULE(Encoder);

// conv-BN-ReLU-conv-BN plus identity.
class ResBlockImpl : public torch::nn::Module {
 public:
  explicit ResBlockImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::BatchNorm2d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(ResBlock);

// Nearest ×2 upsampling → conv 3×3 → BN → ReLU.
class UpBlockImpl : public torch::nn::Module {
 public:
  UpBlockImpl(int64_t in_channels, int64_t out_channels);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv{nullptr};
  torch::nn::BatchNorm2d norm{nullptr};
};
TORCH_MODULE(UpBlock);

// U-Net decoder over a 4-stage encoder: each up stage consumes the previous output
// concatenated with the matching encoder stage; the head sees the last up stage
// concatenated with the network input and ends in tanh.
class UNetDecoderImpl : public torch::nn::Module {
 public:
  UNetDecoderImpl(int64_t base, int64_t bottleneck_channels, int64_t input_channels,
                  int64_t out_channels);

  torch::Tensor forward(const torch::Tensor& bottleneck, const std::vector<torch::Tensor>& skips,
                        const torch::Tensor& input);

  torch::nn::ModuleList ups;
  torch::nn::Conv2d head{nullptr};
};
TORCH_MODULE(UNetDecoder);

}  // namespace lineart
