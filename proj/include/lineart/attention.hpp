#pragma once

#include <torch/torch.h>

#include <vector>

namespace lineart {

// Channel gate of a convolutional attention block: sigmoid(MLP(avgpool) + MLP(maxpool))
// with a shared bias-free MLP C → C/r → C. Returns B×C×1×1 weights in (0, 1).
class ChannelAttentionImpl : public torch::nn::Module {
 public:
  ChannelAttentionImpl(int64_t channels, int64_t reduction = 4);

  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Linear squeeze{nullptr};
  torch::nn::Linear expand{nullptr};
};
TORCH_MODULE(ChannelAttention);

// Spatial gate: sigmoid(conv7×7([mean_c(x), max_c(x)])). Returns B×1×H×W in (0, 1).
class SpatialAttentionImpl : public torch::nn::Module {
 public:
  explicit SpatialAttentionImpl(int64_t kernel_size = 7);

  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv{nullptr};
};
TORCH_MODULE(SpatialAttention);

// Channel gating followed by spatial gating; shape preserving.
class ConvAttentionImpl : public torch::nn::Module {
 public:
  ConvAttentionImpl(int64_t channels, int64_t reduction = 4);

  torch::Tensor forward(const torch::Tensor& x);

  ChannelAttention channel{nullptr};
  SpatialAttention spatial{nullptr};
};
TORCH_MODULE(ConvAttention);

// Resizes every map of a multi-scale list (B×C_i×H_i×W_i, coarsest last) to the last
// map's spatial size, concatenates on channels and flattens to B×L×D with
// row index y·W + x. Throws ValidationError for an empty list.
torch::Tensor feature_dim_transform(const std::vector<torch::Tensor>& maps);

// Inverse of the final flatten step: B×L×D back to B×D×H×W.
torch::Tensor sequence_to_map(const torch::Tensor& sequence, int64_t height, int64_t width);

}  // namespace lineart
