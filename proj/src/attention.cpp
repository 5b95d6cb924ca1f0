#include "lineart/attention.hpp"

#include <algorithm>

#include "lineart/errors.hpp"

namespace lineart {

namespace F = torch::nn::functional;

namespace {

void require_finite_map(const torch::Tensor& x, const char* what) {
  if (x.dim() != 4 || x.size(1) < 1) {
    throw ValidationError(std::string(what) + ": expected a B×C×H×W tensor with C >= 1");
  }
  if (!torch::isfinite(x).all().item<bool>()) {
    throw ValidationError(std::string(what) + ": non-finite input");
  }
}

}  // namespace

ChannelAttentionImpl::ChannelAttentionImpl(int64_t channels, int64_t reduction) {
  const int64_t hidden = std::max<int64_t>(1, channels / reduction);
  squeeze = register_module(
      "squeeze", torch::nn::Linear(torch::nn::LinearOptions(channels, hidden).bias(false)));
  expand = register_module(
      "expand", torch::nn::Linear(torch::nn::LinearOptions(hidden, channels).bias(false)));
}

torch::Tensor ChannelAttentionImpl::forward(const torch::Tensor& x) {
  require_finite_map(x, "channel_attention");
  auto mlp = [this](const torch::Tensor& pooled) {
    return expand->forward(torch::relu(squeeze->forward(pooled)));
  };
  const auto avg = x.mean({2, 3});
  const auto max = x.amax({2, 3});
  return torch::sigmoid(mlp(avg) + mlp(max)).unsqueeze(-1).unsqueeze(-1);
}

SpatialAttentionImpl::SpatialAttentionImpl(int64_t kernel_size) {
  conv = register_module("conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(2, 1, kernel_size)
                                                       .padding(kernel_size / 2)
                                                       .bias(false)));
}

torch::Tensor SpatialAttentionImpl::forward(const torch::Tensor& x) {
  require_finite_map(x, "spatial_attention");
  const auto pooled = torch::cat({x.mean(1, true), x.amax(1, true)}, 1);
  return torch::sigmoid(conv->forward(pooled));
}

ConvAttentionImpl::ConvAttentionImpl(int64_t channels, int64_t reduction) {
  channel = register_module("channel", ChannelAttention(channels, reduction));
  spatial = register_module("spatial", SpatialAttention());
}

torch::Tensor ConvAttentionImpl::forward(const torch::Tensor& x) {
  const auto gated = channel->forward(x) * x;
  return spatial->forward(gated) * gated;
}

torch::Tensor feature_dim_transform(const std::vector<torch::Tensor>& maps) {
  if (maps.empty()) {
    throw ValidationError("feature_dim_transform: empty feature list");
  }
  const auto& last = maps.back();
  if (last.dim() != 4) {
    throw ValidationError("feature_dim_transform: expected B×C×H×W maps");
  }
  const int64_t height = last.size(2);
  const int64_t width = last.size(3);

  std::vector<torch::Tensor> resized;
  resized.reserve(maps.size());
  for (const auto& map : maps) {
    if (map.dim() != 4 || map.size(0) != last.size(0)) {
      throw ValidationError("feature_dim_transform: inconsistent map shapes");
    }
    if (map.size(2) == height && map.size(3) == width) {
      resized.push_back(map);
    } else {
      resized.push_back(F::interpolate(map, F::InterpolateFuncOptions()
                                                .size(std::vector<int64_t>{height, width})
                                                .mode(torch::kBilinear)
                                                .align_corners(false)));
    }
  }
  // B×D×H×W → B×(H·W)×D, rows in y-major order.
  return torch::cat(resized, 1).flatten(2).transpose(1, 2);
}

torch::Tensor sequence_to_map(const torch::Tensor& sequence, int64_t height, int64_t width) {
  if (sequence.dim() != 3 || sequence.size(1) != height * width) {
    throw ValidationError("sequence_to_map: length does not match H·W");
  }
  return sequence.transpose(1, 2).reshape({sequence.size(0), sequence.size(2), height, width});
}

}  // namespace lineart
