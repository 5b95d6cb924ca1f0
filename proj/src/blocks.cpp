#include "lineart/blocks.hpp"

#include "lineart/errors.hpp"

namespace lineart {

namespace nn = torch::nn;

std::vector<int64_t> stage_channels(int64_t base) {
  if (base < 1) throw ValidationError("base channel count must be positive");
  return {base, base * 2, base * 4, base * 8};
}

DownBlockImpl::DownBlockImpl(int64_t in_channels, int64_t out_channels, bool with_attention) {
  conv = register_module("conv", nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 3)
                                                .stride(2)
                                                .padding(1)
                                                .bias(false)));
  norm = register_module("norm", nn::BatchNorm2d(out_channels));
  if (with_attention) {
    attention = register_module("attention", ConvAttention(out_channels));
  }
}

torch::Tensor DownBlockImpl::forward(const torch::Tensor& x) {
  auto y = torch::leaky_relu(norm->forward(conv->forward(x)), 0.2);
  return attention ? attention->forward(y) : y;
}

EncoderImpl::EncoderImpl(int64_t in_channels, int64_t base, bool with_attention)
    : in_channels_(in_channels) {
  stages = register_module("stages", nn::ModuleList());
  int64_t prev = in_channels;
  for (int64_t width : stage_channels(base)) {
    stages->push_back(DownBlock(prev, width, with_attention));
    prev = width;
  }
}

std::vector<torch::Tensor> EncoderImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != in_channels_) {
    throw ValidationError("encoder expects " + std::to_string(in_channels_) +
                          "-channel B×C×H×W input");
  }
  std::vector<torch::Tensor> maps;
  auto y = x;
  for (const auto& stage : *stages) {
    y = stage->as<DownBlock>()->forward(y);
    maps.push_back(y);
  }
  return maps;
}

ResBlockImpl::ResBlockImpl(int64_t channels) {
  auto opts = nn::Conv2dOptions(channels, channels, 3).padding(1).bias(false);
  conv1 = register_module("conv1", nn::Conv2d(opts));
  norm1 = register_module("norm1", nn::BatchNorm2d(channels));
  conv2 = register_module("conv2", nn::Conv2d(opts));
  norm2 = register_module("norm2", nn::BatchNorm2d(channels));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x) {
  auto y = torch::relu(norm1->forward(conv1->forward(x)));
  return x + norm2->forward(conv2->forward(y));
}

UpBlockImpl::UpBlockImpl(int64_t in_channels, int64_t out_channels) {
  conv = register_module(
      "conv", nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 3).padding(1).bias(false)));
  norm = register_module("norm", nn::BatchNorm2d(out_channels));
}

torch::Tensor UpBlockImpl::forward(const torch::Tensor& x) {
  namespace F = nn::functional;
  auto up = F::interpolate(x, F::InterpolateFuncOptions()
                                  .scale_factor(std::vector<double>{2.0, 2.0})
                                  .mode(torch::kNearest));
  return torch::relu(norm->forward(conv->forward(up)));
}

UNetDecoderImpl::UNetDecoderImpl(int64_t base, int64_t bottleneck_channels,
                                 int64_t input_channels, int64_t out_channels) {
  const auto widths = stage_channels(base);
  ups = register_module("ups", nn::ModuleList());
  // Deepest first: skip k has widths[k] channels, up stage k outputs widths[k-1]
  // (widths[0] for the last one).
  int64_t prev = bottleneck_channels;
  for (int k = 3; k >= 0; --k) {
    const int64_t out = widths[k > 0 ? k - 1 : 0];
    ups->push_back(UpBlock(prev + widths[k], out));
    prev = out;
  }
  head = register_module(
      "head", nn::Conv2d(nn::Conv2dOptions(prev + input_channels, out_channels, 3).padding(1)));
}

torch::Tensor UNetDecoderImpl::forward(const torch::Tensor& bottleneck,
                                       const std::vector<torch::Tensor>& skips,
                                       const torch::Tensor& input) {
  if (skips.size() != 4) {
    throw ValidationError("decoder expects 4 skip maps");
  }
  auto y = bottleneck;
  for (size_t i = 0; i < ups->size(); ++i) {
    const auto& skip = skips[3 - i];
    y = ups[i]->as<UpBlock>()->forward(torch::cat({y, skip}, 1));
  }
  return torch::tanh(head->forward(torch::cat({y, input}, 1)));
}

}  // namespace lineart
