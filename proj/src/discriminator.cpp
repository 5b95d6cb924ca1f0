#include "lineart/discriminator.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "lineart/errors.hpp"

namespace lineart {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {

constexpr double kNormEps = 1e-12;
constexpr double kWarmStartTolerance = 1e-10;

torch::Tensor unit(const torch::Tensor& x) { return x / x.norm().clamp_min(kNormEps); }

void iterate(const torch::Tensor& matrix, torch::Tensor& u, torch::Tensor& v, int n) {
  for (int i = 0; i < n; ++i) {
    v = unit(torch::mv(matrix.t(), u));
    u = unit(torch::mv(matrix, v));
  }
}

}  // namespace

torch::Tensor spectral_normalize(const torch::Tensor& weight, int iterations) {
  if (iterations < 1) throw ValidationError("spectral_normalize: iterations must be >= 1");
  if (!weight.defined() || weight.dim() < 2) {
    throw ValidationError("spectral_normalize: expected a matrix or conv kernel");
  }
  const auto matrix = weight.reshape({weight.size(0), -1});
  if (matrix.abs().max().item<double>() == 0.0) {
    throw ValidationError("spectral_normalize: zero matrix");
  }
  torch::Tensor u;
  torch::Tensor v;
  {
    torch::NoGradGuard no_grad;
    auto gen = at::make_generator<at::CPUGeneratorImpl>(0);
    u = unit(at::normal(0.0, 1.0, {matrix.size(0)}, gen, weight.options()));
    iterate(matrix, u, v, iterations);
  }
  const auto sigma = torch::dot(u, torch::mv(matrix, v));
  return weight / sigma;
}

SpectralConv2dImpl::SpectralConv2dImpl(nn::Conv2dOptions options, int warmup_iterations)
    : options_(options) {
  nn::Conv2d prototype(options_);
  weight = register_parameter("weight", prototype->weight.detach().clone());
  if (options_.bias()) {
    bias = register_parameter("bias", prototype->bias.detach().clone());
  }
  const auto rows = weight.size(0);
  const auto cols = weight.numel() / rows;
  u = register_buffer("u", unit(torch::randn({rows})));
  v = register_buffer("v", unit(torch::randn({cols})));
  warm_start(warmup_iterations);
}

void SpectralConv2dImpl::warm_start(int max_iterations) {
  // Small singular-value gaps converge slowly; iterate until the estimate settles.
  double previous = 0.0;
  for (int i = 0; i < max_iterations; ++i) {
    power_iterate(1);
    const double current = sigma().item<double>();
    if (i > 0 && std::abs(current - previous) <= kWarmStartTolerance * current) break;
    previous = current;
  }
}

void SpectralConv2dImpl::power_iterate(int n) {
  torch::NoGradGuard no_grad;
  const auto matrix = weight.reshape({weight.size(0), -1});
  auto new_u = u.clone();
  auto new_v = v.clone();
  iterate(matrix, new_u, new_v, n);
  u.copy_(new_u);
  v.copy_(new_v);
}

torch::Tensor SpectralConv2dImpl::sigma() const {
  const auto matrix = weight.reshape({weight.size(0), -1});
  // Snapshots: later power iterations update u/v in place while this graph is alive.
  return torch::dot(u.detach().clone(), torch::mv(matrix, v.detach().clone()));
}

torch::Tensor SpectralConv2dImpl::normalized_weight() const { return weight / sigma(); }

torch::Tensor SpectralConv2dImpl::forward(const torch::Tensor& x) {
  if (is_training() && !frozen_) power_iterate(1);
  return F::conv2d(x, normalized_weight(),
                   F::Conv2dFuncOptions()
                       .bias(bias)
                       .stride(options_.stride())
                       .padding(std::get<torch::ExpandingArray<2>>(options_.padding())));
}

DiscriminatorImpl::DiscriminatorImpl(DiscriminatorOptions options) : options_(options) {
  if (options_.base_channels < 1) {
    throw ValidationError("discriminator: base_channels must be >= 1");
  }
  convs = register_module("convs", nn::ModuleList());
  norms = register_module("norms", nn::ModuleList());
  int64_t prev = 4;
  for (int64_t mult : {1, 2, 4, 8}) {
    const int64_t width = options_.base_channels * mult;
    convs->push_back(SpectralConv2d(nn::Conv2dOptions(prev, width, 4).stride(2).padding(1)));
    norms->push_back(nn::BatchNorm2d(width));
    prev = width;
  }
  final = register_module("final", nn::Conv2d(nn::Conv2dOptions(prev, 1, 3).padding(1)));
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& image,
                                         const torch::Tensor& condition) {
  if (image.dim() != 4 || condition.dim() != 4 || image.size(1) != 3 || condition.size(1) != 1) {
    throw ValidationError("discriminator expects B×3×H×W image and B×1×H×W condition");
  }
  if (image.size(0) != condition.size(0) || image.size(2) != condition.size(2) ||
      image.size(3) != condition.size(3)) {
    throw ValidationError("discriminator: image and condition differ in batch or spatial size");
  }
  auto x = torch::cat({image, condition}, 1);
  for (size_t i = 0; i < convs->size(); ++i) {
    x = convs[i]->as<SpectralConv2d>()->forward(x);
    x = torch::leaky_relu(norms[i]->as<nn::BatchNorm2d>()->forward(x), 0.2);
  }
  return final->forward(x);
}

std::vector<SpectralConv2d> DiscriminatorImpl::normalized_layers() const {
  std::vector<SpectralConv2d> layers;
  for (const auto& m : *convs) {
    layers.emplace_back(std::dynamic_pointer_cast<SpectralConv2dImpl>(m));
  }
  return layers;
}

void DiscriminatorImpl::set_power_iteration_frozen(bool frozen) {
  for (auto& layer : normalized_layers()) layer->set_power_iteration_frozen(frozen);
}

torch::Tensor discriminate(Discriminator& net, const torch::Tensor& image,
                           const torch::Tensor& condition) {
  if (image.dim() != 3 || condition.dim() != 3) {
    throw ValidationError("discriminate: expected C×H×W tensors");
  }
  torch::NoGradGuard no_grad;
  return net->forward(image.unsqueeze(0), condition.unsqueeze(0)).squeeze(0);
}

}  // namespace lineart
