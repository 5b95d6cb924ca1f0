#include "lineart/line_extractor.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "lineart/config.hpp"
#include "lineart/data.hpp"
#include "lineart/errors.hpp"
#include "lineart/image.hpp"

namespace lineart {

namespace nn = torch::nn;

LineExtractorImpl::LineExtractorImpl(LineExtractorOptions options) : options_(options) {
  if (options_.image_size < 16 || options_.image_size % 16 != 0) {
    throw ValidationError("line extractor: image_size must be a positive multiple of 16");
  }
  const auto widths = stage_channels(options_.base_channels);
  encoder = register_module("encoder", Encoder(3, options_.base_channels, false));
  bridge = register_module(
      "bridge", nn::Conv2d(nn::Conv2dOptions(widths[3], widths[3], 3).padding(1).bias(false)));
  bridge_norm = register_module("bridge_norm", nn::BatchNorm2d(widths[3]));
  decoder = register_module("decoder", UNetDecoder(options_.base_channels, widths[3], 3, 1));
}

torch::Tensor LineExtractorImpl::forward(const torch::Tensor& color) {
  const auto maps = encoder->forward(color);
  const auto bottleneck = torch::relu(bridge_norm->forward(bridge->forward(maps.back())));
  return decoder->forward(bottleneck, maps, color);
}

torch::Tensor extract_lines(LineExtractor& net, const torch::Tensor& color) {
  check_image(color, 3, "extract_lines");
  const auto size = net->options().image_size;
  if (color.size(1) != size || color.size(2) != size) {
    throw ValidationError("extract_lines: expected " + std::to_string(size) + "×" +
                          std::to_string(size) + " input");
  }
  torch::NoGradGuard no_grad;
  const bool was_training = net->is_training();
  net->eval();
  auto out = net->forward(color.unsqueeze(0)).squeeze(0);
  net->train(was_training);
  return out;
}

LineExtractorRun train_line_extractor(const Dataset& dataset, const TrainConfig& config) {
  if (dataset.empty()) throw ValidationError("train_line_extractor: empty dataset");
  if (!dataset.has_sketches()) {
    throw ValidationError("train_line_extractor: dataset has no paired sketches");
  }
  if (dataset.image_size != config.image_size) {
    throw ValidationError("train_line_extractor: dataset loaded at a different image size");
  }
  torch::manual_seed(config.seed);
  LineExtractorRun run;
  run.net = LineExtractor(LineExtractorOptions{config.image_size, config.base_channels});
  run.net->train();
  torch::optim::Adam optimizer(
      run.net->parameters(),
      torch::optim::AdamOptions(config.lr_g).betas({config.adam_beta1, config.adam_beta2}));

  const auto n = static_cast<int64_t>(dataset.size());
  const int64_t batch = std::min<int64_t>(config.batch_size, n);
  for (int64_t step = 0; step < config.le_iterations; ++step) {
    auto rng = sample_rng(config.seed, static_cast<uint64_t>(step), 0);
    std::vector<int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<torch::Tensor> colors, sketches;
    for (int64_t i = 0; i < batch; ++i) {
      colors.push_back(dataset.colors[order[i]]);
      sketches.push_back(dataset.sketches[order[i]]);
    }
    const auto prediction = run.net->forward(torch::stack(colors));
    const auto loss = (prediction - torch::stack(sketches)).abs().mean();
    optimizer.zero_grad();
    loss.backward();
    optimizer.step();
    run.loss_history.push_back(loss.item<double>());
  }
  run.net->eval();
  return run;
}

Checkpoint line_extractor_checkpoint(const LineExtractor& net, uint64_t seed,
                                     const std::vector<double>& loss_history) {
  Checkpoint checkpoint;
  export_module(*net, "", checkpoint);
  checkpoint.metadata["kind"] = "line_extractor";
  checkpoint.metadata["image_size"] = std::to_string(net->options().image_size);
  checkpoint.metadata["base_channels"] = std::to_string(net->options().base_channels);
  checkpoint.metadata["seed"] = std::to_string(seed);
  if (!loss_history.empty()) {
    checkpoint.tensors["__loss_history__"] =
        torch::tensor(loss_history, torch::TensorOptions().dtype(torch::kFloat64));
  }
  return checkpoint;
}

LineExtractor load_line_extractor(const std::filesystem::path& path) {
  const auto checkpoint = load_checkpoint(path);
  if (!checkpoint.has_meta("kind") || checkpoint.meta("kind") != "line_extractor") {
    throw ValidationError("not a line extractor checkpoint: " + path.string());
  }
  LineExtractor net(LineExtractorOptions{std::stoll(checkpoint.meta("image_size")),
                                         std::stoll(checkpoint.meta("base_channels"))});
  import_module(*net, "", checkpoint);
  net->eval();
  return net;
}

}  // namespace lineart
