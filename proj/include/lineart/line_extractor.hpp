#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <vector>

#include "lineart/blocks.hpp"
#include "lineart/checkpoint.hpp"

namespace lineart {

struct Dataset;
struct TrainConfig;

struct LineExtractorOptions {
  int64_t image_size = 256;
  int64_t base_channels = 32;
};

// U-Net mapping a 3-channel color image to a 1-channel line drawing (tanh output).
class LineExtractorImpl : public torch::nn::Module {
 public:
  explicit LineExtractorImpl(LineExtractorOptions options = {});

  // B×3×H×W → B×1×H×W.
  torch::Tensor forward(const torch::Tensor& color);

  const LineExtractorOptions& options() const { return options_; }

  Encoder encoder{nullptr};
  torch::nn::Conv2d bridge{nullptr};
  torch::nn::BatchNorm2d bridge_norm{nullptr};
  UNetDecoder decoder{nullptr};

 private:
  LineExtractorOptions options_;
};
TORCH_MODULE(LineExtractor);

// Inference on a single 3×H×W image (eval mode, no gradient). H and W must equal the
// trained image size; throws ValidationError otherwise.
torch::Tensor extract_lines(LineExtractor& net, const torch::Tensor& color);

struct LineExtractorRun {
  LineExtractor net{nullptr};
  std::vector<double> loss_history;  // mean L1 per step
};

// Adam on the L1 distance to the paired sketches, batches drawn from `dataset` with a
// generator seeded from config.seed. Runs config.le_iterations steps.
LineExtractorRun train_line_extractor(const Dataset& dataset, const TrainConfig& config);

// Checkpoint with metadata kind=line_extractor, image_size, base_channels, seed.
Checkpoint line_extractor_checkpoint(const LineExtractor& net, uint64_t seed,
                                     const std::vector<double>& loss_history = {});
LineExtractor load_line_extractor(const std::filesystem::path& path);

}  // namespace lineart
