#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lineart/losses.hpp"

namespace lineart {

// PSNR for [-1,1] images (peak-to-peak 2); identical inputs return kPsnrCap.
inline constexpr double kPsnrCap = 99.0;
double psnr(const torch::Tensor& a, const torch::Tensor& b);

// Smallest side accepted by ms_ssim: five scales of an 11-tap window.
inline constexpr int64_t kMsSsimMinSide = 161;

// 5-scale MS-SSIM (Gaussian window 11, σ 1.5, K1 0.01, K2 0.03, canonical scale weights)
// on the luminance of the images remapped to [0,1]. Throws ValidationError for sides
// below kMsSsimMinSide.
double ms_ssim(const torch::Tensor& a, const torch::Tensor& b);

// Fréchet distance between Gaussian fits of two N×F feature sets.
double frechet_distance(const torch::Tensor& features_a, const torch::Tensor& features_b);

// Unit-weighted LPIPS variant: spatially averaged squared distance between channel-
// normalized feature taps, summed over taps.
double lpips_unit(const torch::Tensor& a, const torch::Tensor& b, FeatureExtractor& fx);

enum class EvalMode { Self, Random };
const char* to_string(EvalMode mode);
EvalMode eval_mode_from_string(const std::string& text);

struct EvalRow {
  std::string name;
  std::string reference;
  double psnr = 0.0;
  std::optional<double> ms_ssim;
  std::optional<double> lpips;
};

struct EvalReport {
  EvalMode mode = EvalMode::Self;
  std::vector<EvalRow> rows;
  double mean_psnr = 0.0;
  std::optional<double> mean_ms_ssim;
  std::optional<double> mean_lpips;
  std::optional<double> fid;
  std::string config;  // snapshot of the evaluation settings (JSON text)

  void write_csv(const std::filesystem::path& path) const;
  void write_json(const std::filesystem::path& path) const;
};

struct EvalSet {
  std::vector<std::string> names;     // sorted
  std::vector<torch::Tensor> lines;   // 1×S×S
  std::vector<torch::Tensor> colors;  // 3×S×S ground truth
};

using ColorizeFn = std::function<torch::Tensor(const torch::Tensor& line, const torch::Tensor& reference)>;

// Self mode: each line is colorized with its own ground truth as reference and scored
// against it. Random mode: each line gets a different image of the set as reference
// (seeded derangement) and, with a feature extractor, FID between the colorized set and
// the reference set is reported. Metrics that cannot be computed stay empty.
EvalReport evaluate(const ColorizeFn& colorize, const EvalSet& set, EvalMode mode,
                    FeatureExtractor* fx = nullptr, uint64_t seed = 0);

}  // namespace lineart
