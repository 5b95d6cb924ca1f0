#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lineart/tps.hpp"

namespace lineart {

// Images of `<root>/color/*` in filename order, with the same-named files of
// `<root>/sketch/` when that directory exists. Everything is loaded at `image_size`.
struct Dataset {
  std::filesystem::path root;
  int64_t image_size = 0;
  std::vector<std::string> names;
  std::vector<torch::Tensor> colors;    // 3×S×S
  std::vector<torch::Tensor> sketches;  // 1×S×S, empty or one per color image

  size_t size() const { return colors.size(); }
  bool empty() const { return colors.empty(); }
  bool has_sketches() const { return !sketches.empty(); }
};

// Throws IoError if the color directory is missing, ValidationError if `require_sketches`
// and a sketch is missing.
Dataset load_dataset(const std::filesystem::path& root, int64_t image_size,
                     bool require_sketches = false);

struct TrainingTriple {
  torch::Tensor line;          // 1×S×S
  torch::Tensor reference;     // 3×S×S, TPS-distorted ground truth
  torch::Tensor ground_truth;  // 3×S×S
};

struct TripleBatch {
  torch::Tensor line;          // B×1×S×S
  torch::Tensor reference;     // B×3×S×S
  torch::Tensor ground_truth;  // B×3×S×S
};

using LineFn = std::function<torch::Tensor(const torch::Tensor&)>;

struct TpsSettings {
  int grid = 5;
  double magnitude = 0.08;
};

// line = extract(gt); reference = tps_warp(gt, random params seeded from rng).
TrainingTriple make_training_triple(const torch::Tensor& ground_truth, const LineFn& extract,
                                    std::mt19937_64& rng, TpsSettings tps = {});

TripleBatch stack_triples(const std::vector<TrainingTriple>& triples);

// Per-sample generator for (seed, iteration, slot); independent of visiting order so
// samples can be produced concurrently and reproduced after a resume.
std::mt19937_64 sample_rng(uint64_t seed, uint64_t iteration, uint64_t slot);

}  // namespace lineart
