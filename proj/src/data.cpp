#include "lineart/data.hpp"

#include "lineart/errors.hpp"
#include "lineart/image.hpp"

namespace lineart {

namespace fs = std::filesystem;

Dataset load_dataset(const fs::path& root, int64_t image_size, bool require_sketches) {
  const auto color_dir = root / "color";
  const auto sketch_dir = root / "sketch";
  Dataset dataset;
  dataset.root = root;
  dataset.image_size = image_size;
  const bool have_sketch_dir = fs::is_directory(sketch_dir);
  if (require_sketches && !have_sketch_dir) {
    throw ValidationError("dataset has no sketch directory: " + sketch_dir.string());
  }
  for (const auto& path : list_images(color_dir)) {
    dataset.names.push_back(path.filename().string());
    dataset.colors.push_back(load_image(path, 3, static_cast<int>(image_size)));
    if (have_sketch_dir) {
      const auto sketch = sketch_dir / path.filename();
      if (!fs::exists(sketch)) {
        throw ValidationError("missing paired sketch for " + path.filename().string());
      }
      dataset.sketches.push_back(load_image(sketch, 1, static_cast<int>(image_size)));
    }
  }
  return dataset;
}

TrainingTriple make_training_triple(const torch::Tensor& ground_truth, const LineFn& extract,
                                    std::mt19937_64& rng, TpsSettings tps) {
  check_image(ground_truth, 3, "make_training_triple");
  TrainingTriple triple;
  triple.line = extract(ground_truth);
  if (triple.line.dim() != 3 || triple.line.size(0) != 1 ||
      triple.line.sizes().slice(1) != ground_truth.sizes().slice(1)) {
    throw ValidationError("line extractor output does not match the image size");
  }
  const auto params = random_tps_params(rng(), tps.grid, tps.magnitude);
  triple.reference = tps_warp(ground_truth, params);
  triple.ground_truth = ground_truth;
  return triple;
}

TripleBatch stack_triples(const std::vector<TrainingTriple>& triples) {
  if (triples.empty()) throw ValidationError("stack_triples: empty batch");
  std::vector<torch::Tensor> lines, refs, gts;
  for (const auto& t : triples) {
    lines.push_back(t.line);
    refs.push_back(t.reference);
    gts.push_back(t.ground_truth);
  }
  return {torch::stack(lines), torch::stack(refs), torch::stack(gts)};
}

std::mt19937_64 sample_rng(uint64_t seed, uint64_t iteration, uint64_t slot) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(iteration), static_cast<uint32_t>(iteration >> 32),
                    static_cast<uint32_t>(slot)};
  return std::mt19937_64(seq);
}

}  // namespace lineart
