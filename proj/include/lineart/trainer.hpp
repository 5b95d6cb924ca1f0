#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "lineart/checkpoint.hpp"
#include "lineart/config.hpp"
#include "lineart/data.hpp"
#include "lineart/discriminator.hpp"
#include "lineart/generator.hpp"
#include "lineart/losses.hpp"

namespace lineart {

struct StepLosses {
  int64_t iteration = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;  // weighted total
  double l1 = 0.0;
  double perc = 0.0;
  double style = 0.0;
  double adv = 0.0;
};

// Line drawings for every dataset image: the extractor named in the config when set,
// otherwise the paired sketches.
std::vector<torch::Tensor> dataset_lines(const Dataset& dataset, const TrainConfig& config);

// Feature extractor named in the config, or an empty handle (with a warning on stderr)
// when none is configured.
FeatureExtractor configured_feature_extractor(const TrainConfig& config);

// Adversarial trainer holding the full training state: both networks, their Adam
// moments, the spectral-norm vectors, the iteration counter and the loss history.
// Batches are a pure function of (seed, iteration), so restoring a saved state continues
// the exact same run.
class Trainer {
 public:
  Trainer(TrainConfig config, Dataset dataset, std::vector<torch::Tensor> lines,
          FeatureExtractor fx = FeatureExtractor(nullptr));

  // Training triples for a given iteration.
  TripleBatch batch_for(int64_t iteration) const;

  // One discriminator update on real and detached fake, then one generator update on the
  // weighted total. Throws TrainingDiverged (after writing a snapshot to the output
  // directory) if a loss is non-finite.
  StepLosses step(const TripleBatch& batch);
  // The two halves of step(): D on real and detached fake, then G on the full weighted
  // loss. Exposed for update-isolation checks; neither advances the iteration counter.
  double discriminator_step(const TripleBatch& batch, const torch::Tensor& fake);
  LossParts<double> generator_step(const TripleBatch& batch, const torch::Tensor& fake);
  StepLosses step() { return step(batch_for(iteration_)); }

  // Steps until `iterations` (config.iterations by default), writing
  // state_<iter>.safetensors and losses.csv into `output_dir` every checkpoint_every
  // steps and generator.safetensors at the end.
  void run(const std::filesystem::path& output_dir, int64_t iterations = -1,
           const std::function<void(const StepLosses&)>& on_step = {});

  Checkpoint state() const;
  void restore(const Checkpoint& state);

  // Generator weights plus the metadata colorize/eval need.
  Checkpoint generator_checkpoint() const;

  void write_loss_csv(const std::filesystem::path& path) const;

  Generator& generator() { return generator_; }
  Discriminator& discriminator() { return discriminator_; }
  const TrainConfig& config() const { return config_; }
  const Dataset& dataset() const { return dataset_; }
  int64_t iteration() const { return iteration_; }
  const std::vector<StepLosses>& history() const { return history_; }

 private:
  std::string snapshot_on_failure(const char* what);

  TrainConfig config_;
  Dataset dataset_;
  std::vector<torch::Tensor> lines_;
  FeatureExtractor fx_;
  Generator generator_{nullptr};
  Discriminator discriminator_{nullptr};
  std::unique_ptr<torch::optim::Adam> opt_g_;
  std::unique_ptr<torch::optim::Adam> opt_d_;
  int64_t iteration_ = 0;
  std::vector<StepLosses> history_;
  std::filesystem::path output_dir_ = ".";
};

GeneratorOptions generator_options(const TrainConfig& config);
DiscriminatorOptions discriminator_options(const TrainConfig& config);

// Loads a generator checkpoint written by Trainer::generator_checkpoint (or the
// generator part of a full training state).
Generator load_generator(const std::filesystem::path& path);

}  // namespace lineart
