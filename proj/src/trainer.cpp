#include "lineart/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>

#include "lineart/errors.hpp"
#include "lineart/line_extractor.hpp"

namespace lineart {

namespace fs = std::filesystem;

namespace {

constexpr int kHistoryColumns = 7;

void set_requires_grad(torch::nn::Module& module, bool enabled) {
  for (auto& p : module.parameters()) p.set_requires_grad(enabled);
}

void export_adam(const torch::optim::Adam& optimizer, const std::string& prefix,
                 Checkpoint& checkpoint) {
  const auto& params = optimizer.param_groups().front().params();
  const auto& states = optimizer.state();
  for (size_t i = 0; i < params.size(); ++i) {
    auto it = states.find(params[i].unsafeGetTensorImpl());
    if (it == states.end()) continue;
    const auto& s = static_cast<const torch::optim::AdamParamState&>(*it->second);
    const auto key = prefix + std::to_string(i);
    checkpoint.tensors[key + ".exp_avg"] = s.exp_avg().clone();
    checkpoint.tensors[key + ".exp_avg_sq"] = s.exp_avg_sq().clone();
    checkpoint.tensors[key + ".step"] = torch::tensor({s.step()}, torch::kInt64);
  }
}

void import_adam(torch::optim::Adam& optimizer, const std::string& prefix,
                 const Checkpoint& checkpoint) {
  const auto& params = optimizer.param_groups().front().params();
  auto& states = optimizer.state();
  states.clear();
  for (size_t i = 0; i < params.size(); ++i) {
    const auto key = prefix + std::to_string(i);
    if (checkpoint.tensors.count(key + ".step") == 0) continue;
    auto s = std::make_unique<torch::optim::AdamParamState>();
    s->step(checkpoint.tensor(key + ".step").item<int64_t>());
    s->exp_avg(checkpoint.tensor(key + ".exp_avg").clone());
    s->exp_avg_sq(checkpoint.tensor(key + ".exp_avg_sq").clone());
    if (s->exp_avg().sizes() != params[i].sizes()) {
      throw ValidationError("optimizer state shape mismatch at " + key);
    }
    states[params[i].unsafeGetTensorImpl()] = std::move(s);
  }
}

}  // namespace

GeneratorOptions generator_options(const TrainConfig& config) {
  return {config.image_size, config.base_channels, config.res_blocks};
}

DiscriminatorOptions discriminator_options(const TrainConfig& config) {
  return {config.base_channels * 2};
}

std::vector<torch::Tensor> dataset_lines(const Dataset& dataset, const TrainConfig& config) {
  std::vector<torch::Tensor> lines;
  if (!config.line_extractor.empty()) {
    auto extractor = load_line_extractor(config.line_extractor);
    for (const auto& color : dataset.colors) lines.push_back(extract_lines(extractor, color));
    return lines;
  }
  if (!dataset.has_sketches()) {
    throw ConfigError("no line_extractor configured and the dataset has no sketch/ directory");
  }
  return dataset.sketches;
}

FeatureExtractor configured_feature_extractor(const TrainConfig& config) {
  if (config.feature_extractor.empty()) {
    std::cerr << "warning: no feature_extractor weights configured; perceptual and style "
                 "terms are disabled\n";
    return FeatureExtractor(nullptr);
  }
  return load_feature_extractor(config.feature_extractor);
}

Trainer::Trainer(TrainConfig config, Dataset dataset, std::vector<torch::Tensor> lines,
                 FeatureExtractor fx)
    : config_(std::move(config)),
      dataset_(std::move(dataset)),
      lines_(std::move(lines)),
      fx_(std::move(fx)) {
  config_.validate();
  if (dataset_.empty()) throw ValidationError("trainer: empty dataset");
  if (lines_.size() != dataset_.size()) {
    throw ValidationError("trainer: need one line drawing per dataset image");
  }
  if (dataset_.image_size != config_.image_size) {
    throw ValidationError("trainer: dataset loaded at a different image size");
  }
  torch::manual_seed(config_.seed);
  generator_ = Generator(generator_options(config_));
  discriminator_ = Discriminator(discriminator_options(config_));
  opt_g_ = std::make_unique<torch::optim::Adam>(
      generator_->parameters(),
      torch::optim::AdamOptions(config_.lr_g).betas({config_.adam_beta1, config_.adam_beta2}));
  opt_d_ = std::make_unique<torch::optim::Adam>(
      discriminator_->parameters(),
      torch::optim::AdamOptions(config_.lr_d).betas({config_.adam_beta1, config_.adam_beta2}));
}

TripleBatch Trainer::batch_for(int64_t iteration) const {
  const auto n = static_cast<int64_t>(dataset_.size());
  auto pick = sample_rng(config_.seed, static_cast<uint64_t>(iteration), 0xFFFFFFFFu);
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), pick);

  const TpsSettings tps{static_cast<int>(config_.tps_grid), config_.tps_magnitude};
  std::vector<TrainingTriple> triples;
  for (int64_t slot = 0; slot < config_.batch_size; ++slot) {
    const int64_t index = order[slot % n];
    auto rng = sample_rng(config_.seed, static_cast<uint64_t>(iteration), static_cast<uint64_t>(slot));
    const auto& line = lines_[index];
    triples.push_back(make_training_triple(
        dataset_.colors[index], [&line](const torch::Tensor&) { return line; }, rng, tps));
  }
  return stack_triples(triples);
}

double Trainer::discriminator_step(const TripleBatch& batch, const torch::Tensor& fake) {
  generator_->train();
  discriminator_->train();
  set_requires_grad(*discriminator_, true);
  const auto d_real = discriminator_->forward(batch.ground_truth, batch.line);
  const auto d_fake = discriminator_->forward(fake.detach(), batch.line);
  const auto loss_d = discriminator_adv_loss(d_real, d_fake, config_.lsgan_targets);
  const double value = loss_d.item<double>();
  if (!std::isfinite(value)) {
    throw TrainingDiverged("non-finite discriminator loss at iteration " +
                               std::to_string(iteration_),
                           snapshot_on_failure("discriminator"));
  }
  opt_d_->zero_grad();
  loss_d.backward();
  opt_d_->step();
  return value;
}

LossParts<double> Trainer::generator_step(const TripleBatch& batch, const torch::Tensor& fake) {
  generator_->train();
  discriminator_->train();
  // D parameters are frozen so only G accumulates gradient.
  set_requires_grad(*discriminator_, false);
  LossParts<torch::Tensor> parts;
  parts.adv = generator_adv_loss(discriminator_->forward(fake, batch.line));
  parts.rec = lineart::l1_loss(fake, batch.ground_truth);
  if (fx_) {
    auto feature_terms = feature_losses(fake, batch.ground_truth, fx_);
    parts.perc = feature_terms.perceptual;
    parts.style = feature_terms.style;
  } else {
    parts.perc = torch::zeros({}, fake.options());
    parts.style = torch::zeros({}, fake.options());
  }
  const auto total = total_generator_loss(parts, config_.weights);
  if (!std::isfinite(total.item<double>())) {
    set_requires_grad(*discriminator_, true);
    throw TrainingDiverged("non-finite generator loss at iteration " + std::to_string(iteration_),
                           snapshot_on_failure("generator"));
  }
  opt_g_->zero_grad();
  total.backward();
  opt_g_->step();
  set_requires_grad(*discriminator_, true);
  return {parts.adv.item<double>(), parts.rec.item<double>(), parts.perc.item<double>(),
          parts.style.item<double>()};
}

StepLosses Trainer::step(const TripleBatch& batch) {
  generator_->train();
  const auto fake = generator_->forward(batch.line, batch.reference);
  StepLosses losses;
  losses.iteration = iteration_;
  losses.loss_d = discriminator_step(batch, fake);
  const auto parts = generator_step(batch, fake);
  losses.loss_g = total_generator_loss(parts, config_.weights);
  losses.l1 = parts.rec;
  losses.perc = parts.perc;
  losses.style = parts.style;
  losses.adv = parts.adv;
  history_.push_back(losses);
  ++iteration_;
  return losses;
}

void Trainer::run(const fs::path& output_dir, int64_t iterations,
                  const std::function<void(const StepLosses&)>& on_step) {
  const int64_t until = iterations < 0 ? config_.iterations : iterations;
  output_dir_ = output_dir;
  fs::create_directories(output_dir);
  save_config(config_, output_dir / "config.yaml");
  while (iteration_ < until) {
    const auto losses = step();
    if (on_step) on_step(losses);
    if (iteration_ % config_.checkpoint_every == 0 || iteration_ == until) {
      std::ostringstream name;
      name << "state_" << std::setw(7) << std::setfill('0') << iteration_ << ".safetensors";
      save_checkpoint(state(), output_dir / name.str());
      write_loss_csv(output_dir / "losses.csv");
    }
  }
  save_checkpoint(generator_checkpoint(), output_dir / "generator.safetensors");
  write_loss_csv(output_dir / "losses.csv");
}

Checkpoint Trainer::state() const {
  Checkpoint checkpoint;
  export_module(*generator_, "generator.", checkpoint);
  export_module(*discriminator_, "discriminator.", checkpoint);
  export_adam(*opt_g_, "opt_g.", checkpoint);
  export_adam(*opt_d_, "opt_d.", checkpoint);
  auto history = torch::zeros({static_cast<int64_t>(history_.size()), kHistoryColumns},
                              torch::kFloat64);
  auto rows = history.accessor<double, 2>();
  for (size_t i = 0; i < history_.size(); ++i) {
    const auto& h = history_[i];
    const double values[kHistoryColumns] = {static_cast<double>(h.iteration), h.loss_d, h.loss_g,
                                            h.l1, h.perc, h.style, h.adv};
    for (int c = 0; c < kHistoryColumns; ++c) rows[i][c] = values[c];
  }
  checkpoint.tensors["history"] = history;
  checkpoint.metadata["kind"] = "train_state";
  checkpoint.metadata["iteration"] = std::to_string(iteration_);
  checkpoint.metadata["config"] = config_.to_yaml();
  checkpoint.metadata["image_size"] = std::to_string(config_.image_size);
  checkpoint.metadata["base_channels"] = std::to_string(config_.base_channels);
  checkpoint.metadata["res_blocks"] = std::to_string(config_.res_blocks);
  checkpoint.metadata["seed"] = std::to_string(config_.seed);
  return checkpoint;
}

void Trainer::restore(const Checkpoint& state) {
  if (!state.has_meta("kind") || state.meta("kind") != "train_state") {
    throw ValidationError("not a training state checkpoint");
  }
  import_module(*generator_, "generator.", state);
  import_module(*discriminator_, "discriminator.", state);
  import_adam(*opt_g_, "opt_g.", state);
  import_adam(*opt_d_, "opt_d.", state);
  iteration_ = std::stoll(state.meta("iteration"));
  history_.clear();
  const auto history = state.tensor("history").contiguous();
  auto rows = history.accessor<double, 2>();
  for (int64_t i = 0; i < history.size(0); ++i) {
    history_.push_back({static_cast<int64_t>(rows[i][0]), rows[i][1], rows[i][2], rows[i][3],
                        rows[i][4], rows[i][5], rows[i][6]});
  }
}

Checkpoint Trainer::generator_checkpoint() const {
  Checkpoint checkpoint;
  export_module(*generator_, "", checkpoint);
  checkpoint.metadata["kind"] = "generator";
  checkpoint.metadata["image_size"] = std::to_string(config_.image_size);
  checkpoint.metadata["base_channels"] = std::to_string(config_.base_channels);
  checkpoint.metadata["res_blocks"] = std::to_string(config_.res_blocks);
  checkpoint.metadata["seed"] = std::to_string(config_.seed);
  checkpoint.metadata["iteration"] = std::to_string(iteration_);
  return checkpoint;
}

void Trainer::write_loss_csv(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,loss_D,loss_G,L1,perc,style,adv\n";
  out << std::setprecision(9);
  for (const auto& h : history_) {
    out << h.iteration << ',' << h.loss_d << ',' << h.loss_g << ',' << h.l1 << ',' << h.perc
        << ',' << h.style << ',' << h.adv << '\n';
  }
}

std::string Trainer::snapshot_on_failure(const char* what) {
  const auto path = output_dir_ / ("diverged_" + std::string(what) + "_" +
                                   std::to_string(iteration_) + ".safetensors");
  try {
    save_checkpoint(state(), path);
  } catch (const std::exception& e) {
    std::cerr << "could not write divergence snapshot: " << e.what() << '\n';
  }
  return path.string();
}

Generator load_generator(const fs::path& path) {
  const auto checkpoint = load_checkpoint(path);
  const auto kind = checkpoint.has_meta("kind") ? checkpoint.meta("kind") : std::string();
  if (kind != "generator" && kind != "train_state") {
    throw ValidationError("not a generator checkpoint: " + path.string());
  }
  GeneratorOptions options{std::stoll(checkpoint.meta("image_size")),
                           std::stoll(checkpoint.meta("base_channels")),
                           std::stoll(checkpoint.meta("res_blocks"))};
  Generator net(options);
  import_module(*net, kind == "generator" ? "" : "generator.", checkpoint);
  net->eval();
  return net;
}

}  // namespace lineart
