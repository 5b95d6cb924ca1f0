#include "cli.hpp"

#include <CLI11.hpp>
#include <torch/torch.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "lineart/config.hpp"
#include "lineart/data.hpp"
#include "lineart/errors.hpp"
#include "lineart/generator.hpp"
#include "lineart/image.hpp"
#include "lineart/line_extractor.hpp"
#include "lineart/metrics.hpp"
#include "lineart/tps.hpp"
#include "lineart/trainer.hpp"

namespace lineart::cli {

namespace fs = std::filesystem;

namespace {

struct ConfigArgs {
  std::string preset = "desk";
  std::string path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App& cmd, ConfigArgs& args) {
  cmd.add_option("--preset", args.preset, "Base settings before the config file is applied")
      ->check(CLI::IsMember({"desk", "full"}));
  cmd.add_option("--config", args.path, "YAML key-value config file")->check(CLI::ExistingFile);
  cmd.add_option("--set", args.overrides, "Override one config key (key=value), repeatable");
}

// Preset, then config file, then --set overrides.
TrainConfig resolve_config(const ConfigArgs& args) {
  TrainConfig config = args.preset == "full" ? TrainConfig::full() : TrainConfig::desk();
  if (!args.path.empty()) apply_config_file(config, args.path);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

int cmd_augment_preview(const std::string& in, const std::string& out, uint64_t seed, int size,
                        double magnitude, int grid) {
  const auto [h, w] = image_dimensions(in);
  const int side = size > 0 ? size : static_cast<int>(std::max(h, w));
  const auto image = load_image(in, 3, side);
  save_image(tps_warp(image, random_tps_params(seed, grid, magnitude)), out);
  std::cout << "wrote " << out << '\n';
  return kOk;
}

int cmd_extract_lines(const std::string& ckpt, const std::string& in, const std::string& out) {
  auto net = load_line_extractor(ckpt);
  const auto size = static_cast<int>(net->options().image_size);
  std::vector<fs::path> inputs;
  if (fs::is_directory(in)) {
    inputs = list_images(in);
  } else {
    inputs.push_back(in);
  }
  fs::create_directories(out);
  for (const auto& path : inputs) {
    const auto [h, w] = image_dimensions(path);
    const auto line = extract_lines(net, load_image(path, 3, size));
    const auto target = fs::path(out) / path.filename().replace_extension(".png");
    save_image(resize_image(line, h, w).clamp(-1.0, 1.0), target);
  }
  std::cout << "extracted " << inputs.size() << " line drawings into " << out << '\n';
  return kOk;
}

int cmd_train_le(const TrainConfig& config, const std::string& out) {
  torch::set_num_threads(1);
  const auto dataset = load_dataset(config.dataset, config.image_size, true);
  auto run = train_line_extractor(dataset, config);
  const fs::path target = out.empty() ? fs::path(config.output_dir) / "line_extractor.safetensors"
                                      : fs::path(out);
  save_checkpoint(line_extractor_checkpoint(run.net, config.seed, run.loss_history), target);
  std::ofstream csv(target.parent_path() / "line_extractor_losses.csv");
  csv << "iteration,L1\n";
  for (size_t i = 0; i < run.loss_history.size(); ++i) csv << i << ',' << run.loss_history[i] << '\n';
  std::cout << "final L1 " << run.loss_history.back() << ", wrote " << target.string() << '\n';
  return kOk;
}

int cmd_train(const TrainConfig& config, const std::string& resume, int log_every) {
  torch::set_num_threads(1);
  auto dataset = load_dataset(config.dataset, config.image_size, false);
  auto lines = dataset_lines(dataset, config);
  Trainer trainer(config, std::move(dataset), std::move(lines), configured_feature_extractor(config));
  if (!resume.empty()) {
    trainer.restore(load_checkpoint(resume));
    std::cout << "resumed at iteration " << trainer.iteration() << '\n';
  }
  trainer.run(config.output_dir, -1, [&](const StepLosses& s) {
    if (log_every > 0 && (s.iteration + 1) % log_every == 0) {
      std::cout << "iter " << s.iteration + 1 << " D " << s.loss_d << " G " << s.loss_g << " L1 "
                << s.l1 << std::endl;
    }
  });
  std::cout << "wrote " << (fs::path(config.output_dir) / "generator.safetensors").string() << '\n';
  return kOk;
}

int cmd_colorize(const std::string& line_path, const std::string& ref_path, const std::string& ckpt,
                 const std::string& out) {
  auto net = load_generator(ckpt);
  const auto size = static_cast<int>(net->options().image_size);
  const auto [h, w] = image_dimensions(line_path);
  const auto line = load_image(line_path, 1, size);
  const auto reference = load_image(ref_path, 3, size);
  const auto colored = generate(net, line, reference);
  save_image(resize_image(colored, h, w).clamp(-1.0, 1.0), out);
  std::cout << "wrote " << out << '\n';
  return kOk;
}

int cmd_eval(const std::string& ckpt, const std::string& data, const std::string& mode_text,
             const std::string& out, const std::string& le_path, const std::string& fx_path,
             uint64_t seed) {
  const auto mode = eval_mode_from_string(mode_text);
  auto net = load_generator(ckpt);
  const auto size = net->options().image_size;
  const auto dataset = load_dataset(data, size, false);
  EvalSet set;
  set.names = dataset.names;
  set.colors = dataset.colors;
  if (!le_path.empty()) {
    auto le = load_line_extractor(le_path);
    for (const auto& c : dataset.colors) set.lines.push_back(extract_lines(le, c));
  } else if (dataset.has_sketches()) {
    set.lines = dataset.sketches;
  } else {
    throw ConfigError("eval needs --line-extractor or a sketch/ directory in " + data);
  }
  FeatureExtractor fx(nullptr);
  if (!fx_path.empty()) fx = load_feature_extractor(fx_path);
  const auto report = evaluate(
      [&](const torch::Tensor& line, const torch::Tensor& ref) { return generate(net, line, ref); },
      set, mode, fx ? &fx : nullptr, seed);
  report.write_csv(fs::path(out) / "eval.csv");
  report.write_json(fs::path(out) / "eval.json");
  std::cout << "mean PSNR " << report.mean_psnr << " dB";
  if (report.mean_ms_ssim) std::cout << ", MS-SSIM " << *report.mean_ms_ssim;
  std::cout << "; wrote " << out << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Reference-based line drawing colorization", "lineart"};
  app.require_subcommand(1);

  std::string in, out, ckpt, line, ref, data, mode = "self", le_path, fx_path, resume;
  uint64_t seed = 0;
  int size = 0, grid = 5, log_every = 50;
  double magnitude = 0.08;
  ConfigArgs config_args;

  auto* preview = app.add_subcommand("augment-preview", "Write a TPS-distorted copy of an image");
  preview->add_option("--in", in, "Input image")->required()->check(CLI::ExistingFile);
  preview->add_option("--out", out, "Output PNG")->required();
  preview->add_option("--seed", seed, "Distortion seed");
  preview->add_option("--size", size, "Working size (default: native)");
  preview->add_option("--magnitude", magnitude, "Max control point offset (normalized)");
  preview->add_option("--grid", grid, "Control points per axis");

  auto* extract = app.add_subcommand("extract-lines", "Convert color images to line drawings");
  extract->add_option("--ckpt", ckpt, "Line extractor checkpoint")->required()->check(CLI::ExistingFile);
  extract->add_option("--in", in, "Image file or directory")->required()->check(CLI::ExistingPath);
  extract->add_option("--out", out, "Output directory")->required();

  auto* train_le = app.add_subcommand("train-le", "Train the line extractor on color/sketch pairs");
  add_config_options(*train_le, config_args);
  train_le->add_option("--out", out, "Checkpoint path (default <output_dir>/line_extractor.safetensors)");

  auto* train = app.add_subcommand("train", "Train the colorization GAN");
  add_config_options(*train, config_args);
  train->add_option("--resume", resume, "Training state to continue from")->check(CLI::ExistingFile);
  train->add_option("--log-every", log_every, "Print losses every N iterations (0 = quiet)");

  auto* colorize = app.add_subcommand("colorize", "Colorize a line drawing from a reference");
  colorize->add_option("--line", line, "Line drawing")->required()->check(CLI::ExistingFile);
  colorize->add_option("--ref", ref, "Reference color image")->required()->check(CLI::ExistingFile);
  colorize->add_option("--ckpt", ckpt, "Generator checkpoint")->required()->check(CLI::ExistingFile);
  colorize->add_option("--out", out, "Output PNG")->required();

  auto* eval = app.add_subcommand("eval", "Self- or random-reference evaluation");
  eval->add_option("--ckpt", ckpt, "Generator checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "Dataset root (color/ and optional sketch/)")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--mode", mode, "self or random")->check(CLI::IsMember({"self", "random"}));
  eval->add_option("--out", out, "Report directory")->required();
  eval->add_option("--line-extractor", le_path, "Line extractor checkpoint")->check(CLI::ExistingFile);
  eval->add_option("--feature-extractor", fx_path, "VGG-19 weights for LPIPS/FID")
      ->check(CLI::ExistingFile);
  eval->add_option("--seed", seed, "Reference pairing seed (random mode)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (*preview) return cmd_augment_preview(in, out, seed, size, magnitude, grid);
    if (*extract) return cmd_extract_lines(ckpt, in, out);
    if (*train_le) return cmd_train_le(resolve_config(config_args), out);
    if (*train) return cmd_train(resolve_config(config_args), resume, log_every);
    if (*colorize) return cmd_colorize(line, ref, ckpt, out);
    if (*eval) return cmd_eval(ckpt, data, mode, out, le_path, fx_path, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace lineart::cli
