#pragma once

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace lineart::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  int64_t checked = 0;
  // Coordinates whose first step straddled a non-differentiable point and were re-probed.
  int64_t kinks = 0;
  // Location and values of the worst coordinate.
  size_t worst_input = 0;
  int64_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline constexpr double kKinkTolerance = 1e-3;
inline constexpr double kMinStep = 1e-9;

// Central finite differences against autograd for every listed input. At most
// `max_coords` entries per tensor are probed (chosen with a fixed seed).
inline GradCheck grad_check(const std::function<torch::Tensor()>& f,
                            const std::vector<torch::Tensor>& inputs, int64_t max_coords = 40,
                            double eps = 1e-6, double floor = 1e-6) {
  for (const auto& t : inputs) {
    if (t.grad().defined()) t.mutable_grad().zero_();
  }
  f().backward();
  std::vector<torch::Tensor> analytic;
  for (const auto& t : inputs) {
    analytic.push_back(t.grad().defined() ? t.grad().clone() : torch::zeros_like(t));
  }

  GradCheck result;
  std::mt19937_64 rng(1234);
  torch::NoGradGuard no_grad;
  for (size_t i = 0; i < inputs.size(); ++i) {
    auto flat = inputs[i].view({-1});
    const auto grad = analytic[i].view({-1});
    std::vector<int64_t> coords(flat.numel());
    for (int64_t k = 0; k < flat.numel(); ++k) coords[k] = k;
    std::shuffle(coords.begin(), coords.end(), rng);
    if (static_cast<int64_t>(coords.size()) > max_coords) coords.resize(max_coords);
    for (const auto k : coords) {
      const double orig = flat[k].item<double>();
      const double centre = f().item<double>();
      double numeric = 0.0;
      // A central difference is only meaningful where f is differentiable on [x-h, x+h].
      // If the one-sided slopes disagree beyond smooth curvature, a ReLU / max switch lies
      // inside the interval: shrink the step until it no longer does.
      for (double h = eps;; h *= 0.1) {
        flat[k] = orig + h;
        const double plus = f().item<double>();
        flat[k] = orig - h;
        const double minus = f().item<double>();
        flat[k] = orig;
        numeric = (plus - minus) / (2 * h);
        const double forward = (plus - centre) / h, backward = (centre - minus) / h;
        const double spread = std::abs(forward - backward);
        const double rounding = 1e3 * std::numeric_limits<double>::epsilon() * std::max(std::abs(centre), 1.0) / h;
        if (spread <= kKinkTolerance * std::max({std::abs(forward), std::abs(backward), floor}) ||
            spread <= rounding || h * 0.1 < kMinStep) {
          break;
        }
        if (h == eps) ++result.kinks;
      }
      const double a = grad[k].item<double>();
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_input = i;
        result.worst_index = k;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
      ++result.checked;
    }
  }
  return result;
}

inline torch::Tensor leaf(torch::Tensor t) { return t.to(torch::kFloat64).detach().requires_grad_(true); }

// Fixed random projection so a scalar loss depends on every output element.
inline torch::Tensor probe(const torch::Tensor& y, uint64_t seed = 99) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  const auto w = at::randn(y.sizes(), gen, y.options().requires_grad(false));
  return (y * w).sum();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("lineart_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path source_dir() { return LINEART_SOURCE_DIR; }
inline std::filesystem::path sample_dir() { return source_dir() / "data" / "sample"; }

}  // namespace lineart::testing
