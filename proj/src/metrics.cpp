#include "lineart/metrics.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include "lineart/errors.hpp"
#include "lineart/image.hpp"

namespace lineart {

namespace F = torch::nn::functional;

namespace {

constexpr std::array<double, 5> kScaleWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void require_pair(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  check_image(a, 0, what);
  check_image(b, 0, what);
  if (a.sizes() != b.sizes()) throw ValidationError(std::string(what) + ": shape mismatch");
}

torch::Tensor to_unit_luminance(const torch::Tensor& image) {
  auto x = image.detach().to(torch::kFloat64);
  if (x.size(0) == 3) x = luminance(x);
  return ((x + 1.0) * 0.5).unsqueeze(0);  // 1×1×H×W in [0,1]
}

torch::Tensor gaussian_window() {
  auto coords = torch::arange(kWindow, torch::kFloat64) - (kWindow / 2);
  auto g = torch::exp(-(coords * coords) / (2.0 * kSigma * kSigma));
  return g / g.sum();
}

torch::Tensor filter(const torch::Tensor& x, const torch::Tensor& g) {
  auto y = F::conv2d(x, g.view({1, 1, 1, kWindow}));
  return F::conv2d(y, g.view({1, 1, kWindow, 1}));
}

std::pair<double, double> ssim_and_cs(const torch::Tensor& x, const torch::Tensor& y,
                                      const torch::Tensor& g) {
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto mu_x = filter(x, g);
  const auto mu_y = filter(y, g);
  const auto var_x = filter(x * x, g) - mu_x * mu_x;
  const auto var_y = filter(y * y, g) - mu_y * mu_y;
  const auto cov = filter(x * y, g) - mu_x * mu_y;
  const auto cs_map = (2.0 * cov + c2) / (var_x + var_y + c2);
  const auto ssim_map = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1) * cs_map;
  return {ssim_map.mean().item<double>(), cs_map.mean().item<double>()};
}

std::vector<double> pooled_features(const torch::Tensor& image, FeatureExtractor& fx) {
  torch::NoGradGuard no_grad;
  const auto taps = fx->forward(image.unsqueeze(0).to(torch::kFloat32));
  const auto pooled = taps.back().mean({2, 3}).squeeze(0).to(torch::kFloat64).contiguous();
  return {pooled.data_ptr<double>(), pooled.data_ptr<double>() + pooled.numel()};
}

std::string format_optional(const std::optional<double>& value) {
  if (!value) return "NA";
  std::ostringstream out;
  out << std::setprecision(10) << *value;
  return out.str();
}

nlohmann::json optional_json(const std::optional<double>& value) {
  return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

}  // namespace

double psnr(const torch::Tensor& a, const torch::Tensor& b) {
  require_pair(a, b, "psnr");
  const double mse = (a.to(torch::kFloat64) - b.to(torch::kFloat64)).square().mean().item<double>();
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(4.0 / mse));
}

double ms_ssim(const torch::Tensor& a, const torch::Tensor& b) {
  require_pair(a, b, "ms_ssim");
  if (std::min(a.size(1), a.size(2)) < kMsSsimMinSide) {
    throw ValidationError("ms_ssim: images need a side of at least " +
                          std::to_string(kMsSsimMinSide) + " pixels");
  }
  const auto g = gaussian_window();
  auto x = to_unit_luminance(a);
  auto y = to_unit_luminance(b);
  double result = 1.0;
  for (size_t scale = 0; scale < kScaleWeights.size(); ++scale) {
    const auto [ssim, cs] = ssim_and_cs(x, y, g);
    const bool last = scale + 1 == kScaleWeights.size();
    result *= std::pow(std::max(last ? ssim : cs, 0.0), kScaleWeights[scale]);
    if (!last) {
      const std::vector<int64_t> pad{x.size(2) % 2, x.size(3) % 2};
      x = F::avg_pool2d(x, F::AvgPool2dFuncOptions(2).stride(2).padding(pad));
      y = F::avg_pool2d(y, F::AvgPool2dFuncOptions(2).stride(2).padding(pad));
    }
  }
  return result;
}

double frechet_distance(const torch::Tensor& features_a, const torch::Tensor& features_b) {
  if (features_a.dim() != 2 || features_b.dim() != 2 || features_a.size(1) != features_b.size(1) ||
      features_a.size(0) < 2 || features_b.size(0) < 2) {
    throw ValidationError("frechet_distance: need two N×F feature sets with N >= 2");
  }
  auto to_eigen = [](const torch::Tensor& t) {
    const auto c = t.to(torch::kFloat64).contiguous();
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
               c.data_ptr<double>(), c.size(0), c.size(1))
        .eval();
  };
  const Eigen::MatrixXd a = to_eigen(features_a);
  const Eigen::MatrixXd b = to_eigen(features_b);
  const Eigen::RowVectorXd mu_a = a.colwise().mean();
  const Eigen::RowVectorXd mu_b = b.colwise().mean();
  const Eigen::MatrixXd ca = a.rowwise() - mu_a;
  const Eigen::MatrixXd cb = b.rowwise() - mu_b;
  const Eigen::MatrixXd sigma_a = ca.transpose() * ca / static_cast<double>(a.rows() - 1);
  const Eigen::MatrixXd sigma_b = cb.transpose() * cb / static_cast<double>(b.rows() - 1);

  // Tr((Σa Σb)^½) = Tr((Σa^½ Σb Σa^½)^½), the inner matrix being symmetric PSD.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(sigma_a);
  const Eigen::VectorXd root_vals = eig_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root_a =
      eig_a.eigenvectors() * root_vals.asDiagonal() * eig_a.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_mid(root_a * sigma_b * root_a);
  const double trace_root = eig_mid.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return (mu_a - mu_b).squaredNorm() + sigma_a.trace() + sigma_b.trace() - 2.0 * trace_root;
}

double lpips_unit(const torch::Tensor& a, const torch::Tensor& b, FeatureExtractor& fx) {
  require_pair(a, b, "lpips");
  if (a.size(0) != 3) throw ValidationError("lpips: expected 3-channel images");
  torch::NoGradGuard no_grad;
  const auto taps_a = fx->forward(a.unsqueeze(0).to(torch::kFloat32));
  const auto taps_b = fx->forward(b.unsqueeze(0).to(torch::kFloat32));
  double total = 0.0;
  for (size_t l = 0; l < taps_a.size(); ++l) {
    auto na = taps_a[l] / (taps_a[l].square().sum(1, true).sqrt() + 1e-10);
    auto nb = taps_b[l] / (taps_b[l].square().sum(1, true).sqrt() + 1e-10);
    total += (na - nb).square().sum(1).mean().item<double>();
  }
  return total;
}

const char* to_string(EvalMode mode) { return mode == EvalMode::Self ? "self" : "random"; }

EvalMode eval_mode_from_string(const std::string& text) {
  if (text == "self") return EvalMode::Self;
  if (text == "random") return EvalMode::Random;
  throw ConfigError("eval mode must be 'self' or 'random', got '" + text + "'");
}

EvalReport evaluate(const ColorizeFn& colorize, const EvalSet& set, EvalMode mode,
                    FeatureExtractor* fx, uint64_t seed) {
  const auto n = set.colors.size();
  if (set.lines.size() != n || set.names.size() != n) {
    throw ValidationError("evaluate: names, lines and colors must have equal length");
  }
  if (n == 0) throw ValidationError("evaluate: empty evaluation set");
  if (mode == EvalMode::Random && n < 2) {
    throw ValidationError("evaluate: random-reference mode needs at least 2 images");
  }
  const bool have_fx = fx != nullptr && static_cast<bool>(*fx);

  // Random mode pairs image i with image (i + shift) mod n, shift in [1, n-1].
  size_t shift = 0;
  if (mode == EvalMode::Random) {
    std::mt19937_64 rng(seed);
    shift = std::uniform_int_distribution<size_t>(1, n - 1)(rng);
  }

  EvalReport report;
  report.mode = mode;
  std::vector<std::vector<double>> gen_features, ref_features;
  bool all_ms_ssim = true;
  bool all_lpips = have_fx;
  for (size_t i = 0; i < n; ++i) {
    const size_t r = (i + shift) % n;
    const auto& reference = set.colors[r];
    const auto output = colorize(set.lines[i], reference);
    check_image(output, 3, "evaluate(colorized)");

    EvalRow row;
    row.name = set.names[i];
    row.reference = set.names[r];
    row.psnr = psnr(output, set.colors[i]);
    if (std::min(output.size(1), output.size(2)) >= kMsSsimMinSide) {
      row.ms_ssim = ms_ssim(output, set.colors[i]);
    } else {
      all_ms_ssim = false;
    }
    if (have_fx) {
      row.lpips = lpips_unit(output, set.colors[i], *fx);
      if (mode == EvalMode::Random) {
        gen_features.push_back(pooled_features(output, *fx));
        ref_features.push_back(pooled_features(reference, *fx));
      }
    }
    report.rows.push_back(std::move(row));
  }

  double psnr_sum = 0.0, ssim_sum = 0.0, lpips_sum = 0.0;
  for (const auto& row : report.rows) {
    psnr_sum += row.psnr;
    if (row.ms_ssim) ssim_sum += *row.ms_ssim;
    if (row.lpips) lpips_sum += *row.lpips;
  }
  report.mean_psnr = psnr_sum / static_cast<double>(n);
  if (all_ms_ssim) report.mean_ms_ssim = ssim_sum / static_cast<double>(n);
  if (all_lpips) report.mean_lpips = lpips_sum / static_cast<double>(n);
  if (!gen_features.empty()) {
    auto stack = [](const std::vector<std::vector<double>>& rows) {
      auto t = torch::empty({static_cast<int64_t>(rows.size()), static_cast<int64_t>(rows[0].size())},
                            torch::kFloat64);
      for (size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].begin(), rows[i].end(), t[static_cast<int64_t>(i)].data_ptr<double>());
      }
      return t;
    };
    report.fid = frechet_distance(stack(gen_features), stack(ref_features));
  }
  report.config = nlohmann::json{{"mode", to_string(mode)},
                                 {"seed", seed},
                                 {"images", n},
                                 {"reference_shift", shift},
                                 {"feature_extractor", have_fx}}
                      .dump();
  return report;
}

void EvalReport::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "name,reference,psnr,ms_ssim,lpips\n";
  for (const auto& row : rows) {
    out << row.name << ',' << row.reference << ',' << std::setprecision(10) << row.psnr << ','
        << format_optional(row.ms_ssim) << ',' << format_optional(row.lpips) << '\n';
  }
}

void EvalReport::write_json(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  nlohmann::json summary = {{"mode", to_string(mode)},
                            {"images", rows.size()},
                            {"psnr", mean_psnr},
                            {"ms_ssim", optional_json(mean_ms_ssim)},
                            {"lpips", optional_json(mean_lpips)},
                            {"fid", optional_json(fid)},
                            {"config", nlohmann::json::parse(config.empty() ? "{}" : config)}};
  out << summary.dump(2) << '\n';
}

}  // namespace lineart
