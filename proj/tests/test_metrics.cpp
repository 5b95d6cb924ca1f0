#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "lineart/errors.hpp"
#include "lineart/image.hpp"
#include "lineart/metrics.hpp"
#include "support.hpp"

using namespace lineart;
using lineart::testing::TempDir;

namespace {

torch::Tensor sample(const std::string& rel) {
  return load_image(lineart::testing::source_dir() / rel, 3, 256);
}

EvalSet sample_set(int64_t size, size_t count) {
  EvalSet set;
  for (size_t i = 0; i < count; ++i) {
    const auto name = "sample_00" + std::to_string(i) + ".png";
    set.names.push_back(name);
    set.colors.push_back(load_image(lineart::testing::sample_dir() / "color" / name, 3, size));
    set.lines.push_back(load_image(lineart::testing::sample_dir() / "sketch" / name, 1, size));
  }
  return set;
}

const ColorizeFn kReturnReference = [](const torch::Tensor&, const torch::Tensor& ref) { return ref; };

}  // namespace

TEST(Psnr, Examples) {
  const auto a = torch::rand({3, 16, 16}) * 2 - 1;
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  EXPECT_NEAR(psnr(torch::ones({3, 4, 4}), -torch::ones({3, 4, 4})), 0.0, 1e-12);
  EXPECT_THROW(psnr(a, torch::zeros({3, 16, 15})), ValidationError);
}

TEST(Psnr, MatchesScalarOracleAndIsSymmetric) {
  torch::manual_seed(60);
  const auto a = torch::rand({3, 9, 7}, torch::kFloat64) * 2 - 1;
  const auto b = torch::rand({3, 9, 7}, torch::kFloat64) * 2 - 1;
  const auto fa = a.flatten(), fb = b.flatten();
  double mse = 0.0;
  for (int64_t i = 0; i < fa.numel(); ++i) {
    const double d = fa[i].item<double>() - fb[i].item<double>();
    mse += d * d / fa.numel();
  }
  EXPECT_NEAR(psnr(a, b), 10 * std::log10(4.0 / mse), 1e-9);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
}

TEST(MsSsim, IdentityRangeAndSymmetry) {
  const auto a = sample("data/sample/color/sample_000.png");
  const auto b = sample("data/sample/color/sample_004.png");
  EXPECT_NEAR(ms_ssim(a, a), 1.0, 1e-6);
  const double v = ms_ssim(a, b);
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 1.0);
  EXPECT_NEAR(v, ms_ssim(b, a), 1e-12);
}

TEST(MsSsim, CrossChecksIndependentImplementation) {
  // Reference values from tf.image.ssim_multiscale(max_val=1) on the BT.601 luminance
  // of the same PNGs mapped to [0, 1].
  const struct {
    const char* a;
    const char* b;
    double expected;
  } cases[] = {
      {"data/sample/color/sample_000.png", "tests/data/warped_000.png", 0.6651801467},
      {"data/sample/color/sample_003.png", "tests/data/warped_003.png", 0.5056463480},
      {"data/holdout/color/holdout_000.png", "data/holdout/color/holdout_001.png", 0.3753586113},
  };
  for (const auto& c : cases) {
    EXPECT_NEAR(ms_ssim(sample(c.a), sample(c.b)), c.expected, 1e-3) << c.a;
  }
}

TEST(MsSsim, TooSmallImagesRejected) {
  EXPECT_THROW(ms_ssim(torch::zeros({3, 64, 64}), torch::zeros({3, 64, 64})), ValidationError);
}

TEST(FrechetDistance, MatchesClosedForms) {
  torch::manual_seed(61);
  const auto a = torch::randn({50, 4}, torch::kFloat64);
  EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-6);
  // One-dimensional case: (μa-μb)² + (σa-σb)².
  const auto x = torch::randn({40, 1}, torch::kFloat64);
  const auto y = torch::randn({30, 1}, torch::kFloat64) * 2 + 1;
  const double mx = x.mean().item<double>(), my = y.mean().item<double>();
  const double sx = x.std().item<double>(), sy = y.std().item<double>();
  EXPECT_NEAR(frechet_distance(x, y), (mx - my) * (mx - my) + (sx - sy) * (sx - sy), 1e-9);
  EXPECT_THROW(frechet_distance(a, torch::randn({1, 4})), ValidationError);
}

TEST(Evaluate, IdentityModelHitsCapsInSelfMode) {
  const auto set = sample_set(256, 3);
  const auto report = evaluate(kReturnReference, set, EvalMode::Self);
  EXPECT_EQ(report.mean_psnr, kPsnrCap);
  ASSERT_TRUE(report.mean_ms_ssim.has_value());
  EXPECT_NEAR(*report.mean_ms_ssim, 1.0, 1e-6);
  EXPECT_FALSE(report.mean_lpips.has_value());
  EXPECT_FALSE(report.fid.has_value());
  for (const auto& row : report.rows) EXPECT_EQ(row.name, row.reference);
}

TEST(Evaluate, RandomModeSeededPairingAndFeatureMetrics) {
  const auto set = sample_set(64, 4);
  auto fx = random_feature_extractor(5);
  const auto a = evaluate(kReturnReference, set, EvalMode::Random, &fx, 9);
  const auto b = evaluate(kReturnReference, set, EvalMode::Random, &fx, 9);
  ASSERT_EQ(a.rows.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_NE(a.rows[i].name, a.rows[i].reference);
    EXPECT_EQ(a.rows[i].reference, b.rows[i].reference);
    EXPECT_EQ(a.rows[i].psnr, b.rows[i].psnr);
  }
  EXPECT_FALSE(a.mean_ms_ssim.has_value());  // 64 px is below the 5-scale minimum
  ASSERT_TRUE(a.fid.has_value());
  EXPECT_NEAR(*a.fid, 0.0, 1e-3);  // outputs are exactly the reference set
  ASSERT_TRUE(a.mean_lpips.has_value());
  EXPECT_GT(*a.mean_lpips, 0.0);
  EXPECT_THROW(evaluate(kReturnReference, sample_set(64, 1), EvalMode::Random), ValidationError);
}

TEST(Evaluate, AggregatesAreRowMeansInEmittedCsv) {
  const auto set = sample_set(64, 4);
  const auto report = evaluate([](const torch::Tensor& line, const torch::Tensor&) {
    return line.expand({3, -1, -1}).contiguous();
  }, set, EvalMode::Self);
  TempDir dir("eval");
  report.write_csv(dir / "eval.csv");
  report.write_json(dir / "eval.json");
  std::ifstream csv(dir / "eval.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "name,reference,psnr,ms_ssim,lpips");
  double sum = 0.0;
  int rows = 0;
  std::vector<std::string> names;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string name, ref, value, ssim, lp;
    std::getline(ss, name, ',');
    std::getline(ss, ref, ',');
    std::getline(ss, value, ',');
    std::getline(ss, ssim, ',');
    std::getline(ss, lp, ',');
    EXPECT_EQ(ssim, "NA");
    EXPECT_EQ(lp, "NA");
    names.push_back(name);
    sum += std::stod(value);
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  EXPECT_NEAR(sum / rows, report.mean_psnr, 1e-8);
  std::ifstream js(dir / "eval.json");
  const auto j = nlohmann::json::parse(js);
  EXPECT_NEAR(j.at("psnr").get<double>(), report.mean_psnr, 1e-9);
}
