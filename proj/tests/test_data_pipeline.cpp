#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <opencv2/imgcodecs.hpp>

#include "lineart/data.hpp"
#include "lineart/errors.hpp"
#include "lineart/image.hpp"
#include "lineart/tps.hpp"
#include "support.hpp"

using namespace lineart;
using lineart::testing::TempDir;

namespace {

void write_solid(const std::filesystem::path& path, int h, int w, uint8_t value) {
  cv::Mat m(h, w, CV_8UC3, cv::Scalar(value, value, value));
  cv::imwrite(path.string(), m);
}

// Dense TPS solve by Gaussian elimination with partial pivoting, radial basis r²·log r.
struct TpsOracle {
  std::vector<Point2> src;
  std::vector<std::vector<double>> coef;  // (K+3) × 2

  static double basis(double dx, double dy) {
    const double r = std::sqrt(dx * dx + dy * dy);
    return r == 0.0 ? 0.0 : r * r * std::log(r);
  }

  TpsOracle(const std::vector<Point2>& s, const std::vector<Point2>& t) : src(s) {
    const size_t k = s.size(), n = k + 3;
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 2, 0.0));
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = 0; j < k; ++j) a[i][j] = basis(s[i].x - s[j].x, s[i].y - s[j].y);
      a[i][k] = a[k][i] = 1.0;
      a[i][k + 1] = a[k + 1][i] = s[i].x;
      a[i][k + 2] = a[k + 2][i] = s[i].y;
      a[i][n] = t[i].x;
      a[i][n + 1] = t[i].y;
    }
    for (size_t c = 0; c < n; ++c) {
      size_t p = c;
      for (size_t r = c + 1; r < n; ++r) {
        if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
      }
      std::swap(a[c], a[p]);
      for (size_t r = 0; r < n; ++r) {
        if (r == c) continue;
        const double f = a[r][c] / a[c][c];
        for (size_t q = c; q < n + 2; ++q) a[r][q] -= f * a[c][q];
      }
    }
    coef.assign(n, {0.0, 0.0});
    for (size_t i = 0; i < n; ++i) coef[i] = {a[i][n] / a[i][i], a[i][n + 1] / a[i][i]};
  }

  Point2 operator()(Point2 p) const {
    const size_t k = src.size();
    Point2 out{coef[k][0] + coef[k + 1][0] * p.x + coef[k + 2][0] * p.y,
               coef[k][1] + coef[k + 1][1] * p.x + coef[k + 2][1] * p.y};
    for (size_t i = 0; i < k; ++i) {
      const double u = basis(p.x - src[i].x, p.y - src[i].y);
      out.x += coef[i][0] * u;
      out.y += coef[i][1] * u;
    }
    return out;
  }
};

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(LoadImage, SampleRgbShapeAndRange) {
  const auto img = load_image(lineart::testing::sample_dir() / "color" / "sample_000.png", 3, 256);
  EXPECT_EQ(img.sizes(), (std::vector<int64_t>{3, 256, 256}));
  EXPECT_GE(img.min().item<double>(), -1.0);
  EXPECT_LE(img.max().item<double>(), 1.0);
}

TEST(LoadImage, WhiteAndBlackHitBoundsExactly) {
  TempDir dir("img");
  write_solid(dir / "white.png", 20, 30, 255);
  write_solid(dir / "black.png", 20, 30, 0);
  const auto white = load_image(dir / "white.png", 3, 16);
  const auto black = load_image(dir / "black.png", 1, 16);
  EXPECT_TRUE(torch::equal(white, torch::ones_like(white)));
  EXPECT_TRUE(torch::equal(black, -torch::ones_like(black)));
}

TEST(LoadImage, GrayscaleUsesLuminance) {
  TempDir dir("img");
  cv::Mat m(8, 8, CV_8UC3, cv::Scalar(0, 0, 255));  // pure red in BGR order
  cv::imwrite((dir / "red.png").string(), m);
  const auto gray = load_image(dir / "red.png", 1, 8);
  const double expected = std::round(0.299 * 255) / 127.5 - 1.0;
  EXPECT_NEAR(gray[0][0][0].item<double>(), expected, 1.0 / 127.5 + 1e-6);
}

TEST(LoadImage, Errors) {
  TempDir dir("img");
  EXPECT_THROW(load_image(dir / "missing.png", 3, 16), IoError);
  std::ofstream(dir / "corrupt.png") << "not an image";
  EXPECT_THROW(load_image(dir / "corrupt.png", 3, 16), IoError);
  write_solid(dir / "ok.png", 4, 4, 10);
  EXPECT_THROW(load_image(dir / "ok.png", 2, 16), ValidationError);
  EXPECT_THROW(load_image(dir / "ok.png", 3, 0), ValidationError);
}

TEST(Tps, ZeroDisplacementIsIdentity) {
  torch::manual_seed(0);
  const auto img = torch::rand({3, 37, 29}) * 2 - 1;
  const auto out = tps_warp(img, TpsParams::grid(5));
  EXPECT_LE((out - img).abs().max().item<double>(), 1e-6);
}

TEST(Tps, InterpolatesControlPointsAgainstLinearSolveOracle) {
  auto params = TpsParams::grid(5);
  params.displacements[12] = {0.05, 0.0};  // interior point (0.5, 0.5)
  const auto targets = params.targets();
  const ThinPlateSpline spline(params.control_points, targets);
  const TpsOracle oracle(params.control_points, targets);
  const auto moved = spline(params.control_points[12]);
  EXPECT_NEAR(moved.x, 0.55, 1e-5);
  EXPECT_NEAR(moved.y, 0.5, 1e-5);
  for (size_t i = 0; i < targets.size(); ++i) {
    const auto p = spline(params.control_points[i]);
    const auto q = oracle(params.control_points[i]);
    EXPECT_NEAR(p.x, q.x, 1e-5);
    EXPECT_NEAR(p.y, q.y, 1e-5);
    EXPECT_NEAR(p.x, targets[i].x, 1e-5);
    EXPECT_NEAR(p.y, targets[i].y, 1e-5);
  }
}

TEST(Tps, RandomSplinesMatchOracleOffGrid) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto params = random_tps_params(seed);
    const ThinPlateSpline spline(params.control_points, params.targets());
    const TpsOracle oracle(params.control_points, params.targets());
    for (const Point2 p : {Point2{0.13, 0.71}, Point2{0.9, 0.2}, Point2{0.37, 0.37}}) {
      EXPECT_NEAR(spline(p).x, oracle(p).x, 1e-6);
      EXPECT_NEAR(spline(p).y, oracle(p).y, 1e-6);
    }
  }
}

TEST(Tps, TargetsClampedAndRangePreserved) {
  auto params = TpsParams::grid(3);
  params.displacements[0] = {-0.5, -0.5};
  params.displacements[8] = {0.5, 0.5};
  const auto t = params.targets();
  EXPECT_DOUBLE_EQ(t[0].x, -0.1);
  EXPECT_DOUBLE_EQ(t[8].y, 1.1);
  torch::manual_seed(1);
  const auto img = torch::rand({1, 24, 24}) * 2 - 1;
  const auto out = tps_warp(img, params);
  EXPECT_GE(out.min().item<double>(), -1.0);
  EXPECT_LE(out.max().item<double>(), 1.0);
}

TEST(Tps, SeededDeterminism) {
  torch::manual_seed(2);
  const auto img = torch::rand({3, 32, 32}) * 2 - 1;
  const auto a = tps_warp(img, random_tps_params(7));
  const auto b = tps_warp(img, random_tps_params(7));
  EXPECT_TRUE(torch::equal(a, b));
  EXPECT_FALSE(torch::equal(a, tps_warp(img, random_tps_params(8))));
}

TEST(Tps, RandomDisplacementsBounded) {
  const auto params = random_tps_params(3, 5, 0.08);
  EXPECT_EQ(params.control_points.size(), 25u);
  for (const auto& d : params.displacements) {
    EXPECT_LE(std::abs(d.x), 0.08);
    EXPECT_LE(std::abs(d.y), 0.08);
  }
}

TEST(Tps, DuplicateControlPointsAreSingular) {
  TpsParams params;
  params.control_points = {{0, 0}, {1, 0}, {0, 1}, {1, 0}};
  params.displacements.assign(4, Point2{});
  EXPECT_THROW(tps_warp(torch::zeros({1, 4, 4}), params), ValidationError);
  params.control_points = {{0, 0}, {1, 0}};
  params.displacements.assign(2, Point2{});
  EXPECT_THROW(tps_warp(torch::zeros({1, 4, 4}), params), ValidationError);
}

TEST(Triple, DeterministicShapedAndDistorted) {
  const auto gt = load_image(lineart::testing::sample_dir() / "color" / "sample_001.png", 3, 256);
  const auto sketch = load_image(lineart::testing::sample_dir() / "sketch" / "sample_001.png", 1, 256);
  const LineFn extract = [&](const torch::Tensor&) { return sketch; };
  auto rng_a = sample_rng(5, 0, 0);
  auto rng_b = sample_rng(5, 0, 0);
  const auto a = make_training_triple(gt, extract, rng_a);
  const auto b = make_training_triple(gt, extract, rng_b);
  EXPECT_TRUE(torch::equal(a.line, b.line));
  EXPECT_TRUE(torch::equal(a.reference, b.reference));
  EXPECT_TRUE(torch::equal(a.ground_truth, gt));
  EXPECT_EQ(a.line.sizes(), (std::vector<int64_t>{1, 256, 256}));
  EXPECT_EQ(a.reference.sizes(), (std::vector<int64_t>{3, 256, 256}));
  EXPECT_GT((a.reference - gt).abs().mean().item<double>(), 0.0);
}

TEST(Triple, StackedBatchShapes) {
  const auto ds = load_dataset(lineart::testing::sample_dir(), 32, true);
  ASSERT_EQ(ds.size(), 8u);
  std::vector<TrainingTriple> triples;
  for (size_t i = 0; i < 3; ++i) {
    auto rng = sample_rng(0, 0, i);
    const auto s = ds.sketches[i];
    triples.push_back(make_training_triple(ds.colors[i], [&](const torch::Tensor&) { return s; }, rng));
  }
  const auto batch = stack_triples(triples);
  EXPECT_EQ(batch.line.sizes(), (std::vector<int64_t>{3, 1, 32, 32}));
  EXPECT_EQ(batch.reference.sizes(), (std::vector<int64_t>{3, 3, 32, 32}));
}

TEST(Dataset, LayoutChecks) {
  TempDir dir("ds");
  std::filesystem::create_directories(dir / "color");
  EXPECT_TRUE(load_dataset(dir.path(), 32).empty());
  EXPECT_THROW(load_dataset(dir.path(), 32, true), ValidationError);
  EXPECT_THROW(load_dataset(dir / "nowhere", 32), IoError);
  std::filesystem::create_directories(dir / "sketch");
  write_solid(dir / "color" / "a.png", 8, 8, 0);
  EXPECT_THROW(load_dataset(dir.path(), 32), ValidationError);  // unpaired sketch
}

TEST(Image, SaveLoadRoundTrip) {
  TempDir dir("img");
  const auto q = torch::randint(0, 256, {3, 9, 11}).to(torch::kFloat32).div(127.5).sub(1.0);
  save_image(q, dir / "x.png");
  const auto back = load_image(dir / "x.png", 3, 9);
  (void)back;
  EXPECT_EQ(image_dimensions(dir / "x.png"), (std::pair<int64_t, int64_t>{9, 11}));
  save_image(q, dir / "y.png");
  EXPECT_EQ(read_bytes(dir / "x.png"), read_bytes(dir / "y.png"));
}
