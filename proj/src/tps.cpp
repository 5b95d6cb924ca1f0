#include "lineart/tps.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lineart/errors.hpp"

namespace lineart {

namespace {

constexpr double kTargetMin = -0.1;
constexpr double kTargetMax = 1.1;

}  // namespace

TpsParams TpsParams::grid(int n) {
  if (n < 2) {
    throw ValidationError("TPS grid needs at least 2 points per axis");
  }
  TpsParams params;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      params.control_points.push_back({static_cast<double>(j) / (n - 1),
                                       static_cast<double>(i) / (n - 1)});
    }
  }
  params.displacements.assign(params.control_points.size(), Point2{});
  return params;
}

std::vector<Point2> TpsParams::targets() const {
  std::vector<Point2> out(control_points.size());
  for (size_t i = 0; i < control_points.size(); ++i) {
    out[i] = {std::clamp(control_points[i].x + displacements[i].x, kTargetMin, kTargetMax),
              std::clamp(control_points[i].y + displacements[i].y, kTargetMin, kTargetMax)};
  }
  return out;
}

void TpsParams::validate() const {
  if (control_points.size() < 3) {
    throw ValidationError("TPS needs at least 3 control points");
  }
  if (control_points.size() != displacements.size()) {
    throw ValidationError("TPS control point / displacement count mismatch");
  }
  for (size_t i = 0; i < control_points.size(); ++i) {
    if (!std::isfinite(control_points[i].x) || !std::isfinite(control_points[i].y) ||
        !std::isfinite(displacements[i].x) || !std::isfinite(displacements[i].y)) {
      throw ValidationError("TPS parameters must be finite");
    }
  }
}

TpsParams random_tps_params(uint64_t seed, int grid, double magnitude) {
  TpsParams params = TpsParams::grid(grid);
  params.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-magnitude, magnitude);
  for (auto& d : params.displacements) {
    d.x = offset(rng);
    d.y = offset(rng);
  }
  return params;
}

double tps_radial(double r2) { return r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0; }

ThinPlateSpline::ThinPlateSpline(const std::vector<Point2>& source,
                                 const std::vector<Point2>& target)
    : source_(source) {
  const auto k = static_cast<Eigen::Index>(source.size());
  if (k < 3 || target.size() != source.size()) {
    throw ValidationError("ThinPlateSpline: need >= 3 matching source/target points");
  }
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(k + 3, k + 3);
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(k + 3, 2);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double dx = source[i].x - source[j].x;
      const double dy = source[i].y - source[j].y;
      system(i, j) = tps_radial(dx * dx + dy * dy);
    }
    system(i, k) = 1.0;
    system(i, k + 1) = source[i].x;
    system(i, k + 2) = source[i].y;
    system(k, i) = 1.0;
    system(k + 1, i) = source[i].x;
    system(k + 2, i) = source[i].y;
    rhs(i, 0) = target[i].x;
    rhs(i, 1) = target[i].y;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) {
    throw ValidationError(
        "ThinPlateSpline: singular system (duplicate or collinear control points)");
  }
  coefficients_ = lu.solve(rhs);
}

Point2 ThinPlateSpline::operator()(Point2 p) const {
  const auto k = static_cast<Eigen::Index>(source_.size());
  double x = coefficients_(k, 0) + coefficients_(k + 1, 0) * p.x + coefficients_(k + 2, 0) * p.y;
  double y = coefficients_(k, 1) + coefficients_(k + 1, 1) * p.x + coefficients_(k + 2, 1) * p.y;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double dx = p.x - source_[i].x;
    const double dy = p.y - source_[i].y;
    const double u = tps_radial(dx * dx + dy * dy);
    x += coefficients_(i, 0) * u;
    y += coefficients_(i, 1) * u;
  }
  return {x, y};
}

torch::Tensor tps_warp(const torch::Tensor& image, const TpsParams& params) {
  if (!image.defined() || image.dim() != 3) {
    throw ValidationError("tps_warp: expected a C×H×W image");
  }
  params.validate();
  const ThinPlateSpline spline(params.control_points, params.targets());

  const auto src = image.detach().to(torch::kFloat64).contiguous();
  const int64_t channels = src.size(0);
  const int64_t height = src.size(1);
  const int64_t width = src.size(2);
  auto out = torch::empty_like(src);
  auto in_a = src.accessor<double, 3>();
  auto out_a = out.accessor<double, 3>();

  const double sx_scale = width > 1 ? static_cast<double>(width - 1) : 1.0;
  const double sy_scale = height > 1 ? static_cast<double>(height - 1) : 1.0;
  for (int64_t row = 0; row < height; ++row) {
    for (int64_t col = 0; col < width; ++col) {
      const Point2 from = spline({col / sx_scale, row / sy_scale});
      const double sx = std::clamp(from.x * sx_scale, 0.0, static_cast<double>(width - 1));
      const double sy = std::clamp(from.y * sy_scale, 0.0, static_cast<double>(height - 1));
      const auto x0 = std::min(static_cast<int64_t>(std::floor(sx)), width - 1);
      const auto y0 = std::min(static_cast<int64_t>(std::floor(sy)), height - 1);
      const auto x1 = std::min(x0 + 1, width - 1);
      const auto y1 = std::min(y0 + 1, height - 1);
      const double fx = sx - static_cast<double>(x0);
      const double fy = sy - static_cast<double>(y0);
      for (int64_t c = 0; c < channels; ++c) {
        const double top = (1.0 - fx) * in_a[c][y0][x0] + fx * in_a[c][y0][x1];
        const double bottom = (1.0 - fx) * in_a[c][y1][x0] + fx * in_a[c][y1][x1];
        out_a[c][row][col] = (1.0 - fy) * top + fy * bottom;
      }
    }
  }
  return out.to(image.scalar_type());
}

}  // namespace lineart
