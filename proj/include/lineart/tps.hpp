#pragma once

#include <torch/torch.h>

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace lineart {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Thin-plate-spline distortion: control points in normalized [0,1]² image coordinates
// (x to the right, y downwards) and the offset applied to each of them.
struct TpsParams {
  std::vector<Point2> control_points;
  std::vector<Point2> displacements;
  uint64_t seed = 0;

  // n×n regular grid covering [0,1]² with zero displacement.
  static TpsParams grid(int n);

  // Displaced control points, clamped to [-0.1, 1.1]².
  std::vector<Point2> targets() const;

  // Throws ValidationError for fewer than 3 points, size mismatch or non-finite values.
  void validate() const;
};

// Grid of `grid`×`grid` points with displacements drawn uniformly from
// [-magnitude, magnitude] per axis by a generator seeded with `seed`.
TpsParams random_tps_params(uint64_t seed, int grid = 5, double magnitude = 0.08);

// Interpolating spline f: R² → R² with f(source_i) = target_i, built from the radial
// basis U(r) = r² log r plus an affine term.
class ThinPlateSpline {
 public:
  ThinPlateSpline(const std::vector<Point2>& source, const std::vector<Point2>& target);

  Point2 operator()(Point2 p) const;

  // (K+3)×2 solution: K radial weights followed by the affine coefficients [1, x, y].
  const Eigen::MatrixX2d& coefficients() const { return coefficients_; }

 private:
  std::vector<Point2> source_;
  Eigen::MatrixX2d coefficients_;
};

// r² log r with U(0) = 0.
double tps_radial(double r2);

// Backward warp: output(p) = image(f(p)) where f maps control points to their displaced
// positions. Bilinear sampling with border replication. Output has the input's shape.
torch::Tensor tps_warp(const torch::Tensor& image, const TpsParams& params);

}  // namespace lineart
