#pragma once

#include "gc4d/camera.hpp"
#include "gc4d/geometry.hpp"
#include "gc4d/grid.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gc4d {

enum class WeightMode { Focal, Dynamic, None };
enum class AggregationRepr { Endpoint, Offset };

/// Ablation axes of the point objective plus the shared coefficients.
struct LossConfig {
  double alpha = 0.1;    // log-uncertainty barrier
  double beta = 1.0;     // focal scale
  double gamma = 1.0;    // focal exponent
  double lambda = 1.0;   // point-loss weight in the total
  double huber_eps = 1.0;
  WeightMode weight_mode = WeightMode::Focal;
  double dynamic_weight = 1000.0;
  AggregationRepr repr = AggregationRepr::Endpoint;
  bool grad_term = true;

  void validate() const;
};

template <class T>
struct Gradient2 {
  T du;  // forward difference along columns
  T dv;  // forward difference along rows
};

/// Forward differences along u and v. The last column's du and the last row's
/// dv are zero, as is any difference touching an invalid pixel.
template <class T>
Grid<Gradient2<T>> spatial_gradient(const Grid<T>& map, const Mask* valid, const T& zero) {
  const int H = map.height();
  const int W = map.width();
  Grid<Gradient2<T>> out(H, W, Gradient2<T>{zero, zero});
  auto ok = [&](int v, int u) { return valid == nullptr || (*valid)(v, u) != 0; };
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      if (u + 1 < W && ok(v, u) && ok(v, u + 1)) out(v, u).du = map(v, u + 1) - map(v, u);
      if (v + 1 < H && ok(v, u) && ok(v + 1, u)) out(v, u).dv = map(v + 1, u) - map(v, u);
    }
  }
  return out;
}

Grid<Gradient2<Vec3>> spatial_gradient(const Grid<Vec3>& map, const Mask* valid = nullptr);
Grid<Gradient2<double>> spatial_gradient(const Grid<double>& map, const Mask* valid = nullptr);

/// Elementwise |beta * e|^gamma with 0^0 := 1.
Grid<Vec3> focal_weight(const Grid<Vec3>& residual, double beta, double gamma);

struct PointLossValue {
  double value = 0.0;
  Grid<Vec3> grad_points;
  Grid<double> grad_sigma;
};

struct DepthLossValue {
  double value = 0.0;
  Grid<double> grad_depth;
  Grid<double> grad_sigma;
};

struct CameraLossValue {
  double value = 0.0;
  std::vector<CameraVector> grad;
};

/// Mean over valid pixels of
///   sigma * |w ⊙ e| * s + sigma * |∇pred - ∇gt| - alpha * ln sigma
/// with e = pred - gt. Focal mode uses per-channel w = |beta e|^gamma (held
/// constant for differentiation; pass `fixed_weights` to pin it); dynamic mode
/// uses the scalar s = dynamic_weight on dynamic pixels. With repr = Offset the
/// inputs are offsets and the arithmetic is identical.
PointLossValue point_loss(const Grid<Vec3>& pred, const Grid<Vec3>& gt, const Grid<double>& sigma,
                          const Mask& valid, const Mask* dynamic, const LossConfig& cfg,
                          const Grid<Vec3>* fixed_weights = nullptr);

/// Mean over valid pixels of sigma |pred - gt| + sigma |∇pred - ∇gt| - alpha ln sigma.
DepthLossValue depth_loss(const Grid<double>& pred, const Grid<double>& gt,
                          const Grid<double>& sigma, const Mask& valid, double alpha);

/// Sum over frames and components of the Huber penalty.
CameraLossValue camera_loss(std::span<const CameraVector> pred, std::span<const CameraVector> gt,
                            double huber_eps);

double huber(double x, double eps);

double total_loss(double point, double camera, double depth, double lambda);

/// Ground-truth offsets O = P^a - P^t.
Grid<Vec3> offsets_from_points(const Grid<Vec3>& points_t, const Grid<Vec3>& points_a);

/// Central differences of `f` at every coordinate of `x` against `analytic`;
/// returns max |a - n| / max(1e-8, |a| + |n|). h must lie in [1e-7, 1e-3].
double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, std::span<const double> analytic, double h);

struct LossCheckReport {
  double point_focal = 0.0;
  double point_dynamic = 0.0;
  double point_offset = 0.0;
  double depth = 0.0;
  double camera = 0.0;

  double max() const;
};

/// Runs finite_diff_check on `trials` random size×size instances of every loss
/// variant, seeded through splitmix64.
LossCheckReport run_loss_checks(const LossConfig& cfg, std::uint64_t seed, int trials, double h,
                                int size = 8);

}  // namespace gc4d
