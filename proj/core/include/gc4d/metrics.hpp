#pragma once

#include "gc4d/camera.hpp"
#include "gc4d/geometry.hpp"
#include "gc4d/scene.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace gc4d {

// --- reconstruction -------------------------------------------------------

inline constexpr std::size_t kDefaultMaxPoints = 20000;
inline constexpr int kDefaultNormalNeighbors = 16;

/// Clouds no larger than n_max come back unchanged; otherwise n_max points are
/// drawn without replacement (partial Fisher-Yates on splitmix64(seed)) and
/// returned in their original order.
PointCloud downsample_random(std::span<const Vec3> cloud, std::size_t n_max, std::uint64_t seed);

/// Exact nearest-neighbor distance from every point of `from` into `to`.
std::vector<double> nn_distances(std::span<const Vec3> from, std::span<const Vec3> to);

struct AccuracyCompletion {
  double acc_mean, acc_median, comp_mean, comp_median;
};

/// Accuracy: pred -> gt distances; completion: gt -> pred. Both clouds are
/// downsampled with the same seed first.
AccuracyCompletion accuracy_completion(std::span<const Vec3> pred, std::span<const Vec3> gt,
                                       std::size_t n_max, std::uint64_t seed);

/// Unit normals from the smallest-eigenvalue eigenvector of each point's
/// k-nearest-neighbor covariance (the point itself included). Sign is arbitrary.
std::vector<Vec3> estimate_normals(std::span<const Vec3> cloud, int k);

struct NormalConsistency {
  double mean, median;
};

/// |n_pred · n_gt| against the nearest point of the other cloud, evaluated in
/// both directions and pooled.
NormalConsistency normal_consistency(std::span<const Vec3> pred, std::span<const Vec3> gt, int k);

struct ReconMetrics {
  double acc_mean, acc_median, comp_mean, comp_median, nc_mean, nc_median;
};

/// Accuracy, completion and normal consistency on the downsampled clouds.
ReconMetrics recon_metrics(std::span<const Vec3> pred, std::span<const Vec3> gt,
                           std::size_t n_max = kDefaultMaxPoints, std::uint64_t seed = 1,
                           int k = kDefaultNormalNeighbors);

// --- tracking -------------------------------------------------------------

enum class TrackAlignment { None, MedianScale, Sim3 };

std::string_view to_string(TrackAlignment mode) noexcept;

inline constexpr std::array<double, 4> kApdThresholds{0.1, 0.3, 0.5, 1.0};

struct TrackMetrics {
  std::array<double, 4> apd_per_threshold{};  // percent, strict < threshold
  double apd = 0.0;
  double epe = 0.0;
  TrackAlignment alignment = TrackAlignment::None;
};

/// s = median |gt| / median |pred| over all supplied points.
double median_scale_align(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// Closed-form least-squares similarity gt ≈ s R pred + t (Umeyama) with the
/// reflection guard. with_scale = false fixes s = 1 (rigid fit).
SIM3 umeyama_sim3(std::span<const Vec3> pred, std::span<const Vec3> gt, bool with_scale = true);

/// Percentage of errors strictly below the threshold.
double percent_within(std::span<const double> errors, double threshold);

/// One sequence. Samples are (track, frame) pairs whose `visible` flag is set
/// (all samples when `visible` is empty); alignment is fitted on those samples.
TrackMetrics apd_epe(std::span<const Vec3> pred, std::span<const Vec3> gt,
                     std::span<const unsigned char> visible, TrackAlignment mode);

/// Cross-sequence score: plain average of per-sequence metrics.
TrackMetrics average_track_metrics(std::span<const TrackMetrics> per_sequence);

/// Tracks that are dynamic, visible in frame 0 and finite in every frame.
std::vector<int> select_queries(const TrajectorySet& tracks);

TrajectorySet subset_tracks(const TrajectorySet& tracks, std::span<const int> ids);

// --- depth and pose -------------------------------------------------------

struct DepthMetrics {
  double abs_rel = 0.0;
  double delta_125 = 0.0;  // percent
};

/// Pixels valid in both maps with gt > 0. With median_scale, pred is first
/// multiplied by median(gt) / median(pred) over the whole sequence.
DepthMetrics depth_metrics(std::span<const DepthMap> pred, std::span<const DepthMap> gt,
                           bool median_scale = true);

enum class PoseAlignment { Sim3, Se3, None };

std::string_view to_string(PoseAlignment mode) noexcept;

struct PoseMetrics {
  double ate = 0.0;        // meters, RMSE of aligned camera centers
  double rpe_trans = 0.0;  // meters, mean over consecutive pairs
  double rpe_rot = 0.0;    // degrees, mean over consecutive pairs
};

PoseMetrics pose_metrics(std::span<const CameraParams> pred, std::span<const CameraParams> gt,
                         PoseAlignment mode = PoseAlignment::Sim3);

}  // namespace gc4d
