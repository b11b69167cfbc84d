#include "gc4d/metrics.hpp"

#include "gc4d/error.hpp"
#include "gc4d/kdtree.hpp"
#include "gc4d/random.hpp"
#include "gc4d/stats.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace gc4d {

PointCloud downsample_random(std::span<const Vec3> cloud, std::size_t n_max, std::uint64_t seed) {
  if (n_max < 1) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 1");
  if (cloud.size() <= n_max) return PointCloud(cloud.begin(), cloud.end());
  std::vector<std::size_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t k = 0; k < n_max; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(idx.size() - k));
    std::swap(idx[k], idx[j]);
  }
  idx.resize(n_max);
  std::sort(idx.begin(), idx.end());
  PointCloud out;
  out.reserve(n_max);
  for (std::size_t i : idx) out.push_back(cloud[i]);
  return out;
}

std::vector<double> nn_distances(std::span<const Vec3> from, std::span<const Vec3> to) {
  if (to.empty()) throw Error(ErrorCode::EmptyReference, "nearest-neighbor reference cloud is empty");
  const KdTree tree(to);
  std::vector<double> out;
  out.reserve(from.size());
  for (const auto& p : from) out.push_back(std::sqrt(tree.nearest(p).squared_distance));
  return out;
}

namespace {

AccuracyCompletion acc_comp_no_sampling(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  const auto acc = nn_distances(pred, gt);
  const auto comp = nn_distances(gt, pred);
  return {mean(acc), median(acc), mean(comp), median(comp)};
}

void require_nonempty(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.empty() || gt.empty()) throw Error(ErrorCode::EmptyCloud, "point cloud is empty");
}

std::vector<double> directed_nc(std::span<const Vec3> from, std::span<const Vec3> from_normals,
                                const KdTree& to_tree, std::span<const Vec3> to_normals) {
  std::vector<double> out;
  out.reserve(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    const auto nb = to_tree.nearest(from[i]);
    const double d = std::abs(from_normals[i].dot(to_normals[nb.index]));
    out.push_back(std::clamp(d, 0.0, 1.0));
  }
  return out;
}

}  // namespace

AccuracyCompletion accuracy_completion(std::span<const Vec3> pred, std::span<const Vec3> gt,
                                       std::size_t n_max, std::uint64_t seed) {
  require_nonempty(pred, gt);
  const auto p = downsample_random(pred, n_max, seed);
  const auto g = downsample_random(gt, n_max, seed);
  return acc_comp_no_sampling(p, g);
}

std::vector<Vec3> estimate_normals(std::span<const Vec3> cloud, int k) {
  if (k < 3 || cloud.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::TooFewPoints, "normal estimation needs |cloud| >= k >= 3");
  }
  const KdTree tree(cloud);
  std::vector<Vec3> normals;
  normals.reserve(cloud.size());
  Eigen::SelfAdjointEigenSolver<Mat3> solver;
  for (const auto& p : cloud) {
    const auto nbrs = tree.knn(p, static_cast<std::size_t>(k));
    Vec3 centroid = Vec3::Zero();
    for (const auto& n : nbrs) centroid += cloud[n.index];
    centroid /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& n : nbrs) {
      const Vec3 d = cloud[n.index] - centroid;
      cov += d * d.transpose();
    }
    solver.compute(cov);
    Vec3 normal = solver.eigenvectors().col(0);
    const double len = normal.norm();
    normals.push_back(len > 0.0 ? Vec3(normal / len) : Vec3::UnitZ());
  }
  return normals;
}

NormalConsistency normal_consistency(std::span<const Vec3> pred, std::span<const Vec3> gt, int k) {
  const auto n_pred = estimate_normals(pred, k);
  const auto n_gt = estimate_normals(gt, k);
  const KdTree pred_tree(pred);
  const KdTree gt_tree(gt);
  auto values = directed_nc(pred, n_pred, gt_tree, n_gt);
  const auto back = directed_nc(gt, n_gt, pred_tree, n_pred);
  values.insert(values.end(), back.begin(), back.end());
  return {mean(values), median(values)};
}

ReconMetrics recon_metrics(std::span<const Vec3> pred, std::span<const Vec3> gt, std::size_t n_max,
                           std::uint64_t seed, int k) {
  require_nonempty(pred, gt);
  const auto p = downsample_random(pred, n_max, seed);
  const auto g = downsample_random(gt, n_max, seed);
  const auto ac = acc_comp_no_sampling(p, g);
  const auto nc = normal_consistency(p, g, k);
  return {ac.acc_mean, ac.acc_median, ac.comp_mean, ac.comp_median, nc.mean, nc.median};
}

std::string_view to_string(TrackAlignment mode) noexcept {
  switch (mode) {
    case TrackAlignment::None: return "none";
    case TrackAlignment::MedianScale: return "median";
    case TrackAlignment::Sim3: return "sim3";
  }
  return "none";
}

std::string_view to_string(PoseAlignment mode) noexcept {
  switch (mode) {
    case PoseAlignment::Sim3: return "sim3";
    case PoseAlignment::Se3: return "se3";
    case PoseAlignment::None: return "none";
  }
  return "none";
}

double median_scale_align(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.empty() || gt.empty()) throw Error(ErrorCode::NoSamples, "median scale needs points");
  std::vector<double> np, ng;
  np.reserve(pred.size());
  ng.reserve(gt.size());
  for (const auto& p : pred) np.push_back(p.norm());
  for (const auto& g : gt) ng.push_back(g.norm());
  const double mp = median(np);
  if (!(mp >= 1e-12)) throw Error(ErrorCode::DegenerateScale, "median prediction norm is ~0");
  return median(ng) / mp;
}

SIM3 umeyama_sim3(std::span<const Vec3> pred, std::span<const Vec3> gt, bool with_scale) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::ShapeMismatch, "correspondence sets differ in size");
  if (pred.size() < 3) {
    throw Error(ErrorCode::DegenerateConfiguration, "similarity fit needs >= 3 correspondences");
  }
  const double n = static_cast<double>(pred.size());
  Vec3 mu_p = Vec3::Zero(), mu_g = Vec3::Zero();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mu_p += pred[i];
    mu_g += gt[i];
  }
  mu_p /= n;
  mu_g /= n;

  Mat3 cov = Mat3::Zero();
  double var_p = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3 dp = pred[i] - mu_p;
    cov += (gt[i] - mu_g) * dp.transpose();
    var_p += dp.squaredNorm();
  }
  cov /= n;
  var_p /= n;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(var_p > 1e-24) || !(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "correspondences are (nearly) collinear; rotation is not determined");
  }
  Mat3 S = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) S(2, 2) = -1.0;

  SIM3 out;
  out.rotation = svd.matrixU() * S * svd.matrixV().transpose();
  out.scale = with_scale ? (sv.asDiagonal() * S).trace() / var_p : 1.0;
  out.translation = mu_g - out.scale * (out.rotation * mu_p);
  return out;
}

double percent_within(std::span<const double> errors, double threshold) {
  if (errors.empty()) throw Error(ErrorCode::NoSamples, "no samples to score");
  std::size_t hits = 0;
  for (double e : errors) hits += e < threshold ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(errors.size());
}

TrackMetrics apd_epe(std::span<const Vec3> pred, std::span<const Vec3> gt,
                     std::span<const unsigned char> visible, TrackAlignment mode) {
  if (pred.size() != gt.size() || (!visible.empty() && visible.size() != gt.size())) {
    throw Error(ErrorCode::ShapeMismatch, "track arrays differ in size");
  }
  PointCloud p, g;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!visible.empty() && !visible[i]) continue;
    p.push_back(pred[i]);
    g.push_back(gt[i]);
  }
  if (p.empty()) throw Error(ErrorCode::NoSamples, "no (track, frame) samples to evaluate");

  switch (mode) {
    case TrackAlignment::None:
      break;
    case TrackAlignment::MedianScale: {
      const double s = median_scale_align(p, g);
      for (auto& x : p) x *= s;
      break;
    }
    case TrackAlignment::Sim3:
      sim3_apply_inplace(umeyama_sim3(p, g), p);
      break;
  }

  std::vector<double> errors;
  errors.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) errors.push_back((p[i] - g[i]).norm());

  TrackMetrics out;
  out.alignment = mode;
  double sum = 0.0;
  for (std::size_t k = 0; k < kApdThresholds.size(); ++k) {
    out.apd_per_threshold[k] = percent_within(errors, kApdThresholds[k]);
    sum += out.apd_per_threshold[k];
  }
  out.apd = sum / static_cast<double>(kApdThresholds.size());
  out.epe = mean(errors);
  return out;
}

TrackMetrics average_track_metrics(std::span<const TrackMetrics> per_sequence) {
  if (per_sequence.empty()) throw Error(ErrorCode::NoSamples, "no sequences to average");
  TrackMetrics out;
  out.alignment = per_sequence.front().alignment;
  const double n = static_cast<double>(per_sequence.size());
  for (const auto& m : per_sequence) {
    for (std::size_t k = 0; k < 4; ++k) out.apd_per_threshold[k] += m.apd_per_threshold[k];
    out.apd += m.apd;
    out.epe += m.epe;
  }
  for (auto& x : out.apd_per_threshold) x /= n;
  out.apd /= n;
  out.epe /= n;
  return out;
}

std::vector<int> select_queries(const TrajectorySet& tracks) {
  std::vector<int> out;
  for (int m = 0; m < tracks.n_tracks; ++m) {
    if (!tracks.dynamic[static_cast<std::size_t>(m)]) continue;
    if (tracks.n_frames == 0 || !tracks.visible[tracks.index(m, 0)]) continue;
    bool finite = true;
    for (const auto& p : tracks.track(m)) finite = finite && p.allFinite();
    if (finite) out.push_back(m);
  }
  return out;
}

TrajectorySet subset_tracks(const TrajectorySet& tracks, std::span<const int> ids) {
  TrajectorySet out(static_cast<int>(ids.size()), tracks.n_frames);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const int m = ids[k];
    if (m < 0 || m >= tracks.n_tracks) throw Error(ErrorCode::InvalidArgument, "track id out of range");
    for (int t = 0; t < tracks.n_frames; ++t) {
      out.position(static_cast<int>(k), t) = tracks.position(m, t);
      out.visible[out.index(static_cast<int>(k), t)] = tracks.visible[tracks.index(m, t)];
    }
    out.dynamic[k] = tracks.dynamic[static_cast<std::size_t>(m)];
    if (!tracks.queries.empty()) out.queries.push_back(tracks.queries[static_cast<std::size_t>(m)]);
  }
  return out;
}

DepthMetrics depth_metrics(std::span<const DepthMap> pred, std::span<const DepthMap> gt,
                           bool median_scale) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::ShapeMismatch, "depth sequences differ in length");
  std::vector<double> p, g;
  for (std::size_t f = 0; f < gt.size(); ++f) {
    if (pred[f].height() != gt[f].height() || pred[f].width() != gt[f].width()) {
      throw Error(ErrorCode::ShapeMismatch, "depth maps differ in size");
    }
    for (std::size_t i = 0; i < gt[f].depth.size(); ++i) {
      if (!gt[f].valid[i] || !pred[f].valid[i] || !(gt[f].depth[i] > 0.0)) continue;
      p.push_back(pred[f].depth[i]);
      g.push_back(gt[f].depth[i]);
    }
  }
  if (g.empty()) throw Error(ErrorCode::NoValidPixels, "no valid ground-truth depth pixels");
  if (median_scale) {
    const double mp = median(p);
    if (!(mp > 0.0)) throw Error(ErrorCode::DegenerateScale, "median predicted depth is not positive");
    const double s = median(g) / mp;
    for (auto& x : p) x *= s;
  }
  double abs_rel = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    abs_rel += std::abs(p[i] - g[i]) / g[i];
    const double ratio = std::max(p[i] / g[i], g[i] / p[i]);
    within += ratio < 1.25 ? 1 : 0;
  }
  const double n = static_cast<double>(g.size());
  return {abs_rel / n, 100.0 * static_cast<double>(within) / n};
}

PoseMetrics pose_metrics(std::span<const CameraParams> pred, std::span<const CameraParams> gt,
                         PoseAlignment mode) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::ShapeMismatch, "camera sequences differ in length");
  if (gt.size() < 2) throw Error(ErrorCode::InvalidArgument, "pose metrics need at least two cameras");
  const std::size_t N = gt.size();

  PointCloud cp, cg;
  std::vector<Mat3> rp, rg;  // camera-to-world rotations
  for (std::size_t i = 0; i < N; ++i) {
    cp.push_back(pred[i].center());
    cg.push_back(gt[i].center());
    rp.push_back(pred[i].rotation().transpose());
    rg.push_back(gt[i].rotation().transpose());
  }

  SIM3 align = SIM3::identity();
  if (mode != PoseAlignment::None) align = umeyama_sim3(cp, cg, mode == PoseAlignment::Sim3);
  for (std::size_t i = 0; i < N; ++i) {
    cp[i] = sim3_apply(align, cp[i]);
    rp[i] = align.rotation * rp[i];
  }

  PoseMetrics out;
  double sq = 0.0;
  for (std::size_t i = 0; i < N; ++i) sq += (cp[i] - cg[i]).squaredNorm();
  out.ate = std::sqrt(sq / static_cast<double>(N));

  for (std::size_t i = 0; i + 1 < N; ++i) {
    const Mat3 rel_rot_p = rp[i].transpose() * rp[i + 1];
    const Mat3 rel_rot_g = rg[i].transpose() * rg[i + 1];
    const Vec3 rel_t_p = rp[i].transpose() * (cp[i + 1] - cp[i]);
    const Vec3 rel_t_g = rg[i].transpose() * (cg[i + 1] - cg[i]);
    out.rpe_trans += (rel_t_p - rel_t_g).norm();
    out.rpe_rot += rotation_angle(rel_rot_g.transpose() * rel_rot_p) * 180.0 / std::numbers::pi;
  }
  out.rpe_trans /= static_cast<double>(N - 1);
  out.rpe_rot /= static_cast<double>(N - 1);
  return out;
}

}  // namespace gc4d
