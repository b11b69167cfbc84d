#include "pipeline.hpp"

#include "gc4d/agg_former.hpp"
#include "gc4d/error.hpp"
#include "gc4d/io/dataset.hpp"
#include "gc4d/io/json.hpp"
#include "gc4d/io/ply.hpp"
#include "gc4d/io/tensor.hpp"
#include "gc4d/io/trajectory_csv.hpp"
#include "gc4d/losses.hpp"
#include "gc4d/metrics.hpp"
#include "gc4d/scene.hpp"
#include "gc4d/traj_lift.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace gc4d::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::EmptyScene:
    case ErrorCode::EmptyReference:
    case ErrorCode::EmptyCloud:
    case ErrorCode::TooFewPoints:
    case ErrorCode::DegenerateScale:
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::NoSamples:
    case ErrorCode::NoValidPixels:
      return false;
    default:
      return true;
  }
}

ojson error_json(const std::string& command, const std::string& code, const std::string& message) {
  ojson j;
  if (!command.empty()) j["command"] = command;
  j["error"] = {{"code", code}, {"message", message}};
  return j;
}

SceneSpec load_scene(const fs::path& data_dir) {
  return io::scene_from_json(read_file(data_dir / "scene.json"));
}

std::vector<DepthMap> read_depths(const fs::path& dir) {
  std::vector<DepthMap> out;
  for (int t = 0; fs::exists(dir / io::frame_file("depth", t)); ++t) {
    out.push_back(io::depth_from_tensor(io::read_tensor(dir / io::frame_file("depth", t))));
  }
  if (out.empty()) throw Error(ErrorCode::IoError, "no depth_%04d.ct4 files in " + dir.string());
  return out;
}

std::vector<CameraParams> read_cameras(const fs::path& path) {
  return io::cameras_from_json(read_file(fs::is_directory(path) ? path / "cameras.json" : path));
}

/// Trajectory of an attachment over every frame of the scene.
std::vector<Vec3> lift_attachment(const SceneSpec& spec, const SurfaceAttachment& att) {
  if (att.object_id == kBackgroundId) {
    const Vec3 p = barycentric_point(att, spec.background.vertices, spec.background.faces);
    return std::vector<Vec3>(static_cast<std::size_t>(spec.n_frames), p);
  }
  if (att.object_id < 0 || static_cast<std::size_t>(att.object_id) >= spec.objects.size()) {
    throw Error(ErrorCode::InvalidArgument, "attachment refers to an unknown object");
  }
  return lift_trajectory(att, spec.objects[static_cast<std::size_t>(att.object_id)].mesh);
}

// --- subcommands ------------------------------------------------------------

struct GenArgs {
  std::string spec, out;
};

ojson cmd_gen(const GenArgs& a, std::optional<std::uint64_t> seed) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(a.spec));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("invalid scene JSON: ") + e.what());
  }
  if (seed) doc["seed"] = *seed;
  const std::string normalized = doc.dump(2) + "\n";
  const SceneSpec spec = io::scene_from_json(normalized);
  const SequenceDataset data = generate(spec);

  io::write_dataset(a.out, data);
  std::vector<RgbImage> images;
  for (int t = 0; t < data.n_frames; ++t) {
    const auto i = static_cast<std::size_t>(t);
    images.push_back(pseudo_image(data.depths[i], data.attachments[i]));
  }
  io::write_images(a.out, images);
  write_file(fs::path(a.out) / "scene.json", normalized);

  ojson valid = ojson::array();
  ojson dynamic = ojson::array();
  for (int t = 0; t < data.n_frames; ++t) {
    const auto i = static_cast<std::size_t>(t);
    valid.push_back(data.depths[i].valid_count());
    dynamic.push_back(std::count(data.dynamic_masks[i].begin(), data.dynamic_masks[i].end(), 1));
  }
  const auto& tr = data.trajectories;
  ojson r;
  r["command"] = "gen";
  r["seed"] = spec.seed;
  r["n_frames"] = data.n_frames;
  r["height"] = data.height;
  r["width"] = data.width;
  r["n_tracks"] = tr.n_tracks;
  r["n_dynamic_tracks"] = std::count(tr.dynamic.begin(), tr.dynamic.end(), 1);
  r["n_visible_samples"] = std::count(tr.visible.begin(), tr.visible.end(), 1);
  r["valid_pixels"] = valid;
  r["dynamic_pixels"] = dynamic;
  return r;
}

struct LiftArgs {
  std::string data, scene, out;
  int frame = 0;
  double delta = 0.0;
  bool all_pixels = false;
};

SceneSpec scene_with_seed(const std::string& path, std::optional<std::uint64_t> seed) {
  SceneSpec spec = io::scene_from_json(read_file(path));
  if (seed) spec.seed = *seed;
  return spec;
}

ojson cmd_lift(const LiftArgs& a, const CLI::Option* delta_opt, std::optional<std::uint64_t> seed) {
  const SceneSpec spec = a.scene.empty() ? load_scene(a.data) : scene_with_seed(a.scene, seed);
  const SequenceDataset data = a.scene.empty() ? io::read_dataset(a.data) : generate(spec);
  if (a.frame < 0 || a.frame >= data.n_frames) {
    throw Error(ErrorCode::TargetOutOfRange, "frame " + std::to_string(a.frame) + " out of range");
  }
  const double delta = delta_opt->count() ? a.delta : spec.dynamic_delta;
  const auto f = static_cast<std::size_t>(a.frame);
  const DepthMap& depth = data.depths[f];

  std::vector<Pixel> pixels;
  if (a.all_pixels) {
    for (int v = 0; v < depth.height(); ++v) {
      for (int u = 0; u < depth.width(); ++u) {
        if (depth.valid(v, u)) pixels.push_back(Pixel{u, v});
      }
    }
  } else {
    pixels = data.trajectories.queries;
  }

  const auto meshes = frame_meshes(spec, a.frame);
  std::vector<std::vector<Vec3>> lifted;
  std::vector<Pixel> attached;
  std::vector<int> source;  // index into `pixels`
  int missed = 0;
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const Pixel px = pixels[k];
    if (px.u < 0 || px.v < 0 || px.u >= depth.width() || px.v >= depth.height() ||
        !depth.valid(px.v, px.u)) {
      ++missed;
      continue;
    }
    const auto att = attach_pixel(px, depth, data.cameras[f], meshes);
    if (!att) {
      ++missed;
      continue;
    }
    lifted.push_back(lift_attachment(spec, *att));
    attached.push_back(px);
    source.push_back(static_cast<int>(k));
  }

  TrajectorySet tracks(static_cast<int>(lifted.size()), data.n_frames);
  tracks.queries = attached;
  for (int m = 0; m < tracks.n_tracks; ++m) {
    const auto& traj = lifted[static_cast<std::size_t>(m)];
    for (int t = 0; t < data.n_frames; ++t) {
      const Vec3& p = traj[static_cast<std::size_t>(t)];
      tracks.position(m, t) = p;
      tracks.visible[tracks.index(m, t)] = point_visible(spec, t, p) ? 1 : 0;
    }
    tracks.dynamic[static_cast<std::size_t>(m)] = classify_dynamic(traj, a.frame, delta) ? 1 : 0;
  }
  if (!a.out.empty()) io::write_trajectories(a.out, tracks);

  ojson r;
  r["command"] = "lift";
  r["frame"] = a.frame;
  r["dynamic_delta"] = delta;
  r["n_pixels"] = pixels.size();
  r["n_attached"] = tracks.n_tracks;
  r["n_missed"] = missed;
  r["n_dynamic"] = std::count(tracks.dynamic.begin(), tracks.dynamic.end(), 1);
  r["n_visible_samples"] = std::count(tracks.visible.begin(), tracks.visible.end(), 1);
  // Stored trajectories come from the same queries at frame 0; report how far
  // the re-attached lift lands from them.
  if (!a.all_pixels && a.frame == 0 && data.trajectories.n_tracks == static_cast<int>(pixels.size())) {
    double max_dev = 0.0;
    for (int m = 0; m < tracks.n_tracks; ++m) {
      const int src = source[static_cast<std::size_t>(m)];
      for (int t = 0; t < data.n_frames; ++t) {
        max_dev = std::max(max_dev, (tracks.position(m, t) - data.trajectories.position(src, t)).norm());
      }
    }
    r["max_deviation_from_dataset"] = max_dev;
  }
  return r;
}

struct SplitArgs {
  std::string data;
  double tau = kDefaultClipTau;
  bool json = false;
};

ojson cmd_split(const SplitArgs& a) {
  const auto depths = read_depths(a.data);
  const ClipBoundary b = split_clips(depths, a.tau);
  ojson shifts = ojson::array();
  for (std::size_t t = 0; t + 1 < depths.size(); ++t) {
    const auto s = depth_shift(depths[t], depths[t + 1]);
    shifts.push_back(s ? ojson(*s) : ojson(nullptr));
  }
  ojson r;
  r["command"] = "split";
  r["tau"] = a.tau;
  r["n_frames"] = depths.size();
  r["splits"] = b.split_indices;
  r["shifts"] = shifts;
  return r;
}

struct AggregateArgs {
  std::string data, out, tracks;
  int target = 0;
};

ojson cmd_aggregate(const AggregateArgs& a) {
  const SequenceDataset data = io::read_dataset(a.data);
  const SceneSpec spec = load_scene(a.data);
  if (a.target < 0 || a.target >= data.n_frames) {
    throw Error(ErrorCode::TargetOutOfRange, "target " + std::to_string(a.target) + " out of range");
  }
  std::vector<PointMap> maps;
  for (int i = 0; i < data.n_frames; ++i) maps.push_back(oracle_aggregate(spec, data, i, a.target));
  const PointCloud cloud = complete_cloud(maps);
  io::write_ply(a.out, cloud);

  const std::size_t own = data.pointmaps[static_cast<std::size_t>(a.target)].valid_count();
  ojson r;
  r["command"] = "aggregate-oracle";
  r["target"] = a.target;
  r["n_points"] = cloud.size();
  r["target_frame_points"] = own;
  r["completion_ratio"] = own > 0 ? static_cast<double>(cloud.size()) / static_cast<double>(own) : 0.0;
  if (!a.tracks.empty()) {
    std::vector<PointMap> by_target;
    for (int b = 0; b < data.n_frames; ++b) by_target.push_back(oracle_aggregate(spec, data, 0, b));
    TrajectorySet tracks =
        tracks_from_aggregation(by_target, data.trajectories.queries, spec.dynamic_delta);
    io::write_trajectories(a.tracks, tracks);
    r["n_tracks"] = tracks.n_tracks;
    r["n_dynamic_tracks"] = std::count(tracks.dynamic.begin(), tracks.dynamic.end(), 1);
  }
  return r;
}

struct ReconArgs {
  std::string pred, gt;
  std::size_t max_points = kDefaultMaxPoints;
  int k = kDefaultNormalNeighbors;
};

ojson cmd_eval_recon(const ReconArgs& a, std::uint64_t seed) {
  const auto pred = io::read_ply(a.pred).points;
  const auto gt = io::read_ply(a.gt).points;
  const ReconMetrics m = recon_metrics(pred, gt, a.max_points, seed, a.k);
  ojson r;
  r["command"] = "eval-recon";
  r["seed"] = seed;
  r["max_points"] = a.max_points;
  r["k"] = a.k;
  r["n_pred"] = pred.size();
  r["n_gt"] = gt.size();
  r["acc_mean"] = m.acc_mean;
  r["acc_median"] = m.acc_median;
  r["comp_mean"] = m.comp_mean;
  r["comp_median"] = m.comp_median;
  r["nc_mean"] = m.nc_mean;
  r["nc_median"] = m.nc_median;
  return r;
}

struct TrackArgs {
  std::string pred, gt;
  TrackAlignment align = TrackAlignment::Sim3;
  std::string subset = "all";
};

ojson cmd_eval_track(const TrackArgs& a) {
  TrajectorySet pred = io::read_trajectories(a.pred);
  TrajectorySet gt = io::read_trajectories(a.gt);
  if (pred.n_tracks != gt.n_tracks || pred.n_frames != gt.n_frames) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and ground truth track grids differ");
  }
  if (a.subset == "dynamic") {
    const auto ids = select_queries(gt);
    gt = subset_tracks(gt, ids);
    pred = subset_tracks(pred, ids);
  }
  const TrackMetrics m = apd_epe(pred.positions, gt.positions, gt.visible, a.align);
  ojson r;
  r["command"] = "eval-track";
  r["align"] = std::string(to_string(a.align));
  r["subset"] = a.subset;
  r["n_tracks"] = gt.n_tracks;
  r["n_frames"] = gt.n_frames;
  r["n_samples"] = std::count(gt.visible.begin(), gt.visible.end(), 1);
  r["thresholds"] = kApdThresholds;
  r["apd_per_threshold"] = m.apd_per_threshold;
  r["apd"] = m.apd;
  r["epe"] = m.epe;
  return r;
}

struct DepthArgs {
  std::string pred, gt;
  bool no_scale = false;
};

ojson cmd_eval_depth(const DepthArgs& a) {
  const auto pred = read_depths(a.pred);
  const auto gt = read_depths(a.gt);
  const DepthMetrics m = depth_metrics(pred, gt, !a.no_scale);
  ojson r;
  r["command"] = "eval-depth";
  r["median_scale"] = !a.no_scale;
  r["n_frames"] = gt.size();
  r["abs_rel"] = m.abs_rel;
  r["delta_1_25"] = m.delta_125;
  return r;
}

struct PoseArgs {
  std::string pred, gt;
  PoseAlignment align = PoseAlignment::Sim3;
};

ojson cmd_eval_pose(const PoseArgs& a) {
  const auto pred = read_cameras(a.pred);
  const auto gt = read_cameras(a.gt);
  const PoseMetrics m = pose_metrics(pred, gt, a.align);
  ojson r;
  r["command"] = "eval-pose";
  r["align"] = std::string(to_string(a.align));
  r["n_frames"] = gt.size();
  r["ate"] = m.ate;
  r["rpe_trans"] = m.rpe_trans;
  r["rpe_rot_deg"] = m.rpe_rot;
  return r;
}

struct LossCheckArgs {
  std::string config;
  int trials = 100;
  int size = 8;
  double h = 1e-6;
  double tol = 1e-4;
};

ojson cmd_loss_check(const LossCheckArgs& a, std::uint64_t seed) {
  const LossConfig cfg = a.config.empty() ? LossConfig{} : io::loss_config_from_json(read_file(a.config));
  cfg.validate();
  const LossCheckReport rep = run_loss_checks(cfg, seed, a.trials, a.h, a.size);
  ojson r;
  r["command"] = "loss-check";
  r["seed"] = seed;
  r["config"] = ojson::parse(io::loss_config_to_json(cfg));
  r["trials"] = a.trials;
  r["size"] = a.size;
  r["h"] = a.h;
  r["max_rel_error"] = {{"point_focal", rep.point_focal},
                        {"point_dynamic", rep.point_dynamic},
                        {"point_offset", rep.point_offset},
                        {"depth", rep.depth},
                        {"camera", rep.camera}};
  r["max"] = rep.max();
  r["tolerance"] = a.tol;
  r["pass"] = rep.max() < a.tol;
  return r;
}

struct ForwardArgs {
  std::string data, config, dump;
  int target = 0;
};

ojson cmd_forward(const ForwardArgs& a, std::optional<std::uint64_t> seed) {
  ModelConfig cfg = a.config.empty() ? ModelConfig{} : io::model_config_from_json(read_file(a.config));
  if (seed) cfg.seed = *seed;
  cfg.validate();
  const auto images = io::read_images(a.data);
  const TokenBank bank = TokenBank::create(cfg);
  AttentionStats stats;
  const ForwardOutput fwd = forward(images, a.target, bank, &stats);

  ojson cams = ojson::array();
  for (Eigen::Index i = 0; i < fwd.camera_features.rows(); ++i) {
    const CameraVector g = head_camera(fwd.camera_features.row(i), bank);
    cams.push_back(ojson(std::vector<double>(g.begin(), g.end())));
  }
  if (!a.dump.empty() && !fwd.patch_features.empty()) {
    // N × K × C patch features after the trunk.
    const auto K = static_cast<std::size_t>(fwd.patch_features.front().rows());
    const auto C = static_cast<std::size_t>(fwd.patch_features.front().cols());
    std::vector<double> flat;
    flat.reserve(fwd.patch_features.size() * K * C);
    for (const auto& p : fwd.patch_features) {
      for (Eigen::Index k = 0; k < p.rows(); ++k) {
        for (Eigen::Index c = 0; c < p.cols(); ++c) flat.push_back(p(k, c));
      }
    }
    io::write_tensor(a.dump, io::Tensor({fwd.patch_features.size(), K, C}, std::move(flat)));
  }
  ojson norms = ojson::array();
  for (const auto& p : fwd.patch_features) norms.push_back(p.norm());
  ojson r;
  r["command"] = "forward";
  r["seed"] = cfg.seed;
  r["config"] = ojson::parse(io::model_config_to_json(cfg));
  r["target"] = a.target;
  r["n_frames"] = images.size();
  r["tokens_per_frame"] = fwd.frames.empty() ? 0 : fwd.frames.front().tokens.rows();
  r["max_softmax_row_error"] = stats.max_row_sum_error;
  r["softmax_rows"] = stats.rows_checked;
  r["cameras"] = cams;
  r["patch_feature_norms"] = norms;
  return r;
}

}  // namespace

int run_pipeline(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic 4D geometry toolkit: scene generation, oracle aggregation, metrics, "
               "loss checks and the token trunk.",
               "gc4d"};
  app.require_subcommand(1, 1);

  std::uint64_t seed_value = 0;
  std::map<std::string, CLI::Option*> seed_opts;
  auto add_seed = [&](CLI::App* sub, const std::string& what) {
    seed_opts[sub->get_name()] = sub->add_option("--seed", seed_value, what);
  };
  auto seed_or = [&](const std::string& name) -> std::optional<std::uint64_t> {
    if (seed_opts.at(name)->count()) return seed_value;
    return std::nullopt;
  };

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Render a scene document into a dataset directory");
  gen_cmd->add_option("--spec", gen.spec, "Scene JSON document")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "Output dataset directory")->required();
  add_seed(gen_cmd, "Overrides the scene's seed (query sampling)");

  LiftArgs lift;
  auto* lift_cmd = app.add_subcommand("lift", "Re-attach pixels to the scene meshes and lift 3D trajectories");
  auto* lift_data = lift_cmd->add_option("--data", lift.data, "Dataset directory written by gen")
                        ->check(CLI::ExistingDirectory);
  auto* lift_scene = lift_cmd->add_option("--scene", lift.scene, "Scene JSON rendered on the fly")
                         ->check(CLI::ExistingFile);
  lift_data->excludes(lift_scene);
  lift_scene->excludes(lift_data);
  lift_cmd->add_option("--frame", lift.frame, "Frame whose pixels are attached")->capture_default_str();
  auto* delta_opt = lift_cmd->add_option("--delta", lift.delta, "Dynamic threshold in meters (default: scene's)")
                        ->check(CLI::PositiveNumber);
  lift_cmd->add_flag("--all-pixels", lift.all_pixels, "Lift every valid pixel instead of the stored queries");
  lift_cmd->add_option("--out", lift.out, "Write lifted trajectories as CSV");
  add_seed(lift_cmd, "Overrides the scene's query seed (with --scene)");

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Detect clip boundaries from depth-distribution shifts");
  split_cmd->add_option("--depth-dir,--data", split.data, "Directory with depth_%04d.ct4 files")
      ->required()
      ->check(CLI::ExistingDirectory);
  split_cmd->add_option("--tau", split.tau, "Shift threshold on median |log depth ratio|")
      ->capture_default_str();
  split_cmd->add_flag("--json", split.json, "Emit a JSON object instead of one index per line");
  add_seed(split_cmd, "Unused; accepted for uniformity");

  AggregateArgs agg;
  auto* agg_cmd = app.add_subcommand("aggregate-oracle", "Ground-truth complete point cloud at a target time");
  agg_cmd->add_option("--data", agg.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  agg_cmd->add_option("--target", agg.target, "Aggregation timestamp")->required();
  agg_cmd->add_option("--out", agg.out, "Output PLY path")->required();
  agg_cmd->add_option("--tracks", agg.tracks, "Also write query trajectories read off the aggregation");
  add_seed(agg_cmd, "Unused; accepted for uniformity");

  ReconArgs recon;
  std::uint64_t recon_seed = 1;
  auto* recon_cmd = app.add_subcommand("eval-recon", "Accuracy, completion and normal consistency");
  recon_cmd->add_option("--pred", recon.pred, "Predicted cloud (PLY)")->required()->check(CLI::ExistingFile);
  recon_cmd->add_option("--gt", recon.gt, "Ground-truth cloud (PLY)")->required()->check(CLI::ExistingFile);
  recon_cmd->add_option("--nmax,--max-points", recon.max_points, "Downsampling cap per cloud")->capture_default_str();
  recon_cmd->add_option("--k", recon.k, "Neighbors for normal estimation")->capture_default_str();
  recon_cmd->add_option("--seed", recon_seed, "Downsampling seed")->capture_default_str();

  TrackArgs track;
  const std::map<std::string, TrackAlignment> track_modes{
      {"none", TrackAlignment::None}, {"median", TrackAlignment::MedianScale}, {"sim3", TrackAlignment::Sim3}};
  auto* track_cmd = app.add_subcommand("eval-track", "APD and EPE of 3D trajectories");
  track_cmd->add_option("--pred", track.pred, "Predicted trajectories CSV")->required()->check(CLI::ExistingFile);
  track_cmd->add_option("--gt", track.gt, "Ground-truth trajectories CSV")->required()->check(CLI::ExistingFile);
  std::string track_align = "sim3";
  track_cmd->add_option("--align", track_align, "none | median | sim3")
      ->check(CLI::IsMember({"none", "median", "sim3"}))
      ->capture_default_str();
  track_cmd->add_option("--subset", track.subset, "all | dynamic (dynamic, frame-0 visible tracks)")
      ->check(CLI::IsMember({"all", "dynamic"}))
      ->capture_default_str();
  add_seed(track_cmd, "Unused; accepted for uniformity");

  DepthArgs depth;
  auto* depth_cmd = app.add_subcommand("eval-depth", "Abs Rel and delta < 1.25 over a sequence");
  depth_cmd->add_option("--pred", depth.pred, "Directory with predicted depth_%04d.ct4")
      ->required()
      ->check(CLI::ExistingDirectory);
  depth_cmd->add_option("--gt", depth.gt, "Directory with ground-truth depth_%04d.ct4")
      ->required()
      ->check(CLI::ExistingDirectory);
  depth_cmd->add_flag("--no-median-scale", depth.no_scale, "Skip per-sequence median scaling");
  add_seed(depth_cmd, "Unused; accepted for uniformity");

  PoseArgs pose;
  const std::map<std::string, PoseAlignment> pose_modes{
      {"sim3", PoseAlignment::Sim3}, {"se3", PoseAlignment::Se3}, {"none", PoseAlignment::None}};
  auto* pose_cmd = app.add_subcommand("eval-pose", "ATE and RPE of camera trajectories");
  pose_cmd->add_option("--pred", pose.pred, "Predicted cameras.json or dataset directory")
      ->required()
      ->check(CLI::ExistingPath);
  pose_cmd->add_option("--gt", pose.gt, "Ground-truth cameras.json or dataset directory")
      ->required()
      ->check(CLI::ExistingPath);
  std::string pose_align = "sim3";
  pose_cmd->add_option("--align", pose_align, "sim3 | se3 | none")
      ->check(CLI::IsMember({"sim3", "se3", "none"}))
      ->capture_default_str();
  add_seed(pose_cmd, "Unused; accepted for uniformity");

  LossCheckArgs lc;
  std::uint64_t lc_seed = 0;
  auto* lc_cmd = app.add_subcommand("loss-check", "Finite-difference gradient checks of every loss");
  lc_cmd->add_option("--config", lc.config, "Loss config JSON")->check(CLI::ExistingFile);
  lc_cmd->add_option("--trials", lc.trials, "Random instances per loss")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  lc_cmd->add_option("--size", lc.size, "Instance resolution (size × size)")
      ->check(CLI::Range(2, 256))
      ->capture_default_str();
  lc_cmd->add_option("--step", lc.h, "Central-difference step")->capture_default_str();
  lc_cmd->add_option("--tol", lc.tol, "Pass threshold on max relative error")->capture_default_str();
  lc_cmd->add_option("--seed", lc_seed, "Instance seed")->capture_default_str();

  ForwardArgs fwd;
  auto* fwd_cmd = app.add_subcommand("forward", "Run the token trunk on a dataset's images");
  fwd_cmd->add_option("--frames,--data", fwd.data, "Directory with image_%04d.ct4")->required()->check(CLI::ExistingDirectory);
  fwd_cmd->add_option("--target", fwd.target, "Aggregation timestamp")->capture_default_str();
  fwd_cmd->add_option("--config", fwd.config, "Model config JSON")->check(CLI::ExistingFile);
  fwd_cmd->add_option("--dump", fwd.dump, "Write final patch features (N × K × C, f64) as a tensor");
  add_seed(fwd_cmd, "Overrides the model's weight seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    std::string command;
    for (const auto* sub : app.get_subcommands()) command = sub->get_name();
    out << error_json(command, "UsageError", e.what()).dump(2) << "\n";
    return kExitValidation;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  track.align = track_modes.at(track_align);
  pose.align = pose_modes.at(pose_align);
  try {
    ojson result;
    if (name == "gen") {
      result = cmd_gen(gen, seed_or("gen"));
    } else if (name == "lift") {
      if (lift.data.empty() && lift.scene.empty()) {
        throw Error(ErrorCode::InvalidArgument, "lift needs --scene or --data");
      }
      result = cmd_lift(lift, delta_opt, seed_or("lift"));
    } else if (name == "split") {
      result = cmd_split(split);
      if (!split.json) {
        for (const auto& s : result["splits"]) out << s.get<int>() << "\n";
        return kExitOk;
      }
    } else if (name == "aggregate-oracle") {
      result = cmd_aggregate(agg);
    } else if (name == "eval-recon") {
      result = cmd_eval_recon(recon, recon_seed);
    } else if (name == "eval-track") {
      result = cmd_eval_track(track);
    } else if (name == "eval-depth") {
      result = cmd_eval_depth(depth);
    } else if (name == "eval-pose") {
      result = cmd_eval_pose(pose);
    } else if (name == "loss-check") {
      result = cmd_loss_check(lc, lc_seed);
    } else if (name == "forward") {
      result = cmd_forward(fwd, seed_or("forward"));
    }
    out << result.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    out << error_json(name, std::string(to_string(e.code())), e.what()).dump(2) << "\n";
    err << "gc4d " << name << ": " << e.what() << "\n";
    return is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const nlohmann::json::exception& e) {
    out << error_json(name, "MalformedInput", e.what()).dump(2) << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    out << error_json(name, "RuntimeError", e.what()).dump(2) << "\n";
    err << "gc4d " << name << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace gc4d::cli
