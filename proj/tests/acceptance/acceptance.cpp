// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include "pipeline.hpp"

#include "gc4d/agg_former.hpp"
#include "gc4d/error.hpp"
#include "gc4d/losses.hpp"
#include "gc4d/metrics.hpp"
#include "gc4d/scene.hpp"
#include "gc4d/traj_lift.hpp"

#include "oracles.hpp"
#include "temp_dir.hpp"
#include "test_scenes.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace gc4d {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Accumulates the sub-checks of one criterion and their diagnostics.
class Criterion {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ok_ = false;
      failures_.push_back(what);
    }
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const noexcept { return ok_; }
  const std::vector<std::string>& failures() const noexcept { return failures_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }

 private:
  bool ok_ = true;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// 1 -------------------------------------------------------------------------

void oracle_zero_point(Criterion& c) {
  const auto start = Clock::now();
  const SceneSpec spec = testing::two_box_scene(8, 64, 3);
  const SequenceDataset data = generate(spec);
  const int a = 3;

  std::vector<PointMap> maps;
  for (int i = 0; i < spec.n_frames; ++i) maps.push_back(oracle_aggregate(spec, data, i, a));
  const PointCloud pred = complete_cloud(maps);

  // Reference: every valid pixel's surface attachment re-evaluated at time a
  // straight from the scene description.
  PointCloud gt;
  for (int i = 0; i < spec.n_frames; ++i) {
    const auto& att = data.attachments[static_cast<std::size_t>(i)];
    for (const auto& px : att) {
      if (px) gt.push_back(surface_point(spec, *px, a));
    }
  }
  const ReconMetrics m = recon_metrics(pred, gt);
  const double secs = seconds_since(start);
  c.note("points=" + std::to_string(pred.size()) + " acc=" + fmt(m.acc_mean) + "/" + fmt(m.acc_median) +
         " comp=" + fmt(m.comp_mean) + "/" + fmt(m.comp_median) + " nc=" + fmt(m.nc_mean) +
         " t=" + fmt(secs) + "s");
  c.expect(pred.size() == gt.size(), "cloud sizes differ");
  c.expect(m.acc_mean < 1e-9 && m.acc_median < 1e-9, "accuracy not below 1e-9");
  c.expect(m.comp_mean < 1e-9 && m.comp_median < 1e-9, "completion not below 1e-9");
  c.expect(m.nc_mean > 0.99, "normal consistency not above 0.99");
  c.expect(secs < 10.0, "runtime not below 10 s");
}

// 2 -------------------------------------------------------------------------

double distance_to_meshes(const Vec3& p, std::span<const MeshView> meshes) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : meshes) {
    for (const auto& f : m.faces) {
      best = std::min(best, testing::point_triangle_distance(p, m.vertices[static_cast<std::size_t>(f[0])],
                                                             m.vertices[static_cast<std::size_t>(f[1])],
                                                             m.vertices[static_cast<std::size_t>(f[2])]));
    }
  }
  return best;
}

void occlusion_completion(Criterion& c) {
  const SceneSpec spec = testing::occlusion_scene(8, 64);
  const SequenceDataset data = generate(spec);
  const int a = 0;
  std::vector<PointMap> maps;
  for (int i = 0; i < spec.n_frames; ++i) maps.push_back(oracle_aggregate(spec, data, i, a));
  const PointCloud complete = complete_cloud(maps);
  const std::size_t own = data.pointmaps[a].valid_count();

  const auto meshes = frame_meshes(spec, a);
  double worst = 0.0;
  std::size_t hidden = 0, added = 0;
  for (int i = 0; i < spec.n_frames; ++i) {
    if (i == a) continue;
    const auto& m = maps[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < m.points.size(); ++k) {
      if (!m.valid[k]) continue;
      ++added;
      worst = std::max(worst, distance_to_meshes(m.points[k], meshes));
      if (!point_visible(spec, a, m.points[k])) ++hidden;
    }
  }
  const double ratio = static_cast<double>(complete.size()) / static_cast<double>(own);
  c.note("ratio=" + fmt(ratio) + " added=" + std::to_string(added) + " hidden_at_a=" + std::to_string(hidden) +
         " max_surface_dist=" + fmt(worst));
  c.expect(ratio > 1.2, "complete cloud not larger than 1.2x the target frame");
  c.expect(worst < 1e-6, "an added point lies off the surface at time a");
  c.expect(hidden > 0, "no added point is occluded at time a");
}

// 3 -------------------------------------------------------------------------

void metric_arithmetic(Criterion& c) {
  const PointCloud pred{Vec3(0.2, 0, 0)}, gt{Vec3(0, 0, 0)};
  const auto ac = accuracy_completion(pred, gt, kDefaultMaxPoints, 1);
  c.note("acc=" + fmt(ac.acc_mean) + " comp=" + fmt(ac.comp_mean));
  c.expect(ac.acc_mean == 0.2 && ac.acc_median == 0.2, "accuracy is not exactly 0.2");
  c.expect(ac.comp_mean == 0.2 && ac.comp_median == 0.2, "completion is not exactly 0.2");

  PointCloud tp, tg;
  for (int i = 0; i < 12; ++i) {
    tg.emplace_back(0.0, 0.5 * i, 2.0);
    tp.emplace_back(0.0, 0.5 * i, 2.2);
  }
  const auto t = apd_epe(tp, tg, {}, TrackAlignment::None);
  const std::array<double, 4> want{0, 100, 100, 100};
  c.note("apd=" + fmt(t.apd) + " epe=" + fmt(t.epe));
  for (int k = 0; k < 4; ++k) {
    c.expect(std::abs(t.apd_per_threshold[k] - want[k]) <= 1e-12, "APD threshold " + std::to_string(k));
  }
  c.expect(std::abs(t.apd - 75.0) <= 1e-12, "mean APD is not 75");
  c.expect(std::abs(t.epe - 0.2) <= 1e-12, "EPE is not 0.2");
}

// 4 -------------------------------------------------------------------------

void alignment_round_trips(Criterion& c) {
  SplitMix64 rng(404);
  PointCloud gt;
  for (int i = 0; i < 50; ++i) gt.push_back(testing::random_vec(rng, -2, 2));

  PointCloud scaled = gt;
  for (auto& p : scaled) p *= 2.75;
  const auto med = apd_epe(scaled, gt, {}, TrackAlignment::MedianScale);

  const Mat3 R = testing::rot_z(std::numbers::pi / 2);
  const Vec3 t(1, 2, 3);
  PointCloud moved;
  for (const auto& p : gt) moved.push_back(3.0 * R * p + t);
  const SIM3 fit = umeyama_sim3(gt, moved);
  double residual = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) residual = std::max(residual, (sim3_apply(fit, gt[i]) - moved[i]).norm());
  const auto sim = apd_epe(moved, gt, {}, TrackAlignment::Sim3);

  c.note("median_epe=" + fmt(med.epe) + " umeyama_residual=" + fmt(residual) + " sim3_apd=" + fmt(sim.apd));
  c.expect(med.epe < 1e-12, "median-scaled EPE not below 1e-12");
  c.expect(std::abs(fit.scale - 3.0) < 1e-9, "scale not recovered");
  c.expect(residual < 1e-9, "Umeyama residual not below 1e-9");
  c.expect(sim.apd == 100.0, "sim3-aligned APD is not 100");
}

// 5 -------------------------------------------------------------------------

void gradient_checks(Criterion& c) {
  const auto start = Clock::now();
  const LossCheckReport r = run_loss_checks(LossConfig{}, 2024, 100, 1e-5, 8);
  const double secs = seconds_since(start);
  c.note("focal=" + fmt(r.point_focal) + " dynamic=" + fmt(r.point_dynamic) + " offset=" + fmt(r.point_offset) +
         " depth=" + fmt(r.depth) + " camera=" + fmt(r.camera) + " t=" + fmt(secs) + "s");
  c.expect(r.point_focal < 1e-4, "focal point loss");
  c.expect(r.point_dynamic < 1e-4, "dynamic point loss");
  c.expect(r.point_offset < 1e-4, "offset point loss");
  c.expect(r.depth < 1e-4, "depth loss");
  c.expect(r.camera < 1e-4, "camera loss");
  c.expect(secs < 30.0, "runtime not below 30 s");
}

// 6 -------------------------------------------------------------------------

void offset_endpoint(Criterion& c) {
  SplitMix64 rng(606);
  // Dyadic rationals keep P^t + O exact, so both parameterizations see the
  // same residuals bit for bit.
  auto dyadic = [&](double lo, double hi) { return std::round(rng.uniform(lo, hi) * 256.0) / 256.0; };
  int identical = 0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 8;
    Grid<Vec3> base(n, n), off_pred(n, n), off_gt(n, n), end_pred(n, n), end_gt(n, n);
    Grid<double> sigma(n, n);
    Mask valid(n, n, 1), dynamic(n, n, 0);
    for (std::size_t i = 0; i < base.size(); ++i) {
      base[i] = Vec3(dyadic(-3, 3), dyadic(-3, 3), dyadic(1, 8));
      off_gt[i] = Vec3(dyadic(-1, 1), dyadic(-1, 1), dyadic(-1, 1));
      off_pred[i] = off_gt[i] + Vec3(dyadic(-0.3, 0.3), dyadic(-0.3, 0.3), dyadic(-0.3, 0.3));
      end_pred[i] = base[i] + off_pred[i];
      end_gt[i] = base[i] + off_gt[i];
      sigma[i] = dyadic(0.5, 2.0);
      valid[i] = rng.uniform() < 0.9 ? 1 : 0;
      dynamic[i] = rng.uniform() < 0.3 ? 1 : 0;
    }
    bool same = true;
    for (auto mode : {WeightMode::Focal, WeightMode::Dynamic, WeightMode::None}) {
      LossConfig eo, ee;
      eo.weight_mode = ee.weight_mode = mode;
      eo.repr = AggregationRepr::Offset;
      ee.repr = AggregationRepr::Endpoint;
      const auto a = point_loss(off_pred, off_gt, sigma, valid, &dynamic, eo);
      const auto b = point_loss(end_pred, end_gt, sigma, valid, &dynamic, ee);
      same = same && a.value == b.value && a.grad_points == b.grad_points && a.grad_sigma == b.grad_sigma;
    }
    identical += same ? 1 : 0;
  }
  c.note("bit_identical=" + std::to_string(identical) + "/" + std::to_string(trials));
  c.expect(identical == trials, "values or gradients differ");
}

// 7 -------------------------------------------------------------------------

void barycentric_lifting(Criterion& c) {
  const int n_frames = 5;
  SceneSpec spec;
  spec.height = spec.width = 128;
  spec.n_frames = n_frames;
  spec.cameras = testing::static_cameras(n_frames);
  const Vec3 center(0, 0, 4);
  spec.objects.push_back(make_rigid_object(
      "slab", make_box(center, Vec3(3.2, 3.2, 0.5)),
      testing::constant_motion(n_frames, center, Vec3(0.01, -0.02, 0.03), Vec3(0.02, 0.03, 0.01))));
  const RenderedFrame f0 = render_frame(spec, 0);
  const PointMap p0 = unproject(f0.depth, spec.cameras[0]);
  const auto meshes = frame_meshes(spec, 0);
  const auto& motion = *spec.objects[0].motion;

  std::size_t lifted = 0;
  double worst = 0.0;
  for (int v = 0; v < spec.height && lifted < 10000; ++v) {
    for (int u = 0; u < spec.width && lifted < 10000; ++u) {
      if (!f0.depth.valid(v, u)) continue;
      const auto att = attach_pixel(Pixel{u, v}, f0.depth, spec.cameras[0], meshes);
      if (!att || att->object_id != 0) continue;
      const auto traj = lift_trajectory(*att, spec.objects[0].mesh);
      for (int t = 0; t < n_frames; ++t) {
        const SE3 rel = se3_compose(motion[static_cast<std::size_t>(t)], se3_invert(motion[0]));
        const Vec3 want = se3_apply(rel, p0.points(v, u));
        worst = std::max(worst, (traj[static_cast<std::size_t>(t)] - want).norm());
      }
      ++lifted;
    }
  }
  c.note("attachments=" + std::to_string(lifted) + " max_err=" + fmt(worst));
  c.expect(lifted == 10000, "fewer than 10^4 attachments");
  c.expect(worst < 1e-6, "lifted trajectory deviates by 1e-6 m or more");
}

// 8 -------------------------------------------------------------------------

void clip_splitting(Criterion& c) {
  auto sequence = [](double scale) {
    std::vector<DepthMap> seq;
    for (int t = 0; t < 10; ++t) {
      DepthMap d(16, 16);
      for (std::size_t i = 0; i < d.depth.size(); ++i) {
        d.depth[i] = (t < 5 ? 1.0 : 5.0) * scale;
        d.valid[i] = 1;
      }
      seq.push_back(d);
    }
    return seq;
  };
  const ClipBoundary b = split_clips(sequence(1.0), 0.7);
  const ClipBoundary b100 = split_clips(sequence(100.0), 0.7);
  std::string s;
  for (int i : b.split_indices) s += std::to_string(i) + " ";
  c.note("splits=[ " + s + "]");
  c.expect(b.split_indices == std::vector<int>{5}, "expected exactly one split at index 5");
  c.expect(b100 == b, "scaling depths by 100 changed the result");
}

// 9 -------------------------------------------------------------------------

void dynamic_classification(Criterion& c) {
  auto trajectory = [](double max_disp) {
    std::vector<Vec3> t;
    for (int f = 0; f < 6; ++f) t.emplace_back(0.3 + max_disp * f / 5.0, -0.1, 2.0);
    return t;
  };
  struct Case {
    double disp, delta;
    bool dynamic;
  };
  const std::vector<Case> cases{{0.05, 0.03, true}, {0.05, 0.01, true},  {0.02, 0.03, false},
                                {0.02, 0.01, true}, {0.005, 0.03, false}, {0.005, 0.01, false}};
  int right = 0;
  for (const auto& k : cases) {
    const bool got = classify_dynamic(trajectory(k.disp), 0, k.delta);
    if (got == k.dynamic) ++right;
    else c.expect(false, "disp " + fmt(k.disp) + " at delta " + fmt(k.delta));
  }
  c.note("correct=" + std::to_string(right) + "/" + std::to_string(cases.size()));
}

// 10 ------------------------------------------------------------------------

std::vector<RgbImage> random_frames(SplitMix64& rng, int n, int size) {
  std::vector<RgbImage> out;
  for (int i = 0; i < n; ++i) {
    RgbImage img(size, size);
    for (auto& p : img) p = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    out.push_back(img);
  }
  return out;
}

void token_routing(Criterion& c) {
  SplitMix64 rng(1010);
  const TokenBank bank = TokenBank::create(ModelConfig{});

  // Frame-scope isolation: perturb one frame, others must not move at all.
  const auto frames5 = random_frames(rng, 5, 32);
  std::vector<Tokens> patches;
  for (const auto& f : frames5) patches.push_back(patchify(f, bank));
  const auto assembled = assemble(patches, 3, bank, bank.config.fusion);
  const auto ref = attention_layer(assembled, bank.layers[0], bank.config.n_heads, AttentionScope::Frame);
  auto perturbed = assembled;
  perturbed[2].tokens.setZero();
  const auto out = attention_layer(perturbed, bank.layers[0], bank.config.n_heads, AttentionScope::Frame);
  bool isolated = true;
  for (int i : {0, 1, 3, 4}) isolated = isolated && out[static_cast<std::size_t>(i)].tokens == ref[static_cast<std::size_t>(i)].tokens;
  c.expect(isolated, "frame-scope isolation");

  // Permutation equivariance with frame 0 and the target fixed.
  const std::vector<int> perm{0, 4, 1, 3, 2};
  std::vector<RgbImage> permuted;
  for (int j : perm) permuted.push_back(frames5[static_cast<std::size_t>(j)]);
  AttentionStats stats;
  const auto fa = forward(frames5, 3, bank, &stats);
  const auto fb = forward(permuted, 3, bank, &stats);
  double equiv = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    equiv = std::max(equiv, (fb.frames[i].tokens - fa.frames[static_cast<std::size_t>(perm[i])].tokens).cwiseAbs().maxCoeff());
  }
  c.expect(equiv < 1e-5, "permutation equivariance");

  // Target change touches the assembly of exactly two frames.
  const auto a1 = assemble(patches, 1, bank, bank.config.fusion);
  const auto a2 = assemble(patches, 4, bank, bank.config.fusion);
  std::vector<int> changed;
  for (int i = 0; i < 5; ++i) {
    if (a1[static_cast<std::size_t>(i)].tokens != a2[static_cast<std::size_t>(i)].tokens) changed.push_back(i);
  }
  c.expect(changed == std::vector<int>{1, 4}, "target change altered frames other than the two targets");

  // Desk-scale forward: N=8 frames of 64×64 (K=16), C=64.
  const auto frames8 = random_frames(rng, 8, 64);
  const auto start = Clock::now();
  const auto f8 = forward(frames8, 2, bank, &stats);
  const double secs = seconds_since(start);
  c.expect(f8.patch_features.front().rows() == 16 && f8.patch_features.front().cols() == 64, "K or C wrong");
  c.expect(stats.max_row_sum_error < 1e-6, "softmax rows do not sum to 1");
  c.expect(secs < 1.0, "forward pass not below 1 s");
  c.note("equiv_err=" + fmt(equiv) + " softmax_err=" + fmt(stats.max_row_sum_error) + " rows=" +
         std::to_string(stats.rows_checked) + " forward_t=" + fmt(secs) + "s");
}

// 11 ------------------------------------------------------------------------

struct PipelineRun {
  std::vector<int> codes;
  std::string json;
};

PipelineRun pipeline_once() {
  testing::TempDir dir("acceptance");
  const std::string scene = GC4D_SCENES_DIR "/two_boxes.json";
  const std::string data = (dir / "data").string();
  const std::vector<std::vector<std::string>> steps{
      {"gen", "--spec", scene, "--out", data, "--seed", "11"},
      {"aggregate-oracle", "--data", data, "--target", "2", "--out", (dir / "c2.ply").string(), "--tracks",
       (dir / "tracks.csv").string()},
      {"aggregate-oracle", "--data", data, "--target", "5", "--out", (dir / "c5.ply").string()},
      {"eval-recon", "--pred", (dir / "c2.ply").string(), "--gt", (dir / "c5.ply").string(), "--seed", "1"},
      {"eval-track", "--pred", (dir / "tracks.csv").string(), "--gt", data + "/trajectories.csv", "--align",
       "sim3"},
  };
  PipelineRun r;
  for (const auto& args : steps) {
    std::ostringstream out, err;
    r.codes.push_back(cli::run_pipeline(args, out, err));
    r.json += out.str();
  }
  return r;
}

void end_to_end_determinism(Criterion& c) {
  const PipelineRun a = pipeline_once();
  const PipelineRun b = pipeline_once();
  bool all_ok = true;
  for (int code : a.codes) all_ok = all_ok && code == cli::kExitOk;
  c.note("json_bytes=" + std::to_string(a.json.size()));
  c.expect(all_ok, "a pipeline step failed:\n" + a.json);
  c.expect(a.json == b.json, "JSON output differs between runs");
}

// 12 ------------------------------------------------------------------------

void brute_force_equivalence(Criterion& c) {
  SplitMix64 rng(1212);
  int exact = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(1000), m = 1 + rng.below(1000);
    PointCloud from, to;
    for (std::size_t i = 0; i < n; ++i) from.push_back(testing::random_vec(rng, -1, 1));
    for (std::size_t i = 0; i < m; ++i) to.push_back(testing::random_vec(rng, -1, 1));
    if (trial % 4 == 0) to.insert(to.end(), from.begin(), from.begin() + static_cast<long>(n / 2));
    if (nn_distances(from, to) == testing::brute_force_nn(from, to)) ++exact;
  }
  c.note("exact=" + std::to_string(exact) + "/20");
  c.expect(exact == 20, "a trial differed from the brute-force scan");
}

}  // namespace
}  // namespace gc4d

int main() {
  struct Entry {
    int id;
    const char* description;
    std::function<void(gc4d::Criterion&)> run;
  };
  const std::vector<Entry> entries{
      {1, "oracle zero-point reconstruction", gc4d::oracle_zero_point},
      {2, "occlusion completion witness", gc4d::occlusion_completion},
      {3, "metric arithmetic", gc4d::metric_arithmetic},
      {4, "alignment round-trips", gc4d::alignment_round_trips},
      {5, "loss gradient checks", gc4d::gradient_checks},
      {6, "offset/endpoint equivalence", gc4d::offset_endpoint},
      {7, "barycentric lifting", gc4d::barycentric_lifting},
      {8, "clip splitting", gc4d::clip_splitting},
      {9, "dynamic classification thresholds", gc4d::dynamic_classification},
      {10, "token routing", gc4d::token_routing},
      {11, "end-to-end determinism", gc4d::end_to_end_determinism},
      {12, "nearest-neighbour brute-force equivalence", gc4d::brute_force_equivalence},
  };
  int failed = 0;
  for (const auto& e : entries) {
    gc4d::Criterion c;
    try {
      e.run(c);
    } catch (const std::exception& ex) {
      c.expect(false, std::string("exception: ") + ex.what());
    }
    std::printf("%s %2d %s\n", c.ok() ? "PASS" : "FAIL", e.id, e.description);
    for (const auto& n : c.notes()) std::printf("       %s\n", n.c_str());
    for (const auto& f : c.failures()) std::printf("       failed: %s\n", f.c_str());
    if (!c.ok()) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failed, entries.size());
  return failed == 0 ? 0 : 1;
}
