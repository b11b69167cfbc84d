#include "gc4d/losses.hpp"

#include "gc4d/error.hpp"
#include "gc4d/random.hpp"

#include <algorithm>
#include <cmath>

namespace gc4d {

void LossConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("LossConfig: ") + what);
  };
  require(alpha >= 0.0, "alpha must be >= 0");
  require(beta >= 0.0, "beta must be >= 0");
  require(gamma >= 0.0, "gamma must be >= 0");
  require(lambda > 0.0, "lambda must be > 0");
  require(huber_eps > 0.0, "huber_eps must be > 0");
  require(dynamic_weight >= 1.0, "dynamic_weight must be >= 1");
}

Grid<Gradient2<Vec3>> spatial_gradient(const Grid<Vec3>& map, const Mask* valid) {
  return spatial_gradient<Vec3>(map, valid, Vec3::Zero());
}

Grid<Gradient2<double>> spatial_gradient(const Grid<double>& map, const Mask* valid) {
  return spatial_gradient<double>(map, valid, 0.0);
}

namespace {

double focal_component(double e, double beta, double gamma) {
  if (gamma == 0.0) return 1.0;
  return std::pow(std::abs(beta * e), gamma);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_shapes(const Grid<double>& sigma, const Mask& valid, int H, int W) {
  if (!sigma.same_shape(H, W) || !valid.same_shape(H, W)) {
    throw Error(ErrorCode::ShapeMismatch, "loss inputs differ in size");
  }
}

}  // namespace

Grid<Vec3> focal_weight(const Grid<Vec3>& residual, double beta, double gamma) {
  Grid<Vec3> w(residual.height(), residual.width(), Vec3::Zero());
  for (std::size_t i = 0; i < residual.size(); ++i) {
    for (int c = 0; c < 3; ++c) w[i][c] = focal_component(residual[i][c], beta, gamma);
  }
  return w;
}

PointLossValue point_loss(const Grid<Vec3>& pred, const Grid<Vec3>& gt, const Grid<double>& sigma,
                          const Mask& valid, const Mask* dynamic, const LossConfig& cfg,
                          const Grid<Vec3>* fixed_weights) {
  cfg.validate();
  const int H = pred.height();
  const int W = pred.width();
  if (!gt.same_shape(pred)) throw Error(ErrorCode::ShapeMismatch, "prediction and target differ in size");
  check_shapes(sigma, valid, H, W);
  if (cfg.weight_mode == WeightMode::Dynamic && (dynamic == nullptr || !dynamic->same_shape(H, W))) {
    throw Error(ErrorCode::ShapeMismatch, "dynamic weighting needs a dynamic mask of matching size");
  }
  if (fixed_weights != nullptr && !fixed_weights->same_shape(H, W)) {
    throw Error(ErrorCode::ShapeMismatch, "fixed focal weights differ in size");
  }

  PointLossValue out{0.0, Grid<Vec3>(H, W, Vec3::Zero()), Grid<double>(H, W, 0.0)};
  std::size_t n_valid = 0;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (!valid[i]) continue;
    ++n_valid;
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) {
      throw Error(ErrorCode::NonPositiveSigma, "uncertainty must be positive on valid pixels");
    }
  }
  if (n_valid == 0) return out;

  Grid<Gradient2<Vec3>> grad_pred;
  Grid<Gradient2<Vec3>> grad_gt;
  if (cfg.grad_term) {
    grad_pred = spatial_gradient(pred, &valid);
    grad_gt = spatial_gradient(gt, &valid);
  }

  double total = 0.0;
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const std::size_t i = valid.index(v, u);
      if (!valid[i]) continue;
      const double s = sigma[i];
      const Vec3 e = pred[i] - gt[i];

      double scalar_w = 1.0;
      Vec3 w = Vec3::Ones();
      if (cfg.weight_mode == WeightMode::Focal) {
        if (fixed_weights != nullptr) {
          w = (*fixed_weights)[i];
        } else {
          for (int c = 0; c < 3; ++c) w[c] = focal_component(e[c], cfg.beta, cfg.gamma);
        }
      } else if (cfg.weight_mode == WeightMode::Dynamic && (*dynamic)[i]) {
        scalar_w = cfg.dynamic_weight;
      }
      const Vec3 weighted = w.cwiseProduct(e);
      const double n1 = weighted.norm();
      const Vec3 d_norm = n1 > 0.0 ? Vec3(w.cwiseProduct(weighted) / n1) : Vec3::Zero();
      total += s * n1 * scalar_w;
      out.grad_points[i] += (s * scalar_w) * d_norm;
      out.grad_sigma[i] += n1 * scalar_w;

      if (cfg.grad_term) {
        const Vec3 ru = grad_pred[i].du - grad_gt[i].du;
        const Vec3 rv = grad_pred[i].dv - grad_gt[i].dv;
        const double n2 = std::sqrt(ru.squaredNorm() + rv.squaredNorm());
        total += s * n2;
        out.grad_sigma[i] += n2;
        if (n2 > 0.0) {
          const double c = s / n2;
          if (u + 1 < W) out.grad_points(v, u + 1) += c * ru;
          if (v + 1 < H) out.grad_points(v + 1, u) += c * rv;
          out.grad_points[i] -= c * (ru + rv);
        }
      }

      total -= cfg.alpha * std::log(s);
      out.grad_sigma[i] -= cfg.alpha / s;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n_valid);
  out.value = total * inv_n;
  for (auto& g : out.grad_points) g *= inv_n;
  for (auto& g : out.grad_sigma) g *= inv_n;
  return out;
}

DepthLossValue depth_loss(const Grid<double>& pred, const Grid<double>& gt,
                          const Grid<double>& sigma, const Mask& valid, double alpha) {
  const int H = pred.height();
  const int W = pred.width();
  if (!gt.same_shape(pred)) throw Error(ErrorCode::ShapeMismatch, "prediction and target differ in size");
  check_shapes(sigma, valid, H, W);
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");

  DepthLossValue out{0.0, Grid<double>(H, W, 0.0), Grid<double>(H, W, 0.0)};
  std::size_t n_valid = 0;
  for (std::size_t i = 0; i < valid.size(); ++i) {
    if (!valid[i]) continue;
    ++n_valid;
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) {
      throw Error(ErrorCode::NonPositiveSigma, "uncertainty must be positive on valid pixels");
    }
  }
  if (n_valid == 0) return out;

  const auto grad_pred = spatial_gradient(pred, &valid);
  const auto grad_gt = spatial_gradient(gt, &valid);

  double total = 0.0;
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const std::size_t i = valid.index(v, u);
      if (!valid[i]) continue;
      const double s = sigma[i];
      const double e = pred[i] - gt[i];
      total += s * std::abs(e);
      out.grad_depth[i] += s * sign(e);
      out.grad_sigma[i] += std::abs(e);

      const double ru = grad_pred[i].du - grad_gt[i].du;
      const double rv = grad_pred[i].dv - grad_gt[i].dv;
      const double n2 = std::sqrt(ru * ru + rv * rv);
      total += s * n2;
      out.grad_sigma[i] += n2;
      if (n2 > 0.0) {
        const double c = s / n2;
        if (u + 1 < W) out.grad_depth(v, u + 1) += c * ru;
        if (v + 1 < H) out.grad_depth(v + 1, u) += c * rv;
        out.grad_depth[i] -= c * (ru + rv);
      }

      total -= alpha * std::log(s);
      out.grad_sigma[i] -= alpha / s;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n_valid);
  out.value = total * inv_n;
  for (auto& g : out.grad_depth) g *= inv_n;
  for (auto& g : out.grad_sigma) g *= inv_n;
  return out;
}

double huber(double x, double eps) {
  const double a = std::abs(x);
  return a <= eps ? 0.5 * x * x : eps * (a - 0.5 * eps);
}

CameraLossValue camera_loss(std::span<const CameraVector> pred, std::span<const CameraVector> gt,
                            double huber_eps) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::ShapeMismatch, "camera batches differ in size");
  if (!(huber_eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "huber_eps must be > 0");
  CameraLossValue out;
  out.grad.resize(pred.size());
  for (std::size_t f = 0; f < pred.size(); ++f) {
    for (std::size_t c = 0; c < 9; ++c) {
      const double x = pred[f][c] - gt[f][c];
      out.value += huber(x, huber_eps);
      out.grad[f][c] = std::abs(x) <= huber_eps ? x : huber_eps * sign(x);
    }
  }
  return out;
}

double total_loss(double point, double camera, double depth, double lambda) {
  return lambda * point + camera + depth;
}

Grid<Vec3> offsets_from_points(const Grid<Vec3>& points_t, const Grid<Vec3>& points_a) {
  if (!points_t.same_shape(points_a)) throw Error(ErrorCode::ShapeMismatch, "point maps differ in size");
  Grid<Vec3> out(points_t.height(), points_t.width(), Vec3::Zero());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = points_a[i] - points_t[i];
  return out;
}

double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> x, std::span<const double> analytic, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "finite difference step must lie in [1e-7, 1e-3]");
  }
  if (x.size() != analytic.size()) {
    throw Error(ErrorCode::ShapeMismatch, "analytic gradient size differs from the input");
  }
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double x0 = probe[k];
    probe[k] = x0 + h;
    const double fp = f(probe);
    probe[k] = x0 - h;
    const double fm = f(probe);
    probe[k] = x0;
    const double numeric = (fp - fm) / (2.0 * h);
    const double a = analytic[k];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, rel);
  }
  return worst;
}

double LossCheckReport::max() const {
  return std::max({point_focal, point_dynamic, point_offset, depth, camera});
}

namespace {

struct PointInstance {
  Grid<Vec3> pred, gt;
  Grid<double> sigma;
  Mask valid, dynamic;
};

// Residual signs alternate in a checkerboard and magnitudes stay in [0.1, 1],
// so |e| and every neighbor difference stay well clear of the norm kinks.
double checker_residual(SplitMix64& rng, int u, int v) {
  const double mag = rng.uniform(0.1, 1.0);
  return ((u + v) % 2 == 0) ? mag : -mag;
}

PointInstance random_point_instance(SplitMix64& rng, int n) {
  PointInstance in{Grid<Vec3>(n, n, Vec3::Zero()), Grid<Vec3>(n, n, Vec3::Zero()),
                   Grid<double>(n, n, 1.0), Mask(n, n, 0), Mask(n, n, 0)};
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      Vec3 g, e;
      for (int c = 0; c < 3; ++c) {
        g[c] = rng.uniform(-2.0, 2.0);
        e[c] = checker_residual(rng, u, v);
      }
      in.gt(v, u) = g;
      in.pred(v, u) = g + e;
      in.sigma(v, u) = rng.uniform(0.5, 2.0);
      in.valid(v, u) = rng.uniform() < 0.85 ? 1 : 0;
      in.dynamic(v, u) = rng.uniform() < 0.3 ? 1 : 0;
    }
  }
  in.valid(0, 0) = 1;
  return in;
}

double check_point_instance(const PointInstance& in, const LossConfig& cfg, double h) {
  Grid<Vec3> residual(in.pred.height(), in.pred.width(), Vec3::Zero());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = in.pred[i] - in.gt[i];
  const Grid<Vec3> weights = focal_weight(residual, cfg.beta, cfg.gamma);
  const Grid<Vec3>* fixed = cfg.weight_mode == WeightMode::Focal ? &weights : nullptr;

  const std::size_t n = in.pred.size();
  std::vector<double> x(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) x[3 * i + static_cast<std::size_t>(c)] = in.pred[i][c];
    x[3 * n + i] = in.sigma[i];
  }
  const auto base = point_loss(in.pred, in.gt, in.sigma, in.valid, &in.dynamic, cfg, fixed);
  std::vector<double> analytic(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      analytic[3 * i + static_cast<std::size_t>(c)] = base.grad_points[i][c];
    }
    analytic[3 * n + i] = base.grad_sigma[i];
  }

  Grid<Vec3> pred = in.pred;
  Grid<double> sigma = in.sigma;
  auto f = [&](std::span<const double> xs) {
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = Vec3(xs[3 * i], xs[3 * i + 1], xs[3 * i + 2]);
      sigma[i] = xs[3 * n + i];
    }
    return point_loss(pred, in.gt, sigma, in.valid, &in.dynamic, cfg, fixed).value;
  };
  return finite_diff_check(f, x, analytic, h);
}

double check_depth_instance(SplitMix64& rng, int n, double alpha, double h) {
  Grid<double> gt(n, n, 0.0), pred(n, n, 0.0), sigma(n, n, 1.0);
  Mask valid(n, n, 0);
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      gt(v, u) = rng.uniform(0.5, 5.0);
      pred(v, u) = gt(v, u) + checker_residual(rng, u, v);
      sigma(v, u) = rng.uniform(0.5, 2.0);
      valid(v, u) = rng.uniform() < 0.85 ? 1 : 0;
    }
  }
  valid(0, 0) = 1;
  const std::size_t N = pred.size();
  std::vector<double> x(2 * N), analytic(2 * N);
  const auto base = depth_loss(pred, gt, sigma, valid, alpha);
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = pred[i];
    x[N + i] = sigma[i];
    analytic[i] = base.grad_depth[i];
    analytic[N + i] = base.grad_sigma[i];
  }
  Grid<double> p = pred, s = sigma;
  auto f = [&](std::span<const double> xs) {
    for (std::size_t i = 0; i < N; ++i) {
      p[i] = xs[i];
      s[i] = xs[N + i];
    }
    return depth_loss(p, gt, s, valid, alpha).value;
  };
  return finite_diff_check(f, x, analytic, h);
}

double check_camera_instance(SplitMix64& rng, int frames, double eps, double h) {
  std::vector<CameraVector> pred(static_cast<std::size_t>(frames)), gt(pred.size());
  for (std::size_t f = 0; f < pred.size(); ++f) {
    for (std::size_t c = 0; c < 9; ++c) {
      gt[f][c] = rng.uniform(-1.0, 1.0);
      pred[f][c] = gt[f][c] + rng.uniform(-3.0, 3.0);
    }
  }
  const auto base = camera_loss(pred, gt, eps);
  std::vector<double> x, analytic;
  for (std::size_t f = 0; f < pred.size(); ++f) {
    x.insert(x.end(), pred[f].begin(), pred[f].end());
    analytic.insert(analytic.end(), base.grad[f].begin(), base.grad[f].end());
  }
  auto probe = pred;
  auto fn = [&](std::span<const double> xs) {
    for (std::size_t f = 0; f < probe.size(); ++f) {
      for (std::size_t c = 0; c < 9; ++c) probe[f][c] = xs[9 * f + c];
    }
    return camera_loss(probe, gt, eps).value;
  };
  return finite_diff_check(fn, x, analytic, h);
}

}  // namespace

LossCheckReport run_loss_checks(const LossConfig& cfg, std::uint64_t seed, int trials, double h,
                                int size) {
  cfg.validate();
  if (trials < 1 || size < 1) throw Error(ErrorCode::InvalidArgument, "trials and size must be >= 1");
  LossCheckReport report;
  SplitMix64 rng(seed);

  LossConfig focal = cfg;
  focal.weight_mode = WeightMode::Focal;
  focal.repr = AggregationRepr::Endpoint;
  LossConfig dyn = cfg;
  dyn.weight_mode = WeightMode::Dynamic;
  dyn.repr = AggregationRepr::Endpoint;
  LossConfig offset = cfg;
  offset.repr = AggregationRepr::Offset;

  for (int t = 0; t < trials; ++t) {
    report.point_focal = std::max(report.point_focal,
                                  check_point_instance(random_point_instance(rng, size), focal, h));
    report.point_dynamic = std::max(report.point_dynamic,
                                    check_point_instance(random_point_instance(rng, size), dyn, h));
    report.point_offset = std::max(report.point_offset,
                                   check_point_instance(random_point_instance(rng, size), offset, h));
    report.depth = std::max(report.depth, check_depth_instance(rng, size, cfg.alpha, h));
    report.camera = std::max(report.camera, check_camera_instance(rng, 4, cfg.huber_eps, h));
  }
  return report;
}

}  // namespace gc4d
