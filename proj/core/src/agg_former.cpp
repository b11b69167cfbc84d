#include "gc4d/agg_former.hpp"

#include "gc4d/error.hpp"
#include "gc4d/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gc4d {

namespace {

constexpr double kInitStd = 0.02;
constexpr double kNormEps = 1e-5;

Eigen::MatrixXd draw_normal(SplitMix64& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  // Row-major draw order, independent of Eigen's storage order.
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, kInitStd);
  }
  return m;
}

double gelu(double x) {
  constexpr double k = 0.7978845608028654;  // sqrt(2 / pi)
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

Tokens vstack(const std::vector<const Tokens*>& parts, int cols) {
  Eigen::Index rows = 0;
  for (const auto* p : parts) rows += p->rows();
  Tokens out(rows, cols);
  Eigen::Index r = 0;
  for (const auto* p : parts) {
    out.middleRows(r, p->rows()) = *p;
    r += p->rows();
  }
  return out;
}

Tokens block(const Tokens& x, const LayerWeights& w, int n_heads, AttentionStats* stats) {
  Tokens h = x + self_attention(layer_norm(x, w.ln1_gamma, w.ln1_beta), w, n_heads, stats);
  Tokens hidden = (layer_norm(h, w.ln2_gamma, w.ln2_beta) * w.w1).rowwise() + w.b1;
  hidden = hidden.unaryExpr(&gelu);
  return h + ((hidden * w.w2).rowwise() + w.b2);
}

}  // namespace

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("ModelConfig: ") + what);
  };
  require(dim >= 1 && n_heads >= 1, "dim and n_heads must be >= 1");
  require(dim % n_heads == 0, "dim must be divisible by n_heads");
  require(n_layers >= 2 && n_layers % 2 == 0, "n_layers must be even and >= 2");
  require(patch >= 1, "patch must be >= 1");
  require(n_agg_tokens >= 1 && n_reg_tokens >= 0, "need >= 1 aggregation token");
  require(n_cam_tokens == 1, "exactly one camera token is supported");
}

TokenBank TokenBank::create(const ModelConfig& config) {
  config.validate();
  const int C = config.dim;
  const int p2 = config.patch * config.patch;
  SplitMix64 rng(config.seed);
  TokenBank bank;
  bank.config = config;
  bank.patch_proj = draw_normal(rng, 3 * p2, C);
  bank.patch_bias = Eigen::RowVectorXd::Zero(C);
  bank.t_cam = draw_normal(rng, config.n_cam_tokens, C);
  bank.t_reg_first = draw_normal(rng, config.n_reg_tokens, C);
  bank.t_reg_rest = draw_normal(rng, config.n_reg_tokens, C);
  bank.t_agg_target = draw_normal(rng, config.n_agg_tokens, C);
  bank.t_agg_other = draw_normal(rng, config.n_agg_tokens, C);
  for (int l = 0; l < config.n_layers; ++l) {
    LayerWeights w;
    w.ln1_gamma = w.ln2_gamma = Eigen::RowVectorXd::Ones(C);
    w.ln1_beta = w.ln2_beta = Eigen::RowVectorXd::Zero(C);
    w.wq = draw_normal(rng, C, C);
    w.wk = draw_normal(rng, C, C);
    w.wv = draw_normal(rng, C, C);
    w.wo = draw_normal(rng, C, C);
    w.w1 = draw_normal(rng, C, config.mlp_hidden());
    w.w2 = draw_normal(rng, config.mlp_hidden(), C);
    w.bq = w.bk = w.bv = w.bo = w.b2 = Eigen::RowVectorXd::Zero(C);
    w.b1 = Eigen::RowVectorXd::Zero(config.mlp_hidden());
    bank.layers.push_back(std::move(w));
  }
  bank.camera_head = draw_normal(rng, C, 9);
  bank.camera_bias = Eigen::RowVectorXd::Zero(9);
  return bank;
}

Tokens positional_encoding(int rows, int cols, int dim) {
  Tokens pe(rows * cols, dim);
  const int half = dim / 2;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int j = 0; j < dim; ++j) {
        const bool row_part = j < half;
        const int idx = row_part ? j : j - half;
        const int span = row_part ? half : dim - half;
        const double pos = row_part ? r : c;
        const double freq = std::pow(10000.0, -2.0 * (idx / 2) / std::max(span, 1));
        pe(r * cols + c, j) = (idx % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
      }
    }
  }
  return pe;
}

Tokens patchify(const RgbImage& image, const TokenBank& bank) {
  const int p = bank.config.patch;
  const int H = image.height();
  const int W = image.width();
  if (H < p || W < p || H % p != 0 || W % p != 0) {
    throw Error(ErrorCode::IndivisibleResolution,
                "image " + std::to_string(H) + "x" + std::to_string(W) +
                    " is not divisible into " + std::to_string(p) + "-pixel patches");
  }
  const int rows = H / p;
  const int cols = W / p;
  Eigen::MatrixXd flat(rows * cols, 3 * p * p);
  for (int pr = 0; pr < rows; ++pr) {
    for (int pc = 0; pc < cols; ++pc) {
      const int k = pr * cols + pc;
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          const Vec3& rgb = image(pr * p + dy, pc * p + dx);
          for (int ch = 0; ch < 3; ++ch) flat(k, (dy * p + dx) * 3 + ch) = rgb[ch];
        }
      }
    }
  }
  Tokens tokens = (flat * bank.patch_proj).rowwise() + bank.patch_bias;
  return tokens + positional_encoding(rows, cols, bank.config.dim);
}

std::vector<FrameTokens> assemble(std::span<const Tokens> patch_tokens, int target,
                                  const TokenBank& bank, Fusion fusion) {
  const int N = static_cast<int>(patch_tokens.size());
  if (target < 0 || target >= N) {
    throw Error(ErrorCode::TargetOutOfRange,
                "target " + std::to_string(target) + " outside [0, " + std::to_string(N) + ")");
  }
  const int C = bank.config.dim;
  std::vector<FrameTokens> out;
  out.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const Tokens& patches = patch_tokens[static_cast<std::size_t>(i)];
    if (patches.cols() != C) throw Error(ErrorCode::ShapeMismatch, "patch tokens have wrong width");
    const Tokens& reg = i == 0 ? bank.t_reg_first : bank.t_reg_rest;
    const Tokens& agg = i == target ? bank.t_agg_target : bank.t_agg_other;
    FrameTokens ft;
    ft.frame_index = i;
    ft.is_target = i == target;
    ft.is_first = i == 0;
    if (fusion == Fusion::Concatenate) {
      ft.tokens = vstack({&bank.t_cam, &reg, &agg, &patches}, C);
    } else {
      const Tokens fused = patches.rowwise() + agg.colwise().mean();
      ft.tokens = vstack({&bank.t_cam, &reg, &fused}, C);
    }
    out.push_back(std::move(ft));
  }
  return out;
}

Tokens layer_norm(const Tokens& x, const Eigen::RowVectorXd& gamma, const Eigen::RowVectorXd& beta) {
  Tokens out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    out.row(r) = ((x.row(r).array() - mu) / std::sqrt(var + kNormEps)).matrix();
  }
  return (out.array().rowwise() * gamma.array()).matrix().rowwise() + beta;
}

Tokens self_attention(const Tokens& x, const LayerWeights& w, int n_heads, AttentionStats* stats) {
  const Eigen::Index C = x.cols();
  const Eigen::Index d = C / n_heads;
  const Tokens q = (x * w.wq).rowwise() + w.bq;
  const Tokens k = (x * w.wk).rowwise() + w.bk;
  const Tokens v = (x * w.wv).rowwise() + w.bv;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Tokens heads(x.rows(), C);
  for (int h = 0; h < n_heads; ++h) {
    Eigen::MatrixXd scores = q.middleCols(h * d, d) * k.middleCols(h * d, d).transpose() * scale;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const double mx = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - mx).exp().matrix();
      scores.row(r) /= scores.row(r).sum();
      if (stats != nullptr) {
        stats->max_row_sum_error =
            std::max(stats->max_row_sum_error, std::abs(scores.row(r).sum() - 1.0));
        ++stats->rows_checked;
      }
    }
    heads.middleCols(h * d, d) = scores * v.middleCols(h * d, d);
  }
  return (heads * w.wo).rowwise() + w.bo;
}

std::vector<FrameTokens> attention_layer(const std::vector<FrameTokens>& frames,
                                         const LayerWeights& w, int n_heads, AttentionScope scope,
                                         AttentionStats* stats) {
  std::vector<FrameTokens> out = frames;
  if (frames.empty()) return out;
  if (scope == AttentionScope::Frame) {
    for (auto& f : out) f.tokens = block(f.tokens, w, n_heads, stats);
    return out;
  }
  std::vector<const Tokens*> parts;
  for (const auto& f : frames) parts.push_back(&f.tokens);
  const Tokens joint = block(vstack(parts, static_cast<int>(frames.front().tokens.cols())), w,
                             n_heads, stats);
  Eigen::Index r = 0;
  for (auto& f : out) {
    const Eigen::Index n = f.tokens.rows();
    f.tokens = joint.middleRows(r, n);
    r += n;
  }
  return out;
}

ForwardOutput forward(std::span<const RgbImage> images, int target, const TokenBank& bank,
                      AttentionStats* stats) {
  if (images.empty()) throw Error(ErrorCode::InvalidArgument, "forward needs at least one frame");
  for (const auto& img : images) {
    if (!img.same_shape(images.front())) {
      throw Error(ErrorCode::ShapeMismatch, "all frames must share one resolution");
    }
  }
  std::vector<Tokens> patches;
  patches.reserve(images.size());
  for (const auto& img : images) patches.push_back(patchify(img, bank));

  auto frames = assemble(patches, target, bank, bank.config.fusion);
  for (int l = 0; l < bank.config.n_layers; ++l) {
    const auto scope = l % 2 == 0 ? AttentionScope::Frame : AttentionScope::Global;
    frames = attention_layer(frames, bank.layers[static_cast<std::size_t>(l)],
                             bank.config.n_heads, scope, stats);
  }

  ForwardOutput out;
  const int special = bank.config.special_tokens();
  out.camera_features.resize(static_cast<Eigen::Index>(frames.size()), bank.config.dim);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Tokens& t = frames[i].tokens;
    out.camera_features.row(static_cast<Eigen::Index>(i)) = t.row(0);
    out.patch_features.push_back(t.bottomRows(t.rows() - special));
  }
  out.frames = std::move(frames);
  return out;
}

CameraVector head_camera(const Eigen::RowVectorXd& camera_feature, const TokenBank& bank) {
  if (camera_feature.size() != bank.config.dim) {
    throw Error(ErrorCode::ShapeMismatch, "camera feature has wrong width");
  }
  const Eigen::RowVectorXd raw = camera_feature * bank.camera_head + bank.camera_bias;
  Eigen::Vector4d q(raw[0], raw[1], raw[2], raw[3]);
  const double n = q.norm();
  q = n >= 1e-12 ? Eigen::Vector4d(q / n) : Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
  CameraParams c;
  c.q = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
  c.t = Vec3(raw[4], raw[5], raw[6]);
  auto squash = [](double x) {
    const double fov = std::numbers::pi / (1.0 + std::exp(-x));
    return std::clamp(fov, 1e-6, std::numbers::pi - 1e-6);
  };
  c.fov_v = squash(raw[7]);
  c.fov_h = squash(raw[8]);
  return camera_encode(c);
}

DenseHead DenseHead::create(const ModelConfig& config, int out_channels) {
  config.validate();
  if (out_channels < 1) throw Error(ErrorCode::InvalidArgument, "dense head needs >= 1 channel");
  SplitMix64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(out_channels + 1)));
  DenseHead head;
  head.out_channels = out_channels;
  head.patch = config.patch;
  head.weight = draw_normal(rng, config.dim, config.patch * config.patch * out_channels);
  head.bias = Eigen::RowVectorXd::Zero(config.patch * config.patch * out_channels);
  return head;
}

Eigen::MatrixXd head_dense(const Tokens& patch_features, int height, int width,
                           const DenseHead& head) {
  const int p = head.patch;
  if (p < 1 || height % p != 0 || width % p != 0) {
    throw Error(ErrorCode::ShapeMismatch, "dense head resolution not divisible by patch size");
  }
  const int rows = height / p;
  const int cols = width / p;
  if (patch_features.rows() != rows * cols || patch_features.cols() != head.weight.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "patch features do not match the requested resolution");
  }
  const Eigen::MatrixXd per_patch = (patch_features * head.weight).rowwise() + head.bias;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(height) * width, head.out_channels);
  for (int pr = 0; pr < rows; ++pr) {
    for (int pc = 0; pc < cols; ++pc) {
      const int k = pr * cols + pc;
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          const Eigen::Index pixel = static_cast<Eigen::Index>(pr * p + dy) * width + (pc * p + dx);
          for (int ch = 0; ch < head.out_channels; ++ch) {
            out(pixel, ch) = per_patch(k, (dy * p + dx) * head.out_channels + ch);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace gc4d
