#pragma once

#include "gc4d/camera.hpp"
#include "gc4d/geometry.hpp"
#include "gc4d/grid.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace gc4d {

enum class Fusion { Concatenate, Add };

/// Shapes of the desk-scale trunk. Layers alternate frame/global attention,
/// starting with frame attention.
struct ModelConfig {
  int dim = 64;
  int n_heads = 4;
  int n_layers = 4;
  int patch = 16;
  int n_agg_tokens = 4;
  int n_reg_tokens = 4;
  int n_cam_tokens = 1;
  Fusion fusion = Fusion::Concatenate;
  std::uint64_t seed = 7;

  void validate() const;
  int head_dim() const noexcept { return dim / n_heads; }
  int mlp_hidden() const noexcept { return 4 * dim; }
  /// Camera + registration (+ aggregation when concatenated) tokens per frame.
  int special_tokens() const noexcept {
    return n_cam_tokens + n_reg_tokens + (fusion == Fusion::Concatenate ? n_agg_tokens : 0);
  }
};

using Tokens = Eigen::MatrixXd;  // one token per row
using RgbImage = Grid<Vec3>;

struct LayerWeights {
  Eigen::RowVectorXd ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;
  Eigen::MatrixXd wq, wk, wv, wo;
  Eigen::RowVectorXd bq, bk, bv, bo;
  Eigen::MatrixXd w1, w2;
  Eigen::RowVectorXd b1, b2;
};

/// Every learned parameter of the trunk, drawn from splitmix64(config.seed)
/// as normal(0, 0.02) in a fixed order: patch projection, t_cam, t_reg_first,
/// t_reg_rest, t_agg_target, t_agg_other, then per layer wq, wk, wv, wo, w1,
/// w2, then the camera head. Biases start at zero, norm gains at one.
struct TokenBank {
  ModelConfig config;
  Eigen::MatrixXd patch_proj;  // (3 p²) × C
  Eigen::RowVectorXd patch_bias;
  Tokens t_cam;
  Tokens t_reg_first;
  Tokens t_reg_rest;
  Tokens t_agg_target;
  Tokens t_agg_other;
  std::vector<LayerWeights> layers;
  Eigen::MatrixXd camera_head;  // C × 9
  Eigen::RowVectorXd camera_bias;

  static TokenBank create(const ModelConfig& config);
};

struct FrameTokens {
  Tokens tokens;
  int frame_index = 0;
  bool is_target = false;
  bool is_first = false;
};

enum class AttentionScope { Frame, Global };

/// Largest |row sum - 1| seen over every softmax row of every head.
struct AttentionStats {
  double max_row_sum_error = 0.0;
  std::size_t rows_checked = 0;
};

/// Non-overlapping patches (row-major inside each patch, RGB innermost)
/// projected to C dims plus a 2-d sinusoidal position code.
Tokens patchify(const RgbImage& image, const TokenBank& bank);

Tokens positional_encoding(int rows, int cols, int dim);

/// Prepends camera and registration tokens (t_reg_first on frame 0,
/// t_reg_rest elsewhere) and routes t_agg_target to the target frame and
/// t_agg_other to the rest: prepended when concatenating, or their mean added
/// to every patch token when adding.
std::vector<FrameTokens> assemble(std::span<const Tokens> patch_tokens, int target,
                                  const TokenBank& bank, Fusion fusion);

/// Multi-head scaled dot-product self-attention with output projection; no
/// normalization or residual. Rows of `x` are tokens.
Tokens self_attention(const Tokens& x, const LayerWeights& w, int n_heads,
                      AttentionStats* stats = nullptr);

Tokens layer_norm(const Tokens& x, const Eigen::RowVectorXd& gamma, const Eigen::RowVectorXd& beta);

/// Pre-norm block x + attn(LN x), then x + MLP(LN x). Frame scope attends
/// within each frame's tokens; global scope across all frames at once.
std::vector<FrameTokens> attention_layer(const std::vector<FrameTokens>& frames,
                                         const LayerWeights& w, int n_heads, AttentionScope scope,
                                         AttentionStats* stats = nullptr);

struct ForwardOutput {
  std::vector<FrameTokens> frames;       // final tokens, per frame
  Eigen::MatrixXd camera_features;       // N × C, first camera token of each frame
  std::vector<Tokens> patch_features;    // per frame K × C
};

ForwardOutput forward(std::span<const RgbImage> images, int target, const TokenBank& bank,
                      AttentionStats* stats = nullptr);

/// Linear map of a camera feature to the 9-vector encoding; the quaternion is
/// normalized and both fovs squashed into (0, pi).
CameraVector head_camera(const Eigen::RowVectorXd& camera_feature, const TokenBank& bank);

struct DenseHead {
  int out_channels = 0;
  int patch = 0;
  Eigen::MatrixXd weight;  // C × (p² · out)
  Eigen::RowVectorXd bias;

  /// Weights drawn from a stream derived from (config.seed, out_channels).
  static DenseHead create(const ModelConfig& config, int out_channels);
};

/// Per-patch linear map tiled back to full resolution. Returns an (H·W) × out
/// matrix in row-major pixel order.
Eigen::MatrixXd head_dense(const Tokens& patch_features, int height, int width,
                           const DenseHead& head);

}  // namespace gc4d
