#include "gc4d/agg_former.hpp"
#include "gc4d/error.hpp"
#include "gc4d/random.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

namespace gc4d {
namespace {

RgbImage random_image(SplitMix64& rng, int h, int w) {
  RgbImage img(h, w);
  for (auto& p : img) p = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
  return img;
}

std::vector<RgbImage> random_frames(SplitMix64& rng, int n, int h = 32, int w = 32) {
  std::vector<RgbImage> out;
  for (int i = 0; i < n; ++i) out.push_back(random_image(rng, h, w));
  return out;
}

ModelConfig small_config(Fusion fusion = Fusion::Concatenate) {
  ModelConfig c;
  c.fusion = fusion;
  return c;
}

std::vector<Tokens> patch_tokens(const std::vector<RgbImage>& frames, const TokenBank& bank) {
  std::vector<Tokens> out;
  for (const auto& f : frames) out.push_back(patchify(f, bank));
  return out;
}

std::vector<FrameTokens> random_frame_tokens(SplitMix64& rng, int n, int rows, int dim) {
  std::vector<FrameTokens> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)].frame_index = i;
    out[static_cast<std::size_t>(i)].tokens = Tokens(rows, dim);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) out[static_cast<std::size_t>(i)].tokens(r, c) = rng.normal();
    }
  }
  return out;
}

TEST(ModelConfig, Validation) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_heads = 5;
  EXPECT_THROW(c.validate(), Error);
  c = ModelConfig{};
  c.n_layers = 3;
  EXPECT_THROW(c.validate(), Error);
  c = ModelConfig{};
  c.n_layers = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(TokenBank, DeterministicAndFinite) {
  const auto a = TokenBank::create(small_config());
  const auto b = TokenBank::create(small_config());
  EXPECT_EQ(a.patch_proj, b.patch_proj);
  EXPECT_EQ(a.t_agg_target, b.t_agg_target);
  EXPECT_EQ(a.layers.back().w2, b.layers.back().w2);
  EXPECT_TRUE(a.patch_proj.allFinite());
  EXPECT_NE(a.t_agg_target, a.t_agg_other);
  EXPECT_NE(a.t_reg_first, a.t_reg_rest);
  EXPECT_EQ(a.t_cam.rows(), 1);
  EXPECT_EQ(a.t_reg_first.rows(), 4);
  EXPECT_EQ(a.t_agg_target.rows(), 4);
  ModelConfig other = small_config();
  other.seed = 8;
  EXPECT_NE(TokenBank::create(other).patch_proj, a.patch_proj);
}

TEST(Patchify, ShapesAndDeterminism) {
  SplitMix64 rng(1);
  const auto bank = TokenBank::create(small_config());
  const RgbImage img = random_image(rng, 32, 32);
  const Tokens t = patchify(img, bank);
  EXPECT_EQ(t.rows(), 4);
  EXPECT_EQ(t.cols(), 64);
  EXPECT_EQ(patchify(img, bank), t);
  const RgbImage bad = random_image(rng, 30, 32);
  try {
    patchify(bad, bank);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndivisibleResolution);
  }
}

TEST(Patchify, IndependentOfFusion) {
  SplitMix64 rng(2);
  const RgbImage img = random_image(rng, 32, 48);
  const auto concat = TokenBank::create(small_config(Fusion::Concatenate));
  const auto add = TokenBank::create(small_config(Fusion::Add));
  EXPECT_EQ(patchify(img, concat), patchify(img, add));
}

TEST(Patchify, PositionalEncodingBounded) {
  const Tokens pe = positional_encoding(3, 5, 64);
  EXPECT_EQ(pe.rows(), 15);
  EXPECT_LE(pe.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_NE(pe.row(0), pe.row(1));
}

TEST(Assemble, SequenceLengths) {
  SplitMix64 rng(3);
  const auto bank = TokenBank::create(small_config());
  const auto frames = random_frames(rng, 4, 64, 64);  // K = 16
  const auto patches = patch_tokens(frames, bank);
  const auto asm_concat = assemble(patches, 1, bank, Fusion::Concatenate);
  int total = 0;
  for (const auto& f : asm_concat) {
    EXPECT_EQ(f.tokens.rows(), 25);
    total += static_cast<int>(f.tokens.rows());
  }
  EXPECT_EQ(total, 100);
  for (const auto& f : assemble(patches, 1, bank, Fusion::Add)) EXPECT_EQ(f.tokens.rows(), 21);
}

TEST(Assemble, RoutesSpecialTokens) {
  SplitMix64 rng(4);
  const auto bank = TokenBank::create(small_config());
  const auto patches = patch_tokens(random_frames(rng, 3), bank);
  const auto frames = assemble(patches, 0, bank, Fusion::Concatenate);
  const auto& f0 = frames[0];
  EXPECT_TRUE(f0.is_first);
  EXPECT_TRUE(f0.is_target);
  EXPECT_EQ(f0.tokens.topRows(1), bank.t_cam);
  EXPECT_EQ(f0.tokens.middleRows(1, 4), bank.t_reg_first);
  EXPECT_EQ(f0.tokens.middleRows(5, 4), bank.t_agg_target);
  EXPECT_EQ(f0.tokens.bottomRows(4), patches[0]);
  for (int i = 1; i < 3; ++i) {
    const auto& f = frames[static_cast<std::size_t>(i)];
    EXPECT_FALSE(f.is_first);
    EXPECT_FALSE(f.is_target);
    EXPECT_EQ(f.tokens.middleRows(1, 4), bank.t_reg_rest);
    EXPECT_EQ(f.tokens.middleRows(5, 4), bank.t_agg_other);
  }
}

TEST(Assemble, AddFusionUsesMeanAggregationToken) {
  SplitMix64 rng(5);
  const auto bank = TokenBank::create(small_config(Fusion::Add));
  const auto patches = patch_tokens(random_frames(rng, 2), bank);
  const auto frames = assemble(patches, 1, bank, Fusion::Add);
  const Eigen::RowVectorXd mean_other = bank.t_agg_other.colwise().mean();
  const Eigen::RowVectorXd mean_target = bank.t_agg_target.colwise().mean();
  for (Eigen::Index k = 0; k < 4; ++k) {
    EXPECT_LT((frames[0].tokens.row(5 + k) - (patches[0].row(k) + mean_other)).norm(), 1e-15);
    EXPECT_LT((frames[1].tokens.row(5 + k) - (patches[1].row(k) + mean_target)).norm(), 1e-15);
  }
}

TEST(Assemble, TargetChangeTouchesTwoFrames) {
  SplitMix64 rng(6);
  const auto bank = TokenBank::create(small_config());
  const auto patches = patch_tokens(random_frames(rng, 6), bank);
  for (auto fusion : {Fusion::Concatenate, Fusion::Add}) {
    const auto a = assemble(patches, 1, bank, fusion);
    const auto b = assemble(patches, 4, bank, fusion);
    for (int i = 0; i < 6; ++i) {
      const bool same = a[static_cast<std::size_t>(i)].tokens == b[static_cast<std::size_t>(i)].tokens;
      EXPECT_EQ(same, i != 1 && i != 4) << "frame " << i;
    }
  }
}

TEST(Assemble, TargetOutOfRange) {
  SplitMix64 rng(7);
  const auto bank = TokenBank::create(small_config());
  const auto patches = patch_tokens(random_frames(rng, 2), bank);
  for (int bad : {-1, 2}) {
    try {
      assemble(patches, bad, bank, Fusion::Concatenate);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::TargetOutOfRange);
    }
  }
}

TEST(Attention, SingleTokenReturnsValueProjection) {
  SplitMix64 rng(8);
  const auto bank = TokenBank::create(small_config());
  const auto& w = bank.layers[0];
  Tokens x(1, 64);
  for (Eigen::Index c = 0; c < 64; ++c) x(0, c) = rng.normal();
  const Tokens expected = (((x * w.wv).rowwise() + w.bv) * w.wo).rowwise() + w.bo;
  EXPECT_LT((self_attention(x, w, 4) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Attention, SoftmaxRowsSumToOne) {
  SplitMix64 rng(9);
  const auto bank = TokenBank::create(small_config());
  auto frames = random_frame_tokens(rng, 3, 10, 64);
  AttentionStats stats;
  frames = attention_layer(frames, bank.layers[0], 4, AttentionScope::Frame, &stats);
  attention_layer(frames, bank.layers[1], 4, AttentionScope::Global, &stats);
  EXPECT_EQ(stats.rows_checked, 3u * 10u * 4u + 30u * 4u);
  EXPECT_LT(stats.max_row_sum_error, 1e-6);
}

TEST(Attention, FrameScopeIsolation) {
  SplitMix64 rng(10);
  const auto bank = TokenBank::create(small_config());
  const auto frames = random_frame_tokens(rng, 4, 9, 64);
  const auto ref = attention_layer(frames, bank.layers[0], 4, AttentionScope::Frame);
  auto zeroed = frames;
  zeroed[2].tokens.setZero();
  const auto out = attention_layer(zeroed, bank.layers[0], 4, AttentionScope::Frame);
  for (int i : {0, 1, 3}) EXPECT_EQ(out[static_cast<std::size_t>(i)].tokens, ref[static_cast<std::size_t>(i)].tokens);
  EXPECT_NE(out[2].tokens, ref[2].tokens);
}

TEST(Attention, GlobalScopeMixesFrames) {
  SplitMix64 rng(11);
  const auto bank = TokenBank::create(small_config());
  const auto frames = random_frame_tokens(rng, 3, 9, 64);
  const auto ref = attention_layer(frames, bank.layers[1], 4, AttentionScope::Global);
  auto perturbed = frames;
  perturbed[2].tokens *= 3.0;
  const auto out = attention_layer(perturbed, bank.layers[1], 4, AttentionScope::Global);
  EXPECT_GT((out[0].tokens - ref[0].tokens).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Attention, LayerNormStatistics) {
  SplitMix64 rng(12);
  Tokens x(5, 64);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal(3.0, 2.0);
  const Tokens y = layer_norm(x, Eigen::RowVectorXd::Ones(64), Eigen::RowVectorXd::Zero(64));
  for (Eigen::Index r = 0; r < 5; ++r) {
    EXPECT_NEAR(y.row(r).mean(), 0.0, 1e-12);
    EXPECT_NEAR(y.row(r).squaredNorm() / 64.0, 1.0, 1e-4);
  }
}

TEST(Forward, DeterministicBitIdentical) {
  SplitMix64 rng(13);
  const auto bank = TokenBank::create(small_config());
  const auto frames = random_frames(rng, 3);
  const auto a = forward(frames, 1, bank);
  const auto b = forward(frames, 1, bank);
  EXPECT_EQ(a.camera_features, b.camera_features);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.patch_features[i], b.patch_features[i]);
}

TEST(Forward, SingleFrame) {
  SplitMix64 rng(14);
  const auto bank = TokenBank::create(small_config());
  const auto frames = random_frames(rng, 1);
  const auto out = forward(frames, 0, bank);
  ASSERT_EQ(out.frames.size(), 1u);
  EXPECT_EQ(out.camera_features.rows(), 1);
  EXPECT_EQ(out.patch_features[0].rows(), 4);
  EXPECT_TRUE(out.camera_features.allFinite());
}

TEST(Forward, PermutationEquivariance) {
  SplitMix64 rng(15);
  for (auto fusion : {Fusion::Concatenate, Fusion::Add}) {
    const auto bank = TokenBank::create(small_config(fusion));
    const auto frames = random_frames(rng, 5);
    const int target = 3;
    const std::vector<int> perm{0, 2, 4, 3, 1};  // fixes frame 0 and the target
    std::vector<RgbImage> permuted;
    for (int j : perm) permuted.push_back(frames[static_cast<std::size_t>(j)]);
    const auto ref = forward(frames, target, bank);
    const auto out = forward(permuted, target, bank);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const auto& expected = ref.frames[static_cast<std::size_t>(perm[i])].tokens;
      EXPECT_LT((out.frames[i].tokens - expected).cwiseAbs().maxCoeff(), 1e-5);
    }
  }
}

TEST(Forward, TargetChangeWitnessedDownstream) {
  SplitMix64 rng(16);
  const auto bank = TokenBank::create(small_config());
  const auto frames = random_frames(rng, 4);
  const auto a = forward(frames, 1, bank);
  const auto b = forward(frames, 2, bank);
  // Global layers spread the change to every frame, including untouched ones.
  EXPECT_GT((a.frames[0].tokens - b.frames[0].tokens).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Forward, RejectsMixedResolutions) {
  SplitMix64 rng(17);
  const auto bank = TokenBank::create(small_config());
  std::vector<RgbImage> frames{random_image(rng, 32, 32), random_image(rng, 32, 48)};
  EXPECT_THROW(forward(frames, 0, bank), Error);
}

TEST(Forward, DeskScaleRuntime) {
  SplitMix64 rng(18);
  const auto bank = TokenBank::create(small_config());
  const auto frames = random_frames(rng, 8, 64, 64);
  AttentionStats stats;
  const auto start = std::chrono::steady_clock::now();
  const auto out = forward(frames, 2, bank, &stats);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 1.0);
  EXPECT_EQ(out.patch_features[0].rows(), 16);
  EXPECT_LT(stats.max_row_sum_error, 1e-6);
}

TEST(Heads, CameraOutputDecodes) {
  SplitMix64 rng(19);
  const auto bank = TokenBank::create(small_config());
  const auto out = forward(random_frames(rng, 3), 0, bank);
  std::vector<CameraVector> cams;
  for (Eigen::Index i = 0; i < 3; ++i) {
    const CameraVector g = head_camera(out.camera_features.row(i), bank);
    EXPECT_NO_THROW(camera_decode(g));
    EXPECT_GE(g[0], 0.0);
    EXPECT_GT(g[7], 0.0);
    EXPECT_LT(g[8], 3.1415926535897932);
    EXPECT_EQ(head_camera(out.camera_features.row(i), bank), g);
    cams.push_back(g);
  }
  EXPECT_NE(cams[0], cams[1]);
  EXPECT_NE(cams[1], cams[2]);
}

TEST(Heads, DenseShapeAndPatchConstancy) {
  const auto config = small_config();
  const auto head = DenseHead::create(config, 3);
  Tokens constant(4, 64);
  constant.setConstant(0.25);
  const Eigen::MatrixXd out = head_dense(constant, 32, 32, head);
  EXPECT_EQ(out.rows(), 32 * 32);
  EXPECT_EQ(out.cols(), 3);
  for (int v = 0; v < 16; ++v) {
    for (int u = 0; u < 16; ++u) {
      const Eigen::Index base = v * 32 + u;
      EXPECT_EQ(out.row(base), out.row(base + 16));
      EXPECT_EQ(out.row(base), out.row(base + 16 * 32));
    }
  }
  const auto depth_head = DenseHead::create(config, 2);
  EXPECT_EQ(head_dense(constant, 32, 32, depth_head).cols(), 2);
  EXPECT_THROW(head_dense(constant, 48, 32, head), Error);
}

}  // namespace
}  // namespace gc4d
