#include "gc4d/camera.hpp"
#include "gc4d/error.hpp"
#include "gc4d/geometry.hpp"
#include "gc4d/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace gc4d {
namespace {

using testing::quaternion_matrix;
using testing::random_vec;
constexpr double kPi = std::numbers::pi;

CameraParams random_camera(SplitMix64& rng) {
  CameraParams c;
  c.q = Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
  c.t = random_vec(rng, -2, 2);
  c.fov_v = rng.uniform(0.3, 2.5);
  c.fov_h = rng.uniform(0.3, 2.5);
  return c;
}

TEST(CameraDecode, IdentityVector) {
  const auto c = camera_decode({1, 0, 0, 0, 0, 0, 0, kPi / 2, kPi / 2});
  EXPECT_TRUE(c.rotation().isApprox(Mat3::Identity(), 0.0));
  EXPECT_EQ(c.t, Vec3::Zero());
  EXPECT_EQ(c.fov_v, kPi / 2);
  EXPECT_EQ(c.fov_h, kPi / 2);
}

TEST(CameraDecode, HalfQuaternionPermutesAxesCyclically) {
  const auto c = camera_decode({0.5, 0.5, 0.5, 0.5, 0, 0, 0, 1, 1});
  const Mat3 expected = quaternion_matrix(0.5, 0.5, 0.5, 0.5);
  EXPECT_LT((c.rotation() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((c.rotation() * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_LT((c.rotation() * Vec3::UnitY() - Vec3::UnitZ()).norm(), 1e-15);
  EXPECT_LT((c.rotation() * Vec3::UnitZ() - Vec3::UnitX()).norm(), 1e-15);
}

TEST(CameraDecode, NormalizesQuaternion) {
  const auto c = camera_decode({2, 0, 0, 0, 0, 0, 0, 1, 1});
  EXPECT_NEAR(c.q.norm(), 1.0, 1e-15);
}

TEST(CameraDecode, RejectsZeroQuaternion) {
  try {
    camera_decode({0, 0, 0, 0, 0, 0, 0, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroQuaternion);
  }
}

TEST(CameraDecode, RejectsFovOutsideOpenInterval) {
  for (double fov : {0.0, -0.1, kPi, 4.0}) {
    try {
      camera_decode({1, 0, 0, 0, 0, 0, 0, fov, 1});
      FAIL() << fov;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::FovOutOfRange);
    }
  }
}

TEST(CameraEncode, IdentityCamera) {
  CameraParams c;
  c.fov_v = 1.1;
  c.fov_h = 1.3;
  const CameraVector g = camera_encode(c);
  const CameraVector want{1, 0, 0, 0, 0, 0, 0, 1.1, 1.3};
  EXPECT_EQ(g, want);
}

TEST(CameraEncode, OppositeQuaternionsEncodeIdentically) {
  SplitMix64 rng(11);
  for (int i = 0; i < 100; ++i) {
    CameraParams a = random_camera(rng);
    CameraParams b = a;
    b.q.coeffs() = -a.q.coeffs();
    EXPECT_EQ(camera_encode(a), camera_encode(b));
    EXPECT_GE(camera_encode(a)[0], 0.0);
  }
}

TEST(CameraEncode, ZeroScalarPartUsesFirstNonzeroComponent) {
  CameraParams c;
  c.q = Eigen::Quaterniond(0, -1, 0, 0);
  const auto g = camera_encode(c);
  EXPECT_EQ(g[1], 1.0);
  c.q = Eigen::Quaterniond(0, 0, 0, -1);
  EXPECT_EQ(camera_encode(c)[3], 1.0);
}

TEST(CameraEncode, RoundTripsThroughDecode) {
  SplitMix64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const CameraParams c = random_camera(rng);
    const CameraVector g = camera_encode(c);
    const CameraVector g2 = camera_encode(camera_decode(g));
    for (int k = 0; k < 9; ++k) EXPECT_NEAR(g[k], g2[k], 1e-12);
    const CameraParams back = camera_decode(g);
    EXPECT_LT((back.rotation() - c.rotation()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((back.t - c.t).norm(), 1e-9);
  }
}

TEST(CameraRotation, OrthonormalFromQuaternions) {
  SplitMix64 rng(13);
  for (int i = 0; i < 100; ++i) {
    EXPECT_LT(orthonormality_error(random_camera(rng).rotation()), 1e-9);
  }
}

TEST(Intrinsics, NinetyDegreeFov) {
  CameraParams c;
  const auto k = intrinsics(c, 32, 64);
  EXPECT_NEAR(k.fx, 32.0, 1e-12);
  EXPECT_DOUBLE_EQ(k.cx, 32.0);
  EXPECT_NEAR(k.fy, 16.0, 1e-12);
  EXPECT_DOUBLE_EQ(k.cy, 16.0);
}

TEST(Intrinsics, NarrowerFovGivesLongerFocalLength) {
  CameraParams c;
  double prev = 0.0;
  for (double fov = 2.8; fov > 0.1; fov -= 0.1) {
    c.fov_h = fov;
    const double fx = intrinsics(c, 64, 64).fx;
    EXPECT_GT(fx, prev);
    prev = fx;
  }
}

TEST(Unproject, CenterPixelOfIdentityCamera) {
  CameraParams c;
  DepthMap d(4, 4);
  // The image center sits on a pixel corner for even sizes; use an odd image.
  DepthMap odd(5, 5);
  odd.depth(2, 2) = 2.0;
  odd.valid(2, 2) = 1;
  const PointMap p = unproject(odd, c);
  EXPECT_LT((p.points(2, 2) - Vec3(0, 0, 2)).norm(), 1e-15);
  EXPECT_EQ(p.valid_count(), 1u);
  EXPECT_EQ(unproject(d, c).valid_count(), 0u);
}

TEST(Unproject, PureTranslationShiftsPoints) {
  CameraParams c;
  c.t = Vec3(0, 0, -1);
  DepthMap d(5, 5);
  for (std::size_t i = 0; i < d.depth.size(); ++i) {
    d.depth[i] = 1.0 + 0.1 * static_cast<double>(i);
    d.valid[i] = 1;
  }
  const PointMap moved = unproject(d, c);
  const PointMap base = unproject(d, CameraParams{});
  for (std::size_t i = 0; i < d.depth.size(); ++i) {
    EXPECT_LT((moved.points[i] - (base.points[i] + Vec3(0, 0, 1))).norm(), 1e-12);
  }
}

TEST(Project, CenterAndBehind) {
  CameraParams c;
  const auto p = project(Vec3(0, 0, 2), c, 5, 5);
  ASSERT_TRUE(p);
  EXPECT_DOUBLE_EQ(p->u, 2.5);
  EXPECT_DOUBLE_EQ(p->v, 2.5);
  EXPECT_DOUBLE_EQ(p->z, 2.0);
  EXPECT_FALSE(project(Vec3(0, 0, -1), c, 5, 5));
  EXPECT_FALSE(project(Vec3(1, 1, 0), c, 5, 5));
}

TEST(Project, RoundTripsUnprojectOnRandomCameras) {
  SplitMix64 rng(14);
  const int H = 12, W = 17;
  for (int trial = 0; trial < 100; ++trial) {
    const CameraParams c = random_camera(rng);
    DepthMap d(H, W);
    for (std::size_t i = 0; i < d.depth.size(); ++i) {
      d.depth[i] = rng.uniform(0.5, 20.0);
      d.valid[i] = 1;
    }
    const PointMap pm = unproject(d, c);
    double worst = 0.0;
    for (int v = 0; v < H; ++v) {
      for (int u = 0; u < W; ++u) {
        const auto p = project(pm.points(v, u), c, H, W);
        ASSERT_TRUE(p);
        worst = std::max({worst, std::abs(p->u - (u + 0.5)), std::abs(p->v - (v + 0.5))});
        EXPECT_NEAR(p->z, d.depth(v, u), 1e-9 * d.depth(v, u));
      }
    }
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(Se3, IdentityFixesPoints) {
  SplitMix64 rng(15);
  for (int i = 0; i < 20; ++i) {
    const Vec3 p = random_vec(rng, -5, 5);
    EXPECT_EQ(se3_apply(SE3::identity(), p), p);
  }
}

TEST(Se3, ComposeWithInverseIsIdentity) {
  SplitMix64 rng(16);
  for (int i = 0; i < 100; ++i) {
    const SE3 T{testing::random_rotation(rng), random_vec(rng, -3, 3)};
    const SE3 I = se3_compose(T, se3_invert(T));
    EXPECT_LT((I.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(I.translation.norm(), 1e-12);
    const SE3 J = se3_compose(se3_invert(T), T);
    EXPECT_LT(J.translation.norm(), 1e-12);
  }
}

TEST(Se3, ComposeAppliesRightOperandFirst) {
  const SE3 a = SE3::from_axis_angle(Vec3(0, 0, kPi / 2), Vec3::Zero());
  const SE3 b{Mat3::Identity(), Vec3(1, 0, 0)};
  const Vec3 p = se3_apply(se3_compose(a, b), Vec3::Zero());
  EXPECT_LT((p - Vec3(0, 1, 0)).norm(), 1e-15);
}

TEST(Sim3, ScaleMultipliesPairwiseDistances) {
  SplitMix64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const double s = rng.uniform(0.1, 10.0);
    const SIM3 T{s, testing::random_rotation(rng), random_vec(rng, -3, 3)};
    const Vec3 a = random_vec(rng, -2, 2);
    const Vec3 b = random_vec(rng, -2, 2);
    const double before = (a - b).norm();
    const double after = (sim3_apply(T, a) - sim3_apply(T, b)).norm();
    EXPECT_NEAR(after, s * before, 1e-12 * s * before);
  }
}

TEST(Sim3, TripleScaleTriplesDistances) {
  const SIM3 T{3.0, Mat3::Identity(), Vec3(1, 2, 3)};
  const Vec3 a(0, 0, 0), b(1, 2, 2);
  EXPECT_DOUBLE_EQ((sim3_apply(T, a) - sim3_apply(T, b)).norm(), 9.0);
}

TEST(Sim3, InvertAndCompose) {
  SplitMix64 rng(18);
  for (int i = 0; i < 50; ++i) {
    const SIM3 T{rng.uniform(0.5, 4), testing::random_rotation(rng), random_vec(rng, -2, 2)};
    const Vec3 p = random_vec(rng, -1, 1);
    EXPECT_LT((sim3_apply(sim3_invert(T), sim3_apply(T, p)) - p).norm(), 1e-12);
    const SIM3 TT = sim3_compose(T, T);
    EXPECT_LT((sim3_apply(TT, p) - sim3_apply(T, sim3_apply(T, p))).norm(), 1e-11);
  }
}

TEST(Rotation, AngleOfAxisAngleRotation) {
  for (double a : {0.0, 1e-9, 1e-4, 0.3, 1.5, 3.0}) {
    EXPECT_NEAR(rotation_angle(rotation_from_axis_angle(Vec3(0, a, 0))), a, 1e-12 + 1e-12 * a);
  }
}

}  // namespace
}  // namespace gc4d
