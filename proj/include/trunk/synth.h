#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "trunk/bezier.h"
#include "trunk/measure3d.h"

namespace trunk {

inline constexpr int kOracleSegments = 100000;

// Depth surface Z(u, v) = base + du (u - cx) + dv (v - cy).
struct DepthPlane {
  double base = 1.5;
  double du = 0;
  double dv = 0;

  double operator()(const Eigen::Vector2d& pixel, const CameraIntrinsics& camera) const {
    return base + du * (pixel.x() - camera.cx) + dv * (pixel.y() - camera.cy);
  }
};

struct SceneConfig {
  CameraIntrinsics camera{500.0, 500.0, 320.0, 240.0, 640, 480};
  // Chord between the projected trunk endpoints, pixels.
  double min_span_px = 50;
  double max_span_px = 400;
  // Depth slab containing the whole surface.
  double min_depth = 0.8;
  double max_depth = 2.5;
  // Largest depth change across half the image from the surface tilt, meters.
  double max_tilt = 0.3;
  // Fronto-parallel surface at this depth instead of a random tilted one.
  std::optional<double> flat_depth;
  int oracle_segments = kOracleSegments;
  int max_attempts = 100;

  void Validate() const;
};

struct SyntheticScene {
  Curve2d curve2d = Curve2d::Constant(Eigen::Vector2d::Zero());
  DepthPlane surface;
  Eigen::Matrix3Xd space_curve;  // dense oracle polyline
  DepthMap depth{1, 1, 1.0f};
  CameraIntrinsics camera;
  double oracle_length = 0;
  std::uint64_t seed = 0;
};

// The trunk lies on the depth surface: every image sample u(t) lifts to
// Backproject(u(t), Z(u(t))).
Eigen::Vector3d LiftOnSurface(const Eigen::Vector2d& pixel, const DepthPlane& surface,
                              const CameraIntrinsics& camera);

// Builds the scene for a given image-plane trunk and surface.
SyntheticScene MakeScene(const Curve2d& curve2d, const DepthPlane& surface,
                         const CameraIntrinsics& camera, int oracle_segments = kOracleSegments);

// Random trunk and depth surface, deterministic per seed.
SyntheticScene GenerateScene(std::uint64_t seed, const SceneConfig& config = {});

// Length of a dense polyline; refuses coarse inputs.
double OracleLength(const Eigen::Ref<const Eigen::Matrix3Xd>& space_curve);

struct NoiseConfig {
  double gaussian_sigma_rel = 0.02;
  double dropout_fraction = 0.05;
  bool blob_dropout = false;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Multiplies valid depths by (1 + eta), eta ~ N(0, sigma), then invalidates
// exactly round(dropout * pixels) currently valid pixels.
DepthMap PerturbDepth(const DepthMap& map, const NoiseConfig& noise);

}  // namespace trunk
