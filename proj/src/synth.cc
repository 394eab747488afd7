#include "trunk/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace trunk {
namespace {

constexpr int kInsideCheckSamples = 1000;

bool CurveInsideImage(const Curve2d& curve, const CameraIntrinsics& camera) {
  // One pixel of margin keeps every bilinear tap inside the raster.
  const Eigen::AlignedBox2d inner(Eigen::Vector2d(1.0, 1.0),
                                  Eigen::Vector2d(camera.width - 2.0, camera.height - 2.0));
  const Eigen::Matrix2Xd pts = Sample(curve, Params::Uniform(kInsideCheckSamples + 1));
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    if (!inner.contains(pts.col(k))) return false;
  }
  return true;
}

bool SurfaceInsideSlab(const DepthPlane& surface, const SceneConfig& config) {
  const auto& cam = config.camera;
  const double w = cam.width - 1.0;
  const double h = cam.height - 1.0;
  for (const Eigen::Vector2d corner : {Eigen::Vector2d(0, 0), Eigen::Vector2d(w, 0),
                                       Eigen::Vector2d(0, h), Eigen::Vector2d(w, h)}) {
    const double z = surface(corner, cam);
    if (z < config.min_depth || z > config.max_depth) return false;
  }
  return true;
}

}  // namespace

void SceneConfig::Validate() const {
  camera.Validate();
  if (!(min_span_px > 0 && max_span_px >= min_span_px)) {
    ThrowDomain("span range must be positive and ordered", "span");
  }
  if (!(min_depth > 0 && max_depth > min_depth)) {
    ThrowDomain("depth slab must be positive and ordered", "depth");
  }
  if (!(max_tilt >= 0)) ThrowDomain("tilt must be nonnegative", "max_tilt");
  if (flat_depth && !(*flat_depth > 0)) ThrowDomain("flat depth must be positive", "flat_depth");
  if (oracle_segments < kOracleSegments) {
    ThrowDomain("oracle needs at least 1e5 segments", "oracle_segments");
  }
  if (max_attempts < 1) ThrowDomain("attempt budget must be positive", "max_attempts");
}

Eigen::Vector3d LiftOnSurface(const Eigen::Vector2d& pixel, const DepthPlane& surface,
                              const CameraIntrinsics& camera) {
  return Backproject(pixel, surface(pixel, camera), camera);
}

SyntheticScene MakeScene(const Curve2d& curve2d, const DepthPlane& surface,
                         const CameraIntrinsics& camera, int oracle_segments) {
  camera.Validate();
  SyntheticScene scene;
  scene.curve2d = curve2d;
  scene.surface = surface;
  scene.camera = camera;

  DepthMap::Raster raster(camera.height, camera.width);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      raster(y, x) = static_cast<float>(surface(Eigen::Vector2d(x, y), camera));
    }
  }
  scene.depth = DepthMap(std::move(raster));

  const Params dense = Params::Uniform(oracle_segments + 1);
  scene.space_curve.resize(3, dense.count());
  for (Eigen::Index k = 0; k < dense.count(); ++k) {
    scene.space_curve.col(k) = LiftOnSurface(Evaluate(curve2d, dense[k]), surface, camera);
  }
  scene.oracle_length = OracleLength(scene.space_curve);
  return scene;
}

SyntheticScene GenerateScene(std::uint64_t seed, const SceneConfig& config) {
  config.Validate();
  const auto& cam = config.camera;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const double span = uniform(config.min_span_px, config.max_span_px);
    const double angle = uniform(0.0, 2.0 * std::numbers::pi);
    const Eigen::Vector2d center(uniform(0.0, cam.width - 1.0), uniform(0.0, cam.height - 1.0));
    const Eigen::Vector2d axis(std::cos(angle), std::sin(angle));
    const Eigen::Vector2d normal(-axis.y(), axis.x());

    Eigen::Matrix2Xd cps(2, kDefaultDegree + 1);
    for (int i = 0; i <= kDefaultDegree; ++i) {
      const bool interior = i > 0 && i < kDefaultDegree;
      const double along = static_cast<double>(i) / kDefaultDegree - 0.5 +
                           (interior ? uniform(-0.05, 0.05) : 0.0);
      const double across = interior ? uniform(-0.25, 0.25) : 0.0;
      cps.col(i) = center + span * (along * axis + across * normal);
    }
    const Curve2d curve(cps);

    DepthPlane surface;
    if (config.flat_depth) {
      surface.base = *config.flat_depth;
    } else {
      surface.base = uniform(config.min_depth, config.max_depth);
      surface.du = uniform(-1.0, 1.0) * config.max_tilt / (0.5 * cam.width);
      surface.dv = uniform(-1.0, 1.0) * config.max_tilt / (0.5 * cam.height);
    }
    if (!CurveInsideImage(curve, cam) || !SurfaceInsideSlab(surface, config)) continue;

    SyntheticScene scene = MakeScene(curve, surface, cam, config.oracle_segments);
    scene.seed = seed;
    return scene;
  }
  throw Error(ErrorCategory::kDomain,
              "no admissible scene after " + std::to_string(config.max_attempts) + " attempts",
              "seed " + std::to_string(seed));
}

double OracleLength(const Eigen::Ref<const Eigen::Matrix3Xd>& space_curve) {
  if (space_curve.cols() < kOracleSegments) {
    ThrowDomain("oracle polyline has " + std::to_string(space_curve.cols()) +
                    " samples, needs at least 1e5",
                "space_curve");
  }
  return IntegrateLength(space_curve);
}

void NoiseConfig::Validate() const {
  if (!(gaussian_sigma_rel >= 0) || !std::isfinite(gaussian_sigma_rel)) {
    ThrowDomain("noise sigma must be nonnegative", "gaussian_sigma_rel");
  }
  if (!(dropout_fraction >= 0 && dropout_fraction < 1)) {
    ThrowDomain("dropout fraction outside [0, 1)", "dropout_fraction");
  }
}

DepthMap PerturbDepth(const DepthMap& map, const NoiseConfig& noise) {
  noise.Validate();
  DepthMap out = map;
  std::mt19937_64 rng(noise.seed);
  const int w = map.width();
  const int h = map.height();

  if (noise.gaussian_sigma_rel > 0) {
    std::normal_distribution<double> eta(0.0, noise.gaussian_sigma_rel);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!out.valid(x, y)) continue;
        const double z = static_cast<double>(out.at(x, y)) * (1.0 + eta(rng));
        if (z > 0) {
          out.set(x, y, static_cast<float>(z));
        } else {
          out.Invalidate(x, y);
        }
      }
    }
  }

  std::vector<int> valid;
  for (int i = 0; i < w * h; ++i) {
    if (out.valid(i % w, i / w)) valid.push_back(i);
  }
  const auto quota = std::min<std::size_t>(
      valid.size(), static_cast<std::size_t>(std::llround(noise.dropout_fraction * w * h)));
  if (quota == 0) return out;

  if (!noise.blob_dropout) {
    // Partial Fisher-Yates: the first `quota` entries become a uniform sample.
    for (std::size_t i = 0; i < quota; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, valid.size() - 1);
      std::swap(valid[i], valid[pick(rng)]);
      out.Invalidate(valid[i] % w, valid[i] / w);
    }
    return out;
  }

  // Contiguous holes: discs at random centres, filled in scan order until the
  // quota is met exactly.
  std::size_t removed = 0;
  std::uniform_int_distribution<int> px(0, w - 1);
  std::uniform_int_distribution<int> py(0, h - 1);
  std::uniform_int_distribution<int> pr(2, 8);
  while (removed < quota) {
    const int cx = px(rng);
    const int cy = py(rng);
    const int r = pr(rng);
    for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r) && removed < quota; ++y) {
      for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r) && removed < quota; ++x) {
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r || !out.valid(x, y)) continue;
        out.Invalidate(x, y);
        ++removed;
      }
    }
  }
  return out;
}

}  // namespace trunk
