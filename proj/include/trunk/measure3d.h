#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "trunk/bezier.h"
#include "trunk/errors.h"

namespace trunk {

// Pinhole intrinsics. Pixel (u, v) with u along image columns.
struct CameraIntrinsics {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  int width = 0;
  int height = 0;

  void Validate() const;
  bool operator==(const CameraIntrinsics&) const = default;
};

// Metric depth raster (row-major, height x width, meters). A pixel is valid
// when its value is finite and positive; invalidated pixels hold NaN.
// Pixel (x, y) sits at continuous image coordinate (u, v) = (x, y).
class DepthMap {
 public:
  using Raster = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  DepthMap(int width, int height, float fill);
  explicit DepthMap(Raster values);

  int width() const { return static_cast<int>(values_.cols()); }
  int height() const { return static_cast<int>(values_.rows()); }
  float at(int x, int y) const { return values_(y, x); }
  bool valid(int x, int y) const { return IsValidDepth(values_(y, x)); }
  void set(int x, int y, float depth) { values_(y, x) = depth; }
  void Invalidate(int x, int y);

  Eigen::Index ValidCount() const;
  const Raster& values() const { return values_; }
  Raster& values() { return values_; }

  static bool IsValidDepth(float v) { return std::isfinite(v) && v > 0.0f; }

 private:
  Raster values_;
};

enum class DepthSampling { kNearest, kBilinearValid };

// Depth at a continuous pixel position in [0, width-1] x [0, height-1].
// bilinear_valid re-normalizes the weights over the valid neighbours.
std::optional<double> SampleDepth(const DepthMap& map, const Eigen::Vector2d& pixel,
                                  DepthSampling mode = DepthSampling::kBilinearValid);

Eigen::Vector3d Backproject(const Eigen::Vector2d& pixel, double depth,
                            const CameraIntrinsics& camera);
Eigen::Vector2d Project(const Eigen::Vector3d& point, const CameraIntrinsics& camera);

struct RepairConfig {
  bool enabled = true;
  // Reject when fewer samples than this carry valid depth before repair.
  double min_valid_fraction = 0.7;
  // Reject when one run of invalid samples is longer than this fraction.
  double max_gap_fraction = 0.2;
  // Samples farther than jump_threshold (relative) from the median of their
  // window are treated as depth spikes and refilled.
  int median_window = 5;
  double jump_threshold = 0.2;
  // Degree of the least-squares polynomial (Bernstein basis over the curve
  // parameter) fitted to the repaired depth profile; 0 disables. A planar
  // depth surface under a quartic trunk gives a quartic profile, which the
  // default reproduces exactly.
  int profile_degree = 4;

  void Validate() const;
};

struct SpaceCurveSamples {
  Eigen::Matrix3Xd points;
  Params source_params = Params::Uniform(2);
  double valid_fraction = 0;
  int repaired_count = 0;
};

enum class MeasurementQuality { kClean, kRepaired, kRejected };

std::string_view QualityName(MeasurementQuality quality);

struct MeasurementResult {
  double length = 0;
  SpaceCurveSamples samples;
  MeasurementQuality quality = MeasurementQuality::kClean;
};

class MeasurementRejected : public Error {
 public:
  MeasurementRejected(std::string message, double valid_fraction)
      : Error(ErrorCategory::kRejected, std::move(message), "depth samples"),
        valid_fraction_(valid_fraction) {}

  double valid_fraction() const { return valid_fraction_; }

 private:
  double valid_fraction_;
};

inline constexpr int kDefaultMeasureSegments = 200;

struct MeasureConfig {
  int segments = kDefaultMeasureSegments;  // M; the curve is sampled at M + 1 points
  RepairConfig repair;
};

// Samples the curve at segments + 1 uniform parameters, reads and repairs the
// depth along it, and lifts the samples to 3D. Samples outside the image count
// as invalid depth.
SpaceCurveSamples CurveToSpace(const Curve2d& curve, const DepthMap& map,
                               const CameraIntrinsics& camera, int segments,
                               const RepairConfig& repair = {});

// Sum of the Euclidean lengths of consecutive segments.
double IntegrateLength(const Eigen::Ref<const Eigen::Matrix3Xd>& points);

MeasurementResult Measure(const Curve2d& curve, const DepthMap& map,
                          const CameraIntrinsics& camera, const MeasureConfig& config = {});

}  // namespace trunk
