#include "trunk/measure3d.h"

#include <algorithm>
#include <limits>
#include <vector>

#include <Eigen/QR>

#include "trunk/gt_fit.h"

namespace trunk {
namespace {

bool InsideImage(const Eigen::Vector2d& p, int width, int height) {
  return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= width - 1.0 && p.y() <= height - 1.0;
}

int LongestRun(const std::vector<bool>& valid) {
  int best = 0;
  int run = 0;
  for (bool v : valid) {
    run = v ? 0 : run + 1;
    best = std::max(best, run);
  }
  return best;
}

double Median(std::vector<double> values) {
  const auto mid = values.begin() + values.size() / 2;
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

// Marks samples whose depth jumps away from their neighbourhood median.
int RejectJumps(const std::vector<double>& depth, std::vector<bool>& valid,
                const RepairConfig& repair) {
  const int count = static_cast<int>(depth.size());
  const int half = repair.median_window / 2;
  std::vector<bool> outlier(count, false);
  std::vector<double> window;
  for (int k = 0; k < count; ++k) {
    if (!valid[k]) continue;
    window.clear();
    for (int j = std::max(0, k - half); j <= std::min(count - 1, k + half); ++j) {
      if (valid[j]) window.push_back(depth[j]);
    }
    if (window.size() < 3) continue;
    const double median = Median(window);
    if (std::abs(depth[k] - median) > repair.jump_threshold * median) outlier[k] = true;
  }
  int rejected = 0;
  for (int k = 0; k < count; ++k) {
    if (outlier[k]) {
      valid[k] = false;
      ++rejected;
    }
  }
  return rejected;
}

// Linear interpolation over the curve parameter; the ends hold the nearest
// valid value.
void FillGaps(const Params& params, std::vector<double>& depth, const std::vector<bool>& valid) {
  const int count = static_cast<int>(depth.size());
  int prev = -1;
  for (int k = 0; k < count; ++k) {
    if (!valid[k]) continue;
    if (prev < 0) {
      for (int j = 0; j < k; ++j) depth[j] = depth[k];
    } else {
      for (int j = prev + 1; j < k; ++j) {
        const double s = (params[j] - params[prev]) / (params[k] - params[prev]);
        depth[j] = (1.0 - s) * depth[prev] + s * depth[k];
      }
    }
    prev = k;
  }
  for (int j = prev + 1; j < count; ++j) depth[j] = depth[prev];
}

// Least-squares polynomial through the trusted samples, evaluated everywhere.
void SmoothProfile(const Params& params, std::vector<double>& depth,
                   const std::vector<bool>& trusted, int degree) {
  std::vector<double> t;
  std::vector<double> z;
  for (std::size_t k = 0; k < depth.size(); ++k) {
    if (trusted[k]) {
      t.push_back(params[static_cast<Eigen::Index>(k)]);
      z.push_back(depth[k]);
    }
  }
  if (static_cast<int>(t.size()) <= degree) return;
  const Params fit_params(Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size())));
  const Eigen::MatrixXd a = DesignMatrix(fit_params, degree);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < degree + 1) return;
  const Eigen::VectorXd coeffs =
      qr.solve(Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size())));
  const Eigen::MatrixXd full = DesignMatrix(params, degree);
  const Eigen::VectorXd smooth = full * coeffs;
  if (!(smooth.minCoeff() > 0.0) || !smooth.allFinite()) return;
  for (std::size_t k = 0; k < depth.size(); ++k) depth[k] = smooth[static_cast<Eigen::Index>(k)];
}

}  // namespace

void CameraIntrinsics::Validate() const {
  if (!(fx > 0) || !std::isfinite(fx)) {
    throw Error(ErrorCategory::kValidation, "focal length must be positive", "fx");
  }
  if (!(fy > 0) || !std::isfinite(fy)) {
    throw Error(ErrorCategory::kValidation, "focal length must be positive", "fy");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCategory::kValidation, "image size must be positive", "width/height");
  }
  if (!(cx >= 0 && cx < width)) {
    throw Error(ErrorCategory::kValidation, "principal point outside the image", "cx");
  }
  if (!(cy >= 0 && cy < height)) {
    throw Error(ErrorCategory::kValidation, "principal point outside the image", "cy");
  }
}

DepthMap::DepthMap(int width, int height, float fill) {
  if (width <= 0 || height <= 0) ThrowDomain("depth map size must be positive", "depth");
  values_ = Raster::Constant(height, width, fill);
}

DepthMap::DepthMap(Raster values) : values_(std::move(values)) {
  if (values_.size() == 0) ThrowDomain("depth map size must be positive", "depth");
}

void DepthMap::Invalidate(int x, int y) {
  values_(y, x) = std::numeric_limits<float>::quiet_NaN();
}

Eigen::Index DepthMap::ValidCount() const {
  return values_.unaryExpr([](float v) { return IsValidDepth(v) ? 1 : 0; }).cast<Eigen::Index>().sum();
}

std::optional<double> SampleDepth(const DepthMap& map, const Eigen::Vector2d& pixel,
                                  DepthSampling mode) {
  if (!pixel.allFinite() || !InsideImage(pixel, map.width(), map.height())) {
    ThrowDomain("pixel outside the depth map", "pixel");
  }
  if (mode == DepthSampling::kNearest) {
    const int x = std::min(map.width() - 1, static_cast<int>(std::floor(pixel.x() + 0.5)));
    const int y = std::min(map.height() - 1, static_cast<int>(std::floor(pixel.y() + 0.5)));
    if (!map.valid(x, y)) return std::nullopt;
    return static_cast<double>(map.at(x, y));
  }
  const int x0 = static_cast<int>(std::floor(pixel.x()));
  const int y0 = static_cast<int>(std::floor(pixel.y()));
  const int x1 = std::min(x0 + 1, map.width() - 1);
  const int y1 = std::min(y0 + 1, map.height() - 1);
  const double ax = pixel.x() - x0;
  const double ay = pixel.y() - y0;
  const struct {
    int x, y;
    double w;
  } taps[] = {{x0, y0, (1 - ax) * (1 - ay)},
              {x1, y0, ax * (1 - ay)},
              {x0, y1, (1 - ax) * ay},
              {x1, y1, ax * ay}};
  double weight = 0;
  double sum = 0;
  for (const auto& tap : taps) {
    if (tap.w > 0 && map.valid(tap.x, tap.y)) {
      weight += tap.w;
      sum += tap.w * static_cast<double>(map.at(tap.x, tap.y));
    }
  }
  if (weight <= 0) return std::nullopt;
  return sum / weight;
}

Eigen::Vector3d Backproject(const Eigen::Vector2d& pixel, double depth,
                            const CameraIntrinsics& camera) {
  if (!(depth > 0) || !std::isfinite(depth)) ThrowDomain("depth must be positive", "depth");
  return {(pixel.x() - camera.cx) * depth / camera.fx, (pixel.y() - camera.cy) * depth / camera.fy,
          depth};
}

Eigen::Vector2d Project(const Eigen::Vector3d& point, const CameraIntrinsics& camera) {
  if (!(point.z() > 0)) ThrowDomain("point behind the camera", "point");
  return {camera.fx * point.x() / point.z() + camera.cx, camera.fy * point.y() / point.z() + camera.cy};
}

void RepairConfig::Validate() const {
  const auto in_unit = [](double v) { return v > 0 && v <= 1; };
  if (!in_unit(min_valid_fraction)) ThrowDomain("threshold outside (0, 1]", "min_valid_fraction");
  if (!in_unit(max_gap_fraction)) ThrowDomain("threshold outside (0, 1]", "max_gap_fraction");
  if (!in_unit(jump_threshold)) ThrowDomain("threshold outside (0, 1]", "jump_threshold");
  if (median_window < 3 || median_window % 2 == 0) {
    ThrowDomain("median window must be odd and >= 3", "median_window");
  }
  if (profile_degree < 0 || profile_degree > kMaxDegree) {
    ThrowDomain("profile degree outside [0, 20]", "profile_degree");
  }
}

std::string_view QualityName(MeasurementQuality quality) {
  switch (quality) {
    case MeasurementQuality::kClean: return "clean";
    case MeasurementQuality::kRepaired: return "repaired";
    case MeasurementQuality::kRejected: return "rejected";
  }
  return "unknown";
}

SpaceCurveSamples CurveToSpace(const Curve2d& curve, const DepthMap& map,
                               const CameraIntrinsics& camera, int segments,
                               const RepairConfig& repair) {
  if (segments < 1) ThrowDomain("need at least one segment", "segments");
  camera.Validate();
  repair.Validate();
  const int count = segments + 1;
  const Params params = Params::Uniform(count);
  const Eigen::Matrix2Xd pixels = Sample(curve, params);

  std::vector<double> depth(count, 0.0);
  std::vector<bool> valid(count, false);
  int valid_count = 0;
  for (int k = 0; k < count; ++k) {
    if (!InsideImage(pixels.col(k), map.width(), map.height())) continue;
    if (const auto z = SampleDepth(map, pixels.col(k), DepthSampling::kBilinearValid)) {
      depth[k] = *z;
      valid[k] = true;
      ++valid_count;
    }
  }

  SpaceCurveSamples out;
  out.valid_fraction = static_cast<double>(valid_count) / count;
  if (out.valid_fraction < repair.min_valid_fraction || valid_count < 2) {
    throw MeasurementRejected("valid depth fraction " + std::to_string(out.valid_fraction) +
                                  " below " + std::to_string(repair.min_valid_fraction),
                              out.valid_fraction);
  }

  if (!repair.enabled) {
    out.points.resize(3, valid_count);
    Eigen::VectorXd kept(valid_count);
    for (int k = 0, j = 0; k < count; ++k) {
      if (!valid[k]) continue;
      out.points.col(j) = Backproject(pixels.col(k), depth[k], camera);
      kept[j++] = params[k];
    }
    out.source_params = valid_count >= 2 ? Params(kept) : params;
    return out;
  }

  const double gap = static_cast<double>(LongestRun(valid)) / count;
  if (gap > repair.max_gap_fraction) {
    throw MeasurementRejected("depth gap spans " + std::to_string(gap) + " of the curve",
                              out.valid_fraction);
  }
  RejectJumps(depth, valid, repair);
  for (bool v : valid) out.repaired_count += v ? 0 : 1;
  FillGaps(params, depth, valid);
  if (repair.profile_degree > 0) SmoothProfile(params, depth, valid, repair.profile_degree);

  out.points.resize(3, count);
  for (int k = 0; k < count; ++k) out.points.col(k) = Backproject(pixels.col(k), depth[k], camera);
  out.source_params = params;
  return out;
}

double IntegrateLength(const Eigen::Ref<const Eigen::Matrix3Xd>& points) {
  if (points.cols() < 2) ThrowDomain("need at least two points", "points");
  const Eigen::Index m = points.cols() - 1;
  return (points.rightCols(m) - points.leftCols(m)).colwise().norm().sum();
}

MeasurementResult Measure(const Curve2d& curve, const DepthMap& map,
                          const CameraIntrinsics& camera, const MeasureConfig& config) {
  MeasurementResult result;
  result.samples = CurveToSpace(curve, map, camera, config.segments, config.repair);
  result.length = IntegrateLength(result.samples.points);
  result.quality = result.samples.repaired_count == 0 ? MeasurementQuality::kClean
                                                      : MeasurementQuality::kRepaired;
  return result;
}

}  // namespace trunk
