#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "trunk/bezier.h"
#include "trunk/errors.h"

namespace trunk {

struct CurveEvalConfig {
  int sample_count = kDefaultSampleCount;
  // PCK hit radius as a fraction of the box diagonal.
  double pck_threshold = 0.2;
  // Per-sample OKS constant.
  double oks_sigma = 0.05;
  std::vector<double> oks_thresholds = DefaultOksThresholds();
  bool orientation_invariant = true;

  void Validate() const;
  static std::vector<double> DefaultOksThresholds();  // 0.50, 0.55, ..., 0.95
};

double Pck(const Curve2d& pred, const Curve2d& gt, double bbox_diag,
           const CurveEvalConfig& config = {});

// Mean over samples of exp(-d^2 / (2 area sigma^2)).
double Oks(const Curve2d& pred, const Curve2d& gt, double bbox_area,
           const CurveEvalConfig& config = {});

struct ScoredCurve {
  std::string image_id;
  double confidence = 0;
  Curve2d curve;
};

struct GroundTruthCurve {
  std::string image_id;
  Eigen::AlignedBox2d bbox;
  Curve2d curve;
};

struct CurveMap {
  double map50 = 0;
  double map50_95 = 0;
  std::vector<double> ap;  // one per configured threshold
};

// Greedy confidence-ordered matching per image at each OKS threshold,
// all-point interpolated average precision.
CurveMap CurveMeanAp(std::span<const ScoredCurve> predictions,
                     std::span<const GroundTruthCurve> ground_truth,
                     const CurveEvalConfig& config = {});

// Area under the monotone precision envelope for detections sorted by
// descending confidence.
double AveragePrecision(const std::vector<bool>& hits_in_rank_order, int positives);

struct RelativeError {
  double signed_error = 0;
  double abs_error = 0;
};

RelativeError RelErrors(double measured, double truth);

struct Histogram {
  double lo = 0;
  double hi = 0;
  std::vector<int> counts;
};

struct ErrorStats {
  double mean = 0;
  double std = 0;  // sample standard deviation (n - 1), 0 for a single value
  std::pair<double, double> gaussian_fit;  // (mu, sigma) by moment matching
  // Fraction of |error| <= threshold; thresholds 0.05..0.5, plus the largest
  // |error| when it exceeds 0.5 so the curve ends at 1.
  std::vector<std::pair<double, double>> cumulative;
  int count = 0;
  Histogram histogram;  // of the signed errors
};

ErrorStats ComputeErrorStats(std::span<const double> errors);

}  // namespace trunk
