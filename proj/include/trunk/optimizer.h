#pragma once

#include <optional>
#include <vector>

#include "trunk/bezier.h"
#include "trunk/errors.h"
#include "trunk/gt_fit.h"
#include "trunk/losses.h"

namespace trunk {

// Momentum gradient descent on the curve terms of the combined loss
// (lambda_tsl * sampling loss + lambda_epl * endpoint loss). Step size is in
// pixels, so the defaults assume canvases of a few hundred pixels.
struct OptimConfig {
  int max_iters = 5000;
  double step_size = 0.5;
  double momentum = 0.9;
  double tol_loss_delta = 1e-8;
  LossWeights<double> weights{0.0, 1.0, 0.1};
  WingParams<double> wing;
  Params sampling = Params::Uniform(kDefaultSampleCount);

  void Validate() const;
};

struct OptimTrace {
  int iterations = 0;
  std::vector<double> loss_history;
  LossBreakdown<double> final;
  bool converged = false;
};

struct OptimResult {
  Curve2d curve;
  OptimTrace trace;
};

class OptimizationFailure : public Error {
 public:
  OptimizationFailure(std::string message, OptimTrace trace)
      : Error(ErrorCategory::kOptimization, std::move(message), "iteration " +
              std::to_string(trace.iterations)),
        trace_(std::move(trace)) {}

  const OptimTrace& trace() const { return trace_; }

 private:
  OptimTrace trace_;
};

// Control points evenly spaced on the segment joining the target endpoints.
Curve2d EndpointLineInit(const Eigen::Vector2d& head, const Eigen::Vector2d& tail, int degree);

OptimResult FitToTarget(const Curve2d& target, const std::optional<Curve2d>& init,
                        const OptimConfig& config = {});

struct PolylineFit {
  Curve2d curve;
  OptimTrace trace;
  FitResult<double, 2> least_squares;
  // Sampling loss of the refined curve against the least-squares curve.
  double loss_vs_least_squares = 0;
};

// Least-squares fit followed by refinement of the curve against the
// keypoints themselves under the loss objective, starting from the segment
// joining the first and last keypoints.
PolylineFit FitToPolyline(const AnnotationPolyline<double, 2>& target, int degree,
                          const OptimConfig& config = {});

}  // namespace trunk
