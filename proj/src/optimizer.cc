#include "trunk/optimizer.h"

#include <cmath>

namespace trunk {
namespace {

constexpr double kDivergenceLimit = 1e9;
constexpr int kStableIterations = 10;

// Targets are stored as points at fixed parameters plus the two endpoints, so
// a known curve and a raw keypoint polyline share one objective.
struct Objective {
  Params params;
  Eigen::Matrix2Xd targets;
  Eigen::Vector2d head;
  Eigen::Vector2d tail;
  const OptimConfig& config;

  LossBreakdown<double> Evaluate(const Curve2d& pred) const {
    double tsl = 0;
    for (Eigen::Index k = 0; k < params.count(); ++k) {
      tsl += (targets.col(k) - trunk::Evaluate(pred, params[k])).lpNorm<1>();
    }
    tsl /= static_cast<double>(params.count());
    const double epl = Wing((pred.front() - head).norm(), config.wing) +
                       Wing((pred.back() - tail).norm(), config.wing);
    return CombinedLoss(0.0, tsl, epl, config.weights);
  }

  Eigen::Matrix2Xd Gradient(const Curve2d& pred) const {
    const int n = pred.degree();
    Eigen::Matrix2Xd grad = Eigen::Matrix2Xd::Zero(2, n + 1);
    if (config.weights.tsl > 0) {
      Eigen::Matrix2Xd tsl = Eigen::Matrix2Xd::Zero(2, n + 1);
      for (Eigen::Index k = 0; k < params.count(); ++k) {
        const double t = params[k];
        const Eigen::Vector2d diff = trunk::Evaluate(pred, t) - targets.col(k);
        const Eigen::Vector2d sign = diff.unaryExpr([](double v) { return internal::Sign(v); });
        if (sign.isZero()) continue;
        for (int j = 0; j <= n; ++j) tsl.col(j) += Bernstein(j, n, t) * sign;
      }
      grad += config.weights.tsl / static_cast<double>(params.count()) * tsl;
    }
    if (config.weights.epl > 0) {
      const std::pair<int, Eigen::Vector2d> ends[] = {{0, head}, {n, tail}};
      for (const auto& [i, goal] : ends) {
        const Eigen::Vector2d diff = pred.control_point(i) - goal;
        const double d = diff.norm();
        if (d > 0) grad.col(i) += config.weights.epl * WingSlope(d, config.wing) * diff / d;
      }
    }
    return grad;
  }
};

OptimResult Descend(const Objective& objective, Curve2d start) {
  const OptimConfig& config = objective.config;
  OptimTrace trace;
  Curve2d pred = std::move(start);
  LossBreakdown<double> current = objective.Evaluate(pred);
  trace.loss_history.push_back(current.total);
  trace.final = current;
  if (current.total == 0) {
    trace.converged = true;
    return {pred, trace};
  }

  // Iterates from the second half of the budget are averaged; a constant-step
  // subgradient method cycles around the minimizer and the average sits
  // closer to it than any single iterate.
  const int average_from = config.max_iters / 2 + 1;
  Eigen::Matrix2Xd average = Eigen::Matrix2Xd::Zero(2, pred.degree() + 1);
  int averaged = 0;

  Eigen::Matrix2Xd velocity = Eigen::Matrix2Xd::Zero(2, pred.degree() + 1);
  int stable = 0;
  for (int it = 1; it <= config.max_iters; ++it) {
    velocity = config.momentum * velocity - config.step_size * objective.Gradient(pred);
    Eigen::Matrix2Xd next = pred.control_points() + velocity;
    trace.iterations = it;
    if (!next.allFinite()) {
      throw OptimizationFailure("non-finite control points", std::move(trace));
    }
    pred = Curve2d(std::move(next));
    const LossBreakdown<double> updated = objective.Evaluate(pred);
    trace.loss_history.push_back(updated.total);
    if (!std::isfinite(updated.total) || updated.total > kDivergenceLimit) {
      throw OptimizationFailure("loss diverged", std::move(trace));
    }
    trace.final = updated;
    if (it >= average_from) {
      average += pred.control_points();
      ++averaged;
    }
    stable = std::abs(updated.total - current.total) < config.tol_loss_delta ? stable + 1 : 0;
    current = updated;
    if (current.total == 0 || stable >= kStableIterations) {
      trace.converged = true;
      break;
    }
  }

  if (averaged > 1) {
    Curve2d mean(average / static_cast<double>(averaged));
    const LossBreakdown<double> mean_loss = objective.Evaluate(mean);
    if (mean_loss.total < current.total) {
      trace.loss_history.push_back(mean_loss.total);
      trace.final = mean_loss;
      return {std::move(mean), trace};
    }
  }
  return {pred, trace};
}

}  // namespace

void OptimConfig::Validate() const {
  if (max_iters < 1) ThrowDomain("max_iters must be positive", "max_iters");
  if (!(step_size > 0) || !std::isfinite(step_size)) {
    ThrowDomain("step size must be positive", "step_size");
  }
  if (!(momentum >= 0 && momentum < 1)) ThrowDomain("momentum must lie in [0, 1)", "momentum");
  if (!(tol_loss_delta > 0)) ThrowDomain("tolerance must be positive", "tol_loss_delta");
  weights.Validate();
  if (weights.det != 0) ThrowDomain("detection weight must be 0 for curve fitting", "weights");
  wing.Validate();
}

Curve2d EndpointLineInit(const Eigen::Vector2d& head, const Eigen::Vector2d& tail, int degree) {
  return Curve2d::Line(head, tail, degree);
}

OptimResult FitToTarget(const Curve2d& target, const std::optional<Curve2d>& init,
                        const OptimConfig& config) {
  config.Validate();
  if (init && init->degree() != target.degree()) {
    ThrowDomain("initial curve degree differs from target", "init");
  }
  const Objective objective{config.sampling, Sample(target, config.sampling), target.front(),
                            target.back(), config};
  return Descend(objective,
                 init ? *init : EndpointLineInit(target.front(), target.back(), target.degree()));
}

PolylineFit FitToPolyline(const AnnotationPolyline<double, 2>& target, int degree,
                          const OptimConfig& config) {
  config.Validate();
  FitResult<double, 2> ls = FitCurve(target, degree, Parameterization::kUniform);
  const auto& pts = target.points();
  const Objective objective{AnnotationParams(target, Parameterization::kUniform), pts,
                            pts.col(0), pts.col(pts.cols() - 1), config};
  OptimResult refined = Descend(objective, EndpointLineInit(objective.head, objective.tail, degree));
  const double gap = SamplingLoss(refined.curve, ls.curve, config.sampling);
  return {std::move(refined.curve), std::move(refined.trace), std::move(ls), gap};
}

}  // namespace trunk
