#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "trunk/bezier.h"
#include "trunk/errors.h"

namespace trunk {

// Wing loss shape. Defaults are the values commonly used for landmark
// regression (w = 10, epsilon = 2).
template <typename Scalar = double>
struct WingParams {
  Scalar w = Scalar(10);
  Scalar epsilon = Scalar(2);

  void Validate() const {
    if (!(w > 0) || !(epsilon > 0) || !std::isfinite(static_cast<double>(Offset()))) {
      ThrowDomain("wing parameters need w > 0 and epsilon > 0", "wing");
    }
  }

  // C = w - w ln(1 + w / epsilon); joins the log and linear pieces at |x| = w.
  Scalar Offset() const {
    using std::log1p;
    return w - w * log1p(w / epsilon);
  }
};

template <typename Scalar = double>
struct LossWeights {
  Scalar det = Scalar(1);
  Scalar tsl = Scalar(1);
  Scalar epl = Scalar(0.1);

  void Validate() const {
    for (Scalar v : {det, tsl, epl}) {
      if (!(v >= 0) || !std::isfinite(static_cast<double>(v))) {
        ThrowDomain("loss weights must be finite and nonnegative", "weights");
      }
    }
  }
};

template <typename Scalar = double>
struct LossBreakdown {
  Scalar det = 0;
  Scalar tsl = 0;
  Scalar epl = 0;
  Scalar total = 0;
};

namespace internal {

template <typename Scalar>
Scalar Sign(Scalar x) {
  return Scalar((x > Scalar(0)) - (x < Scalar(0)));
}

}  // namespace internal

// Mean over the parameter set of the L1 distance between corresponding
// samples of the two curves.
template <typename Scalar, int Dim>
Scalar SamplingLoss(const BezierCurve<Scalar, Dim>& pred, const BezierCurve<Scalar, Dim>& gt,
                    const ParamSet<Scalar>& params) {
  Scalar sum = 0;
  for (Eigen::Index k = 0; k < params.count(); ++k) {
    sum += (Evaluate(gt, params[k]) - Evaluate(pred, params[k])).template lpNorm<1>();
  }
  return sum / Scalar(params.count());
}

// Subgradient of SamplingLoss with respect to pred's control points, using
// sign(0) = 0.
template <typename Scalar, int Dim>
typename BezierCurve<Scalar, Dim>::ControlPoints SamplingLossGrad(
    const BezierCurve<Scalar, Dim>& pred, const BezierCurve<Scalar, Dim>& gt,
    const ParamSet<Scalar>& params) {
  const int n = pred.degree();
  typename BezierCurve<Scalar, Dim>::ControlPoints grad =
      BezierCurve<Scalar, Dim>::ControlPoints::Zero(Dim, n + 1);
  for (Eigen::Index k = 0; k < params.count(); ++k) {
    const Scalar t = params[k];
    const auto diff = (Evaluate(pred, t) - Evaluate(gt, t)).eval();
    const auto sign = diff.unaryExpr([](Scalar v) { return internal::Sign(v); }).eval();
    if (sign.isZero()) continue;
    for (int j = 0; j <= n; ++j) grad.col(j) += Bernstein(j, n, t) * sign;
  }
  return grad / Scalar(params.count());
}

template <typename Scalar>
Scalar Wing(Scalar x, const WingParams<Scalar>& params = {}) {
  using std::abs;
  using std::log1p;
  const Scalar a = abs(x);
  if (a < params.w) return params.w * log1p(a / params.epsilon);
  return a - params.Offset();
}

// d wing / d|x| for |x| >= 0.
template <typename Scalar>
Scalar WingSlope(Scalar abs_x, const WingParams<Scalar>& params = {}) {
  if (abs_x < params.w) return params.w / (params.epsilon + abs_x);
  return Scalar(1);
}

// Wing loss of the Euclidean deviation of the first and last control points.
template <typename Scalar, int Dim>
Scalar EndpointLoss(const BezierCurve<Scalar, Dim>& pred, const BezierCurve<Scalar, Dim>& gt,
                    const WingParams<Scalar>& params = {}) {
  if (pred.degree() != gt.degree()) {
    ThrowDomain("endpoint loss needs curves of equal degree", "gt");
  }
  return Wing((pred.front() - gt.front()).norm(), params) +
         Wing((pred.back() - gt.back()).norm(), params);
}

// Gradient of EndpointLoss over pred's control points; zero at D = 0 and for
// every intermediate control point.
template <typename Scalar, int Dim>
typename BezierCurve<Scalar, Dim>::ControlPoints EndpointLossGrad(
    const BezierCurve<Scalar, Dim>& pred, const BezierCurve<Scalar, Dim>& gt,
    const WingParams<Scalar>& params = {}) {
  if (pred.degree() != gt.degree()) {
    ThrowDomain("endpoint loss needs curves of equal degree", "gt");
  }
  const int n = pred.degree();
  typename BezierCurve<Scalar, Dim>::ControlPoints grad =
      BezierCurve<Scalar, Dim>::ControlPoints::Zero(Dim, n + 1);
  for (int i : {0, n}) {
    const auto diff = (pred.control_point(i) - gt.control_point(i)).eval();
    const Scalar d = diff.norm();
    if (d > Scalar(0)) grad.col(i) += WingSlope(d, params) * diff / d;
  }
  return grad;
}

template <typename Scalar>
LossBreakdown<Scalar> CombinedLoss(Scalar det, Scalar tsl, Scalar epl,
                                   const LossWeights<Scalar>& weights = {}) {
  weights.Validate();
  if (!std::isfinite(static_cast<double>(det)) || !std::isfinite(static_cast<double>(tsl)) ||
      !std::isfinite(static_cast<double>(epl))) {
    ThrowDomain("loss terms must be finite", "combined_loss");
  }
  if (tsl < 0) ThrowDomain("sampling loss must be nonnegative", "tsl");
  if (epl < 0) ThrowDomain("endpoint loss must be nonnegative", "epl");
  return {det, tsl, epl, weights.det * det + weights.tsl * tsl + weights.epl * epl};
}

}  // namespace trunk
