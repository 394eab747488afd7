#pragma once

#include <string>

#include <Eigen/Core>
#include <Eigen/QR>

#include "trunk/bezier.h"
#include "trunk/errors.h"

namespace trunk {

enum class Parameterization { kUniform, kChordLength };

// Ordered keypoints, head to tail, one per column.
template <typename Scalar = double, int Dim = 2>
class AnnotationPolyline {
 public:
  using Points = Eigen::Matrix<Scalar, Dim, Eigen::Dynamic>;

  explicit AnnotationPolyline(Points points) : points_(std::move(points)) {
    if (points_.cols() < 2) {
      throw Error(ErrorCategory::kValidation,
                  "annotation needs at least 2 points, got " +
                      std::to_string(points_.cols()),
                  "keypoints");
    }
    if (!points_.allFinite()) {
      throw Error(ErrorCategory::kValidation, "non-finite keypoint coordinate",
                  "keypoints");
    }
  }

  Eigen::Index size() const { return points_.cols(); }
  const Points& points() const { return points_; }

 private:
  Points points_;
};

template <typename Scalar = double, int Dim = 2>
struct FitResult {
  BezierCurve<Scalar, Dim> curve;
  Scalar residual_rms;
  Parameterization parameterization;
};

// Row k holds b_0^n(t_k) .. b_n^n(t_k).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> DesignMatrix(
    const ParamSet<Scalar>& params, int degree) {
  internal::CheckDegree(degree);
  if (params.count() < degree + 1) {
    throw Error(ErrorCategory::kUnderdetermined,
                std::to_string(params.count()) + " parameters cannot determine " +
                    std::to_string(degree + 1) + " control points",
                "params");
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(params.count(), degree + 1);
  for (Eigen::Index k = 0; k < params.count(); ++k) {
    for (int j = 0; j <= degree; ++j) m(k, j) = Bernstein(j, degree, params[k]);
  }
  return m;
}

// Parameter assigned to each annotation point.
template <typename Scalar, int Dim>
ParamSet<Scalar> AnnotationParams(const AnnotationPolyline<Scalar, Dim>& annotation,
                                  Parameterization parameterization) {
  const Eigen::Index count = annotation.size();
  if (parameterization == Parameterization::kUniform) {
    return ParamSet<Scalar>::Uniform(static_cast<int>(count));
  }
  const auto& p = annotation.points();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> t(count);
  t[0] = Scalar(0);
  for (Eigen::Index k = 1; k < count; ++k) {
    const Scalar seg = (p.col(k) - p.col(k - 1)).norm();
    if (!(seg > Scalar(0))) {
      throw Error(ErrorCategory::kDegenerate,
                  "coincident consecutive keypoints give a repeated chord-length parameter",
                  "keypoints[" + std::to_string(k) + "]");
    }
    t[k] = t[k - 1] + seg;
  }
  t /= t[count - 1];
  t[count - 1] = Scalar(1);
  return ParamSet<Scalar>(std::move(t));
}

// Least-squares control points for the annotation (exact interpolation when
// the annotation has degree + 1 points).
template <typename Scalar, int Dim>
FitResult<Scalar, Dim> FitCurve(const AnnotationPolyline<Scalar, Dim>& annotation,
                                int degree = kDefaultDegree,
                                Parameterization parameterization = Parameterization::kUniform) {
  internal::CheckDegree(degree);
  if (annotation.size() < degree + 1) {
    throw Error(ErrorCategory::kUnderdetermined,
                std::to_string(annotation.size()) + " keypoints cannot determine a degree-" +
                    std::to_string(degree) + " curve",
                "keypoints");
  }
  const ParamSet<Scalar> params = AnnotationParams(annotation, parameterization);
  const auto a = DesignMatrix(params, degree);
  Eigen::ColPivHouseholderQR<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> qr(a);
  if (qr.rank() < degree + 1) {
    throw Error(ErrorCategory::kDegenerate, "rank-deficient Bernstein design matrix",
                "keypoints");
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Dim> rhs = annotation.points().transpose();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Dim> solution = qr.solve(rhs);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Dim> residual = a * solution - rhs;
  using std::sqrt;
  const Scalar rms = sqrt(residual.rowwise().squaredNorm().mean());
  return {BezierCurve<Scalar, Dim>(solution.transpose()), rms, parameterization};
}

}  // namespace trunk
