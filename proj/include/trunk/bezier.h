#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "trunk/errors.h"

namespace trunk {

inline constexpr int kMaxDegree = 20;
inline constexpr int kDefaultDegree = 4;
inline constexpr int kDefaultSampleCount = 50;

namespace internal {

constexpr std::array<std::array<std::uint64_t, kMaxDegree + 1>, kMaxDegree + 1>
MakePascalTriangle() {
  std::array<std::array<std::uint64_t, kMaxDegree + 1>, kMaxDegree + 1> rows{};
  for (int n = 0; n <= kMaxDegree; ++n) {
    rows[n][0] = 1;
    rows[n][n] = 1;
    for (int i = 1; i < n; ++i) rows[n][i] = rows[n - 1][i - 1] + rows[n - 1][i];
  }
  return rows;
}

inline constexpr auto kPascal = MakePascalTriangle();

template <typename Scalar>
void CheckParameter(Scalar t) {
  if (!(t >= Scalar(0) && t <= Scalar(1))) {
    ThrowDomain("curve parameter " + std::to_string(static_cast<double>(t)) +
                    " outside [0, 1]",
                "t");
  }
}

inline void CheckDegree(int n) {
  if (n < 0 || n > kMaxDegree) {
    ThrowDomain("degree " + std::to_string(n) + " outside [0, " +
                    std::to_string(kMaxDegree) + "]",
                "degree");
  }
}

}  // namespace internal

// Exact C(n, i) for n <= 20.
inline std::uint64_t Binomial(int n, int i) {
  internal::CheckDegree(n);
  if (i < 0 || i > n) {
    ThrowDomain("binomial index " + std::to_string(i) + " outside [0, " +
                    std::to_string(n) + "]",
                "i");
  }
  return internal::kPascal[n][i];
}

// b_i^n(t) = C(n, i) t^i (1 - t)^(n - i)
template <typename Scalar = double>
Scalar Bernstein(int i, int n, Scalar t) {
  internal::CheckParameter(t);
  const auto c = static_cast<Scalar>(Binomial(n, i));
  using std::pow;
  return c * pow(t, i) * pow(Scalar(1) - t, n - i);
}

// Sorted parameter values in [0, 1] at which curves are sampled.
template <typename Scalar = double>
class ParamSet {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit ParamSet(Vector values) : values_(std::move(values)) {
    if (values_.size() < 1) ThrowDomain("empty parameter set", "params");
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
      internal::CheckParameter(values_[k]);
      if (k > 0 && !(values_[k] > values_[k - 1])) {
        ThrowDomain("parameters must be strictly increasing",
                    "params[" + std::to_string(k) + "]");
      }
    }
  }

  // t_k = k / (count - 1), k = 0..count-1
  static ParamSet Uniform(int count) {
    if (count < 2) {
      ThrowDomain("uniform parameter count " + std::to_string(count) + " < 2",
                  "count");
    }
    Vector v(count);
    const Scalar denom = Scalar(count - 1);
    for (int k = 0; k < count; ++k) v[k] = Scalar(k) / denom;
    return ParamSet(std::move(v));
  }

  Eigen::Index count() const { return values_.size(); }
  Scalar operator[](Eigen::Index k) const { return values_[k]; }
  const Vector& values() const { return values_; }

 private:
  Vector values_;
};

template <typename Scalar = double>
ParamSet<Scalar> UniformParams(int count) {
  return ParamSet<Scalar>::Uniform(count);
}

// Bezier curve in Bernstein form, one control point per column.
template <typename Scalar = double, int Dim = 2>
class BezierCurve {
 public:
  using Point = Eigen::Matrix<Scalar, Dim, 1>;
  using ControlPoints = Eigen::Matrix<Scalar, Dim, Eigen::Dynamic>;
  using Affine = Eigen::Transform<Scalar, Dim, Eigen::Affine>;

  explicit BezierCurve(ControlPoints control_points)
      : points_(std::move(control_points)) {
    if (points_.cols() < 1) ThrowDomain("curve needs a control point", "control_points");
    internal::CheckDegree(static_cast<int>(points_.cols()) - 1);
    if (!points_.allFinite()) {
      ThrowDomain("non-finite control point coordinate", "control_points");
    }
  }

  static BezierCurve Constant(const Point& p, int degree = kDefaultDegree) {
    internal::CheckDegree(degree);
    return BezierCurve(ControlPoints(p.replicate(1, degree + 1)));
  }

  // Control points evenly spaced along the segment a -> b. Such a curve is
  // traversed at constant speed.
  static BezierCurve Line(const Point& a, const Point& b,
                          int degree = kDefaultDegree) {
    internal::CheckDegree(degree);
    ControlPoints cps(Dim, degree + 1);
    for (int i = 0; i <= degree; ++i) {
      const Scalar s = degree == 0 ? Scalar(0) : Scalar(i) / Scalar(degree);
      cps.col(i) = a + s * (b - a);
    }
    return BezierCurve(std::move(cps));
  }

  int degree() const { return static_cast<int>(points_.cols()) - 1; }
  const ControlPoints& control_points() const { return points_; }
  Point control_point(int i) const { return points_.col(i); }
  Point front() const { return points_.col(0); }
  Point back() const { return points_.col(points_.cols() - 1); }

  BezierCurve Reversed() const { return BezierCurve(points_.rowwise().reverse()); }

  BezierCurve Transformed(const Affine& a) const {
    return BezierCurve(ControlPoints(a * points_));
  }

  BezierCurve Translated(const Point& d) const {
    return BezierCurve(ControlPoints(points_.colwise() + d));
  }

  Point operator()(Scalar t) const;

  bool operator==(const BezierCurve& other) const {
    return points_.cols() == other.points_.cols() && points_ == other.points_;
  }

 private:
  ControlPoints points_;
};

using Curve2d = BezierCurve<double, 2>;
using Curve3d = BezierCurve<double, 3>;
using Params = ParamSet<double>;

// de Casteljau evaluation.
template <typename Scalar, int Dim>
typename BezierCurve<Scalar, Dim>::Point Evaluate(
    const BezierCurve<Scalar, Dim>& curve, Scalar t) {
  internal::CheckParameter(t);
  typename BezierCurve<Scalar, Dim>::ControlPoints work = curve.control_points();
  const Scalar s = Scalar(1) - t;
  for (int r = curve.degree(); r > 0; --r) {
    for (int i = 0; i < r; ++i) work.col(i) = s * work.col(i) + t * work.col(i + 1);
  }
  return work.col(0);
}

template <typename Scalar, int Dim>
typename BezierCurve<Scalar, Dim>::Point BezierCurve<Scalar, Dim>::operator()(
    Scalar t) const {
  return Evaluate(*this, t);
}

// One column per parameter value.
template <typename Scalar, int Dim>
Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> Sample(
    const BezierCurve<Scalar, Dim>& curve, const ParamSet<Scalar>& params) {
  Eigen::Matrix<Scalar, Dim, Eigen::Dynamic> out(Dim, params.count());
  for (Eigen::Index k = 0; k < params.count(); ++k) out.col(k) = Evaluate(curve, params[k]);
  return out;
}

// Bounding box of the control polygon; contains the whole curve.
template <typename Scalar, int Dim>
Eigen::AlignedBox<Scalar, Dim> ControlBox(const BezierCurve<Scalar, Dim>& curve) {
  const auto& p = curve.control_points();
  return Eigen::AlignedBox<Scalar, Dim>(p.rowwise().minCoeff(), p.rowwise().maxCoeff());
}

}  // namespace trunk
