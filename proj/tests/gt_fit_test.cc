#include "trunk/gt_fit.h"

#include <random>

#include <gtest/gtest.h>

#include "test_util.h"
#include "trunk/losses.h"

namespace trunk {
namespace {

using testing::RandomCurve;
using Polyline = AnnotationPolyline<double, 2>;

Polyline SampledFrom(const Curve2d& c, int count) {
  return Polyline(Sample(c, Params::Uniform(count)));
}

TEST(DesignMatrix, Examples) {
  EXPECT_TRUE(DesignMatrix(Params::Uniform(2), 1).isIdentity(0));
  const auto m = DesignMatrix(Params::Uniform(5), 4);
  EXPECT_DOUBLE_EQ(m(2, 2), 0.375);
  EXPECT_LT((m.rowwise().sum().array() - 1).abs().maxCoeff(), 1e-15);
  const auto tall = DesignMatrix(Params::Uniform(17), 6);
  EXPECT_EQ(tall.rows(), 17);
  EXPECT_EQ(tall.cols(), 7);
  EXPECT_LT((tall.rowwise().sum().array() - 1).abs().maxCoeff(), 1e-14);
}

TEST(DesignMatrix, Underdetermined) {
  EXPECT_TRUNK_ERROR(DesignMatrix(Params::Uniform(4), 4), ErrorCategory::kUnderdetermined);
}

TEST(Annotation, Validation) {
  EXPECT_TRUNK_ERROR(Polyline(Eigen::Matrix2Xd::Zero(2, 1)), ErrorCategory::kValidation);
  Eigen::Matrix2Xd p = Eigen::Matrix2Xd::Zero(2, 3);
  p(0, 1) = std::nan("");
  EXPECT_TRUNK_ERROR(Polyline{p}, ErrorCategory::kValidation);
}

TEST(FitCurve, CollinearPoints) {
  Eigen::Matrix2Xd p(2, 5);
  for (int k = 0; k < 5; ++k) p.col(k) = Eigen::Vector2d(10 + 5.0 * k, 20 + 2.5 * k);
  const auto fit = FitCurve(Polyline(p), 4);
  EXPECT_LT(fit.residual_rms, 1e-9);
  EXPECT_NEAR((fit.curve.front() - p.col(0)).norm(), 0, 1e-9);
  EXPECT_NEAR((fit.curve.back() - p.col(4)).norm(), 0, 1e-9);
  const Eigen::Vector2d dir = (p.col(4) - p.col(0)).normalized();
  for (int j = 0; j <= 4; ++j) {
    const Eigen::Vector2d d = fit.curve.control_point(j) - p.col(0);
    EXPECT_NEAR(d.x() * dir.y() - d.y() * dir.x(), 0, 1e-9);
  }
  EXPECT_EQ(fit.parameterization, Parameterization::kUniform);
}

TEST(FitCurve, SquareRoundTrip) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const Curve2d c = RandomCurve(rng);
    const auto fit = FitCurve(SampledFrom(c, 5), 4);
    ASSERT_LT((fit.curve.control_points() - c.control_points()).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(FitCurve, OverdeterminedRoundTrip) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const Curve2d c = RandomCurve(rng);
    const auto fit = FitCurve(SampledFrom(c, 9), 4);
    ASSERT_LT(fit.residual_rms, 1e-9);
    ASSERT_LT(SamplingLoss(c, fit.curve, Params::Uniform(50)), 1e-6);
  }
}

TEST(FitCurve, InterpolatesWhenSquare) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 300);
  Eigen::Matrix2Xd p(2, 4);
  for (int k = 0; k < 4; ++k) p.col(k) = Eigen::Vector2d(u(rng), u(rng));
  const auto fit = FitCurve(Polyline(p), 3);
  const Params t = Params::Uniform(4);
  for (int k = 0; k < 4; ++k) EXPECT_LT((fit.curve(t[k]) - p.col(k)).norm(), 1e-6);
}

TEST(FitCurve, AffineEquivariance) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 20; ++k) {
    Eigen::Matrix2Xd p(2, 9);
    for (int j = 0; j < 9; ++j) p.col(j) = Eigen::Vector2d(40.0 * j, 100 * u(rng));
    Curve2d::Affine a = Curve2d::Affine::Identity();
    a.linear() << 1 + u(rng) / 4, u(rng) / 4, u(rng) / 4, 1 + u(rng) / 4;
    a.translation() << 50 * u(rng), 50 * u(rng);
    for (auto param : {Parameterization::kUniform, Parameterization::kChordLength}) {
      if (param == Parameterization::kChordLength) {
        // Chord lengths are invariant only under similarities.
        a.linear() = 1.3 * Eigen::Rotation2Dd(u(rng)).toRotationMatrix();
      }
      const auto fit = FitCurve(Polyline(p), 4, param);
      const auto mapped = FitCurve(Polyline(a * p), 4, param);
      ASSERT_LT((mapped.curve.control_points() - a * fit.curve.control_points())
                    .cwiseAbs()
                    .maxCoeff(),
                1e-6);
    }
  }
}

TEST(FitCurve, ResidualNonIncreasingInDegree) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> noise(0, 3);
  for (int k = 0; k < 20; ++k) {
    const Curve2d c = RandomCurve(rng, 6);
    Eigen::Matrix2Xd p = Sample(c, Params::Uniform(15));
    for (Eigen::Index j = 0; j < p.cols(); ++j) p.col(j) += Eigen::Vector2d(noise(rng), noise(rng));
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 2; n <= 6; ++n) {
      const double r = FitCurve(Polyline(p), n).residual_rms;
      ASSERT_LE(r, prev + 1e-9);
      prev = r;
    }
  }
}

TEST(FitCurve, ChordLength) {
  // Points evenly spaced along a line: chord-length equals uniform.
  Eigen::Matrix2Xd p(2, 6);
  for (int k = 0; k < 6; ++k) p.col(k) = Eigen::Vector2d(3.0 * k, 4.0 * k);
  const auto params = AnnotationParams(Polyline(p), Parameterization::kChordLength);
  EXPECT_LT((params.values() - Params::Uniform(6).values()).cwiseAbs().maxCoeff(), 1e-15);

  Eigen::Matrix2Xd q(2, 3);
  q << 0, 1, 4, 0, 0, 0;
  const auto uneven = AnnotationParams(Polyline(q), Parameterization::kChordLength);
  EXPECT_DOUBLE_EQ(uneven[1], 0.25);
  const auto fit = FitCurve(Polyline(q), 2, Parameterization::kChordLength);
  EXPECT_EQ(fit.parameterization, Parameterization::kChordLength);
  EXPECT_LT(fit.residual_rms, 1e-9);
}

TEST(FitCurve, Errors) {
  EXPECT_TRUNK_ERROR(FitCurve(Polyline(Eigen::Matrix2Xd::Random(2, 4)), 4),
                     ErrorCategory::kUnderdetermined);
  Eigen::Matrix2Xd dup(2, 5);
  dup << 0, 1, 1, 2, 3, 0, 1, 1, 0, 0;
  EXPECT_TRUNK_ERROR(FitCurve(Polyline(dup), 4, Parameterization::kChordLength),
                     ErrorCategory::kDegenerate);
  // Uniform parameterization tolerates the repeated point.
  EXPECT_NO_THROW(FitCurve(Polyline(dup), 4, Parameterization::kUniform));
}

}  // namespace
}  // namespace trunk
