#include "trunk/losses.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace trunk {
namespace {

using testing::RandomCurve;

const WingParams<double> kWing{10, 2};

// Pair whose per-coordinate sample differences all exceed `margin`, so the
// L1 objective is smooth around pred.
std::pair<Curve2d, Curve2d> KinkFreePair(std::mt19937_64& rng, const Params& params,
                                         double margin = 1e-3) {
  std::uniform_real_distribution<double> u(-20, 20);
  for (;;) {
    const Curve2d pred = RandomCurve(rng);
    Eigen::Matrix2Xd delta(2, 5);
    for (int j = 0; j < 5; ++j) delta.col(j) = Eigen::Vector2d(u(rng), u(rng));
    const Curve2d gt(Eigen::Matrix2Xd(pred.control_points() + delta));
    const Eigen::Matrix2Xd diff = Sample(pred, params) - Sample(gt, params);
    if (diff.cwiseAbs().minCoeff() > margin) return {pred, gt};
  }
}

template <typename F>
Eigen::Matrix2Xd CentralDifference(const Curve2d& pred, F&& f, double h = 1e-6) {
  Eigen::Matrix2Xd g(2, pred.degree() + 1);
  for (int j = 0; j <= pred.degree(); ++j) {
    for (int r = 0; r < 2; ++r) {
      Eigen::Matrix2Xd plus = pred.control_points();
      Eigen::Matrix2Xd minus = pred.control_points();
      plus(r, j) += h;
      minus(r, j) -= h;
      g(r, j) = (f(Curve2d(plus)) - f(Curve2d(minus))) / (2 * h);
    }
  }
  return g;
}

double RelativeError(const Eigen::Matrix2Xd& a, const Eigen::Matrix2Xd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

double BruteForceSamplingLoss(const Curve2d& a, const Curve2d& b, int count) {
  double sum = 0;
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    const Eigen::Vector2d d = testing::BernsteinSum(a, t) - testing::BernsteinSum(b, t);
    sum += std::abs(d.x()) + std::abs(d.y());
  }
  return sum / count;
}

TEST(SamplingLoss, Examples) {
  std::mt19937_64 rng(21);
  const Params p = Params::Uniform(50);
  const Curve2d c = RandomCurve(rng);
  EXPECT_EQ(SamplingLoss(c, c, p), 0.0);
  EXPECT_NEAR(SamplingLoss(c, c.Translated({3, 4}), p), 7.0, 1e-10);
  const Curve2d d = RandomCurve(rng);
  EXPECT_NEAR(SamplingLoss(c, d, p), BruteForceSamplingLoss(c, d, 50), 1e-9);
}

TEST(SamplingLoss, Laws) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int k = 0; k < 100; ++k) {
    const Params p = Params::Uniform(2 + k % 60);
    const Curve2d a = RandomCurve(rng);
    const Curve2d b = RandomCurve(rng);
    const Curve2d c = RandomCurve(rng);
    ASSERT_EQ(SamplingLoss(a, b, p), SamplingLoss(b, a, p));
    ASSERT_LE(SamplingLoss(a, c, p), SamplingLoss(a, b, p) + SamplingLoss(b, c, p) + 1e-10);
    const double dx = u(rng);
    const double dy = u(rng);
    ASSERT_NEAR(SamplingLoss(a, a.Translated({dx, dy}), p), std::abs(dx) + std::abs(dy), 1e-10);
    ASSERT_GE(SamplingLoss(a, b, p), 0.0);
  }
}

TEST(SamplingLossGrad, AtMinimumIsZero) {
  std::mt19937_64 rng(23);
  const Curve2d c = RandomCurve(rng);
  EXPECT_TRUE(SamplingLossGrad(c, c, Params::Uniform(50)).isZero(0));
}

TEST(SamplingLossGrad, TranslatedTarget) {
  std::mt19937_64 rng(24);
  const Params p = Params::Uniform(50);
  const Curve2d gt = RandomCurve(rng);
  const Curve2d pred = gt.Translated({3, 4});
  const Eigen::Matrix2Xd g = SamplingLossGrad(pred, gt, p);
  for (int j = 0; j <= 4; ++j) {
    double mean = 0;
    for (int k = 0; k < p.count(); ++k) mean += Bernstein(j, 4, p[k]);
    mean /= p.count();
    EXPECT_NEAR(g(0, j), mean, 1e-14);
    EXPECT_NEAR(g(1, j), mean, 1e-14);
    EXPECT_GT(g(0, j), 0);
  }
  EXPECT_NEAR(g.row(0).sum(), 1.0, 1e-12);
  EXPECT_NEAR(g.row(1).sum(), 1.0, 1e-12);
}

TEST(SamplingLossGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(25);
  const Params p = Params::Uniform(50);
  for (int k = 0; k < 50; ++k) {
    const auto [pred, gt] = KinkFreePair(rng, p);
    const Eigen::Matrix2Xd fd =
        CentralDifference(pred, [&](const Curve2d& c) { return SamplingLoss(c, gt, p); });
    ASSERT_LT(RelativeError(SamplingLossGrad(pred, gt, p), fd), 1e-4);
  }
}

TEST(Wing, Values) {
  EXPECT_EQ(Wing(0.0, kWing), 0.0);
  EXPECT_NEAR(Wing(2.0, kWing), 10 * std::log(2.0), 1e-9);
  EXPECT_NEAR(Wing(15.0, kWing), 5 + 10 * std::log(6.0), 1e-9);
  EXPECT_NEAR(Wing(-15.0, kWing), 5 + 10 * std::log(6.0), 1e-9);
  EXPECT_NEAR(kWing.Offset(), 10 - 10 * std::log(6.0), 1e-12);
}

TEST(Wing, ContinuousEvenMonotone) {
  const double w = kWing.w;
  EXPECT_NEAR(Wing(std::nextafter(w, 0.0), kWing), Wing(w, kWing), 1e-12);
  EXPECT_NEAR(Wing(-std::nextafter(w, 0.0), kWing), Wing(-w, kWing), 1e-12);
  double prev = -1;
  for (int k = 0; k <= 4000; ++k) {
    const double x = k * 0.01;
    ASSERT_EQ(Wing(x, kWing), Wing(-x, kWing));
    ASSERT_GE(Wing(x, kWing), prev);
    prev = Wing(x, kWing);
  }
}

TEST(Wing, SlopeMatchesDerivative) {
  for (double x : {0.5, 2.0, 9.0, 12.0, 40.0}) {
    const double h = 1e-6;
    EXPECT_NEAR(WingSlope(x, kWing), (Wing(x + h, kWing) - Wing(x - h, kWing)) / (2 * h), 1e-6);
  }
}

TEST(Wing, ParamValidation) {
  EXPECT_NO_THROW(kWing.Validate());
  EXPECT_TRUNK_ERROR((WingParams<double>{0, 2}.Validate()), ErrorCategory::kDomain);
  EXPECT_TRUNK_ERROR((WingParams<double>{10, -1}.Validate()), ErrorCategory::kDomain);
}

TEST(EndpointLoss, Examples) {
  std::mt19937_64 rng(26);
  const Curve2d c = RandomCurve(rng);
  EXPECT_EQ(EndpointLoss(c, c, kWing), 0.0);

  Eigen::Matrix2Xd p = c.control_points();
  p.col(0) += Eigen::Vector2d(1.2, 1.6);  // distance 2
  EXPECT_NEAR(EndpointLoss(Curve2d(p), c, kWing), 10 * std::log(2.0), 1e-9);

  p = c.control_points();
  p.col(0) += Eigen::Vector2d(9, 12);
  p.col(4) += Eigen::Vector2d(-15, 0);
  EXPECT_NEAR(EndpointLoss(Curve2d(p), c, kWing), 2 * (5 + 10 * std::log(6.0)), 1e-9);

  // Interior control points do not contribute.
  p = c.control_points();
  p.col(2) += Eigen::Vector2d(50, 50);
  EXPECT_EQ(EndpointLoss(Curve2d(p), c, kWing), 0.0);
}

TEST(EndpointLoss, DegreeMismatch) {
  std::mt19937_64 rng(27);
  EXPECT_TRUNK_ERROR(EndpointLoss(RandomCurve(rng, 4), RandomCurve(rng, 3), kWing),
                     ErrorCategory::kDomain);
  EXPECT_TRUNK_ERROR(EndpointLossGrad(RandomCurve(rng, 4), RandomCurve(rng, 3), kWing),
                     ErrorCategory::kDomain);
}

TEST(EndpointLossGrad, ZeroAtMinimumAndInterior) {
  std::mt19937_64 rng(28);
  const Curve2d c = RandomCurve(rng);
  EXPECT_TRUE(EndpointLossGrad(c, c, kWing).isZero(0));
  const Eigen::Matrix2Xd g = EndpointLossGrad(RandomCurve(rng), c, kWing);
  EXPECT_TRUE(g.middleCols(1, 3).isZero(0));
}

TEST(EndpointLossGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-25, 25);
  for (int k = 0; k < 50; ++k) {
    const Curve2d gt = RandomCurve(rng);
    Eigen::Matrix2Xd p = gt.control_points();
    p.col(0) += Eigen::Vector2d(u(rng), u(rng));
    p.col(4) += Eigen::Vector2d(u(rng), u(rng));
    const Curve2d pred(p);
    if ((pred.front() - gt.front()).norm() < 1e-3 || (pred.back() - gt.back()).norm() < 1e-3) continue;
    const Eigen::Matrix2Xd fd =
        CentralDifference(pred, [&](const Curve2d& c) { return EndpointLoss(c, gt, kWing); });
    ASSERT_LT(RelativeError(EndpointLossGrad(pred, gt, kWing), fd), 1e-4);
  }
}

TEST(CombinedLoss, Examples) {
  const LossWeights<double> defaults;
  EXPECT_EQ(CombinedLoss(0.0, 0.0, 0.0, defaults).total, 0.0);
  EXPECT_NEAR(CombinedLoss(0.5, 2.0, 3.0, defaults).total, 2.8, 1e-15);
  EXPECT_EQ(CombinedLoss(0.7, 2.0, 3.0, LossWeights<double>{1, 0, 0}).total, 0.7);
  const auto b = CombinedLoss(0.5, 2.0, 3.0, defaults);
  EXPECT_EQ(b.det, 0.5);
  EXPECT_EQ(b.tsl, 2.0);
  EXPECT_EQ(b.epl, 3.0);
}

TEST(CombinedLoss, Linear) {
  const LossWeights<double> w{0.3, 1.7, 0.1};
  const double base = CombinedLoss(1.0, 2.0, 3.0, w).total;
  EXPECT_NEAR(CombinedLoss(1.0, 4.0, 3.0, w).total - base, 1.7 * 2.0, 1e-12);
}

TEST(CombinedLoss, Errors) {
  EXPECT_TRUNK_ERROR(CombinedLoss(0.0, -1.0, 0.0), ErrorCategory::kDomain);
  EXPECT_TRUNK_ERROR(CombinedLoss(0.0, 0.0, -1.0), ErrorCategory::kDomain);
  EXPECT_TRUNK_ERROR(CombinedLoss(std::nan(""), 0.0, 0.0), ErrorCategory::kDomain);
  EXPECT_TRUNK_ERROR(CombinedLoss(0.0, 0.0, 0.0, LossWeights<double>{1, -1, 0}),
                     ErrorCategory::kDomain);
}

}  // namespace
}  // namespace trunk
