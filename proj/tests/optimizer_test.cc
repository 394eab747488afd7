#include "trunk/optimizer.h"

#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace trunk {
namespace {

using testing::RandomCurve;

double EndpointError(const Curve2d& a, const Curve2d& b) {
  return std::max((a.front() - b.front()).norm(), (a.back() - b.back()).norm());
}

TEST(OptimConfig, Validate) {
  EXPECT_NO_THROW(OptimConfig{}.Validate());
  OptimConfig c;
  c.max_iters = 0;
  EXPECT_TRUNK_ERROR(c.Validate(), ErrorCategory::kDomain);
  c = {};
  c.step_size = 0;
  EXPECT_TRUNK_ERROR(c.Validate(), ErrorCategory::kDomain);
  c = {};
  c.momentum = 1;
  EXPECT_TRUNK_ERROR(c.Validate(), ErrorCategory::kDomain);
  c = {};
  c.weights.det = 1;
  EXPECT_TRUNK_ERROR(c.Validate(), ErrorCategory::kDomain);
}

TEST(FitToTarget, InitAtTarget) {
  std::mt19937_64 rng(31);
  const Curve2d target = RandomCurve(rng);
  const OptimResult r = FitToTarget(target, target);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_EQ(r.trace.iterations, 0);
  EXPECT_EQ(r.trace.final.total, 0.0);
  EXPECT_EQ(r.curve, target);
}

TEST(FitToTarget, StraightLine) {
  const Curve2d target = Curve2d::Line({30, 400}, {480, 90});
  const OptimResult r = FitToTarget(target, std::nullopt);
  EXPECT_LT(SamplingLoss(r.curve, target, Params::Uniform(50)), 1e-3);
}

TEST(FitToTarget, RecoversHiddenQuartic) {
  std::mt19937_64 rng(32);
  OptimConfig config;
  config.max_iters = 2000;
  for (int k = 0; k < 5; ++k) {
    const Curve2d hidden = RandomCurve(rng);
    const OptimResult r = FitToTarget(hidden, std::nullopt, config);
    EXPECT_LT(SamplingLoss(r.curve, hidden, Params::Uniform(50)), 0.5);
    EXPECT_LT(EndpointError(r.curve, hidden), 1.0);
  }
}

TEST(FitToTarget, TraceInvariants) {
  std::mt19937_64 rng(33);
  OptimConfig config;
  config.max_iters = 300;
  const OptimResult r = FitToTarget(RandomCurve(rng), std::nullopt, config);
  ASSERT_FALSE(r.trace.loss_history.empty());
  for (double v : r.trace.loss_history) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(r.trace.final.total, r.trace.loss_history.back());
  EXPECT_LE(r.trace.iterations, config.max_iters);
  EXPECT_EQ(r.trace.final.det, 0.0);
}

TEST(FitToTarget, SmallStepsWithoutMomentum) {
  // Subgradient steps on the L1 loss are not strictly monotone, but each step
  // can raise the loss by at most a few step sizes.
  std::mt19937_64 rng(34);
  OptimConfig config;
  config.momentum = 0;
  config.step_size = 0.01;
  config.max_iters = 400;
  const Curve2d target = RandomCurve(rng, 4, 100, 200);
  const OptimResult r = FitToTarget(target, std::nullopt, config);
  const auto& h = r.trace.loss_history;
  ASSERT_GT(h.size(), 10u);
  for (std::size_t k = 1; k < h.size(); ++k) ASSERT_LE(h[k], h[k - 1] + 5 * config.step_size) << "at " << k;
  EXPECT_LT(h.back(), h.front());
}

TEST(FitToTarget, TranslationEquivariant) {
  std::mt19937_64 rng(35);
  OptimConfig config;
  // Long runs amplify rounding through sign flips of near-zero residuals, so
  // compare a short trajectory tightly and the converged fits loosely.
  config.max_iters = 30;
  const Eigen::Vector2d shift(64, -128);
  const Curve2d target = RandomCurve(rng);
  const Curve2d init = RandomCurve(rng);
  auto gap = [&](const OptimConfig& c) {
    const OptimResult a = FitToTarget(target, init, c);
    const OptimResult b = FitToTarget(target.Translated(shift), init.Translated(shift), c);
    return (b.curve.control_points().colwise() - shift - a.curve.control_points()).cwiseAbs().maxCoeff();
  };
  EXPECT_LT(gap(config), 1e-6);
  config.max_iters = 2000;
  EXPECT_LT(gap(config), 1.0);
}

TEST(FitToTarget, Errors) {
  std::mt19937_64 rng(36);
  const Curve2d target = RandomCurve(rng);
  EXPECT_TRUNK_ERROR(FitToTarget(target, RandomCurve(rng, 3)), ErrorCategory::kDomain);

  OptimConfig wild;
  wild.step_size = 1e12;
  wild.momentum = 0.99;
  try {
    FitToTarget(target, std::nullopt, wild);
    ADD_FAILURE() << "expected divergence";
  } catch (const OptimizationFailure& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kOptimization);
    EXPECT_FALSE(e.trace().loss_history.empty());
    EXPECT_GE(e.trace().iterations, 1);
  }
}

TEST(FitToPolyline, ExactData) {
  std::mt19937_64 rng(37);
  const Curve2d c = RandomCurve(rng);
  const AnnotationPolyline<double, 2> pts(Sample(c, Params::Uniform(9)));
  const PolylineFit fit = FitToPolyline(pts, 4);
  EXPECT_LT(fit.least_squares.residual_rms, 1e-9);
  EXPECT_LT(fit.loss_vs_least_squares, 1e-2);
  EXPECT_EQ(fit.loss_vs_least_squares,
            SamplingLoss(fit.curve, fit.least_squares.curve, OptimConfig{}.sampling));
}

TEST(FitToPolyline, Collinear) {
  Eigen::Matrix2Xd p(2, 7);
  for (int k = 0; k < 7; ++k) p.col(k) = Eigen::Vector2d(20 + 30.0 * k, 300 - 15.0 * k);
  const PolylineFit fit = FitToPolyline(AnnotationPolyline<double, 2>(p), 4);
  EXPECT_LT((fit.curve.front() - p.col(0)).norm(), 1e-6);
  EXPECT_LT((fit.curve.back() - p.col(6)).norm(), 1e-6);
}

TEST(FitToPolyline, NoisyPolyline) {
  std::mt19937_64 rng(38);
  std::normal_distribution<double> noise(0, 1);
  for (int k = 0; k < 5; ++k) {
    const Curve2d c = RandomCurve(rng);
    Eigen::Matrix2Xd p = Sample(c, Params::Uniform(50));
    for (Eigen::Index j = 0; j < p.cols(); ++j) p.col(j) += Eigen::Vector2d(noise(rng), noise(rng));
    const PolylineFit fit = FitToPolyline(AnnotationPolyline<double, 2>(p), 4);
    EXPECT_LT(EndpointError(fit.curve, c), 3.0);
  }
}

TEST(FitToPolyline, PropagatesFitErrors) {
  EXPECT_TRUNK_ERROR(FitToPolyline(AnnotationPolyline<double, 2>(Eigen::Matrix2Xd::Random(2, 3)), 4),
                     ErrorCategory::kUnderdetermined);
}

TEST(EndpointLineInit, EvenlySpaced) {
  const Curve2d c = EndpointLineInit({0, 0}, {8, 4}, 4);
  for (int j = 0; j <= 4; ++j) EXPECT_EQ(c.control_point(j), Eigen::Vector2d(2.0 * j, 1.0 * j));
}

}  // namespace
}  // namespace trunk
