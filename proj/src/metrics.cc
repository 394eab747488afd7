#include "trunk/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace trunk {
namespace {

constexpr int kMaxHistogramBins = 40;

template <typename PerSample>
double BestOrientation(const Curve2d& pred, const Curve2d& gt, const CurveEvalConfig& config,
                       PerSample per_sample) {
  const Params params = Params::Uniform(config.sample_count);
  const Eigen::Matrix2Xd g = Sample(gt, params);
  const auto score = [&](const Curve2d& p) {
    const Eigen::Matrix2Xd s = Sample(p, params);
    double total = 0;
    for (Eigen::Index k = 0; k < s.cols(); ++k) total += per_sample((s.col(k) - g.col(k)).norm());
    return total / static_cast<double>(s.cols());
  };
  const double forward = score(pred);
  if (!config.orientation_invariant) return forward;
  return std::max(forward, score(pred.Reversed()));
}

}  // namespace

std::vector<double> CurveEvalConfig::DefaultOksThresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

void CurveEvalConfig::Validate() const {
  if (sample_count < 2) ThrowDomain("sample count must be at least 2", "sample_count");
  if (!(pck_threshold > 0 && pck_threshold <= 1)) {
    ThrowDomain("PCK threshold outside (0, 1]", "pck_threshold");
  }
  if (!(oks_sigma > 0 && oks_sigma <= 1)) ThrowDomain("OKS sigma outside (0, 1]", "oks_sigma");
  if (oks_thresholds.empty()) ThrowDomain("no OKS thresholds", "oks_thresholds");
  for (double t : oks_thresholds) {
    if (!(t > 0 && t <= 1)) ThrowDomain("OKS threshold outside (0, 1]", "oks_thresholds");
  }
}

double Pck(const Curve2d& pred, const Curve2d& gt, double bbox_diag,
           const CurveEvalConfig& config) {
  config.Validate();
  if (!(bbox_diag > 0)) ThrowDomain("box diagonal must be positive", "bbox_diag");
  const double radius = config.pck_threshold * bbox_diag;
  return BestOrientation(pred, gt, config, [radius](double d) { return d < radius ? 1.0 : 0.0; });
}

double Oks(const Curve2d& pred, const Curve2d& gt, double bbox_area,
           const CurveEvalConfig& config) {
  config.Validate();
  if (!(bbox_area > 0)) ThrowDomain("box area must be positive", "bbox_area");
  const double denom = 2.0 * bbox_area * config.oks_sigma * config.oks_sigma;
  return BestOrientation(pred, gt, config, [denom](double d) { return std::exp(-d * d / denom); });
}

double AveragePrecision(const std::vector<bool>& hits_in_rank_order, int positives) {
  if (positives <= 0) {
    throw Error(ErrorCategory::kUndefinedMetric, "no ground-truth curves", "ground_truth");
  }
  const std::size_t n = hits_in_rank_order.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  int tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += hits_in_rank_order[i] ? 1 : 0;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / positives;
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0;
  double prev_recall = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

CurveMap CurveMeanAp(std::span<const ScoredCurve> predictions,
                     std::span<const GroundTruthCurve> ground_truth,
                     const CurveEvalConfig& config) {
  config.Validate();
  if (ground_truth.empty()) {
    throw Error(ErrorCategory::kUndefinedMetric, "empty ground-truth set", "ground_truth");
  }

  std::map<std::string, std::vector<std::size_t>> gts_by_image;
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    gts_by_image[ground_truth[g].image_id].push_back(g);
  }
  // Global rank order: descending confidence, ties by input position.
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });

  // OKS of each prediction against the ground truth of its image.
  std::vector<std::vector<double>> similarity(predictions.size());
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    const auto it = gts_by_image.find(predictions[p].image_id);
    if (it == gts_by_image.end()) continue;
    for (std::size_t g : it->second) {
      const auto& box = ground_truth[g].bbox;
      similarity[p].push_back(Oks(predictions[p].curve, ground_truth[g].curve, box.volume(), config));
    }
  }

  CurveMap out;
  for (double threshold : config.oks_thresholds) {
    std::map<std::string, std::vector<bool>> taken;
    for (const auto& [image, gts] : gts_by_image) taken[image].assign(gts.size(), false);
    std::vector<bool> hits;
    hits.reserve(order.size());
    for (std::size_t p : order) {
      const auto it = taken.find(predictions[p].image_id);
      int best = -1;
      double best_oks = threshold;
      if (it != taken.end()) {
        for (std::size_t j = 0; j < similarity[p].size(); ++j) {
          if (!it->second[j] && similarity[p][j] >= best_oks &&
              (best < 0 || similarity[p][j] > best_oks)) {
            best = static_cast<int>(j);
            best_oks = similarity[p][j];
          }
        }
      }
      if (best >= 0) it->second[best] = true;
      hits.push_back(best >= 0);
    }
    out.ap.push_back(AveragePrecision(hits, static_cast<int>(ground_truth.size())));
  }
  for (std::size_t i = 0; i < config.oks_thresholds.size(); ++i) {
    if (std::abs(config.oks_thresholds[i] - 0.5) < 1e-12) out.map50 = out.ap[i];
  }
  out.map50_95 = std::accumulate(out.ap.begin(), out.ap.end(), 0.0) / static_cast<double>(out.ap.size());
  return out;
}

RelativeError RelErrors(double measured, double truth) {
  if (!(truth > 0)) ThrowDomain("ground-truth length must be positive", "gt");
  const double e = (measured - truth) / truth;
  return {e, std::abs(measured - truth) / truth};
}

ErrorStats ComputeErrorStats(std::span<const double> errors) {
  if (errors.empty()) ThrowDomain("no errors to summarize", "errors");
  ErrorStats s;
  s.count = static_cast<int>(errors.size());
  const double n = static_cast<double>(errors.size());
  s.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  double ss = 0;
  for (double e : errors) ss += (e - s.mean) * (e - s.mean);
  s.std = errors.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.gaussian_fit = {s.mean, s.std};

  double max_abs = 0;
  for (double e : errors) max_abs = std::max(max_abs, std::abs(e));
  std::vector<double> thresholds;
  for (int k = 1; k <= 10; ++k) thresholds.push_back(k / 20.0);
  if (max_abs > thresholds.back()) thresholds.push_back(max_abs);
  for (double t : thresholds) {
    const auto hits = std::count_if(errors.begin(), errors.end(),
                                    [t](double e) { return std::abs(e) <= t; });
    s.cumulative.emplace_back(t, static_cast<double>(hits) / n);
  }

  const auto [lo, hi] = std::minmax_element(errors.begin(), errors.end());
  s.histogram.lo = *lo;
  s.histogram.hi = *hi;
  const int bins = *lo == *hi ? 1
                              : std::clamp(static_cast<int>(std::ceil(std::sqrt(n))), 1,
                                           kMaxHistogramBins);
  s.histogram.counts.assign(bins, 0);
  for (double e : errors) {
    int b = 0;
    if (bins > 1) {
      b = static_cast<int>(std::floor((e - *lo) / (*hi - *lo) * bins));
      b = std::clamp(b, 0, bins - 1);
    }
    ++s.histogram.counts[b];
  }
  return s;
}

}  // namespace trunk
