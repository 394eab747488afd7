// Command-line front end: ground-truth fitting, loss evaluation, curve
// optimization, depth-based length measurement, synthetic scenes, curve
// metrics and error reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trunk/bezier.h"
#include "trunk/errors.h"
#include "trunk/gt_fit.h"
#include "trunk/io.h"
#include "trunk/losses.h"
#include "trunk/measure3d.h"
#include "trunk/metrics.h"
#include "trunk/optimizer.h"
#include "trunk/report.h"
#include "trunk/synth.h"

namespace {

using namespace trunk;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRejected = 2;

std::string Fmt(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string PointsText(const Eigen::Matrix2Xd& p) {
  std::string s;
  for (Eigen::Index i = 0; i < p.cols(); ++i) {
    if (i) s += ' ';
    s += "(" + Fmt(p(0, i), "%.3f") + "," + Fmt(p(1, i), "%.3f") + ")";
  }
  return s;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void Add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void Print(const std::string& format, std::ostream& out) const {
    if (format == "csv") {
      PrintCsvRow(header_, out);
      for (const auto& r : rows_) PrintCsvRow(r, out);
      return;
    }
    std::vector<std::size_t> width(header_.size());
    for (std::size_t c = 0; c < header_.size(); ++c) width[c] = header_[c].size();
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    const auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        out << (c ? "  " : "") << r[c];
        if (c + 1 < r.size()) out << std::string(width[c] - r[c].size(), ' ');
      }
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  static void PrintCsvRow(const std::vector<std::string>& r, std::ostream& out) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      const bool quote = r[c].find_first_of(",\"") != std::string::npos;
      out << (c ? "," : "");
      if (!quote) {
        out << r[c];
        continue;
      }
      out << '"';
      for (char ch : r[c]) out << (ch == '"' ? "\"\"" : std::string(1, ch));
      out << '"';
    }
    out << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

Eigen::AlignedBox2d PaddedBox(const Curve2d& curve, double pad) {
  Eigen::AlignedBox2d box = ControlBox(curve);
  box.min().array() -= pad;
  box.max().array() += pad;
  return box;
}

// ---- fit-gt ---------------------------------------------------------------

struct FitGtArgs {
  std::string annotations;
  int degree = kDefaultDegree;
  std::string param = "uniform";
  std::string out;
};

int RunFitGt(const FitGtArgs& a, const std::string& format) {
  const auto parameterization =
      a.param == "chord" ? Parameterization::kChordLength : Parameterization::kUniform;
  const auto records = ParseAnnotations(fs::path(a.annotations));
  std::vector<CurveRecord> curves;
  Table table({"image_id", "keypoints", "residual_rms_px", "control_points"});
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto fit = [&] {
      try {
        return FitCurve(AnnotationPolyline<double, 2>(r.keypoints), a.degree, parameterization);
      } catch (const Error& e) {
        throw Error(e.category(), e.detail(),
                    a.annotations + ":record " + std::to_string(i + 1) + " (" + r.image_id + ")");
      }
    }();
    curves.push_back({r.image_id, r.bbox, fit.curve.control_points(), std::nullopt,
                      fit.residual_rms, a.param});
    table.Add({r.image_id, std::to_string(r.keypoints.cols()), Fmt(fit.residual_rms),
               PointsText(fit.curve.control_points())});
  }
  WriteCurves(curves, fs::path(a.out));
  table.Print(format, std::cout);
  return kExitOk;
}

// ---- loss -----------------------------------------------------------------

struct LossArgs {
  std::string pred;
  std::string gt;
  int samples = kDefaultSampleCount;
  double w = 10;
  double eps = 2;
  double det = 0;
  double lambda_det = 1;
  double lambda_tsl = 1;
  double lambda_epl = 0.1;
};

int RunLoss(const LossArgs& a, const std::string& format) {
  const auto preds = ParseCurves(fs::path(a.pred));
  const auto gts = ParseCurves(fs::path(a.gt));
  if (preds.size() != gts.size()) {
    throw Error(ErrorCategory::kValidation,
                "prediction and ground-truth files hold " + std::to_string(preds.size()) +
                    " and " + std::to_string(gts.size()) + " records",
                a.pred);
  }
  const WingParams<double> wing{a.w, a.eps};
  wing.Validate();
  const LossWeights<double> weights{a.lambda_det, a.lambda_tsl, a.lambda_epl};
  const Params params = Params::Uniform(a.samples);
  Table table({"image_id", "det", "tsl", "epl", "total"});
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string where = a.pred + ":record " + std::to_string(i + 1);
    if (preds[i].image_id != gts[i].image_id) {
      throw Error(ErrorCategory::kValidation,
                  "image ids differ: " + preds[i].image_id + " vs " + gts[i].image_id, where);
    }
    const Curve2d p = preds[i].curve();
    const Curve2d g = gts[i].curve();
    if (p.degree() != g.degree()) {
      throw Error(ErrorCategory::kValidation, "curve degrees differ", where);
    }
    const auto b = CombinedLoss(a.det, SamplingLoss(p, g, params), EndpointLoss(p, g, wing), weights);
    table.Add({preds[i].image_id, Fmt(b.det), Fmt(b.tsl), Fmt(b.epl), Fmt(b.total)});
  }
  table.Print(format, std::cout);
  return kExitOk;
}

// ---- optimize -------------------------------------------------------------

struct OptimizeArgs {
  std::string target;
  std::string out;
  std::string trace_out;
  OptimConfig config;
  int samples = kDefaultSampleCount;
};

int RunOptimize(OptimizeArgs a, const std::string& format) {
  a.config.sampling = Params::Uniform(a.samples);
  const auto targets = ParseCurves(fs::path(a.target));
  std::vector<CurveRecord> fitted;
  std::string trace_csv = "image_id,iteration,total\n";
  Table table({"image_id", "iterations", "converged", "tsl", "epl", "total", "control_points"});
  for (const auto& t : targets) {
    const OptimResult r = FitToTarget(t.curve(), std::nullopt, a.config);
    fitted.push_back({t.image_id, t.bbox, r.curve.control_points(), std::nullopt, std::nullopt,
                      std::nullopt});
    for (std::size_t k = 0; k < r.trace.loss_history.size(); ++k) {
      trace_csv += t.image_id + "," + std::to_string(k) + "," + Fmt(r.trace.loss_history[k], "%.17g") + "\n";
    }
    table.Add({t.image_id, std::to_string(r.trace.iterations), r.trace.converged ? "yes" : "no",
               Fmt(r.trace.final.tsl), Fmt(r.trace.final.epl), Fmt(r.trace.final.total),
               PointsText(r.curve.control_points())});
  }
  if (!a.out.empty()) WriteCurves(fitted, fs::path(a.out));
  if (!a.trace_out.empty()) WriteFileBytes(fs::path(a.trace_out), trace_csv);
  table.Print(format, std::cout);
  return kExitOk;
}

// ---- measure --------------------------------------------------------------

struct MeasureArgs {
  std::string pred;
  std::string depth;
  std::string intrinsics;
  int samples = kDefaultMeasureSegments;
  bool no_repair = false;
};

int RunMeasure(const MeasureArgs& a, const std::string& format) {
  const auto curves = ParseCurves(fs::path(a.pred));
  const DepthMap depth = ParseDepth(fs::path(a.depth));
  const CameraIntrinsics camera = ParseIntrinsics(fs::path(a.intrinsics));
  if (depth.width() != camera.width || depth.height() != camera.height) {
    throw Error(ErrorCategory::kValidation,
                "depth map is " + std::to_string(depth.width()) + "x" +
                    std::to_string(depth.height()) + " but intrinsics describe " +
                    std::to_string(camera.width) + "x" + std::to_string(camera.height),
                a.depth);
  }
  MeasureConfig config;
  config.segments = a.samples;
  config.repair.enabled = !a.no_repair;

  bool rejected = false;
  Table table({"image_id", "length_cm", "quality", "valid_fraction", "repaired"});
  for (const auto& c : curves) {
    try {
      const MeasurementResult m = Measure(c.curve(), depth, camera, config);
      table.Add({c.image_id, Fmt(100.0 * m.length, "%.2f"), std::string(QualityName(m.quality)),
                 Fmt(m.samples.valid_fraction, "%.3f"), std::to_string(m.samples.repaired_count)});
    } catch (const MeasurementRejected& e) {
      rejected = true;
      table.Add({c.image_id, "nan", std::string(QualityName(MeasurementQuality::kRejected)),
                 Fmt(e.valid_fraction(), "%.3f"), "0"});
    }
  }
  table.Print(format, std::cout);
  return rejected ? kExitRejected : kExitOk;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 0;
  int count = 1;
  double noise_sigma = 0.02;
  double dropout = 0.05;
  bool blob = false;
  std::string out_dir;
};

int RunSynth(const SynthArgs& a, const std::string& format) {
  if (a.count < 1) ThrowDomain("count must be positive", "--count");
  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::kIo, ec.message(), a.out_dir);

  std::vector<AnnotationRecord> annotations;
  std::vector<CurveRecord> curves;
  std::string oracle_csv = "image_id,oracle_length_m,measured_length_m,quality,relative_error\n";
  std::string errors_txt = "# signed relative length errors, one per scene\n";
  Table table({"image_id", "oracle_cm", "measured_cm", "quality", "rel_error"});
  const Params keypoint_params = Params::Uniform(5);
  bool rejected = false;
  for (int i = 0; i < a.count; ++i) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
    char id_buf[32];
    std::snprintf(id_buf, sizeof(id_buf), "scene_%04d", i);
    const std::string id = id_buf;

    const SyntheticScene scene = GenerateScene(seed);
    NoiseConfig noise{a.noise_sigma, a.dropout, a.blob, seed ^ 0x9e3779b97f4a7c15ULL};
    const DepthMap depth = PerturbDepth(scene.depth, noise);
    WritePfm(depth, dir / (id + ".pfm"));
    WriteIntrinsics(scene.camera, dir / (id + ".intrinsics.txt"));

    const Eigen::AlignedBox2d box = PaddedBox(scene.curve2d, 10.0);
    annotations.push_back({id, box, Sample(scene.curve2d, keypoint_params)});
    curves.push_back({id, box, scene.curve2d.control_points(), 1.0, std::nullopt, std::nullopt});

    std::string measured = "nan";
    std::string quality = "rejected";
    std::string rel = "nan";
    try {
      const MeasurementResult m = Measure(scene.curve2d, depth, scene.camera);
      const RelativeError e = RelErrors(m.length, scene.oracle_length);
      measured = Fmt(m.length, "%.17g");
      quality = QualityName(m.quality);
      rel = Fmt(e.signed_error, "%.17g");
      errors_txt += rel + "\n";
      table.Add({id, Fmt(100 * scene.oracle_length, "%.2f"), Fmt(100 * m.length, "%.2f"), quality,
                 Fmt(e.signed_error, "%.4f")});
    } catch (const MeasurementRejected&) {
      rejected = true;
      table.Add({id, Fmt(100 * scene.oracle_length, "%.2f"), "nan", quality, "nan"});
    }
    oracle_csv += id + "," + Fmt(scene.oracle_length, "%.17g") + "," + measured + "," + quality +
                  "," + rel + "\n";
  }
  WriteAnnotations(annotations, dir / "annotations.jsonl");
  WriteCurves(curves, dir / "curves.jsonl");
  WriteFileBytes(dir / "oracle.csv", oracle_csv);
  WriteFileBytes(dir / "errors.txt", errors_txt);
  table.Print(format, std::cout);
  return rejected ? kExitRejected : kExitOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  CurveEvalConfig config;
};

int RunEval(const EvalArgs& a, const std::string& format) {
  const auto preds = ParseCurves(fs::path(a.pred));
  const auto gts = ParseCurves(fs::path(a.gt));
  std::vector<ScoredCurve> scored;
  for (const auto& p : preds) scored.push_back({p.image_id, p.confidence.value_or(1.0), p.curve()});
  std::vector<GroundTruthCurve> truth;
  for (const auto& g : gts) truth.push_back({g.image_id, g.bbox, g.curve()});

  const CurveMap map = CurveMeanAp(scored, truth, a.config);

  // Per ground truth: the same-image prediction with the highest OKS.
  double pck_sum = 0;
  double oks_sum = 0;
  for (const auto& g : truth) {
    double best_oks = 0;
    double best_pck = 0;
    for (const auto& p : scored) {
      if (p.image_id != g.image_id) continue;
      const double o = Oks(p.curve, g.curve, g.bbox.volume(), a.config);
      if (o > best_oks) {
        best_oks = o;
        best_pck = Pck(p.curve, g.curve, g.bbox.diagonal().norm(), a.config);
      }
    }
    pck_sum += best_pck;
    oks_sum += best_oks;
  }
  Table table({"metric", "value"});
  table.Add({"curves", std::to_string(truth.size())});
  table.Add({"predictions", std::to_string(scored.size())});
  table.Add({"mAP50", Fmt(map.map50)});
  table.Add({"mAP50-95", Fmt(map.map50_95)});
  table.Add({"PCK", Fmt(pck_sum / static_cast<double>(truth.size()))});
  table.Add({"mean_OKS", Fmt(oks_sum / static_cast<double>(truth.size()))});
  table.Print(format, std::cout);
  return kExitOk;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::string errors;
  std::string out;
};

int RunReport(const ReportArgs& a, const std::string& format) {
  const auto errors = ParseErrors(fs::path(a.errors));
  const ErrorStats stats = ComputeErrorStats(errors);
  const ReportFiles files = RenderReport(stats, fs::path(a.out));
  double abs_sum = 0;
  for (double e : errors) abs_sum += std::abs(e);
  Table table({"statistic", "value"});
  table.Add({"count", std::to_string(stats.count)});
  table.Add({"mean", Fmt(stats.mean)});
  table.Add({"std", Fmt(stats.std)});
  table.Add({"mean_abs", Fmt(abs_sum / stats.count)});
  for (const auto& [t, f] : stats.cumulative) table.Add({"frac_abs<=" + Fmt(t, "%.3g"), Fmt(f)});
  table.Add({"plot", files.plot.string()});
  table.Add({"table", files.stats.string()});
  table.Print(format, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bezier trunk curves: fitting, losses, optimization and depth-based length measurement"};
  app.require_subcommand(1);
  std::string format = "table";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();

  FitGtArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-gt", "Least-squares ground-truth control points from keypoint annotations");
  fit_cmd->add_option("--annotations", fit.annotations, "Annotation JSON Lines file")->required();
  fit_cmd->add_option("--degree", fit.degree, "Curve degree")->capture_default_str();
  fit_cmd->add_option("--param", fit.param, "Keypoint parameterization")
      ->check(CLI::IsMember({"uniform", "chord"}))
      ->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Output curve JSON Lines file")->required();

  LossArgs loss;
  auto* loss_cmd = app.add_subcommand("loss", "Sampling, endpoint and combined losses for paired curves");
  loss_cmd->add_option("--pred", loss.pred, "Predicted curves")->required();
  loss_cmd->add_option("--gt", loss.gt, "Ground-truth curves, same order")->required();
  loss_cmd->add_option("--samples", loss.samples, "Uniform samples per curve")->capture_default_str();
  loss_cmd->add_option("--w", loss.w, "Wing range")->capture_default_str();
  loss_cmd->add_option("--eps", loss.eps, "Wing curvature")->capture_default_str();
  loss_cmd->add_option("--det", loss.det, "External detection loss term")->capture_default_str();
  loss_cmd->add_option("--lambda-det", loss.lambda_det, "Detection weight")->capture_default_str();
  loss_cmd->add_option("--lambda-tsl", loss.lambda_tsl, "Sampling loss weight")->capture_default_str();
  loss_cmd->add_option("--lambda-epl", loss.lambda_epl, "Endpoint loss weight")->capture_default_str();

  OptimizeArgs opt;
  auto* opt_cmd = app.add_subcommand("optimize", "Fit curves to target curves by momentum gradient descent");
  opt_cmd->add_option("--target", opt.target, "Target curves")->required();
  opt_cmd->add_option("--max-iters", opt.config.max_iters, "Iteration budget")->capture_default_str();
  opt_cmd->add_option("--step", opt.config.step_size, "Step size in pixels")->capture_default_str();
  opt_cmd->add_option("--momentum", opt.config.momentum, "Momentum in [0, 1)")->capture_default_str();
  opt_cmd->add_option("--lambda-tsl", opt.config.weights.tsl, "Sampling loss weight")->capture_default_str();
  opt_cmd->add_option("--lambda-epl", opt.config.weights.epl, "Endpoint loss weight")->capture_default_str();
  opt_cmd->add_option("--samples", opt.samples, "Uniform samples per curve")->capture_default_str();
  opt_cmd->add_option("--out", opt.out, "Write fitted curves here");
  opt_cmd->add_option("--trace-out", opt.trace_out, "Write loss history CSV here");

  MeasureArgs meas;
  auto* meas_cmd = app.add_subcommand("measure", "3D trunk length from a curve, a depth map and intrinsics");
  meas_cmd->add_option("--pred", meas.pred, "Curves to measure")->required();
  meas_cmd->add_option("--depth", meas.depth, "Depth raster (PFM or raw float32)")->required();
  meas_cmd->add_option("--intrinsics", meas.intrinsics, "Intrinsics key = value file")->required();
  meas_cmd->add_option("--samples", meas.samples, "Segments M (M + 1 samples)")->capture_default_str();
  meas_cmd->add_flag("--no-repair", meas.no_repair, "Disable depth repair and smoothing");

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate synthetic trunk/depth scenes with oracle lengths");
  syn_cmd->add_option("--seed", syn.seed, "First scene seed")->required();
  syn_cmd->add_option("--count", syn.count, "Number of scenes")->required();
  syn_cmd->add_option("--noise-sigma", syn.noise_sigma, "Relative Gaussian depth noise")->capture_default_str();
  syn_cmd->add_option("--dropout", syn.dropout, "Fraction of invalidated pixels")->capture_default_str();
  syn_cmd->add_flag("--blob", syn.blob, "Drop contiguous blobs instead of scattered pixels");
  syn_cmd->add_option("--out-dir", syn.out_dir, "Output directory")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Curve mAP, PCK and OKS of predictions against ground truth");
  eval_cmd->add_option("--pred", ev.pred, "Scored predicted curves")->required();
  eval_cmd->add_option("--gt", ev.gt, "Ground-truth curves")->required();
  eval_cmd->add_option("--pck-threshold", ev.config.pck_threshold, "Fraction of box diagonal")->capture_default_str();
  eval_cmd->add_option("--oks-sigma", ev.config.oks_sigma, "Per-sample OKS constant")->capture_default_str();
  eval_cmd->add_option("--samples", ev.config.sample_count, "On-curve samples")->capture_default_str();

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand(
      "report",
      "Error statistics and plots. Writes error_report.svg (histogram + Gaussian fit, cumulative "
      "curve), error_stats.csv (count,mean,std,gauss_mu,gauss_sigma) and error_cumulative.csv "
      "(threshold,fraction)");
  rep_cmd->add_option("--errors", rep.errors, "Signed relative errors, one per line")->required();
  rep_cmd->add_option("--out", rep.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*fit_cmd) return RunFitGt(fit, format);
    if (*loss_cmd) return RunLoss(loss, format);
    if (*opt_cmd) return RunOptimize(opt, format);
    if (*meas_cmd) return RunMeasure(meas, format);
    if (*syn_cmd) return RunSynth(syn, format);
    if (*eval_cmd) return RunEval(ev, format);
    if (*rep_cmd) return RunReport(rep, format);
  } catch (const MeasurementRejected& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRejected;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
