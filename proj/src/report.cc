#include "trunk/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "trunk/errors.h"

namespace trunk {
namespace {

constexpr double kPanelW = 420;
constexpr double kPanelH = 300;
constexpr double kMargin = 40;

std::string Num(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string Px(double v) { return Num(v, "%.2f"); }

void WriteFile(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::kIo, "cannot open for writing", path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCategory::kIo, "write failed", path.string());
}

void Axes(std::ostringstream& svg, double x0, const std::string& title, const std::string& xlabel,
          const std::string& ylabel) {
  const double left = x0 + kMargin;
  const double bottom = kPanelH - kMargin;
  svg << "<text x=\"" << Px(x0 + kPanelW / 2) << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";
  svg << "<line x1=\"" << Px(left) << "\" y1=\"" << Px(bottom) << "\" x2=\""
      << Px(x0 + kPanelW - 10) << "\" y2=\"" << Px(bottom) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << Px(left) << "\" y1=\"" << Px(bottom) << "\" x2=\"" << Px(left)
      << "\" y2=\"30\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << Px(x0 + kPanelW / 2) << "\" y=\"" << Px(kPanelH - 8)
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  svg << "<text x=\"" << Px(x0 + 12) << "\" y=\"" << Px(kPanelH / 2)
      << "\" transform=\"rotate(-90 " << Px(x0 + 12) << ' ' << Px(kPanelH / 2)
      << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
}

}  // namespace

std::string StatsCsv(const ErrorStats& stats) {
  std::string out = "count,mean,std,gauss_mu,gauss_sigma\n";
  out += std::to_string(stats.count) + ',' + Num(stats.mean) + ',' + Num(stats.std) + ',' +
         Num(stats.gaussian_fit.first) + ',' + Num(stats.gaussian_fit.second) + '\n';
  return out;
}

std::string CumulativeCsv(const ErrorStats& stats) {
  std::string out = "threshold,fraction\n";
  for (const auto& [t, f] : stats.cumulative) out += Num(t) + ',' + Num(f) + '\n';
  return out;
}

std::string ReportSvg(const ErrorStats& stats) {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Px(2 * kPanelW) << "\" height=\""
      << Px(kPanelH) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<!-- n=" << stats.count << " mean=" << Num(stats.mean, "%.6g")
      << " std=" << Num(stats.std, "%.6g") << " -->\n";

  // Histogram of signed errors with the moment-matched Gaussian.
  const auto& h = stats.histogram;
  double lo = h.lo;
  double hi = h.hi;
  if (!(hi > lo)) {
    const double pad = std::max(0.05, std::abs(lo) * 0.1);
    lo -= pad;
    hi += pad;
  }
  const int bins = static_cast<int>(h.counts.size());
  const int peak = std::max(1, *std::max_element(h.counts.begin(), h.counts.end()));
  const double plot_w = kPanelW - kMargin - 10;
  const double plot_h = kPanelH - kMargin - 30;
  const double bottom = kPanelH - kMargin;
  const auto hx = [&](double v) { return kMargin + (v - lo) / (hi - lo) * plot_w; };
  Axes(svg, 0, "Relative error distribution", "relative error", "count");
  const double bin_w = bins == 1 && !(h.hi > h.lo) ? 0.0 : (h.hi - h.lo) / bins;
  for (int b = 0; b < bins; ++b) {
    double a = h.lo + b * bin_w;
    double c = a + bin_w;
    if (bin_w == 0.0) {
      a = lo + 0.4 * (hi - lo);
      c = lo + 0.6 * (hi - lo);
    }
    const double bar = plot_h * h.counts[b] / peak;
    svg << "<rect x=\"" << Px(hx(a)) << "\" y=\"" << Px(bottom - bar) << "\" width=\""
        << Px(hx(c) - hx(a)) << "\" height=\"" << Px(bar)
        << "\" fill=\"#7fa7d9\" stroke=\"#2b5797\"/>\n";
  }
  const auto [mu, sigma] = stats.gaussian_fit;
  if (sigma > 0 && bin_w > 0) {
    svg << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= 100; ++i) {
      const double x = lo + (hi - lo) * i / 100.0;
      const double z = (x - mu) / sigma;
      const double density = stats.count * bin_w * std::exp(-0.5 * z * z) /
                             (sigma * std::sqrt(2.0 * std::numbers::pi));
      svg << (i ? " " : "") << Px(hx(x)) << ',' << Px(bottom - plot_h * density / peak);
    }
    svg << "\"/>\n";
  }
  svg << "<text x=\"" << Px(kMargin) << "\" y=\"" << Px(bottom + 14) << "\">" << Num(lo, "%.3g")
      << "</text>\n<text x=\"" << Px(kMargin + plot_w) << "\" y=\"" << Px(bottom + 14)
      << "\" text-anchor=\"end\">" << Num(hi, "%.3g") << "</text>\n";

  // Cumulative fraction of absolute errors.
  const double x0 = kPanelW;
  Axes(svg, x0, "Cumulative absolute relative error", "absolute relative error", "fraction");
  const double xmax = stats.cumulative.empty() ? 1.0 : stats.cumulative.back().first;
  const auto cx = [&](double v) { return x0 + kMargin + v / xmax * plot_w; };
  svg << "<polyline fill=\"none\" stroke=\"#2b5797\" stroke-width=\"1.5\" points=\""
      << Px(cx(0)) << ',' << Px(bottom);
  for (const auto& [t, f] : stats.cumulative) svg << ' ' << Px(cx(t)) << ',' << Px(bottom - plot_h * f);
  svg << "\"/>\n";
  svg << "<text x=\"" << Px(x0 + kMargin + plot_w) << "\" y=\"" << Px(bottom + 14)
      << "\" text-anchor=\"end\">" << Num(xmax, "%.3g") << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

ReportFiles RenderReport(const ErrorStats& stats, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::kIo, ec.message(), dir.string());
  ReportFiles files{dir / "error_report.svg", dir / "error_stats.csv", dir / "error_cumulative.csv"};
  WriteFile(files.plot, ReportSvg(stats));
  WriteFile(files.stats, StatsCsv(stats));
  WriteFile(files.cumulative, CumulativeCsv(stats));
  return files;
}

}  // namespace trunk
