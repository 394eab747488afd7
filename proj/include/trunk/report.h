#pragma once

#include <filesystem>
#include <string>

#include "trunk/metrics.h"

namespace trunk {

struct ReportFiles {
  std::filesystem::path plot;        // SVG: signed-error histogram + Gaussian fit, cumulative curve
  std::filesystem::path stats;       // CSV: count,mean,std,gauss_mu,gauss_sigma (one row)
  std::filesystem::path cumulative;  // CSV: threshold,fraction
};

// Writes the report into `dir` (created if missing). Output bytes depend only
// on `stats`.
ReportFiles RenderReport(const ErrorStats& stats, const std::filesystem::path& dir);

std::string StatsCsv(const ErrorStats& stats);
std::string CumulativeCsv(const ErrorStats& stats);
std::string ReportSvg(const ErrorStats& stats);

}  // namespace trunk
