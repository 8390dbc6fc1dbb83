#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tgpm/gpm.hpp"
#include "tgpm/portfolio.hpp"

namespace tgpm::io {

/// {"kind", "nu", "n", "region_threshold", "pair", "assets", "matrix"}; optional
/// fields are omitted when absent. Doubles round-trip exactly.
std::string gpm_estimate_to_json(const gpm::GpmEstimate& estimate,
                                 const std::vector<std::string>& assets = {});
gpm::GpmEstimate gpm_estimate_from_json(std::string_view text);

std::string backtest_report_json(const portfolio::BacktestReport& report);

/// Writes report.json and per-run returns_, wealth_, stability_ and weights_
/// CSV files under `outdir`. Returns the written paths in a fixed order.
std::vector<std::string> write_backtest_outputs(const portfolio::BacktestReport& report,
                                                const std::string& outdir);

}  // namespace tgpm::io
