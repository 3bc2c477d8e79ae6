#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rcfolio/types.hpp"

namespace rcfolio::metrics {

// Conventions: 252 trading days, geometric annualization of returns,
// sample standard deviation, zero risk-free rate, MAR = 0 for Sortino.

// ((prod(1 + r))^(252 / T) - 1) * 100
double annualized_return(std::span<const double> daily);

// mean / sample stdev * sqrt(252). Throws DegenerateSeries when stdev is zero.
double sharpe(std::span<const double> daily);

// mean(r - mar) / sqrt(mean(min(r - mar, 0)^2)) * sqrt(252). Throws NoDownside.
double sortino(std::span<const double> daily, double mar = 0.0);

double annualized_stdev(std::span<const double> daily);

// Worst peak-to-trough decline in percent (<= 0).
double max_drawdown(std::span<const double> curve);

// Mean L1 change between consecutive weight vectors.
double turnover(const std::vector<Vector>& weights);

// Compounded value path starting at 1.0; one more entry than `daily`.
std::vector<double> equity_curve(std::span<const double> daily);

struct MetricRow {
  double annual_return = 0.0;      // percent
  std::optional<double> sharpe;    // empty when the series has zero variance
  double stdev = 0.0;              // annualized
  double mdd = 0.0;                // percent, <= 0
  std::optional<double> sortino;   // empty when no return falls below MAR

  bool operator==(const MetricRow&) const = default;
};

inline constexpr std::array<std::string_view, 5> kMetricColumns = {
    "Annual Return", "Sharpe Ratio", "Standard Deviation", "MDD", "Sortino"};

MetricRow compute_metric_row(std::span<const double> daily, std::span<const double> curve);

}  // namespace rcfolio::metrics
