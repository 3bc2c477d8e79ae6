#include "rcfolio/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rcfolio/error.hpp"

namespace rcfolio::metrics {

namespace {

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_stdev(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

void require_length(std::span<const double> xs, std::size_t n, const char* what) {
  if (xs.size() < n) {
    throw Error(Errc::EmptySeries, fmt::format("{} needs at least {} values, got {}", what, n,
                                               xs.size()));
  }
}

}  // namespace

double annualized_return(std::span<const double> daily) {
  require_length(daily, 1, "annualized return");
  double growth = 1.0;
  for (double r : daily) growth *= 1.0 + r;
  return (std::pow(growth, kTradingDaysPerYear / static_cast<double>(daily.size())) - 1.0) * 100.0;
}

double sharpe(std::span<const double> daily) {
  require_length(daily, 2, "sharpe");
  const double sd = sample_stdev(daily);
  if (!(sd > 0.0)) throw Error(Errc::DegenerateSeries, "zero standard deviation");
  return mean(daily) / sd * std::sqrt(kTradingDaysPerYear);
}

double sortino(std::span<const double> daily, double mar) {
  require_length(daily, 1, "sortino");
  double excess = 0.0;
  double downside = 0.0;
  bool any_below = false;
  for (double r : daily) {
    const double d = r - mar;
    excess += d;
    if (d < 0.0) {
      downside += d * d;
      any_below = true;
    }
  }
  if (!any_below) throw Error(Errc::NoDownside, "no return below the target");
  const double n = static_cast<double>(daily.size());
  return (excess / n) / std::sqrt(downside / n) * std::sqrt(kTradingDaysPerYear);
}

double annualized_stdev(std::span<const double> daily) {
  require_length(daily, 2, "standard deviation");
  return sample_stdev(daily) * std::sqrt(kTradingDaysPerYear);
}

double max_drawdown(std::span<const double> curve) {
  require_length(curve, 1, "max drawdown");
  double peak = curve.front();
  double worst = 0.0;
  for (double v : curve) {
    peak = std::max(peak, v);
    worst = std::min(worst, (v / peak - 1.0) * 100.0);
  }
  return worst;
}

double turnover(const std::vector<Vector>& weights) {
  if (weights.size() < 2) {
    throw Error(Errc::TooFewRebalances, fmt::format("{} weight vectors", weights.size()));
  }
  double total = 0.0;
  for (std::size_t k = 1; k < weights.size(); ++k) {
    if (weights[k].size() != weights[k - 1].size()) {
      throw Error(Errc::DimensionMismatch, "weight vectors differ in length");
    }
    total += (weights[k] - weights[k - 1]).cwiseAbs().sum();
  }
  return total / static_cast<double>(weights.size() - 1);
}

std::vector<double> equity_curve(std::span<const double> daily) {
  std::vector<double> curve;
  curve.reserve(daily.size() + 1);
  double v = 1.0;
  curve.push_back(v);
  for (double r : daily) {
    v *= 1.0 + r;
    curve.push_back(v);
  }
  return curve;
}

MetricRow compute_metric_row(std::span<const double> daily, std::span<const double> curve) {
  MetricRow row;
  row.annual_return = annualized_return(daily);
  row.stdev = annualized_stdev(daily);
  row.mdd = max_drawdown(curve);
  try {
    row.sharpe = sharpe(daily);
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateSeries) throw;
  }
  try {
    row.sortino = sortino(daily);
  } catch (const Error& e) {
    if (e.code() != Errc::NoDownside) throw;
  }
  return row;
}

}  // namespace rcfolio::metrics
