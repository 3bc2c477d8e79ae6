#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcfolio/data.hpp"
#include "rcfolio/env.hpp"
#include "rcfolio/metrics.hpp"
#include "rcfolio/types.hpp"

namespace rcfolio::backtest {

enum class StrategyKind { Model, Baseline, Index };

struct DecisionContext {
  const data::AssetPanel& panel;
  std::size_t day;                      // rebalance day index
  const data::FeatureWindow* window;    // set for strategies that declare a WindowSpec
};

struct Strategy {
  std::string name;
  StrategyKind kind = StrategyKind::Baseline;
  std::optional<data::WindowSpec> window;
  std::function<Vector(const DecisionContext&)> weights;
};

Strategy constant_strategy(std::string name, StrategyKind kind, Vector weights);
Strategy model_strategy(std::string name, env::Actor actor, const data::WindowSpec& window);
// Weight 1 on `asset`; throws UnknownAsset.
Strategy index_strategy(const data::AssetPanel& panel, std::string_view asset);

struct RebalanceSchedule {
  std::vector<std::size_t> days;  // panel row indices, strictly increasing
};

// First trading day on or after `from`, then the first trading day of every
// later calendar month up to `to`.
RebalanceSchedule monthly_schedule(const data::AssetPanel& panel, const Date& from, const Date& to);

// W'_i = W_i (1 + r_i) / sum_j W_j (1 + r_j)
Vector drift_weights(const Vector& weights, const Vector& daily_returns);

struct BacktestReport {
  std::string name;
  std::vector<Date> dates;          // curve dates, first = first rebalance
  std::vector<double> equity;       // starts at 1.0
  std::vector<double> daily_returns;
  metrics::MetricRow metrics;
  std::vector<Date> rebalance_dates;
  std::vector<Vector> weights;      // target weights at each rebalance
  std::vector<data::Asset> assets;
  std::optional<double> turnover;   // mean L1 change of targets, needs 2+ rebalances
};

/// Runs from the first scheduled day to the end of the panel. Weights are set
/// at each scheduled day (models see only data before that day) and drift with
/// prices in between.
BacktestReport run_backtest(const Strategy& strategy, const data::AssetPanel& panel,
                            const RebalanceSchedule& schedule);

struct ComparisonTable {
  std::vector<std::string> names;
  std::vector<metrics::MetricRow> rows;
};

ComparisonTable compare_strategies(const std::vector<BacktestReport>& reports);

struct ClassProportions {
  std::vector<Date> dates;
  std::vector<data::AssetClass> classes;
  Matrix values;  // dates x classes
};

ClassProportions class_proportions(const BacktestReport& report, const data::ClassMap& class_map);
ClassProportions class_proportions(const BacktestReport& report);

// equity_<name>.csv, weights_<name>.csv, classes_<name>.csv in `dir`.
void write_report(const BacktestReport& report, const std::string& dir);
void write_comparison(const ComparisonTable& table, const std::string& path);
// date,<name>,<name>,... over the shared curve dates.
void write_merged_equity(const std::vector<BacktestReport>& reports, const std::string& path);

}  // namespace rcfolio::backtest
