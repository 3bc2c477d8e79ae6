#include "rcfolio/backtest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "rcfolio/error.hpp"

namespace rcfolio::backtest {

namespace {

std::string format_optional(const std::optional<double>& v) {
  return v ? fmt::format("{}", *v) : std::string();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, path);
  return out;
}

}  // namespace

Strategy constant_strategy(std::string name, StrategyKind kind, Vector weights) {
  if (!on_simplex(weights)) throw Error(Errc::NotOnSimplex, name + ": weights not on the simplex");
  Strategy s;
  s.name = std::move(name);
  s.kind = kind;
  s.weights = [w = std::move(weights)](const DecisionContext&) { return w; };
  return s;
}

Strategy model_strategy(std::string name, env::Actor actor, const data::WindowSpec& window) {
  Strategy s;
  s.name = std::move(name);
  s.kind = StrategyKind::Model;
  s.window = window;
  s.weights = [a = std::move(actor)](const DecisionContext& ctx) { return a.weights(*ctx.window); };
  return s;
}

Strategy index_strategy(const data::AssetPanel& panel, std::string_view asset) {
  const auto idx = panel.asset_index(asset);
  if (!idx) throw Error(Errc::UnknownAsset, std::string(asset));
  Vector w = Vector::Zero(static_cast<Eigen::Index>(panel.num_assets()));
  w[static_cast<Eigen::Index>(*idx)] = 1.0;
  return constant_strategy(fmt::format("index_{}", asset), StrategyKind::Index, std::move(w));
}

RebalanceSchedule monthly_schedule(const data::AssetPanel& panel, const Date& from, const Date& to) {
  if (to < from) throw Error(Errc::InvalidRange, "schedule end precedes start");
  RebalanceSchedule s;
  const auto& dates = panel.dates();
  for (std::size_t t = 0; t < dates.size(); ++t) {
    if (dates[t] < from) continue;
    if (to < dates[t]) break;
    if (s.days.empty() || !same_month(dates[s.days.back()], dates[t])) s.days.push_back(t);
  }
  if (s.days.empty()) throw Error(Errc::ScheduleOutOfRange, "no trading day in the schedule range");
  return s;
}

Vector drift_weights(const Vector& weights, const Vector& daily_returns) {
  if (weights.size() != daily_returns.size()) {
    throw Error(Errc::DimensionMismatch, "weights and returns differ in length");
  }
  Vector grown = weights.cwiseProduct((daily_returns.array() + 1.0).matrix());
  const double total = grown.sum();
  if (!(total > 0.0)) throw Error(Errc::PortfolioWipedOut, "portfolio value is not positive");
  return grown / total;
}

BacktestReport run_backtest(const Strategy& strategy, const data::AssetPanel& panel,
                            const RebalanceSchedule& schedule) {
  const std::size_t T = panel.num_days();
  if (schedule.days.empty()) throw Error(Errc::ScheduleOutOfRange, "empty schedule");
  for (std::size_t k = 0; k < schedule.days.size(); ++k) {
    if (schedule.days[k] >= T || (k > 0 && schedule.days[k] <= schedule.days[k - 1])) {
      throw Error(Errc::ScheduleOutOfRange, "schedule is not an increasing set of panel days");
    }
  }
  const std::size_t first = schedule.days.front();
  if (first + 1 >= T) throw Error(Errc::ScheduleOutOfRange, "no trading day after the first rebalance");

  BacktestReport report;
  report.name = strategy.name;
  report.assets = panel.assets();
  const Matrix& close = panel.close();
  const auto N = static_cast<Eigen::Index>(panel.num_assets());

  Vector w;
  double value = 1.0;
  std::size_t next = 0;
  report.dates.push_back(panel.dates()[first]);
  report.equity.push_back(value);
  for (std::size_t d = first; d + 1 < T; ++d) {
    if (next < schedule.days.size() && schedule.days[next] == d) {
      std::optional<data::FeatureWindow> window;
      if (strategy.window) {
        if (d < strategy.window->length) {
          throw Error(Errc::StrategyFailure,
                      fmt::format("{}: not enough history for a window on {}", strategy.name,
                                  format_date(panel.dates()[d])));
        }
        window = data::window_at(panel, d, *strategy.window);
      }
      Vector target;
      try {
        target = strategy.weights(DecisionContext{panel, d, window ? &*window : nullptr});
      } catch (const std::exception& e) {
        throw Error(Errc::StrategyFailure, fmt::format("{}: {}", strategy.name, e.what()));
      }
      if (target.size() != N || !on_simplex(target)) {
        throw Error(Errc::StrategyFailure,
                    fmt::format("{}: weights on {} are not on the simplex", strategy.name,
                                format_date(panel.dates()[d])));
      }
      w = std::move(target);
      report.rebalance_dates.push_back(panel.dates()[d]);
      report.weights.push_back(w);
      ++next;
    }
    Vector r(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      r[i] = close(static_cast<Eigen::Index>(d + 1), i) / close(static_cast<Eigen::Index>(d), i) - 1.0;
    }
    const double rp = w.dot(r);
    value *= 1.0 + rp;
    report.daily_returns.push_back(rp);
    report.dates.push_back(panel.dates()[d + 1]);
    report.equity.push_back(value);
    w = drift_weights(w, r);
  }
  report.metrics = metrics::compute_metric_row(report.daily_returns, report.equity);
  if (report.weights.size() >= 2) report.turnover = metrics::turnover(report.weights);
  return report;
}

ComparisonTable compare_strategies(const std::vector<BacktestReport>& reports) {
  if (reports.empty()) throw Error(Errc::InvalidSpec, "nothing to compare");
  ComparisonTable table;
  for (const auto& r : reports) {
    if (r.dates.empty() || r.dates.front() != reports.front().dates.front() ||
        r.dates.back() != reports.front().dates.back()) {
      throw Error(Errc::MismatchedRanges,
                  fmt::format("{} covers a different range than {}", r.name, reports.front().name));
    }
    table.names.push_back(r.name);
    table.rows.push_back(r.metrics);
  }
  return table;
}

ClassProportions class_proportions(const BacktestReport& report, const data::ClassMap& class_map) {
  ClassProportions out;
  out.dates = report.rebalance_dates;
  out.classes.assign(std::begin(data::kAllAssetClasses), std::end(data::kAllAssetClasses));
  std::vector<std::size_t> column;
  for (const auto& a : report.assets) {
    auto it = class_map.find(a.id);
    if (it == class_map.end()) throw Error(Errc::UntaggedAsset, a.id);
    column.push_back(static_cast<std::size_t>(it->second));
  }
  out.values = Matrix::Zero(static_cast<Eigen::Index>(report.weights.size()),
                            static_cast<Eigen::Index>(out.classes.size()));
  for (std::size_t k = 0; k < report.weights.size(); ++k) {
    for (std::size_t i = 0; i < column.size(); ++i) {
      out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(column[i])) +=
          report.weights[k][static_cast<Eigen::Index>(i)];
    }
  }
  return out;
}

ClassProportions class_proportions(const BacktestReport& report) {
  data::ClassMap tags;
  for (const auto& a : report.assets) tags.emplace(a.id, a.asset_class);
  return class_proportions(report, tags);
}

void write_report(const BacktestReport& report, const std::string& dir) {
  const std::filesystem::path base(dir);
  {
    auto out = open_output((base / fmt::format("equity_{}.csv", report.name)).string());
    out << "date,value\n";
    for (std::size_t k = 0; k < report.dates.size(); ++k) {
      out << fmt::format("{},{}\n", format_date(report.dates[k]), report.equity[k]);
    }
  }
  {
    auto out = open_output((base / fmt::format("weights_{}.csv", report.name)).string());
    out << "date,asset,weight\n";
    for (std::size_t k = 0; k < report.weights.size(); ++k) {
      for (std::size_t i = 0; i < report.assets.size(); ++i) {
        out << fmt::format("{},{},{}\n", format_date(report.rebalance_dates[k]), report.assets[i].id,
                           report.weights[k][static_cast<Eigen::Index>(i)]);
      }
    }
  }
  {
    const auto props = class_proportions(report);
    auto out = open_output((base / fmt::format("classes_{}.csv", report.name)).string());
    out << "date,class,weight\n";
    for (std::size_t k = 0; k < props.dates.size(); ++k) {
      for (std::size_t c = 0; c < props.classes.size(); ++c) {
        out << fmt::format("{},{},{}\n", format_date(props.dates[k]),
                           data::to_string(props.classes[c]),
                           props.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)));
      }
    }
  }
}

void write_comparison(const ComparisonTable& table, const std::string& path) {
  auto out = open_output(path);
  out << "Model";
  for (auto col : metrics::kMetricColumns) out << ',' << col;
  out << '\n';
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& r = table.rows[k];
    out << fmt::format("{},{},{},{},{},{}\n", table.names[k], r.annual_return,
                       format_optional(r.sharpe), r.stdev, r.mdd, format_optional(r.sortino));
  }
}

void write_merged_equity(const std::vector<BacktestReport>& reports, const std::string& path) {
  if (reports.empty()) throw Error(Errc::InvalidSpec, "nothing to merge");
  for (const auto& r : reports) {
    if (r.dates != reports.front().dates) {
      throw Error(Errc::MismatchedRanges, fmt::format("{} has different curve dates", r.name));
    }
  }
  auto out = open_output(path);
  out << "date";
  for (const auto& r : reports) out << ',' << r.name;
  out << '\n';
  for (std::size_t k = 0; k < reports.front().dates.size(); ++k) {
    out << format_date(reports.front().dates[k]);
    for (const auto& r : reports) out << fmt::format(",{}", r.equity[k]);
    out << '\n';
  }
}

}  // namespace rcfolio::backtest
