// Python bindings for the rcfolio core: synthetic data, metrics, baselines,
// clipping primitives and the train / backtest / compare / sweep / synth commands.

#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rcfolio/algo.hpp"
#include "rcfolio/backtest.hpp"
#include "rcfolio/baselines.hpp"
#include "rcfolio/commands.hpp"
#include "rcfolio/config.hpp"
#include "rcfolio/data.hpp"
#include "rcfolio/date.hpp"
#include "rcfolio/error.hpp"
#include "rcfolio/metrics.hpp"

namespace py = pybind11;
using namespace rcfolio;

namespace {

config::RunConfig load(const std::string& path, const std::optional<std::string>& out,
                       std::optional<std::uint64_t> seed) {
  auto cfg = config::load_config(path);
  if (seed) cfg.seed = seed;
  if (out) cfg.out = *out;
  return cfg;
}

std::vector<std::string> date_strings(const std::vector<Date>& dates) {
  std::vector<std::string> out;
  out.reserve(dates.size());
  for (const auto& d : dates) out.push_back(format_date(d));
  return out;
}

py::dict metric_dict(const metrics::MetricRow& row) {
  py::dict d;
  d["annual_return"] = row.annual_return;
  d["sharpe"] = row.sharpe;
  d["stdev"] = row.stdev;
  d["mdd"] = row.mdd;
  d["sortino"] = row.sortino;
  return d;
}

py::dict report_dict(const backtest::BacktestReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["dates"] = date_strings(r.dates);
  d["equity"] = r.equity;
  d["metrics"] = metric_dict(r.metrics);
  return d;
}

std::vector<data::Asset> assets_of(const std::vector<std::string>& classes) {
  std::vector<data::Asset> assets;
  for (const auto& c : classes) {
    auto cls = data::parse_asset_class(c);
    if (!cls) throw Error(Errc::UnknownAssetClass, c);
    assets.push_back({"X" + std::to_string(assets.size()), *cls});
  }
  return assets;
}

algo::ClipSpec clip_of(std::optional<double> lower, std::optional<double> upper) {
  algo::ClipSpec c;
  c.lower = lower;
  c.upper = upper;
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_rcfolio, m) {
  m.doc() = "RL portfolio training and backtesting engine";

  // Error carries the failure kind in `code`, e.g. "ConfigError".
  static py::handle error = py::exception<Error>(m, "Error").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
      exc.attr("code") = py::str(std::string(to_string(e.code())));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def(
      "generate_synthetic",
      [](std::size_t n_assets, std::size_t n_days, std::vector<double> drift,
         std::vector<double> volatility, std::uint64_t seed) {
        data::SyntheticSpec s;
        s.n_assets = n_assets;
        s.n_days = n_days;
        s.drift = drift.size() == 1 ? std::vector<double>(n_assets, drift[0]) : drift;
        s.volatility = volatility.size() == 1 ? std::vector<double>(n_assets, volatility[0]) : volatility;
        s.seed = seed;
        const auto panel = data::generate_synthetic(s);
        py::dict d;
        d["dates"] = date_strings(panel.dates());
        std::vector<std::string> ids;
        for (const auto& a : panel.assets()) ids.push_back(a.id);
        d["assets"] = ids;
        d["close"] = panel.close();
        return d;
      },
      py::arg("n_assets"), py::arg("n_days"), py::arg("drift") = std::vector<double>{0.0},
      py::arg("volatility") = std::vector<double>{0.01}, py::arg("seed") = 0,
      "GBM price panel: dict with dates, assets and a (n_days+1) x n_assets close matrix.");

  m.def("annualized_return", [](std::vector<double> r) { return metrics::annualized_return(r); });
  m.def("sharpe", [](std::vector<double> r) { return metrics::sharpe(r); });
  m.def("sortino", [](std::vector<double> r, double mar) { return metrics::sortino(r, mar); },
        py::arg("daily"), py::arg("mar") = 0.0);
  m.def("annualized_stdev", [](std::vector<double> r) { return metrics::annualized_stdev(r); });
  m.def("max_drawdown", [](std::vector<double> c) { return metrics::max_drawdown(c); });
  m.def("turnover", &metrics::turnover);
  m.def("equity_curve", [](std::vector<double> r) { return metrics::equity_curve(r); });

  m.def("equal_weight", [](std::size_t n) {
    return baselines::equal_weight(std::vector<data::Asset>(n, data::Asset{"X", data::AssetClass::Equity}));
  });
  m.def("sixty_forty", [](const std::vector<std::string>& classes) {
    return baselines::sixty_forty(assets_of(classes));
  }, "Weights for assets tagged with class names (equity, bond_long, ...).");
  m.def("all_weather", [](const std::vector<std::string>& classes) {
    return baselines::all_weather(assets_of(classes));
  });

  m.def("reward_clip", [](double v, std::optional<double> lo, std::optional<double> hi) {
    return algo::reward_clip(v, clip_of(lo, hi));
  }, py::arg("value"), py::arg("lower") = py::none(), py::arg("upper") = py::none());
  m.def("clip_name", [](std::optional<double> lo, std::optional<double> hi) {
    return clip_of(lo, hi).name();
  }, py::arg("lower") = py::none(), py::arg("upper") = py::none());
  m.def("ppo_surrogate", &algo::ppo_surrogate, py::arg("ratio"), py::arg("advantage"),
        py::arg("epsilon"));

  m.def("config_keys", [] {
    std::vector<std::string> keys;
    for (const auto& k : config::kConfigKeys) keys.emplace_back(k.key);
    return keys;
  });
  m.def("check_config", [](const std::string& path) { load(path, std::nullopt, std::nullopt).validate(); },
        "Raises Error for unknown keys or invalid values.");

  m.def(
      "train",
      [](const std::string& path, std::optional<std::string> out, std::optional<std::uint64_t> seed) {
        const auto r = cli::cmd_train(load(path, out, seed));
        py::dict d;
        d["checkpoint"] = r.checkpoint_path;
        d["log"] = r.log_path;
        d["epochs"] = r.log.records.size();
        return d;
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none());
  m.def(
      "backtest",
      [](const std::string& path, std::optional<std::string> checkpoint, std::optional<std::string> out,
         std::optional<std::uint64_t> seed) {
        return report_dict(cli::cmd_backtest(load(path, out, seed), checkpoint));
      },
      py::arg("config"), py::arg("checkpoint") = py::none(), py::arg("out") = py::none(),
      py::arg("seed") = py::none());
  m.def(
      "compare",
      [](const std::vector<std::string>& paths, const std::string& out, std::optional<std::uint64_t> seed) {
        std::vector<config::RunConfig> cfgs;
        for (const auto& p : paths) cfgs.push_back(load(p, std::nullopt, seed));
        const auto table = cli::cmd_compare(cfgs, out);
        py::dict d;
        for (std::size_t k = 0; k < table.names.size(); ++k) d[py::str(table.names[k])] = metric_dict(table.rows[k]);
        return d;
      },
      py::arg("configs"), py::arg("out"), py::arg("seed") = py::none());
  m.def(
      "sweep",
      [](const std::string& path, std::optional<std::string> out, std::optional<std::uint64_t> seed) {
        const auto r = cli::cmd_sweep(load(path, out, seed));
        py::list reports;
        for (const auto& rep : r.reports) reports.append(report_dict(rep));
        return reports;
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none());
  m.def(
      "synth",
      [](const std::string& path, std::optional<std::string> out, std::optional<std::uint64_t> seed) {
        return cli::cmd_synth(load(path, out, seed));
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none());
}
