#include "rcfolio/commands.hpp"

#include <filesystem>
#include <future>

#include <fmt/format.h>

#include "rcfolio/baselines.hpp"
#include "rcfolio/error.hpp"

namespace rcfolio::cli {

namespace fs = std::filesystem;

namespace {

std::string in_out(const config::RunConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.out);
  return (fs::path(cfg.out) / file).string();
}

nn::Head head_for(std::string_view model) {
  return (model == "actor_critic" || model == "ppo") ? nn::Head::Softplus : nn::Head::Softmax;
}

}  // namespace

data::AssetPanel load_data(const config::RunConfig& cfg) {
  if (cfg.source == config::DataSource::Csv) {
    return data::load_panel_csv(cfg.csv_path, data::load_class_map(cfg.classes_path));
  }
  auto spec = cfg.synth;
  spec.seed = cfg.require_seed();
  return data::generate_synthetic(spec);
}

RunSplit split_run(const config::RunConfig& cfg, const data::AssetPanel& panel) {
  const auto& dates = panel.dates();
  const std::size_t T = dates.size();
  auto last_on_or_before = [&](const Date& d) -> std::size_t {
    std::size_t idx = T;
    for (std::size_t t = 0; t < T && dates[t] <= d; ++t) idx = t;
    if (idx == T) throw Error(Errc::InvalidRange, fmt::format("no trading day on or before {}", format_date(d)));
    return idx;
  };
  auto first_on_or_after = [&](const Date& d) -> std::size_t {
    for (std::size_t t = 0; t < T; ++t) {
      if (d <= dates[t]) return t;
    }
    throw Error(Errc::InvalidRange, fmt::format("no trading day on or after {}", format_date(d)));
  };

  std::size_t train_last = 0;
  if (cfg.train_end) {
    train_last = last_on_or_before(*cfg.train_end);
  } else {
    const auto rows = static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(T));
    if (rows == 0) throw Error(Errc::InvalidRange, "empty training range");
    train_last = rows - 1;
  }
  const std::size_t test_first = cfg.test_start ? first_on_or_after(*cfg.test_start) : train_last + 1;
  const std::size_t test_last = cfg.test_end ? last_on_or_before(*cfg.test_end) : T - 1;
  if (test_first <= train_last || test_first >= test_last || test_last >= T) {
    throw Error(Errc::InvalidRange, "test range must follow the training range and span 2+ days");
  }

  RunSplit split{panel.slice(0, train_last + 1), panel.slice(0, test_last + 1), {}};
  split.schedule = backtest::monthly_schedule(split.backtest, dates[test_first], dates[test_last]);
  return split;
}

std::string strategy_name(const config::RunConfig& cfg) {
  if (cfg.model == "reward_clip") return cfg.clip.name();
  if (cfg.model.rfind("index:", 0) == 0) return "index_" + cfg.model.substr(6);
  return cfg.model;
}

TrainedModel train_model(const config::RunConfig& cfg, const data::AssetPanel& train,
                         const algo::ClipSpec* clip) {
  if (!config::is_trainable(cfg.model)) {
    throw Error(Errc::NotTrainable, fmt::format("model not trainable: {}", cfg.model));
  }
  const auto seed = cfg.require_seed();
  const auto market = env::make_market_data(train, cfg.window);
  if (cfg.model == "actor_only") {
    auto r = algo::train_actor_only(market, cfg.train, seed);
    return {std::move(r.actor), std::move(r.log)};
  }
  if (cfg.model == "reward_clip") {
    auto r = algo::train_reward_clip(market, cfg.train, clip ? *clip : cfg.clip, seed);
    return {std::move(r.actor), std::move(r.log)};
  }
  if (cfg.model == "actor_critic") {
    auto r = algo::train_actor_critic(market, cfg.train, cfg.ac, seed);
    return {std::move(r.actor), std::move(r.log)};
  }
  auto r = algo::train_ppo(market, cfg.train, cfg.ppo, seed);
  return {std::move(r.actor), std::move(r.log)};
}

env::Actor load_actor(const config::RunConfig& cfg, const data::AssetPanel& panel,
                      const std::string& checkpoint) {
  if (checkpoint.empty()) {
    throw Error(Errc::MissingCheckpoint, fmt::format("model {} needs a checkpoint", cfg.model));
  }
  auto ck = nn::read_checkpoint(checkpoint);
  const std::size_t inputs = cfg.window.length * panel.num_assets() * cfg.window.features_per_asset();
  const auto expected = env::make_layer_spec(inputs, cfg.train.hidden, panel.num_assets(), head_for(cfg.model));
  if (!(ck.spec == expected)) {
    throw Error(Errc::CheckpointMismatch,
                fmt::format("{} does not match the configured network", checkpoint));
  }
  return env::Actor{std::move(ck.spec), std::move(ck.params), cfg.train.feature_scale};
}

backtest::Strategy make_strategy(const config::RunConfig& cfg, const data::AssetPanel& panel,
                                 const std::optional<env::Actor>& actor) {
  using backtest::StrategyKind;
  const auto& assets = panel.assets();
  if (config::is_trainable(cfg.model)) {
    if (!actor) throw Error(Errc::MissingCheckpoint, fmt::format("model {} needs an actor", cfg.model));
    return backtest::model_strategy(strategy_name(cfg), *actor, cfg.window);
  }
  if (cfg.model == "equal_weight") {
    return backtest::constant_strategy(cfg.model, StrategyKind::Baseline, baselines::equal_weight(assets));
  }
  if (cfg.model == "sixty_forty") {
    return backtest::constant_strategy(cfg.model, StrategyKind::Baseline, baselines::sixty_forty(assets));
  }
  if (cfg.model == "all_weather") {
    return backtest::constant_strategy(cfg.model, StrategyKind::Baseline, baselines::all_weather(assets));
  }
  if (cfg.model.rfind("index:", 0) == 0) return backtest::index_strategy(panel, cfg.model.substr(6));
  throw Error(Errc::ConfigError, fmt::format("unknown model '{}'", cfg.model));
}

TrainOutput cmd_train(const config::RunConfig& cfg) {
  cfg.validate();
  const auto panel = load_data(cfg);
  const auto split = split_run(cfg, panel);
  auto trained = train_model(cfg, split.train);
  TrainOutput out{in_out(cfg, "checkpoint.txt"), in_out(cfg, "train_log.csv"), std::move(trained.log)};
  nn::write_checkpoint(out.checkpoint_path, trained.actor.spec, trained.actor.params);
  algo::write_train_log(out.log_path, out.log, cfg.wall_clock);
  return out;
}

namespace {

backtest::BacktestReport backtest_config(const config::RunConfig& cfg,
                                         const std::optional<std::string>& checkpoint) {
  cfg.validate();
  const auto panel = load_data(cfg);
  const auto split = split_run(cfg, panel);
  std::optional<env::Actor> actor;
  if (config::is_trainable(cfg.model)) {
    actor = load_actor(cfg, split.backtest, checkpoint.value_or(cfg.checkpoint));
  }
  const auto strategy = make_strategy(cfg, split.backtest, actor);
  return backtest::run_backtest(strategy, split.backtest, split.schedule);
}

}  // namespace

backtest::BacktestReport cmd_backtest(const config::RunConfig& cfg,
                                      const std::optional<std::string>& checkpoint) {
  auto report = backtest_config(cfg, checkpoint);
  fs::create_directories(cfg.out);
  backtest::write_report(report, cfg.out);
  backtest::write_comparison(backtest::compare_strategies({report}), in_out(cfg, "comparison.csv"));
  return report;
}

backtest::ComparisonTable cmd_compare(const std::vector<config::RunConfig>& configs,
                                      const std::string& out) {
  if (configs.empty()) throw Error(Errc::ConfigError, "compare needs at least one config");
  std::vector<backtest::BacktestReport> reports;
  for (const auto& cfg : configs) reports.push_back(backtest_config(cfg, std::nullopt));
  auto table = backtest::compare_strategies(reports);
  fs::create_directories(out);
  backtest::write_comparison(table, (fs::path(out) / "comparison.csv").string());
  backtest::write_merged_equity(reports, (fs::path(out) / "equity.csv").string());
  return table;
}

SweepOutput cmd_sweep(const config::RunConfig& cfg) {
  cfg.validate();
  if (cfg.model != "reward_clip") {
    throw Error(Errc::ConfigError, "sweep needs model = reward_clip");
  }
  if (cfg.sweep_grid.empty()) throw Error(Errc::InvalidSpec, "empty sweep grid");
  std::vector<algo::ClipSpec> clips;
  for (const auto& [lower, upper] : cfg.sweep_grid) {
    algo::ClipSpec c = cfg.clip;
    c.lower = lower;
    c.upper = upper;
    c.validate();
    clips.push_back(c);
  }

  const auto panel = load_data(cfg);
  const auto split = split_run(cfg, panel);

  struct Cell {
    config::RunConfig cfg;
    std::optional<algo::ClipSpec> clip;
  };
  std::vector<Cell> cells;
  if (cfg.sweep_include_actor_only) {
    auto base = cfg;
    base.model = "actor_only";
    cells.push_back({base, std::nullopt});
  }
  for (const auto& c : clips) {
    auto cell = cfg;
    cell.clip = c;
    cells.push_back({cell, c});
  }

  std::vector<std::future<TrainedModel>> running;
  for (const auto& cell : cells) {
    running.push_back(std::async(std::launch::async, [&split, &cell] {
      return train_model(cell.cfg, split.train, cell.clip ? &*cell.clip : nullptr);
    }));
  }

  SweepOutput out;
  fs::create_directories(cfg.out);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    auto trained = running[k].get();
    const auto name = strategy_name(cells[k].cfg);
    nn::write_checkpoint(in_out(cfg, fmt::format("checkpoint_{}.txt", name)), trained.actor.spec,
                         trained.actor.params);
    algo::write_train_log(in_out(cfg, fmt::format("train_log_{}.csv", name)), trained.log,
                          cfg.wall_clock);
    const auto strategy = backtest::model_strategy(name, trained.actor, cfg.window);
    auto report = backtest::run_backtest(strategy, split.backtest, split.schedule);
    backtest::write_report(report, cfg.out);
    out.names.push_back(name);
    out.logs.push_back(std::move(trained.log));
    out.reports.push_back(std::move(report));
  }
  out.table = backtest::compare_strategies(out.reports);
  backtest::write_comparison(out.table, in_out(cfg, "comparison.csv"));
  backtest::write_merged_equity(out.reports, in_out(cfg, "equity.csv"));
  return out;
}

std::string cmd_synth(const config::RunConfig& cfg) {
  cfg.validate();
  const auto panel = load_data(cfg);
  const auto path = in_out(cfg, "panel.csv");
  data::write_panel_csv(panel, path);
  data::write_class_map(panel, in_out(cfg, "classes.csv"));
  return path;
}

}  // namespace rcfolio::cli
