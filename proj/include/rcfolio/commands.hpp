#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rcfolio/algo.hpp"
#include "rcfolio/backtest.hpp"
#include "rcfolio/config.hpp"
#include "rcfolio/data.hpp"

namespace rcfolio::cli {

data::AssetPanel load_data(const config::RunConfig& cfg);

struct RunSplit {
  data::AssetPanel train;     // rows up to the last training date
  data::AssetPanel backtest;  // rows up to the last test date, history included
  backtest::RebalanceSchedule schedule;
};

RunSplit split_run(const config::RunConfig& cfg, const data::AssetPanel& panel);

struct TrainedModel {
  env::Actor actor;
  algo::TrainLog log;
};

// Trains cfg.model on the training panel. `clip` overrides cfg.clip for reward_clip.
TrainedModel train_model(const config::RunConfig& cfg, const data::AssetPanel& train,
                         const algo::ClipSpec* clip = nullptr);

// Report name of a model: RC_<bounds> for reward_clip, the model name otherwise.
std::string strategy_name(const config::RunConfig& cfg);

backtest::Strategy make_strategy(const config::RunConfig& cfg, const data::AssetPanel& panel,
                                 const std::optional<env::Actor>& actor);

env::Actor load_actor(const config::RunConfig& cfg, const data::AssetPanel& panel,
                      const std::string& checkpoint);

struct TrainOutput {
  std::string checkpoint_path;
  std::string log_path;
  algo::TrainLog log;
};

// <out>/checkpoint.txt and <out>/train_log.csv
TrainOutput cmd_train(const config::RunConfig& cfg);

// equity/weights/classes exports plus a one-row comparison.csv in <out>.
backtest::BacktestReport cmd_backtest(const config::RunConfig& cfg,
                                      const std::optional<std::string>& checkpoint = std::nullopt);

// comparison.csv and equity.csv in `out`.
backtest::ComparisonTable cmd_compare(const std::vector<config::RunConfig>& configs,
                                      const std::string& out);

struct SweepOutput {
  std::vector<std::string> names;
  std::vector<algo::TrainLog> logs;
  std::vector<backtest::BacktestReport> reports;
  backtest::ComparisonTable table;
};

// One reward_clip run per grid cell, all with the config seed, run concurrently.
// Writes train_log_<name>.csv, checkpoint_<name>.txt, report exports,
// comparison.csv and equity.csv in <out>.
SweepOutput cmd_sweep(const config::RunConfig& cfg);

// <out>/panel.csv and <out>/classes.csv; returns the panel path.
std::string cmd_synth(const config::RunConfig& cfg);

}  // namespace rcfolio::cli
