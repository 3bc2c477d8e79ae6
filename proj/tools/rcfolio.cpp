// rcfolio command-line entry point.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rcfolio/commands.hpp"
#include "rcfolio/config.hpp"
#include "rcfolio/error.hpp"

namespace {

struct Options {
  std::vector<std::string> configs;
  std::string checkpoint;
  std::string out;
  std::optional<std::uint64_t> seed;
};

rcfolio::config::RunConfig load(const std::string& path, const Options& opt) {
  auto cfg = rcfolio::config::load_config(path);
  if (opt.seed) cfg.seed = opt.seed;
  if (!opt.out.empty()) cfg.out = opt.out;
  return cfg;
}

void add_common(CLI::App* cmd, Options& opt, bool many_configs) {
  if (many_configs) {
    cmd->add_option("--config", opt.configs, "config files, one per strategy")->required();
  } else {
    cmd->add_option("--config", opt.configs, "config file")->required()->expected(1);
  }
  cmd->add_option("--out", opt.out, "output directory (overrides out)");
  cmd->add_option("--seed", opt.seed, "seed (overrides seed)");
}

std::string keys_help() {
  std::string s = "Config keys:\n";
  for (const auto& k : rcfolio::config::kConfigKeys) {
    s += fmt::format("  {:<26} {}\n", k.key, k.description);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rcfolio: RL portfolio training and backtesting"};
  app.footer(keys_help());
  app.require_subcommand(1);
  Options opt;

  auto* train = app.add_subcommand("train", "train a model, write checkpoint and training log");
  add_common(train, opt, false);
  auto* bt = app.add_subcommand("backtest", "backtest one strategy over the test range");
  add_common(bt, opt, false);
  bt->add_option("--checkpoint", opt.checkpoint, "actor checkpoint for trained models");
  auto* compare = app.add_subcommand("compare", "compare strategies over a shared test range");
  add_common(compare, opt, true);
  auto* sweep = app.add_subcommand("sweep", "train reward_clip over a grid of bounds");
  add_common(sweep, opt, false);
  auto* synth = app.add_subcommand("synth", "write a synthetic panel CSV and class map");
  add_common(synth, opt, false);

  CLI11_PARSE(app, argc, argv);

  namespace cli = rcfolio::cli;
  try {
    if (train->parsed()) {
      const auto out = cli::cmd_train(load(opt.configs.front(), opt));
      std::cout << fmt::format("checkpoint {}\nlog {}\n", out.checkpoint_path, out.log_path);
    } else if (bt->parsed()) {
      std::optional<std::string> ck;
      if (!opt.checkpoint.empty()) ck = opt.checkpoint;
      const auto report = cli::cmd_backtest(load(opt.configs.front(), opt), ck);
      std::cout << fmt::format("{}: final equity {}\n", report.name, report.equity.back());
    } else if (compare->parsed()) {
      std::vector<rcfolio::config::RunConfig> cfgs;
      for (const auto& path : opt.configs) cfgs.push_back(load(path, opt));
      const std::string out = opt.out.empty() ? cfgs.front().out : opt.out;
      const auto table = cli::cmd_compare(cfgs, out);
      std::cout << fmt::format("{} strategies compared\n", table.rows.size());
    } else if (sweep->parsed()) {
      const auto out = cli::cmd_sweep(load(opt.configs.front(), opt));
      for (std::size_t k = 0; k < out.names.size(); ++k) {
        std::cout << fmt::format("{}: final equity {}\n", out.names[k], out.reports[k].equity.back());
      }
    } else if (synth->parsed()) {
      std::cout << cli::cmd_synth(load(opt.configs.front(), opt)) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
