#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcfolio/algo.hpp"
#include "rcfolio/data.hpp"
#include "rcfolio/date.hpp"

namespace rcfolio::config {

enum class DataSource { Synthetic, Csv };

using ClipBounds = std::pair<std::optional<double>, std::optional<double>>;

/// Everything a command needs. Parsed from a flat `key = value` file; see
/// kConfigKeys for the accepted keys.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string model = "actor_only";
  std::string checkpoint;

  DataSource source = DataSource::Synthetic;
  std::string csv_path;
  std::string classes_path;
  data::SyntheticSpec synth;

  data::WindowSpec window;
  algo::TrainConfig train;
  algo::ActorCriticConfig ac;
  algo::PPOConfig ppo;
  algo::ClipSpec clip = algo::ClipSpec::lower_only_default();

  std::optional<Date> train_end;
  std::optional<Date> test_start;
  std::optional<Date> test_end;
  double train_fraction = 0.7;  // used when train_end is not given

  std::vector<ClipBounds> sweep_grid;
  bool sweep_include_actor_only = true;

  bool wall_clock = false;

  void validate() const;
  std::uint64_t require_seed() const;
};

struct ConfigKey {
  std::string_view key;
  std::string_view description;
};

extern const std::vector<ConfigKey> kConfigKeys;

bool is_trainable(std::string_view model);
bool is_known_model(std::string_view model);

// `origin` names the source in error messages.
RunConfig parse_config(std::string_view text, std::string_view origin = "<config>");
RunConfig load_config(const std::string& path);

// "-0.4:0.4, -0.4:none, none:0.4"
std::vector<ClipBounds> parse_clip_grid(std::string_view text);

}  // namespace rcfolio::config
