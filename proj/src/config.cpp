#include "rcfolio/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "rcfolio/error.hpp"

namespace rcfolio::config {

const std::vector<ConfigKey> kConfigKeys = {
    {"seed", "master seed for every random stream (required)"},
    {"out", "output directory"},
    {"model", "actor_only | actor_critic | ppo | reward_clip | equal_weight | sixty_forty | all_weather | index:<asset>"},
    {"checkpoint", "actor checkpoint read by backtest and compare"},
    {"data.source", "synthetic | csv"},
    {"data.csv", "panel CSV (date,asset,close,volume)"},
    {"data.classes", "class map CSV (asset,class)"},
    {"synth.n_assets", "number of synthetic assets"},
    {"synth.n_days", "number of daily increments; the panel has n_days + 1 rows"},
    {"synth.drift", "daily log drift, one value or one per asset"},
    {"synth.volatility", "daily log volatility, one value or one per asset"},
    {"synth.regimes", "start:drift_mult:vol_mult entries, comma separated"},
    {"synth.ids", "asset ids, comma separated"},
    {"synth.classes", "asset classes, one value or one per asset"},
    {"synth.start_date", "first panel date (YYYY-MM-DD)"},
    {"window.length", "window length in trading days"},
    {"window.use_volume", "add the volume z-score feature"},
    {"nn.hidden", "hidden layer widths, comma separated"},
    {"nn.feature_scale", "factor applied to the return features"},
    {"train.epochs", "training epochs (PPO: iterations)"},
    {"train.episodes", "episodes per epoch"},
    {"train.episode_length", "trading days per episode"},
    {"train.action_period", "days between actions inside an episode"},
    {"train.learning_rate", "Adam step size"},
    {"train.beta1", "Adam first moment decay"},
    {"train.beta2", "Adam second moment decay"},
    {"train.adam_epsilon", "Adam denominator guard"},
    {"reward.mixing", "return,sharpe,antibias weights"},
    {"ac.gamma", "actor-critic discount"},
    {"ac.actors", "episodes per actor-critic iteration"},
    {"ac.critic_steps", "critic updates per iteration"},
    {"ac.components", "1 (single value head) or 3 (one head per reward component)"},
    {"ppo.epsilon", "ratio clip"},
    {"ppo.value_coef", "value loss coefficient"},
    {"ppo.entropy_coef", "entropy coefficient"},
    {"ppo.epochs", "optimisation epochs per batch"},
    {"ppo.minibatch", "minibatch size"},
    {"ppo.actors", "parallel rollouts per iteration"},
    {"ppo.horizon", "trading days per rollout"},
    {"ppo.gamma", "discount"},
    {"clip.lower", "lower reward bound or none"},
    {"clip.upper", "upper reward bound or none"},
    {"clip.mode", "value | ratio"},
    {"clip.scale", "reward units for value mode (100: percent daily return)"},
    {"split.train_end", "last training date"},
    {"split.test_start", "first test date"},
    {"split.test_end", "last test date"},
    {"split.train_fraction", "training share of the panel when split.train_end is absent"},
    {"sweep.grid", "lower:upper cells, comma separated; none for an absent bound"},
    {"sweep.include_actor_only", "also train and report actor_only in a sweep"},
    {"log.wall_clock", "fill the seconds column of training logs"},
};

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                       : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  throw Error(Errc::ConfigError, fmt::format("{} = '{}': {}", key, value, what));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || p != end) bad_value(key, v, "expected a number");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || p != end) bad_value(key, v, "expected a non-negative integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "expected true or false");
}

std::optional<double> to_bound(std::string_view key, std::string_view v) {
  if (v == "none") return std::nullopt;
  return to_double(key, v);
}

std::vector<double> to_doubles(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (auto part : split(v, ',')) out.push_back(to_double(key, part));
  return out;
}

Date to_date(std::string_view key, std::string_view v) {
  try {
    return parse_date(v);
  } catch (const Error&) {
    bad_value(key, v, "expected YYYY-MM-DD");
  }
}

template <class T>
std::vector<T> broadcast(std::string_view key, std::vector<T> values, std::size_t n) {
  if (values.size() == 1 && n > 1) values.assign(n, values.front());
  if (!values.empty() && values.size() != n) {
    throw Error(Errc::ConfigError,
                fmt::format("{} has {} entries for {} assets", key, values.size(), n));
  }
  return values;
}

}  // namespace

bool is_trainable(std::string_view model) {
  return model == "actor_only" || model == "actor_critic" || model == "ppo" || model == "reward_clip";
}

bool is_known_model(std::string_view model) {
  if (is_trainable(model)) return true;
  if (model == "equal_weight" || model == "sixty_forty" || model == "all_weather") return true;
  return model.size() > 6 && model.substr(0, 6) == "index:";
}

std::vector<ClipBounds> parse_clip_grid(std::string_view text) {
  std::vector<ClipBounds> grid;
  if (trim(text).empty()) return grid;
  for (auto cell : split(text, ',')) {
    const auto bounds = split(cell, ':');
    if (bounds.size() != 2) bad_value("sweep.grid", cell, "expected lower:upper");
    grid.emplace_back(to_bound("sweep.grid", bounds[0]), to_bound("sweep.grid", bounds[1]));
  }
  return grid;
}

RunConfig parse_config(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::vector<double> drift, vol;
  std::vector<data::AssetClass> classes;
  std::set<std::string, std::less<>> seen;

  using Setter = std::function<void(std::string_view, std::string_view)>;
  const std::map<std::string_view, Setter> setters = {
      {"seed", [&](auto k, auto v) { cfg.seed = to_uint(k, v); }},
      {"out", [&](auto, auto v) { cfg.out = std::string(v); }},
      {"model", [&](auto, auto v) { cfg.model = std::string(v); }},
      {"checkpoint", [&](auto, auto v) { cfg.checkpoint = std::string(v); }},
      {"data.source",
       [&](auto k, auto v) {
         if (v == "synthetic") cfg.source = DataSource::Synthetic;
         else if (v == "csv") cfg.source = DataSource::Csv;
         else bad_value(k, v, "expected synthetic or csv");
       }},
      {"data.csv", [&](auto, auto v) { cfg.csv_path = std::string(v); }},
      {"data.classes", [&](auto, auto v) { cfg.classes_path = std::string(v); }},
      {"synth.n_assets", [&](auto k, auto v) { cfg.synth.n_assets = to_uint(k, v); }},
      {"synth.n_days", [&](auto k, auto v) { cfg.synth.n_days = to_uint(k, v); }},
      {"synth.drift", [&](auto k, auto v) { drift = to_doubles(k, v); }},
      {"synth.volatility", [&](auto k, auto v) { vol = to_doubles(k, v); }},
      {"synth.regimes",
       [&](auto k, auto v) {
         cfg.synth.regimes.clear();
         if (v.empty()) return;
         for (auto entry : split(v, ',')) {
           const auto f = split(entry, ':');
           if (f.size() != 3) bad_value(k, entry, "expected start:drift_mult:vol_mult");
           cfg.synth.regimes.push_back({to_uint(k, f[0]), to_double(k, f[1]), to_double(k, f[2])});
         }
       }},
      {"synth.ids",
       [&](auto, auto v) {
         cfg.synth.ids.clear();
         for (auto id : split(v, ',')) cfg.synth.ids.emplace_back(id);
       }},
      {"synth.classes",
       [&](auto k, auto v) {
         classes.clear();
         for (auto c : split(v, ',')) {
           const auto parsed = data::parse_asset_class(c);
           if (!parsed) bad_value(k, c, "unknown asset class");
           classes.push_back(*parsed);
         }
       }},
      {"synth.start_date", [&](auto k, auto v) { cfg.synth.start_date = to_date(k, v); }},
      {"window.length", [&](auto k, auto v) { cfg.window.length = to_uint(k, v); }},
      {"window.use_volume", [&](auto k, auto v) { cfg.window.use_volume = to_bool(k, v); }},
      {"nn.hidden",
       [&](auto k, auto v) {
         cfg.train.hidden.clear();
         if (v.empty()) return;
         for (auto w : split(v, ',')) cfg.train.hidden.push_back(to_uint(k, w));
       }},
      {"nn.feature_scale", [&](auto k, auto v) { cfg.train.feature_scale = to_double(k, v); }},
      {"train.epochs", [&](auto k, auto v) { cfg.train.epochs = to_uint(k, v); }},
      {"train.episodes", [&](auto k, auto v) { cfg.train.episodes = to_uint(k, v); }},
      {"train.episode_length", [&](auto k, auto v) { cfg.train.episode_length = to_uint(k, v); }},
      {"train.action_period", [&](auto k, auto v) { cfg.train.action_period = to_uint(k, v); }},
      {"train.learning_rate", [&](auto k, auto v) { cfg.train.adam.learning_rate = to_double(k, v); }},
      {"train.beta1", [&](auto k, auto v) { cfg.train.adam.beta1 = to_double(k, v); }},
      {"train.beta2", [&](auto k, auto v) { cfg.train.adam.beta2 = to_double(k, v); }},
      {"train.adam_epsilon", [&](auto k, auto v) { cfg.train.adam.epsilon = to_double(k, v); }},
      {"reward.mixing",
       [&](auto k, auto v) {
         const auto m = to_doubles(k, v);
         if (m.size() != 3) bad_value(k, v, "expected three weights");
         cfg.train.mixing = {m[0], m[1], m[2]};
       }},
      {"ac.gamma", [&](auto k, auto v) { cfg.ac.gamma = to_double(k, v); }},
      {"ac.actors", [&](auto k, auto v) { cfg.ac.actors = to_uint(k, v); }},
      {"ac.critic_steps", [&](auto k, auto v) { cfg.ac.critic_steps = to_uint(k, v); }},
      {"ac.components", [&](auto k, auto v) { cfg.ac.components = to_uint(k, v); }},
      {"ppo.epsilon", [&](auto k, auto v) { cfg.ppo.epsilon = to_double(k, v); }},
      {"ppo.value_coef", [&](auto k, auto v) { cfg.ppo.value_coef = to_double(k, v); }},
      {"ppo.entropy_coef", [&](auto k, auto v) { cfg.ppo.entropy_coef = to_double(k, v); }},
      {"ppo.epochs", [&](auto k, auto v) { cfg.ppo.epochs = to_uint(k, v); }},
      {"ppo.minibatch", [&](auto k, auto v) { cfg.ppo.minibatch = to_uint(k, v); }},
      {"ppo.actors", [&](auto k, auto v) { cfg.ppo.actors = to_uint(k, v); }},
      {"ppo.horizon", [&](auto k, auto v) { cfg.ppo.horizon = to_uint(k, v); }},
      {"ppo.gamma", [&](auto k, auto v) { cfg.ppo.gamma = to_double(k, v); }},
      {"clip.lower", [&](auto k, auto v) { cfg.clip.lower = to_bound(k, v); }},
      {"clip.upper", [&](auto k, auto v) { cfg.clip.upper = to_bound(k, v); }},
      {"clip.mode",
       [&](auto k, auto v) {
         if (v == "value") cfg.clip.mode = algo::ClipMode::Value;
         else if (v == "ratio") cfg.clip.mode = algo::ClipMode::Ratio;
         else bad_value(k, v, "expected value or ratio");
       }},
      {"clip.scale", [&](auto k, auto v) { cfg.clip.scale = to_double(k, v); }},
      {"split.train_end", [&](auto k, auto v) { cfg.train_end = to_date(k, v); }},
      {"split.test_start", [&](auto k, auto v) { cfg.test_start = to_date(k, v); }},
      {"split.test_end", [&](auto k, auto v) { cfg.test_end = to_date(k, v); }},
      {"split.train_fraction", [&](auto k, auto v) { cfg.train_fraction = to_double(k, v); }},
      {"sweep.grid", [&](auto, auto v) { cfg.sweep_grid = parse_clip_grid(v); }},
      {"sweep.include_actor_only", [&](auto k, auto v) { cfg.sweep_include_actor_only = to_bool(k, v); }},
      {"log.wall_clock", [&](auto k, auto v) { cfg.wall_clock = to_bool(k, v); }},
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::ConfigError, fmt::format("{}:{}: expected key = value", origin, line_no));
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(Errc::ConfigError, fmt::format("{}:{}: unknown key '{}'", origin, line_no, key));
    }
    if (!seen.emplace(key).second) {
      throw Error(Errc::ConfigError, fmt::format("{}:{}: duplicate key '{}'", origin, line_no, key));
    }
    it->second(key, value);
  }

  const std::size_t n = cfg.synth.n_assets;
  cfg.synth.drift = broadcast("synth.drift", drift.empty() ? std::vector<double>{0.0} : drift, n);
  cfg.synth.volatility = broadcast("synth.volatility", vol.empty() ? std::vector<double>{0.01} : vol, n);
  cfg.synth.classes = broadcast("synth.classes", classes, n);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

void RunConfig::validate() const {
  if (!is_known_model(model)) throw Error(Errc::ConfigError, fmt::format("unknown model '{}'", model));
  if (source == DataSource::Csv) {
    if (csv_path.empty() || classes_path.empty()) {
      throw Error(Errc::ConfigError, "data.source = csv needs data.csv and data.classes");
    }
  } else {
    synth.validate();
  }
  if (window.length == 0) throw Error(Errc::ConfigError, "window.length must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(Errc::ConfigError, "split.train_fraction must lie in (0, 1)");
  }
  if (train_end && test_start && *test_start <= *train_end) {
    throw Error(Errc::InvalidRange, "split.test_start must follow split.train_end");
  }
  if (test_start && test_end && *test_end < *test_start) {
    throw Error(Errc::InvalidRange, "split.test_end precedes split.test_start");
  }
  train.validate();
  ac.validate();
  ppo.validate();
  clip.validate();
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw Error(Errc::ConfigError, "seed is required");
  return *seed;
}

}  // namespace rcfolio::config
