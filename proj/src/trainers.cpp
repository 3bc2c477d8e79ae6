#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "rcfolio/algo.hpp"
#include "rcfolio/error.hpp"
#include "rcfolio/rng.hpp"

namespace rcfolio::algo {

namespace {

using Clock = std::chrono::steady_clock;

ActorResult train_deterministic(const env::MarketData& data, const TrainConfig& cfg,
                                const ClipSpec* clip, std::uint64_t seed) {
  cfg.validate();
  if (data.num_decisions() < cfg.episode_length) {
    throw Error(Errc::DataTooShort, fmt::format("{} decision days, episode needs {}",
                                                data.num_decisions(), cfg.episode_length));
  }
  ActorResult result{init_actor(data, cfg, nn::Head::Softmax, seed), {}};
  env::Actor& actor = result.actor;
  auto adam = nn::AdamState::zeros(actor.params.size(), cfg.adam);
  auto episodes_rng = make_stream(seed, "episodes");
  std::uniform_int_distribution<std::size_t> pick_start(
      data.first_decision(), data.last_decision() + 1 - cfg.episode_length);

  const auto started = Clock::now();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t e = 0; e < cfg.episodes; ++e) {
      const env::EpisodeSpec episode{pick_start(episodes_rng), cfg.episode_length,
                                     cfg.action_period};
      const auto obj = evaluate_episode(actor, data, episode, cfg.mixing, clip);
      rec.objective += obj.value;
      rec.return_comp += obj.components.return_component;
      rec.sharpe_comp += obj.components.sharpe_component;
      rec.antibias_comp += obj.components.antibias_component;
      rec.grad_norm += obj.gradient.norm();
      std::tie(actor.params, adam) = nn::adam_step(actor.params, obj.gradient, adam, true);
    }
    const auto k = static_cast<double>(cfg.episodes);
    rec.objective /= k;
    rec.return_comp /= k;
    rec.sharpe_comp /= k;
    rec.antibias_comp /= k;
    rec.grad_norm /= k;
    rec.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    result.log.records.push_back(rec);
  }
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0 || episodes == 0) throw Error(Errc::InvalidSpec, "epochs and episodes must be positive");
  env::EpisodeSpec{0, episode_length, action_period}.validate();
  if (episode_length < 2) throw Error(Errc::InvalidSpec, "episode length must be at least 2");
  for (auto h : hidden) {
    if (h == 0) throw Error(Errc::InvalidSpec, "hidden widths must be positive");
  }
  if (!(feature_scale > 0.0)) throw Error(Errc::InvalidSpec, "feature scale must be positive");
  mixing.validate();
  if (!(adam.learning_rate > 0.0)) throw Error(Errc::InvalidSpec, "learning rate must be positive");
}

void ActorCriticConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(Errc::InvalidSpec, "gamma must lie in [0, 1]");
  }
  if (actors == 0 || critic_steps == 0) {
    throw Error(Errc::InvalidSpec, "actors and critic steps must be positive");
  }
  if (components != 1 && components != env::RewardMixing::kComponents) {
    throw Error(Errc::InvalidSpec, "critic components must be 1 or 3");
  }
}

void PPOConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error(Errc::InvalidSpec, "ppo epsilon must be positive");
  if (epochs == 0 || minibatch == 0 || actors == 0 || horizon == 0) {
    throw Error(Errc::InvalidSpec, "ppo K, M, N, T must be at least 1");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(Errc::InvalidSpec, "ppo gamma must lie in (0, 1]");
  if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0)) {
    throw Error(Errc::InvalidSpec, "ppo coefficients must be non-negative");
  }
}

void write_train_log(const std::string& path, const TrainLog& log, bool wall_clock) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, path);
  out << "epoch,objective,return_comp,sharpe_comp,antibias_comp,grad_norm,seconds\n";
  for (const auto& r : log.records) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.epoch, r.objective, r.return_comp, r.sharpe_comp,
                       r.antibias_comp, r.grad_norm,
                       wall_clock ? fmt::format("{:.6f}", r.seconds) : std::string());
  }
}

env::Actor init_actor(const env::MarketData& data, const TrainConfig& cfg, nn::Head head,
                      std::uint64_t seed) {
  env::Actor actor;
  const std::size_t inputs =
      data.window.length * data.num_assets * data.window.features_per_asset();
  actor.spec = env::make_layer_spec(inputs, cfg.hidden, data.num_assets, head);
  actor.params = nn::init_params(actor.spec, derive_seed(seed, "actor"));
  actor.feature_scale = cfg.feature_scale;
  return actor;
}

ActorResult train_actor_only(const env::MarketData& data, const TrainConfig& cfg,
                             std::uint64_t seed) {
  return train_deterministic(data, cfg, nullptr, seed);
}

ActorResult train_reward_clip(const env::MarketData& data, const TrainConfig& cfg,
                              const ClipSpec& clip, std::uint64_t seed) {
  clip.validate();
  return train_deterministic(data, cfg, &clip, seed);
}

}  // namespace rcfolio::algo
