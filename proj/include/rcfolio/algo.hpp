#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcfolio/env.hpp"
#include "rcfolio/nn.hpp"
#include "rcfolio/types.hpp"

namespace rcfolio::algo {

// ---------------------------------------------------------------------------
// Clipping primitives

enum class ClipMode {
  Value,  // clamp each per-step reward
  Ratio,  // clamp A_t / A_{t-1}
};

/// Bounds of the reward-clipping objective. Either bound may be absent.
///
/// In value mode the bounds are in units of `scale` x daily portfolio return
/// (scale 100: percent). Ratio mode bounds are unitless.
struct ClipSpec {
  std::optional<double> lower;
  std::optional<double> upper;
  ClipMode mode = ClipMode::Value;
  double scale = 100.0;

  void validate() const;
  bool unbounded() const { return !lower && !upper; }
  // RC_<lower>_<upper>, omitting absent bounds.
  std::string name() const;

  // Lower bound -0.4 only.
  static ClipSpec lower_only_default();
};

// Denominators smaller than this fall back to value mode for that step.
constexpr double kRatioGuard = 1e-8;

// max(lower, min(upper, value)) using only the bounds that are set.
double reward_clip(double value, const ClipSpec& clip);

// min(r * adv, clip(r, 1 - eps, 1 + eps) * adv)
double ppo_surrogate(double ratio, double advantage, double epsilon);
// d ppo_surrogate / d ratio
double ppo_surrogate_grad(double ratio, double advantage, double epsilon);

// ---------------------------------------------------------------------------
// Configuration and logging

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t episodes = 8;  // episodes per epoch for the deterministic trainers
  std::size_t episode_length = 252;
  std::size_t action_period = 21;
  std::vector<std::size_t> hidden = {64, 32};
  double feature_scale = 100.0;
  env::RewardMixing mixing;
  nn::AdamConfig adam;

  void validate() const;
};

struct ActorCriticConfig {
  double gamma = 0.99;
  std::size_t actors = 4;        // episodes collected per iteration
  std::size_t critic_steps = 10; // critic regression steps per iteration
  std::size_t components = 3;    // 3: one head per reward component, 1: a single head

  void validate() const;
};

struct PPOConfig {
  double epsilon = 0.2;
  double value_coef = 0.5;    // c1
  double entropy_coef = 0.01; // c2
  std::size_t epochs = 4;     // K
  std::size_t minibatch = 32; // M
  std::size_t actors = 4;     // N
  std::size_t horizon = 252;  // T, trading days per actor rollout
  double gamma = 0.99;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double objective = 0.0;
  double return_comp = 0.0;
  double sharpe_comp = 0.0;
  double antibias_comp = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;

  // Wall-clock is excluded from equality.
  bool operator==(const EpochRecord& o) const {
    return epoch == o.epoch && objective == o.objective && return_comp == o.return_comp &&
           sharpe_comp == o.sharpe_comp && antibias_comp == o.antibias_comp &&
           grad_norm == o.grad_norm;
  }
};

struct TrainLog {
  std::vector<EpochRecord> records;

  bool operator==(const TrainLog&) const = default;
};

// `epoch,objective,return_comp,sharpe_comp,antibias_comp,grad_norm,seconds`.
// The seconds column is left empty unless wall_clock is set, which keeps the
// file byte-reproducible.
void write_train_log(const std::string& path, const TrainLog& log, bool wall_clock = false);

// ---------------------------------------------------------------------------
// Deterministic policy objective (actor-only and reward-clip)

struct EpisodeObjective {
  double value = 0.0;
  env::RewardComponents components;  // computed on the (possibly clipped) series
  nn::Gradient gradient;
  env::Trajectory trajectory;
  std::vector<double> step_rewards;  // per-day series entering the objective
};

// Rolls the softmax actor over the episode and returns
// mixing . (mean, sharpe, antibias) of the per-day rewards with its exact
// parameter gradient. A null clip gives the actor-only objective.
EpisodeObjective evaluate_episode(const env::Actor& actor, const env::MarketData& data,
                                  const env::EpisodeSpec& episode, const env::RewardMixing& mixing,
                                  const ClipSpec* clip = nullptr);

// Per-day reward series for given portfolio returns; unclipped when clip is null.
std::vector<double> clipped_rewards(const std::vector<double>& portfolio_returns,
                                    const ClipSpec* clip);

struct ActorResult {
  env::Actor actor;
  TrainLog log;
};

env::Actor init_actor(const env::MarketData& data, const TrainConfig& cfg, nn::Head head,
                      std::uint64_t seed);

ActorResult train_actor_only(const env::MarketData& data, const TrainConfig& cfg,
                             std::uint64_t seed);

ActorResult train_reward_clip(const env::MarketData& data, const TrainConfig& cfg,
                              const ClipSpec& clip, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Decomposed critics

struct ValueHead {
  nn::LayerSpec spec;
  nn::ParamVector params;
};

/// One state-value network per reward component.
struct CriticHeads {
  std::vector<ValueHead> heads;
  double feature_scale = 100.0;

  std::size_t size() const { return heads.size(); }
  Vector values(const data::FeatureWindow& window) const;
};

CriticHeads init_critics(const env::MarketData& data, const TrainConfig& cfg,
                         std::size_t components, std::uint64_t seed);

// rewards and next_values are steps x K. Row s: rewards(s) + gamma * next_values(s);
// the last row is terminal and uses rewards alone.
Matrix critic_targets(const Matrix& rewards, const Matrix& next_values, double gamma);

// Per-step rewards for `components` heads: the three mixed components, or
// their sum when a single head is used.
Matrix component_rewards(const env::Trajectory& traj, const env::RewardMixing& mixing,
                         std::size_t components);

// Targets for a trajectory using per-component step rewards and the heads'
// estimates of the next action step's state.
Matrix critic_targets(const env::Trajectory& traj, const CriticHeads& heads,
                      const env::MarketData& data, const env::RewardMixing& mixing, double gamma);

// mean over steps of sum_k (targets - values)^2
double critic_loss(const Matrix& values, const Matrix& targets);
// mean over steps of (targets - values)^2
double monolithic_critic_loss(const Vector& values, const Vector& targets);

struct CriticResult {
  env::Actor actor;
  CriticHeads critics;
  TrainLog log;
};

CriticResult train_actor_critic(const env::MarketData& data, const TrainConfig& cfg,
                                const ActorCriticConfig& ac, std::uint64_t seed);

// ---------------------------------------------------------------------------
// PPO

struct PPOSample {
  std::size_t day = 0;       // decision day of the state
  Vector action;             // sampled weights
  double old_log_density = 0.0;
  double advantage = 0.0;
  Vector targets;            // per-component value targets
};

struct PPOLoss {
  double value = 0.0;  // objective to maximize
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  nn::Gradient actor_grad;
  std::vector<nn::Gradient> critic_grads;
};

// mean over the batch of surrogate - c1 * sum_k (V_k - y_k)^2 + c2 * H(Dirichlet)
PPOLoss ppo_full_loss(const std::vector<PPOSample>& batch, const env::MarketData& data,
                      const env::Actor& actor, const CriticHeads& critics, const PPOConfig& cfg);

// One iteration's worth of samples from N actors with the current policy.
std::vector<PPOSample> collect_ppo_batch(const env::Actor& actor, const CriticHeads& critics,
                                         const env::MarketData& data, const TrainConfig& cfg,
                                         const PPOConfig& ppo, std::uint64_t seed,
                                         std::vector<env::Trajectory>* trajectories = nullptr);

CriticResult train_ppo(const env::MarketData& data, const TrainConfig& cfg, const PPOConfig& ppo,
                       std::uint64_t seed);

}  // namespace rcfolio::algo
