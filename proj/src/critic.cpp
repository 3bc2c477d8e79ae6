#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "rcfolio/algo.hpp"
#include "rcfolio/error.hpp"
#include "rcfolio/rng.hpp"

namespace rcfolio::algo {

namespace {

using Clock = std::chrono::steady_clock;

struct Sample {
  std::size_t day;
  Vector action;
  double advantage;
  Vector targets;
};

}  // namespace

Vector CriticHeads::values(const data::FeatureWindow& window) const {
  const Vector x = env::scaled_features(window, feature_scale);
  Vector v(static_cast<Eigen::Index>(heads.size()));
  for (std::size_t k = 0; k < heads.size(); ++k) {
    v[static_cast<Eigen::Index>(k)] = nn::predict(heads[k].params, heads[k].spec, x)[0];
  }
  return v;
}

CriticHeads init_critics(const env::MarketData& data, const TrainConfig& cfg,
                         std::size_t components, std::uint64_t seed) {
  CriticHeads critics;
  critics.feature_scale = cfg.feature_scale;
  const std::size_t inputs =
      data.window.length * data.num_assets * data.window.features_per_asset();
  for (std::size_t k = 0; k < components; ++k) {
    ValueHead head;
    head.spec = env::make_layer_spec(inputs, cfg.hidden, 1, nn::Head::Linear);
    head.params = nn::init_params(head.spec, derive_seed(seed, fmt::format("critic{}", k)));
    critics.heads.push_back(std::move(head));
  }
  return critics;
}

Matrix critic_targets(const Matrix& rewards, const Matrix& next_values, double gamma) {
  if (rewards.rows() != next_values.rows() || rewards.cols() != next_values.cols()) {
    throw Error(Errc::ShapeMismatch, "rewards and next values differ in shape");
  }
  Matrix targets = rewards;
  for (Eigen::Index s = 0; s + 1 < rewards.rows(); ++s) {
    targets.row(s) += gamma * next_values.row(s);
  }
  return targets;
}

Matrix component_rewards(const env::Trajectory& traj, const env::RewardMixing& mixing,
                         std::size_t components) {
  const Matrix per_component = env::step_component_rewards(traj, mixing);
  if (components == env::RewardMixing::kComponents) return per_component;
  if (components == 1) return per_component.rowwise().sum();
  throw Error(Errc::InvalidSpec, fmt::format("{} critic components", components));
}

Matrix critic_targets(const env::Trajectory& traj, const CriticHeads& heads,
                      const env::MarketData& data, const env::RewardMixing& mixing, double gamma) {
  const Matrix rewards = component_rewards(traj, mixing, heads.size());
  Matrix next = Matrix::Zero(rewards.rows(), rewards.cols());
  for (Eigen::Index s = 0; s + 1 < rewards.rows(); ++s) {
    next.row(s) = heads.values(data.window_for(traj.action_days[static_cast<std::size_t>(s) + 1]))
                      .transpose();
  }
  return critic_targets(rewards, next, gamma);
}

double critic_loss(const Matrix& values, const Matrix& targets) {
  if (values.rows() != targets.rows() || values.cols() != targets.cols() || values.rows() == 0) {
    throw Error(Errc::ShapeMismatch, "values and targets differ in shape");
  }
  double total = 0.0;
  for (Eigen::Index s = 0; s < values.rows(); ++s) {
    double row = 0.0;
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      const double e = targets(s, k) - values(s, k);
      row += e * e;
    }
    total += row;
  }
  return total / static_cast<double>(values.rows());
}

double monolithic_critic_loss(const Vector& values, const Vector& targets) {
  if (values.size() != targets.size() || values.size() == 0) {
    throw Error(Errc::ShapeMismatch, "values and targets differ in size");
  }
  double total = 0.0;
  for (Eigen::Index s = 0; s < values.size(); ++s) {
    const double e = targets[s] - values[s];
    total += e * e;
  }
  return total / static_cast<double>(values.size());
}

CriticResult train_actor_critic(const env::MarketData& data, const TrainConfig& cfg,
                                const ActorCriticConfig& ac, std::uint64_t seed) {
  cfg.validate();
  ac.validate();
  if (data.num_decisions() < cfg.episode_length) {
    throw Error(Errc::DataTooShort, fmt::format("{} decision days, episode needs {}",
                                                data.num_decisions(), cfg.episode_length));
  }
  CriticResult result{init_actor(data, cfg, nn::Head::Softplus, seed),
                      init_critics(data, cfg, ac.components, seed), {}};
  env::Actor& actor = result.actor;
  CriticHeads& critics = result.critics;

  auto actor_adam = nn::AdamState::zeros(actor.params.size(), cfg.adam);
  std::vector<nn::AdamState> critic_adam;
  for (const auto& h : critics.heads) critic_adam.push_back(nn::AdamState::zeros(h.params.size(), cfg.adam));

  auto episodes_rng = make_stream(seed, "episodes");
  auto rollout_rng = make_stream(seed, "rollout");
  std::uniform_int_distribution<std::size_t> pick_start(
      data.first_decision(), data.last_decision() + 1 - cfg.episode_length);

  const auto started = Clock::now();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    std::vector<Sample> batch;
    for (std::size_t a = 0; a < ac.actors; ++a) {
      const env::EpisodeSpec episode{pick_start(episodes_rng), cfg.episode_length,
                                     cfg.action_period};
      const auto traj = env::rollout_stochastic(actor, data, episode, rollout_rng());
      const auto comps = env::compute_reward_components(traj);
      rec.objective += env::aggregate_env_reward(comps, cfg.mixing);
      rec.return_comp += comps.return_component;
      rec.sharpe_comp += comps.sharpe_component;
      rec.antibias_comp += comps.antibias_component;

      const Matrix targets = critic_targets(traj, critics, data, cfg.mixing, ac.gamma);
      for (std::size_t s = 0; s < traj.num_steps(); ++s) {
        const Vector v = critics.values(data.window_for(traj.action_days[s]));
        const Vector y = targets.row(static_cast<Eigen::Index>(s)).transpose();
        batch.push_back(Sample{traj.action_days[s], traj.weights[s], (y - v).sum(), y});
      }
    }

    // critic regression on fixed targets
    const double n = static_cast<double>(batch.size());
    for (std::size_t step = 0; step < ac.critic_steps; ++step) {
      for (std::size_t k = 0; k < critics.size(); ++k) {
        auto& head = critics.heads[k];
        nn::Gradient g = nn::Gradient::Zero(head.params.size());
        for (const auto& smp : batch) {
          const Vector x = env::scaled_features(data.window_for(smp.day), critics.feature_scale);
          const auto fwd = nn::forward(head.params, head.spec, x);
          const double err = fwd.output[0] - smp.targets[static_cast<Eigen::Index>(k)];
          g += nn::backward(head.params, head.spec, fwd.tape, Vector::Constant(1, 2.0 * err / n));
        }
        std::tie(head.params, critic_adam[k]) = nn::adam_step(head.params, g, critic_adam[k], false);
      }
    }

    // actor ascent on advantage-weighted log-density
    nn::Gradient g = nn::Gradient::Zero(actor.params.size());
    for (const auto& smp : batch) {
      const auto fwd = nn::forward(actor.params, actor.spec, actor.features(data.window_for(smp.day)));
      const Vector alpha = env::concentrations_from_output(fwd.output);
      const Vector dlogp = env::dirichlet_log_pdf_grad(alpha, smp.action);
      g += nn::backward(actor.params, actor.spec, fwd.tape, dlogp * (smp.advantage / n));
    }
    std::tie(actor.params, actor_adam) = nn::adam_step(actor.params, g, actor_adam, true);

    const auto k = static_cast<double>(ac.actors);
    rec.objective /= k;
    rec.return_comp /= k;
    rec.sharpe_comp /= k;
    rec.antibias_comp /= k;
    rec.grad_norm = g.norm();
    rec.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    result.log.records.push_back(rec);
  }
  return result;
}

}  // namespace rcfolio::algo
