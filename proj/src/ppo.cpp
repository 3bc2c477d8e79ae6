#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "rcfolio/algo.hpp"
#include "rcfolio/error.hpp"
#include "rcfolio/rng.hpp"

namespace rcfolio::algo {

namespace {

using Clock = std::chrono::steady_clock;

void normalize_advantages(std::vector<PPOSample>& batch) {
  if (batch.empty()) return;
  double mean = 0.0;
  for (const auto& s : batch) mean += s.advantage;
  mean /= static_cast<double>(batch.size());
  double var = 0.0;
  for (const auto& s : batch) var += (s.advantage - mean) * (s.advantage - mean);
  var /= static_cast<double>(batch.size());
  const double sd = std::sqrt(var);
  for (auto& s : batch) {
    s.advantage -= mean;
    if (sd > 0.0) s.advantage /= sd;
  }
}

}  // namespace

PPOLoss ppo_full_loss(const std::vector<PPOSample>& batch, const env::MarketData& data,
                      const env::Actor& actor, const CriticHeads& critics, const PPOConfig& cfg) {
  if (batch.empty()) throw Error(Errc::InvalidSpec, "empty PPO batch");
  if (actor.spec.head != nn::Head::Softplus) {
    throw Error(Errc::InvalidSpec, "PPO needs a softplus (Dirichlet) actor");
  }
  PPOLoss loss;
  loss.actor_grad = nn::Gradient::Zero(actor.params.size());
  for (const auto& h : critics.heads) loss.critic_grads.push_back(nn::Gradient::Zero(h.params.size()));
  const double n = static_cast<double>(batch.size());

  for (const auto& smp : batch) {
    const auto& window = data.window_for(smp.day);
    const auto fwd = nn::forward(actor.params, actor.spec, actor.features(window));
    const Vector alpha = env::concentrations_from_output(fwd.output);
    const double ratio = std::exp(env::dirichlet_log_pdf(alpha, smp.action) - smp.old_log_density);
    const double surr = ppo_surrogate(ratio, smp.advantage, cfg.epsilon);
    const double entropy = env::dirichlet_entropy(alpha);
    loss.surrogate += surr / n;
    loss.entropy += entropy / n;

    const double dsurr_dratio = ppo_surrogate_grad(ratio, smp.advantage, cfg.epsilon);
    Vector dalpha = (dsurr_dratio * ratio) * env::dirichlet_log_pdf_grad(alpha, smp.action);
    if (cfg.entropy_coef != 0.0) dalpha += cfg.entropy_coef * env::dirichlet_entropy_grad(alpha);
    loss.actor_grad += nn::backward(actor.params, actor.spec, fwd.tape, dalpha / n);

    if (static_cast<std::size_t>(smp.targets.size()) != critics.size()) {
      throw Error(Errc::ShapeMismatch, "sample targets do not match critic heads");
    }
    const Vector x = env::scaled_features(window, critics.feature_scale);
    for (std::size_t k = 0; k < critics.size(); ++k) {
      const auto& head = critics.heads[k];
      const auto cf = nn::forward(head.params, head.spec, x);
      const double err = cf.output[0] - smp.targets[static_cast<Eigen::Index>(k)];
      loss.value_loss += err * err / n;
      if (cfg.value_coef != 0.0) {
        loss.critic_grads[k] += nn::backward(head.params, head.spec, cf.tape,
                                             Vector::Constant(1, -cfg.value_coef * 2.0 * err / n));
      }
    }
  }
  loss.value = loss.surrogate - cfg.value_coef * loss.value_loss + cfg.entropy_coef * loss.entropy;
  return loss;
}

std::vector<PPOSample> collect_ppo_batch(const env::Actor& actor, const CriticHeads& critics,
                                         const env::MarketData& data, const TrainConfig& cfg,
                                         const PPOConfig& ppo, std::uint64_t seed,
                                         std::vector<env::Trajectory>* trajectories) {
  if (data.num_decisions() < ppo.horizon) {
    throw Error(Errc::DataTooShort, fmt::format("{} decision days, horizon needs {}",
                                                data.num_decisions(), ppo.horizon));
  }
  auto rng = make_stream(seed, "episodes");
  std::uniform_int_distribution<std::size_t> pick_start(data.first_decision(),
                                                        data.last_decision() + 1 - ppo.horizon);
  std::vector<PPOSample> batch;
  for (std::size_t a = 0; a < ppo.actors; ++a) {
    const env::EpisodeSpec episode{pick_start(rng), ppo.horizon,
                                   std::min(cfg.action_period, ppo.horizon)};
    auto traj = env::rollout_stochastic(actor, data, episode, rng());
    const Matrix targets = critic_targets(traj, critics, data, cfg.mixing, ppo.gamma);
    for (std::size_t s = 0; s < traj.num_steps(); ++s) {
      const Vector v = critics.values(data.window_for(traj.action_days[s]));
      const Vector y = targets.row(static_cast<Eigen::Index>(s)).transpose();
      batch.push_back(PPOSample{traj.action_days[s], traj.weights[s], traj.log_densities[s],
                                (y - v).sum(), y});
    }
    if (trajectories) trajectories->push_back(std::move(traj));
  }
  normalize_advantages(batch);
  return batch;
}

CriticResult train_ppo(const env::MarketData& data, const TrainConfig& cfg, const PPOConfig& ppo,
                       std::uint64_t seed) {
  cfg.validate();
  ppo.validate();
  if (data.num_decisions() < ppo.horizon) {
    throw Error(Errc::DataTooShort, fmt::format("{} decision days, horizon needs {}",
                                                data.num_decisions(), ppo.horizon));
  }
  CriticResult result{init_actor(data, cfg, nn::Head::Softplus, seed),
                      init_critics(data, cfg, env::RewardMixing::kComponents, seed), {}};
  env::Actor& actor = result.actor;
  CriticHeads& critics = result.critics;
  auto actor_adam = nn::AdamState::zeros(actor.params.size(), cfg.adam);
  std::vector<nn::AdamState> critic_adam;
  for (const auto& h : critics.heads) critic_adam.push_back(nn::AdamState::zeros(h.params.size(), cfg.adam));

  auto iteration_rng = make_stream(seed, "rollout");
  auto shuffle_rng = make_stream(seed, "minibatch");

  const auto started = Clock::now();
  for (std::size_t it = 0; it < cfg.epochs; ++it) {
    std::vector<env::Trajectory> trajs;
    // theta_old is the actor as it stands when the batch is collected
    const auto batch = collect_ppo_batch(actor, critics, data, cfg, ppo, iteration_rng(), &trajs);

    EpochRecord rec;
    rec.epoch = it;
    for (const auto& traj : trajs) {
      const auto comps = env::compute_reward_components(traj);
      rec.objective += env::aggregate_env_reward(comps, cfg.mixing);
      rec.return_comp += comps.return_component;
      rec.sharpe_comp += comps.sharpe_component;
      rec.antibias_comp += comps.antibias_component;
    }

    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), 0);
    double grad_norm = 0.0;
    std::size_t updates = 0;
    for (std::size_t k = 0; k < ppo.epochs; ++k) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (std::size_t begin = 0; begin < order.size(); begin += ppo.minibatch) {
        const std::size_t end = std::min(order.size(), begin + ppo.minibatch);
        std::vector<PPOSample> mb;
        mb.reserve(end - begin);
        for (std::size_t j = begin; j < end; ++j) mb.push_back(batch[order[j]]);
        const auto loss = ppo_full_loss(mb, data, actor, critics, ppo);
        std::tie(actor.params, actor_adam) = nn::adam_step(actor.params, loss.actor_grad, actor_adam, true);
        for (std::size_t h = 0; h < critics.size(); ++h) {
          std::tie(critics.heads[h].params, critic_adam[h]) =
              nn::adam_step(critics.heads[h].params, loss.critic_grads[h], critic_adam[h], true);
        }
        grad_norm += loss.actor_grad.norm();
        ++updates;
      }
    }

    const auto n = static_cast<double>(trajs.size());
    rec.objective /= n;
    rec.return_comp /= n;
    rec.sharpe_comp /= n;
    rec.antibias_comp /= n;
    rec.grad_norm = grad_norm / static_cast<double>(updates);
    rec.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    result.log.records.push_back(rec);
  }
  return result;
}

}  // namespace rcfolio::algo
