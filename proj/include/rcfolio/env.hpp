#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "rcfolio/data.hpp"
#include "rcfolio/nn.hpp"
#include "rcfolio/types.hpp"

namespace rcfolio::env {

/// Windows and realized returns indexed by decision day.
///
/// A decision on day t sees windows[t - first_decision()] (data before t) and
/// earns returns.values.row(t), the move from close[t] to close[t+1].
struct MarketData {
  data::WindowSpec window;
  std::vector<data::FeatureWindow> windows;
  data::ReturnsMatrix returns;
  std::size_t num_assets = 0;

  std::size_t first_decision() const { return window.length; }
  std::size_t last_decision() const { return window.length + windows.size() - 1; }
  std::size_t num_decisions() const { return windows.size(); }
  const data::FeatureWindow& window_for(std::size_t t) const;
  Vector realized(std::size_t t) const;
};

MarketData make_market_data(const data::AssetPanel& panel, const data::WindowSpec& window);

// Network input: the window with its return features multiplied by `scale`.
// Volume z-scores are already normalized and pass through unchanged.
Vector scaled_features(const data::FeatureWindow& window, double scale);

/// Policy network plus the scale applied to raw window features before the
/// first layer.
struct Actor {
  nn::LayerSpec spec;
  nn::ParamVector params;
  double feature_scale = 100.0;

  Vector features(const data::FeatureWindow& window) const;
  // Softmax head: the network output. Softplus head: mean of the Dirichlet
  // with concentrations softplus(z) + 1.
  Vector weights(const data::FeatureWindow& window) const;
};

nn::LayerSpec make_layer_spec(std::size_t inputs, const std::vector<std::size_t>& hidden,
                              std::size_t outputs, nn::Head head);

struct EpisodeSpec {
  std::size_t start = 0;
  std::size_t length = 252;
  std::size_t action_period = 21;

  void validate() const;
};

struct Trajectory {
  std::vector<std::size_t> action_days;  // day each weight vector was chosen
  std::vector<Vector> weights;           // one per action step
  std::vector<std::size_t> days;         // every day of the episode
  std::vector<std::size_t> step_of_day;  // action step active on each day
  std::vector<double> portfolio_returns; // r_p per day
  // stochastic rollouts only
  std::vector<Vector> concentrations;
  std::vector<double> log_densities;

  std::size_t num_steps() const { return weights.size(); }
  bool operator==(const Trajectory&) const = default;
};

// sum_i w_i * r_i
double portfolio_step_return(const Vector& weights, const Vector& daily_returns);

Trajectory rollout_deterministic(const Actor& actor, const MarketData& data,
                                 const EpisodeSpec& spec);

// Requires a softplus head. Actions ~ Dirichlet(softplus(z) + 1).
Trajectory rollout_stochastic(const Actor& actor, const MarketData& data, const EpisodeSpec& spec,
                              std::uint64_t seed);

// Concentrations for a softplus-head output.
Vector concentrations_from_output(const Vector& output);

double dirichlet_log_pdf(const Vector& alpha, const Vector& x);
Vector dirichlet_log_pdf_grad(const Vector& alpha, const Vector& x);  // d/d alpha
double dirichlet_entropy(const Vector& alpha);
Vector dirichlet_entropy_grad(const Vector& alpha);  // d/d alpha
Vector sample_dirichlet(const Vector& alpha, std::mt19937_64& rng);

// Entropy of w divided by ln N; 0 for a single asset.
double normalized_entropy(const Vector& w);

struct RewardComponents {
  double return_component = 0.0;
  double sharpe_component = 0.0;
  double antibias_component = 0.0;
  bool sharpe_degenerate = false;  // zero variance; sharpe_component set to 0
};

RewardComponents compute_reward_components(const Trajectory& traj);

struct RewardMixing {
  double return_weight = 1.0;
  double sharpe_weight = 0.2;
  double antibias_weight = 0.05;

  void validate() const;
  static constexpr std::size_t kComponents = 3;
};

double aggregate_env_reward(const RewardComponents& components, const RewardMixing& mixing);

// Per action step, the mixing-weighted reward of each component (steps x 3):
// mean portfolio return over the holding period, annualized Sharpe of the
// holding period (0 when degenerate), normalized entropy of the weights.
Matrix step_component_rewards(const Trajectory& traj, const RewardMixing& mixing);

}  // namespace rcfolio::env
