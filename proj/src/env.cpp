#include "rcfolio/env.hpp"

#include <cmath>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <fmt/format.h>

#include "rcfolio/error.hpp"
#include "rcfolio/metrics.hpp"
#include "rcfolio/rng.hpp"

namespace rcfolio::env {

namespace {

using boost::math::digamma;
using boost::math::trigamma;

void check_range(const MarketData& data, const EpisodeSpec& spec) {
  spec.validate();
  if (data.windows.empty() || spec.start < data.first_decision() ||
      spec.start + spec.length - 1 > data.last_decision()) {
    throw Error(Errc::RangeOutOfBounds,
                fmt::format("episode [{}, {}) outside decision days [{}, {}]", spec.start,
                            spec.start + spec.length, data.first_decision(),
                            data.windows.empty() ? 0 : data.last_decision()));
  }
}

// Fills days, step_of_day and portfolio_returns once weights are chosen.
void settle(Trajectory& traj, const MarketData& data, const EpisodeSpec& spec) {
  traj.days.reserve(spec.length);
  traj.step_of_day.reserve(spec.length);
  traj.portfolio_returns.reserve(spec.length);
  for (std::size_t k = 0; k < spec.length; ++k) {
    const std::size_t day = spec.start + k;
    const std::size_t step = k / spec.action_period;
    traj.days.push_back(day);
    traj.step_of_day.push_back(step);
    traj.portfolio_returns.push_back(portfolio_step_return(traj.weights[step], data.realized(day)));
  }
}

}  // namespace

const data::FeatureWindow& MarketData::window_for(std::size_t t) const {
  if (windows.empty() || t < first_decision() || t > last_decision()) {
    throw Error(Errc::RangeOutOfBounds, fmt::format("no window for decision day {}", t));
  }
  return windows[t - first_decision()];
}

Vector MarketData::realized(std::size_t t) const {
  if (t >= static_cast<std::size_t>(returns.values.rows())) {
    throw Error(Errc::RangeOutOfBounds, fmt::format("no realized return for day {}", t));
  }
  return returns.values.row(static_cast<Eigen::Index>(t)).transpose();
}

MarketData make_market_data(const data::AssetPanel& panel, const data::WindowSpec& window) {
  MarketData md;
  md.window = window;
  md.windows = data::build_windows(panel, window);
  md.returns = data::compute_returns(panel);
  md.num_assets = panel.num_assets();
  return md;
}

Vector scaled_features(const data::FeatureWindow& window, double scale) {
  Vector x = window.tensor;
  const auto F = static_cast<Eigen::Index>(window.features_per_asset);
  for (Eigen::Index k = 0; k < x.size(); k += F) x[k] *= scale;
  return x;
}

Vector Actor::features(const data::FeatureWindow& window) const {
  return scaled_features(window, feature_scale);
}

Vector Actor::weights(const data::FeatureWindow& window) const {
  const Vector out = nn::predict(params, spec, features(window));
  if (spec.head == nn::Head::Softmax) return out;
  if (spec.head == nn::Head::Softplus) {
    const Vector alpha = concentrations_from_output(out);
    return alpha / alpha.sum();
  }
  throw Error(Errc::InvalidSpec, "actor needs a softmax or softplus head");
}

nn::LayerSpec make_layer_spec(std::size_t inputs, const std::vector<std::size_t>& hidden,
                              std::size_t outputs, nn::Head head) {
  nn::LayerSpec spec;
  spec.sizes.push_back(inputs);
  spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
  spec.sizes.push_back(outputs);
  spec.head = head;
  spec.validate();
  return spec;
}

void EpisodeSpec::validate() const {
  if (action_period < 1 || length < action_period) {
    throw Error(Errc::InvalidSpec, fmt::format("episode length {} with action period {}", length,
                                               action_period));
  }
}

double portfolio_step_return(const Vector& weights, const Vector& daily_returns) {
  if (weights.size() != daily_returns.size()) {
    throw Error(Errc::DimensionMismatch, fmt::format("{} weights for {} returns", weights.size(),
                                                     daily_returns.size()));
  }
  if (!on_simplex(weights)) throw Error(Errc::NotOnSimplex, "weights are not on the simplex");
  return weights.dot(daily_returns);
}

Trajectory rollout_deterministic(const Actor& actor, const MarketData& data,
                                 const EpisodeSpec& spec) {
  check_range(data, spec);
  Trajectory traj;
  for (std::size_t day = spec.start; day < spec.start + spec.length; day += spec.action_period) {
    traj.action_days.push_back(day);
    traj.weights.push_back(actor.weights(data.window_for(day)));
  }
  settle(traj, data, spec);
  return traj;
}

Vector concentrations_from_output(const Vector& output) {
  return (output.array() + 1.0).matrix();
}

Trajectory rollout_stochastic(const Actor& actor, const MarketData& data, const EpisodeSpec& spec,
                              std::uint64_t seed) {
  if (actor.spec.head != nn::Head::Softplus) {
    throw Error(Errc::InvalidSpec, "stochastic rollouts need a softplus head");
  }
  check_range(data, spec);
  auto rng = make_stream(seed, "rollout");
  Trajectory traj;
  for (std::size_t day = spec.start; day < spec.start + spec.length; day += spec.action_period) {
    const Vector out = nn::predict(actor.params, actor.spec, actor.features(data.window_for(day)));
    Vector alpha = concentrations_from_output(out);
    if ((alpha.array() <= 0.0).any()) {
      throw Error(Errc::DegenerateConcentration, "non-positive Dirichlet concentration");
    }
    Vector w = sample_dirichlet(alpha, rng);
    traj.action_days.push_back(day);
    traj.log_densities.push_back(dirichlet_log_pdf(alpha, w));
    traj.concentrations.push_back(std::move(alpha));
    traj.weights.push_back(std::move(w));
  }
  settle(traj, data, spec);
  return traj;
}

double dirichlet_log_pdf(const Vector& alpha, const Vector& x) {
  if (alpha.size() != x.size()) throw Error(Errc::DimensionMismatch, "alpha and x differ in size");
  double out = std::lgamma(alpha.sum());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    out += (alpha[i] - 1.0) * std::log(x[i]) - std::lgamma(alpha[i]);
  }
  return out;
}

Vector dirichlet_log_pdf_grad(const Vector& alpha, const Vector& x) {
  const double psi0 = digamma(alpha.sum());
  Vector g(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) g[i] = psi0 - digamma(alpha[i]) + std::log(x[i]);
  return g;
}

double dirichlet_entropy(const Vector& alpha) {
  const double a0 = alpha.sum();
  const auto K = static_cast<double>(alpha.size());
  double log_beta = -std::lgamma(a0);
  double tail = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    log_beta += std::lgamma(alpha[i]);
    tail += (alpha[i] - 1.0) * digamma(alpha[i]);
  }
  return log_beta + (a0 - K) * digamma(a0) - tail;
}

Vector dirichlet_entropy_grad(const Vector& alpha) {
  const double a0 = alpha.sum();
  const auto K = static_cast<double>(alpha.size());
  const double shared = (a0 - K) * trigamma(a0);
  Vector g(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) g[i] = shared - (alpha[i] - 1.0) * trigamma(alpha[i]);
  return g;
}

Vector sample_dirichlet(const Vector& alpha, std::mt19937_64& rng) {
  Vector g(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    std::gamma_distribution<double> gamma(alpha[i], 1.0);
    g[i] = gamma(rng);
  }
  const double total = g.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(Errc::DegenerateConcentration, "Dirichlet draw collapsed");
  }
  return g / total;
}

double normalized_entropy(const Vector& w) {
  if (w.size() < 2) return 0.0;
  double h = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) h -= w[i] * std::log(w[i]);
  }
  return h / std::log(static_cast<double>(w.size()));
}

RewardComponents compute_reward_components(const Trajectory& traj) {
  if (traj.portfolio_returns.size() < 2) {
    throw Error(Errc::EpisodeTooShort, fmt::format("{} days", traj.portfolio_returns.size()));
  }
  RewardComponents c;
  double sum = 0.0;
  for (double r : traj.portfolio_returns) sum += r;
  c.return_component = sum / static_cast<double>(traj.portfolio_returns.size());
  try {
    c.sharpe_component = metrics::sharpe(traj.portfolio_returns);
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateSeries) throw;
    c.sharpe_component = 0.0;
    c.sharpe_degenerate = true;
  }
  double ent = 0.0;
  for (const auto& w : traj.weights) ent += normalized_entropy(w);
  c.antibias_component = ent / static_cast<double>(traj.weights.size());
  return c;
}

void RewardMixing::validate() const {
  for (double m : {return_weight, sharpe_weight, antibias_weight}) {
    if (!std::isfinite(m) || m < 0.0) {
      throw Error(Errc::InvalidSpec, "reward mixing weights must be finite and non-negative");
    }
  }
}

double aggregate_env_reward(const RewardComponents& components, const RewardMixing& mixing) {
  return mixing.return_weight * components.return_component +
         mixing.sharpe_weight * components.sharpe_component +
         mixing.antibias_weight * components.antibias_component;
}

Matrix step_component_rewards(const Trajectory& traj, const RewardMixing& mixing) {
  const auto steps = static_cast<Eigen::Index>(traj.num_steps());
  Matrix out = Matrix::Zero(steps, RewardMixing::kComponents);
  std::vector<std::vector<double>> per_step(traj.num_steps());
  for (std::size_t k = 0; k < traj.days.size(); ++k) {
    per_step[traj.step_of_day[k]].push_back(traj.portfolio_returns[k]);
  }
  for (Eigen::Index s = 0; s < steps; ++s) {
    const auto& rs = per_step[static_cast<std::size_t>(s)];
    double sum = 0.0;
    for (double r : rs) sum += r;
    double sh = 0.0;
    if (rs.size() >= 2) {
      try {
        sh = metrics::sharpe(rs);
      } catch (const Error& e) {
        if (e.code() != Errc::DegenerateSeries) throw;
      }
    }
    out(s, 0) = mixing.return_weight * (sum / static_cast<double>(rs.size()));
    out(s, 1) = mixing.sharpe_weight * sh;
    out(s, 2) = mixing.antibias_weight * normalized_entropy(traj.weights[static_cast<std::size_t>(s)]);
  }
  return out;
}

}  // namespace rcfolio::env
