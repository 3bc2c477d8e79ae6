#include <algorithm>
#include <cfloat>
#include <cmath>

#include <fmt/format.h>

#include "rcfolio/algo.hpp"
#include "rcfolio/error.hpp"
#include "rcfolio/metrics.hpp"

namespace rcfolio::algo {

namespace {

// Per-day rewards and their local Jacobian: c_t depends on r_t (d_self) and,
// in ratio mode, on r_{t-1} (d_prev).
struct ClippedSeries {
  std::vector<double> values;
  std::vector<double> d_self;
  std::vector<double> d_prev;
};

bool inside(double v, const ClipSpec& clip) {
  return !(clip.lower && v < *clip.lower) && !(clip.upper && v > *clip.upper);
}

ClippedSeries clip_series(const std::vector<double>& r, const ClipSpec* clip) {
  const std::size_t n = r.size();
  ClippedSeries s{r, std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
  if (clip == nullptr || clip->unbounded()) return s;
  for (std::size_t t = 0; t < n; ++t) {
    const bool ratio = clip->mode == ClipMode::Ratio && t > 0 && std::abs(r[t - 1]) >= kRatioGuard;
    if (ratio) {
      const double q = r[t] / r[t - 1];
      if (inside(q, *clip)) {
        s.values[t] = q;
        s.d_self[t] = 1.0 / r[t - 1];
        s.d_prev[t] = -r[t] / (r[t - 1] * r[t - 1]);
      } else {
        s.values[t] = reward_clip(q, *clip);
        s.d_self[t] = 0.0;
      }
    } else {
      const double scaled = clip->scale * r[t];
      if (!inside(scaled, *clip)) {
        s.values[t] = reward_clip(scaled, *clip) / clip->scale;
        s.d_self[t] = 0.0;
      }
    }
  }
  return s;
}

double sum_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

}  // namespace

void ClipSpec::validate() const {
  if (lower && !std::isfinite(*lower)) throw Error(Errc::InvalidSpec, "clip lower bound not finite");
  if (upper && !std::isfinite(*upper)) throw Error(Errc::InvalidSpec, "clip upper bound not finite");
  if (lower && upper && !(*lower < *upper)) {
    throw Error(Errc::InvalidSpec, fmt::format("clip lower {} must be below upper {}", *lower, *upper));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(Errc::InvalidSpec, "clip scale must be positive");
}

std::string ClipSpec::name() const {
  std::string out = "RC";
  if (lower) out += fmt::format("_{}", *lower);
  if (upper) out += fmt::format("_{}", *upper);
  return out;
}

ClipSpec ClipSpec::lower_only_default() {
  ClipSpec c;
  c.lower = -0.4;
  return c;
}

double reward_clip(double value, const ClipSpec& clip) {
  if (clip.upper) value = std::min(*clip.upper, value);
  if (clip.lower) value = std::max(*clip.lower, value);
  return value;
}

double ppo_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double ppo_surrogate_grad(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  if (ratio * advantage <= clipped * advantage) return advantage;
  // the clipped branch is active; it is flat in ratio outside [1 - eps, 1 + eps]
  return (ratio > 1.0 - epsilon && ratio < 1.0 + epsilon) ? advantage : 0.0;
}

std::vector<double> clipped_rewards(const std::vector<double>& portfolio_returns,
                                    const ClipSpec* clip) {
  return clip_series(portfolio_returns, clip).values;
}

EpisodeObjective evaluate_episode(const env::Actor& actor, const env::MarketData& data,
                                  const env::EpisodeSpec& episode, const env::RewardMixing& mixing,
                                  const ClipSpec* clip) {
  if (actor.spec.head != nn::Head::Softmax) {
    throw Error(Errc::InvalidSpec, "deterministic objective needs a softmax actor");
  }
  if (clip) clip->validate();
  if (episode.length < 2) throw Error(Errc::EpisodeTooShort, "episode needs at least 2 days");

  EpisodeObjective out;
  std::vector<nn::Tape> tapes;
  env::Trajectory& traj = out.trajectory;
  // Same rollout as env::rollout_deterministic, keeping tapes for backprop.
  {
    const env::Trajectory plain = env::rollout_deterministic(actor, data, episode);
    traj = plain;
    for (std::size_t day : traj.action_days) {
      auto fwd = nn::forward(actor.params, actor.spec, actor.features(data.window_for(day)));
      tapes.push_back(std::move(fwd.tape));
    }
  }

  const std::size_t n = traj.portfolio_returns.size();
  const auto series = clip_series(traj.portfolio_returns, clip);
  out.step_rewards = series.values;
  const std::vector<double>& c = series.values;

  auto& comp = out.components;
  comp.return_component = sum_of(c) / static_cast<double>(n);
  try {
    comp.sharpe_component = metrics::sharpe(c);
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateSeries) throw;
    comp.sharpe_component = 0.0;
    comp.sharpe_degenerate = true;
  }
  const std::size_t steps = traj.num_steps();
  const auto N = static_cast<double>(data.num_assets);
  double ent = 0.0;
  for (const auto& w : traj.weights) ent += env::normalized_entropy(w);
  comp.antibias_component = ent / static_cast<double>(steps);
  out.value = env::aggregate_env_reward(comp, mixing);

  // d objective / d c_t
  std::vector<double> dc(n, mixing.return_weight / static_cast<double>(n));
  if (!comp.sharpe_degenerate && mixing.sharpe_weight != 0.0) {
    const double m = comp.return_component;
    double ss = 0.0;
    for (double x : c) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const double root = std::sqrt(kTradingDaysPerYear);
    for (std::size_t t = 0; t < n; ++t) {
      dc[t] += mixing.sharpe_weight * root *
               (1.0 / (static_cast<double>(n) * sd) -
                m * (c[t] - m) / (static_cast<double>(n - 1) * sd * sd * sd));
    }
  }
  // d objective / d r_t
  std::vector<double> dr(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    dr[t] += dc[t] * series.d_self[t];
    if (t > 0) dr[t - 1] += dc[t] * series.d_prev[t];
  }

  out.gradient = nn::Gradient::Zero(actor.params.size());
  for (std::size_t s = 0; s < steps; ++s) {
    Vector dw = Vector::Zero(static_cast<Eigen::Index>(data.num_assets));
    for (std::size_t k = 0; k < n; ++k) {
      if (traj.step_of_day[k] == s) dw += dr[k] * data.realized(traj.days[k]);
    }
    if (data.num_assets > 1 && mixing.antibias_weight != 0.0) {
      const double coef = mixing.antibias_weight / (static_cast<double>(steps) * std::log(N));
      const Vector& w = traj.weights[s];
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        dw[i] -= coef * (std::log(std::max(w[i], DBL_MIN)) + 1.0);
      }
    }
    out.gradient += nn::backward(actor.params, actor.spec, tapes[s], dw);
  }
  return out;
}

}  // namespace rcfolio::algo
