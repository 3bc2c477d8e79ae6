// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// usage: rcfolio_acceptance <path to rcfolio CLI> <scratch dir> [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rcfolio/algo.hpp"
#include "rcfolio/backtest.hpp"
#include "rcfolio/baselines.hpp"
#include "rcfolio/commands.hpp"
#include "rcfolio/config.hpp"
#include "rcfolio/data.hpp"
#include "rcfolio/env.hpp"
#include "rcfolio/metrics.hpp"
#include "rcfolio/nn.hpp"

using namespace rcfolio;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Simplex audit shared by criterion 2 and the runs of criteria 4-6.
struct SimplexAudit {
  std::size_t checked = 0;
  std::size_t violations = 0;

  void check(const Vector& w) {
    ++checked;
    if (w.size() == 0 || (w.array() < 0.0).any() || std::abs(w.sum() - 1.0) > 1e-9 || !w.allFinite()) {
      ++violations;
    }
  }
  void check_all(const std::vector<Vector>& ws) {
    for (const auto& w : ws) check(w);
  }
};

SimplexAudit audit;

struct FdResult {
  double error = 0.0;            // |a - n| / max(|a|, |n|) over the whole gradient vector
  double worst_component = 0.0;  // max_i |a_i - n_i| / max(|a_i|, |n_i|, 1e-8), reported only
};

// Compares an analytic gradient with central differences of step h.
FdResult fd_error(const Vector& analytic, const std::function<double(const Vector&)>& f, const Vector& x,
                  double h = 1e-5) {
  FdResult out;
  Vector numeric(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    numeric[i] = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
    out.worst_component = std::max(out.worst_component, std::abs(analytic[i] - numeric[i]) / denom);
  }
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-300});
  out.error = (analytic - numeric).norm() / scale;
  return out;
}

// Random parameters around the initial draw; biases become nonzero.
void randomize(Vector& params, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 0.2);
  for (auto& p : params) p += noise(rng);
}

data::AssetPanel random_panel(std::size_t assets, std::size_t days, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> drift(-0.001, 0.002);
  std::uniform_real_distribution<double> vol(0.004, 0.02);
  data::SyntheticSpec s;
  s.n_assets = assets;
  s.n_days = days;
  s.seed = seed;
  for (std::size_t i = 0; i < assets; ++i) {
    s.drift.push_back(drift(rng));
    s.volatility.push_back(vol(rng));
  }
  return data::generate_synthetic(s);
}

// Small random problem: <= 4 assets, <= 8 hidden units per layer, <= 8 action steps.
struct SmallInstance {
  env::MarketData data;
  algo::TrainConfig cfg;
  env::EpisodeSpec episode;
};

SmallInstance small_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> assets(2, 4), width(2, 8), layers(1, 2), steps(2, 8),
      period(1, 3), window(2, 5);
  SmallInstance inst;
  const std::size_t n = assets(rng);
  data::WindowSpec ws{window(rng), rng() % 2 == 0};
  inst.cfg.hidden.clear();
  for (std::size_t l = layers(rng); l > 0; --l) inst.cfg.hidden.push_back(width(rng));
  std::uniform_real_distribution<double> mix(0.05, 1.0);
  inst.cfg.mixing = {mix(rng), mix(rng), mix(rng)};
  inst.episode.action_period = period(rng);
  inst.episode.length = steps(rng) * inst.episode.action_period;
  inst.cfg.episode_length = inst.episode.length;
  inst.cfg.action_period = inst.episode.action_period;
  auto panel = random_panel(n, ws.length + inst.episode.length + 4, rng());
  if (ws.use_volume) {
    std::uniform_real_distribution<double> vol(1e5, 2e5);
    Matrix volume(static_cast<Eigen::Index>(panel.num_days()), static_cast<Eigen::Index>(n));
    for (Eigen::Index t = 0; t < volume.rows(); ++t)
      for (Eigen::Index i = 0; i < volume.cols(); ++i) volume(t, i) = vol(rng);
    panel = data::AssetPanel(panel.dates(), panel.assets(), panel.close(), volume);
  }
  inst.data = env::make_market_data(panel, ws);
  inst.episode.start = inst.data.first_decision() + rng() % 3;
  return inst;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  FdResult worst_actor, worst_ppo, worst_clip;
  auto keep = [](FdResult& acc, const FdResult& e) {
    acc.error = std::max(acc.error, e.error);
    acc.worst_component = std::max(acc.worst_component, e.worst_component);
  };
  const int instances = 100;

  for (int k = 0; k < instances; ++k) {
    // (a) actor-only objective
    {
      auto inst = small_instance(rng);
      auto actor = algo::init_actor(inst.data, inst.cfg, nn::Head::Softmax, rng());
      randomize(actor.params, rng);
      const auto obj = algo::evaluate_episode(actor, inst.data, inst.episode, inst.cfg.mixing);
      audit.check_all(obj.trajectory.weights);
      auto f = [&](const Vector& p) {
        env::Actor a = actor;
        a.params = p;
        return algo::evaluate_episode(a, inst.data, inst.episode, inst.cfg.mixing).value;
      };
      keep(worst_actor, fd_error(obj.gradient, f, actor.params));
    }
    // (b) full PPO loss with c1, c2 > 0, over actor and critic parameters
    {
      auto inst = small_instance(rng);
      algo::PPOConfig ppo;
      std::uniform_real_distribution<double> coef(0.1, 1.0), eps(0.1, 0.3);
      ppo.value_coef = coef(rng);
      ppo.entropy_coef = coef(rng);
      ppo.epsilon = eps(rng);
      ppo.actors = 1 + rng() % 2;
      ppo.horizon = inst.episode.length;
      ppo.gamma = 0.9;
      auto actor = algo::init_actor(inst.data, inst.cfg, nn::Head::Softplus, rng());
      auto critics = algo::init_critics(inst.data, inst.cfg, 3, rng());
      randomize(actor.params, rng);
      for (auto& h : critics.heads) randomize(h.params, rng);
      std::vector<env::Trajectory> trajs;
      const auto batch = algo::collect_ppo_batch(actor, critics, inst.data, inst.cfg, ppo, rng(), &trajs);
      for (const auto& t : trajs) audit.check_all(t.weights);
      // Move the policy away from the sampling policy so ratios differ from 1.
      std::normal_distribution<double> jitter(0.0, 0.05);
      for (auto& p : actor.params) p += jitter(rng);

      const Eigen::Index na = actor.params.size();
      std::vector<Eigen::Index> sizes;
      Eigen::Index total = na;
      for (const auto& h : critics.heads) {
        sizes.push_back(h.params.size());
        total += h.params.size();
      }
      auto unpack = [&](const Vector& x) {
        env::Actor a = actor;
        algo::CriticHeads c = critics;
        a.params = x.head(na);
        Eigen::Index off = na;
        for (std::size_t h = 0; h < c.heads.size(); ++h) {
          c.heads[h].params = x.segment(off, sizes[h]);
          off += sizes[h];
        }
        return std::make_pair(a, c);
      };
      Vector x(total), grad(total);
      const auto loss = algo::ppo_full_loss(batch, inst.data, actor, critics, ppo);
      x.head(na) = actor.params;
      grad.head(na) = loss.actor_grad;
      Eigen::Index off = na;
      for (std::size_t h = 0; h < critics.heads.size(); ++h) {
        x.segment(off, sizes[h]) = critics.heads[h].params;
        grad.segment(off, sizes[h]) = loss.critic_grads[h];
        off += sizes[h];
      }
      auto f = [&](const Vector& p) {
        auto [a, c] = unpack(p);
        return algo::ppo_full_loss(batch, inst.data, a, c, ppo).value;
      };
      keep(worst_ppo, fd_error(grad, f, x));
    }
    // (c) reward-clip objective
    {
      auto inst = small_instance(rng);
      algo::ClipSpec clip;
      switch (rng() % 3) {
        case 0: clip.lower = -0.4; break;
        case 1: clip.upper = 0.4; break;
        default: clip.lower = -0.4; clip.upper = 0.4; break;
      }
      auto actor = algo::init_actor(inst.data, inst.cfg, nn::Head::Softmax, rng());
      randomize(actor.params, rng);
      const auto obj = algo::evaluate_episode(actor, inst.data, inst.episode, inst.cfg.mixing, &clip);
      audit.check_all(obj.trajectory.weights);
      auto f = [&](const Vector& p) {
        env::Actor a = actor;
        a.params = p;
        return algo::evaluate_episode(a, inst.data, inst.episode, inst.cfg.mixing, &clip).value;
      };
      keep(worst_clip, fd_error(obj.gradient, f, actor.params));
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_actor.error < 1e-4 && worst_ppo.error < 1e-4 && worst_clip.error < 1e-4 && secs < 30.0;
  auto show = [](const FdResult& w) {
    return fmt::format("{:.2e} (worst single component {:.2e})", w.error, w.worst_component);
  };
  return {pass, fmt::format("{} instances each; max relative gradient error actor-only {}, ppo {}, reward-clip {}; {:.1f}s",
                            instances, show(worst_actor), show(worst_ppo), show(worst_clip), secs)};
}

Outcome criterion2_forward() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> assets(1, 12), width(1, 16), inputs(1, 30);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> spread(0.1, 50.0);
  for (int k = 0; k < 10000; ++k) {
    const auto head = (k % 2 == 0) ? nn::Head::Softmax : nn::Head::Softplus;
    env::Actor actor;
    actor.spec = env::make_layer_spec(inputs(rng), {width(rng)}, assets(rng), head);
    actor.params = Vector(static_cast<Eigen::Index>(actor.spec.num_params()));
    const double s = spread(rng);
    for (auto& p : actor.params) p = s * normal(rng);
    data::FeatureWindow w;
    w.tensor = Vector(static_cast<Eigen::Index>(actor.spec.sizes.front()));
    for (auto& v : w.tensor) v = 0.05 * normal(rng);
    audit.check(actor.weights(w));
  }
  return {};
}

Outcome criterion3() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> len(2, 500);
  std::normal_distribution<double> daily(0.0003, 0.015);
  std::size_t mdd_mismatch = 0;
  double worst = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };

  for (int k = 0; k < 1000; ++k) {
    const std::size_t T = len(rng);
    std::vector<double> r(T - 1);
    for (auto& x : r) x = daily(rng);
    std::vector<double> curve{1.0};
    for (double x : r) curve.push_back(curve.back() * (1.0 + x));

    double brute = 0.0;
    for (std::size_t i = 0; i < T; ++i)
      for (std::size_t j = i; j < T; ++j) brute = std::min(brute, (curve[j] / curve[i] - 1.0) * 100.0);
    if (metrics::max_drawdown(curve) != brute) ++mdd_mismatch;

    if (r.size() < 2) continue;
    const double n = static_cast<double>(r.size());
    double sum = 0.0, growth = 1.0;
    for (double x : r) {
      sum += x;
      growth *= 1.0 + x;
    }
    const double mean = sum / n;
    double ss = 0.0, down = 0.0;
    for (double x : r) {
      ss += (x - mean) * (x - mean);
      if (x < 0.0) down += x * x;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    worst = std::max(worst, rel(metrics::sharpe(r), mean / sd * std::sqrt(252.0)));
    if (down > 0.0) {
      worst = std::max(worst, rel(metrics::sortino(r), mean / std::sqrt(down / n) * std::sqrt(252.0)));
    }
    worst = std::max(worst, rel(metrics::annualized_return(r), (std::pow(growth, 252.0 / n) - 1.0) * 100.0));
  }
  const double secs = seconds_since(t0);
  return {mdd_mismatch == 0 && worst <= 1e-12 && secs < 10.0,
          fmt::format("1000 curves; MDD mismatches {}; max rel err sharpe/sortino/return {:.2e}; {:.1f}s",
                      mdd_mismatch, worst, secs)};
}

void audit_actor(const env::Actor& actor, const env::MarketData& data) {
  for (const auto& w : data.windows) audit.check(actor.weights(w));
}

Outcome criterion4() {
  const auto t0 = Clock::now();
  data::SyntheticSpec s;
  s.n_assets = 2;
  s.n_days = 1000;
  s.drift = {0.001, 0.0};
  s.volatility = {0.005, 0.005};
  s.seed = 0;
  const auto market = env::make_market_data(data::generate_synthetic(s), data::WindowSpec{});
  algo::TrainConfig cfg;
  cfg.epochs = 500;
  cfg.mixing = {1.0, 0.0, 0.0};
  const auto result = algo::train_actor_only(market, cfg, 0);
  const double secs = seconds_since(t0);
  double mean_a = 0.0;
  for (const auto& w : market.windows) mean_a += result.actor.weights(w)[0];
  mean_a /= static_cast<double>(market.windows.size());
  audit_actor(result.actor, market);
  for (std::size_t start = market.first_decision();
       start + cfg.episode_length <= market.last_decision() + 1; start += cfg.episode_length) {
    audit.check_all(env::rollout_deterministic(result.actor, market, {start, cfg.episode_length, cfg.action_period}).weights);
  }
  return {mean_a > 0.9 && secs < 60.0,
          fmt::format("mean weight on A {:.6f} after {} epochs; {:.1f}s", mean_a, cfg.epochs, secs)};
}

Outcome criterion5() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> ratio(0.0, 3.0), adv(-5.0, 5.0), eps(0.01, 0.5), val(-3.0, 3.0);
  std::size_t bad_bound = 0, bad_grad = 0;
  for (int k = 0; k < 100000; ++k) {
    const double r = ratio(rng), a = adv(rng), e = eps(rng);
    if (algo::ppo_surrogate(r, a, e) > r * a) ++bad_bound;
    const bool clipped_out = (a > 0.0 && r > 1.0 + e) || (a < 0.0 && r < 1.0 - e);
    if (clipped_out && algo::ppo_surrogate_grad(r, a, e) != 0.0) ++bad_grad;
  }

  std::size_t bad_clip = 0;
  std::vector<algo::ClipSpec> specs(4);
  specs[1].lower = -0.4;
  specs[2].upper = 0.4;
  specs[3].lower = -0.4;
  specs[3].upper = 0.4;
  for (const auto& c : specs) {
    std::vector<double> xs(2000);
    for (auto& x : xs) x = val(rng);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double y = algo::reward_clip(xs[i], c);
      if (i > 0 && y < algo::reward_clip(xs[i - 1], c)) ++bad_clip;
      if (algo::reward_clip(y, c) != y) ++bad_clip;
      if (c.unbounded() && y != xs[i]) ++bad_clip;
    }
  }

  const auto market = env::make_market_data(random_panel(3, 400, 55), data::WindowSpec{10, false});
  algo::TrainConfig cfg;
  cfg.epochs = 15;
  cfg.episodes = 3;
  cfg.episode_length = 63;
  cfg.hidden = {16, 8};
  const auto plain = algo::train_actor_only(market, cfg, 7);
  const auto clipped = algo::train_reward_clip(market, cfg, algo::ClipSpec{}, 7);
  const bool same_log = plain.log == clipped.log;
  const bool same_params = plain.actor.params.size() == clipped.actor.params.size() &&
                           (plain.actor.params.array() == clipped.actor.params.array()).all();
  const double secs = seconds_since(t0);
  return {bad_bound == 0 && bad_grad == 0 && bad_clip == 0 && same_log && same_params && secs < 10.0,
          fmt::format("surrogate bound violations {}, nonzero clipped-out grads {}, clip property violations {}, "
                      "unbounded reward_clip log identical {}; {:.1f}s",
                      bad_bound, bad_grad, bad_clip, same_log && same_params, secs)};
}

config::RunConfig crash_config(std::uint64_t seed, const fs::path& out) {
  return config::parse_config(fmt::format(R"(seed = {}
out = {}
model = reward_clip
synth.n_assets = 4
synth.n_days = 1000
synth.drift = 0.0005, 0.0005, 0.0, 0.0
synth.volatility = 0.012, 0.012, 0.003, 0.006
synth.classes = equity, equity, bond_long, gold
synth.regimes = 500:-6:1, 601:1:1
sweep.grid = -0.4:none, none:0.4, -0.4:0.4
)", seed, out.string()));
}

Outcome criterion6(const fs::path& scratch) {
  const auto t0 = Clock::now();
  int passing = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto cfg = crash_config(seed, scratch / fmt::format("sweep_{}", seed));
    const auto out = cli::cmd_sweep(cfg);
    std::map<std::string, const backtest::BacktestReport*> by_name;
    for (const auto& r : out.reports) {
      by_name[r.name] = &r;
      audit.check_all(r.weights);
    }
    const auto& ao = *by_name.at("actor_only");
    const auto& lo = *by_name.at("RC_-0.4");
    const auto& up = *by_name.at("RC_0.4");
    const bool mdd_ok = lo.metrics.mdd >= ao.metrics.mdd;
    const bool eq_ok = up.equity.back() <= lo.equity.back();
    passing += (mdd_ok && eq_ok) ? 1 : 0;
    per_seed += fmt::format(" [seed {}: MDD RC_-0.4 {:.2f} vs actor_only {:.2f}; equity RC_0.4 {:.4f} vs RC_-0.4 {:.4f}]",
                            seed, lo.metrics.mdd, ao.metrics.mdd, up.equity.back(), lo.equity.back());
  }
  const double secs = seconds_since(t0);
  return {passing >= 4 && secs < 600.0, fmt::format("{}/5 seeds satisfy both conditions; {:.1f}s;{}", passing, secs, per_seed)};
}

Outcome criterion7() {
  std::mt19937_64 rng(707);
  double worst = 0.0;
  bool gamma0_exact = true;
  for (int k = 0; k < 200; ++k) {
    auto inst = small_instance(rng);
    auto actor = algo::init_actor(inst.data, inst.cfg, nn::Head::Softplus, rng());
    const auto traj = env::rollout_stochastic(actor, inst.data, inst.episode, rng());
    audit.check_all(traj.weights);
    const std::size_t steps = traj.num_steps();

    // Single head on the summed reward vs an independently assembled monolithic critic.
    auto single = algo::init_critics(inst.data, inst.cfg, 1, rng());
    const double gamma = 0.95;
    const Matrix y = algo::critic_targets(traj, single, inst.data, inst.cfg.mixing, gamma);
    const Matrix parts = env::step_component_rewards(traj, inst.cfg.mixing);
    Matrix values(static_cast<Eigen::Index>(steps), 1);
    Vector mono_v(static_cast<Eigen::Index>(steps)), mono_y(static_cast<Eigen::Index>(steps));
    for (std::size_t s = 0; s < steps; ++s) {
      const auto i = static_cast<Eigen::Index>(s);
      const double v = single.values(inst.data.window_for(traj.action_days[s]))[0];
      values(i, 0) = v;
      mono_v[i] = v;
      const double reward = parts.row(i).sum();
      const double next = s + 1 < steps ? single.values(inst.data.window_for(traj.action_days[s + 1]))[0] : 0.0;
      mono_y[i] = s + 1 < steps ? reward + gamma * next : reward;
    }
    const double decomposed = algo::critic_loss(values, y);
    const double monolithic = algo::monolithic_critic_loss(mono_v, mono_y);
    worst = std::max(worst, std::abs(decomposed - monolithic));

    // gamma = 0: targets are the raw component rewards.
    auto heads = algo::init_critics(inst.data, inst.cfg, 3, rng());
    const Matrix y0 = algo::critic_targets(traj, heads, inst.data, inst.cfg.mixing, 0.0);
    if (!(y0.array() == parts.array()).all()) gamma0_exact = false;
  }
  return {worst <= 1e-12 && gamma0_exact,
          fmt::format("200 batches; max |decomposed - monolithic| {:.2e}; gamma=0 targets exact {}", worst, gamma0_exact)};
}

Outcome criterion8() {
  // Hand-built oracle: holdings in shares, revalued daily.
  const auto dates = business_days(Date{std::chrono::year{2021}, std::chrono::January, std::chrono::day{4}}, 64);
  std::mt19937_64 rng(808);
  std::normal_distribution<double> step(0.0005, 0.012);
  Matrix close(64, 2);
  close.row(0) << 50.0, 120.0;
  for (Eigen::Index t = 1; t < 64; ++t)
    for (Eigen::Index i = 0; i < 2; ++i) close(t, i) = close(t - 1, i) * std::exp(step(rng));
  const data::AssetPanel panel(dates, {{"EQ", data::AssetClass::Equity}, {"BD", data::AssetClass::BondLong}}, close);

  std::size_t feb = 0;
  while (dates[feb].month() == std::chrono::January) ++feb;
  const backtest::RebalanceSchedule schedule{{0, feb}};
  Vector w0(2), w1(2);
  w0 << 0.7, 0.3;
  w1 << 0.25, 0.75;
  backtest::Strategy strategy;
  strategy.name = "scripted";
  strategy.weights = [&](const backtest::DecisionContext& ctx) { return ctx.day < feb ? w0 : w1; };
  const auto report = backtest::run_backtest(strategy, panel, schedule);

  double value = 1.0;
  double shares[2] = {0.0, 0.0};
  double worst = 0.0;
  for (std::size_t t = 0; t < 64; ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    if (t > 0) value = shares[0] * close(i, 0) + shares[1] * close(i, 1);
    if (t == 0 || t == feb) {
      const Vector& w = t == 0 ? w0 : w1;
      shares[0] = value * w[0] / close(i, 0);
      shares[1] = value * w[1] / close(i, 1);
    }
    worst = std::max(worst, std::abs(report.equity[t] - value));
  }
  const bool accounting = report.equity.size() == 64 && worst <= 1e-12;

  // No-look-ahead fuzz with a trained-shape random model.
  std::size_t leaks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t days = 120 + rng() % 80;
    auto base = random_panel(2 + rng() % 3, days, rng());
    Matrix volume = Matrix::Constant(static_cast<Eigen::Index>(base.num_days()), static_cast<Eigen::Index>(base.num_assets()), 1e6);
    std::uniform_real_distribution<double> vj(0.5, 1.5);
    for (Eigen::Index t = 0; t < volume.rows(); ++t)
      for (Eigen::Index i = 0; i < volume.cols(); ++i) volume(t, i) *= vj(rng);
    base = data::AssetPanel(base.dates(), base.assets(), base.close(), volume);
    const data::WindowSpec ws{5 + rng() % 10, rng() % 2 == 0};
    const auto market = env::make_market_data(base, ws);
    algo::TrainConfig cfg;
    cfg.hidden = {8};
    const auto actor = algo::init_actor(market, cfg, rng() % 2 ? nn::Head::Softmax : nn::Head::Softplus, rng());
    const auto strat = backtest::model_strategy("m", actor, ws);
    const auto sched = backtest::monthly_schedule(base, base.dates()[ws.length], base.dates().back());
    const auto before = backtest::run_backtest(strat, base, sched);

    const std::size_t cut = ws.length + rng() % (base.num_days() - ws.length - 1);
    Matrix c2 = base.close(), v2 = base.volume();
    std::uniform_real_distribution<double> shock(0.5, 2.0);
    for (Eigen::Index t = static_cast<Eigen::Index>(cut) + 1; t < c2.rows(); ++t)
      for (Eigen::Index i = 0; i < c2.cols(); ++i) {
        c2(t, i) *= shock(rng);
        v2(t, i) *= shock(rng);
      }
    const data::AssetPanel perturbed(base.dates(), base.assets(), c2, v2);
    const auto after = backtest::run_backtest(strat, perturbed, sched);
    for (std::size_t k = 0; k < sched.days.size(); ++k) {
      if (sched.days[k] > cut) break;
      if (!(before.weights[k].array() == after.weights[k].array()).all()) ++leaks;
    }
  }
  return {accounting && leaks == 0,
          fmt::format("oracle max |equity diff| {:.2e} over {} days; look-ahead leaks {} in 100 trials", worst,
                      report.equity.size(), leaks)};
}

Outcome criterion9(const fs::path& scratch) {
  using data::AssetClass;
  std::mt19937_64 rng(909);
  const AssetClass all[] = {AssetClass::Equity, AssetClass::BondIntermediate, AssetClass::BondLong,
                            AssetClass::Commodity, AssetClass::Gold};
  std::size_t mismatches = 0;
  for (int k = 0; k < 500; ++k) {
    std::vector<data::Asset> assets;
    std::map<AssetClass, int> count;
    // Every class at least once so all three baselines apply.
    for (auto c : all) assets.push_back({fmt::format("X{}", assets.size()), c});
    for (std::size_t extra = rng() % 20; extra > 0; --extra) assets.push_back({fmt::format("X{}", assets.size()), all[rng() % 5]});
    std::shuffle(assets.begin(), assets.end(), rng);
    for (const auto& a : assets) ++count[a.asset_class];
    const int n = static_cast<int>(assets.size());
    const int bonds = count[AssetClass::BondIntermediate] + count[AssetClass::BondLong];
    const std::map<AssetClass, double> aw = {{AssetClass::Equity, 0.30}, {AssetClass::BondLong, 0.40},
                                             {AssetClass::BondIntermediate, 0.15}, {AssetClass::Gold, 0.075},
                                             {AssetClass::Commodity, 0.075}};
    const Vector ew = baselines::equal_weight(assets);
    const Vector sf = baselines::sixty_forty(assets);
    const Vector w = baselines::all_weather(assets);
    for (int i = 0; i < n; ++i) {
      const auto c = assets[static_cast<std::size_t>(i)].asset_class;
      if (ew[i] != 1.0 / n) ++mismatches;
      double expect_sf = 0.0;
      if (c == AssetClass::Equity) expect_sf = 0.6 / count[c];
      if (c == AssetClass::BondIntermediate || c == AssetClass::BondLong) expect_sf = 0.4 / bonds;
      if (sf[i] != expect_sf) ++mismatches;
      if (w[i] != aw.at(c) / count[c]) ++mismatches;
    }
  }

  // comparison.csv header
  const auto panel = random_panel(3, 60, 9);
  const auto report = backtest::run_backtest(
      backtest::constant_strategy("equal_weight", backtest::StrategyKind::Baseline, baselines::equal_weight(panel.assets())),
      panel, backtest::monthly_schedule(panel, panel.dates().front(), panel.dates().back()));
  const auto path = scratch / "comparison_header.csv";
  backtest::write_comparison(backtest::compare_strategies({report}), path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  const bool header_ok = header == "Model,Annual Return,Sharpe Ratio,Standard Deviation,MDD,Sortino";
  return {mismatches == 0 && header_ok,
          fmt::format("500 universes, {} weight mismatches; comparison header '{}'", mismatches, header)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion10(const std::string& cli_path, const fs::path& scratch) {
  const auto cfg_path = scratch / "e2e.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "seed = 3\nmodel = reward_clip\nsynth.n_assets = 3\nsynth.n_days = 500\n"
           "synth.drift = 0.0004, 0.0001, 0.0002\nsynth.volatility = 0.01, 0.004, 0.007\n"
           "synth.classes = equity, bond_long, gold\nnn.hidden = 16, 8\n"
           "train.epochs = 20\ntrain.episodes = 4\ntrain.episode_length = 126\n";
  }
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const auto out = scratch / fmt::format("e2e_{}", run);
    fs::remove_all(out);
    const auto train = fmt::format("\"{}\" train --config \"{}\" --out \"{}\" > /dev/null", cli_path,
                                   cfg_path.string(), out.string());
    const auto bt = fmt::format("\"{}\" backtest --config \"{}\" --out \"{}\" --checkpoint \"{}\" > /dev/null",
                                cli_path, cfg_path.string(), out.string(), (out / "checkpoint.txt").string());
    if (std::system(train.c_str()) != 0 || std::system(bt.c_str()) != 0) {
      return {false, "CLI train/backtest exited nonzero"};
    }
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(out)) files[e.path().filename().string()] = slurp(e.path());
    runs.push_back(std::move(files));
  }
  const bool same = runs[0] == runs[1];
  return {same && runs[0].size() >= 6,
          fmt::format("{} output files compared across two runs; byte-identical {}", runs[0].size(), same)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: rcfolio_acceptance <rcfolio cli> <scratch dir>\n";
    return 2;
  }
  const std::string cli_path = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);

  std::set<int> only;
  for (int a = 3; a < argc; ++a) only.insert(std::atoi(argv[a]));

  std::map<int, Outcome> results;
  auto guarded = [&](int id, const std::function<Outcome()>& fn) {
    if (!only.empty() && !only.count(id)) return;
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, fmt::format("exception: {}", e.what())};
    }
  };
  guarded(1, criterion1);
  guarded(3, criterion3);
  guarded(4, criterion4);
  guarded(5, criterion5);
  guarded(6, [&] { return criterion6(scratch); });
  guarded(7, criterion7);
  guarded(8, criterion8);
  guarded(9, [&] { return criterion9(scratch); });
  guarded(10, [&] { return criterion10(cli_path, scratch); });
  guarded(2, [] {
    criterion2_forward();
    return Outcome{audit.violations == 0,
                   fmt::format("{} weight vectors checked (10000 random forward passes plus rollouts and backtests), {} violations",
                               audit.checked, audit.violations)};
  });

  const char* titles[] = {"",
                          "gradient correctness",
                          "simplex invariants",
                          "metric oracle equivalence",
                          "learnability (actor-only)",
                          "clip algebra",
                          "clipping-bound directional study",
                          "HRA degeneracy",
                          "backtest accounting and no look-ahead",
                          "baseline exactness and comparison schema",
                          "end-to-end determinism"};
  bool all = true;
  for (const auto& [id, outcome] : results) {
    all = all && outcome.pass;
    std::cout << fmt::format("[{}] {:>2} {}: {}\n", outcome.pass ? "PASS" : "FAIL", id, titles[id], outcome.detail);
  }
  return all ? 0 : 1;
}
