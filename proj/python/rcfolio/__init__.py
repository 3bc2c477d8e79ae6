"""RL portfolio training and backtesting engine (C++ core)."""

from ._rcfolio import (
    Error,
    all_weather,
    annualized_return,
    annualized_stdev,
    backtest,
    check_config,
    clip_name,
    compare,
    config_keys,
    equal_weight,
    equity_curve,
    generate_synthetic,
    max_drawdown,
    ppo_surrogate,
    reward_clip,
    sharpe,
    sixty_forty,
    sortino,
    sweep,
    synth,
    train,
    turnover,
)

__all__ = [
    "Error",
    "all_weather",
    "annualized_return",
    "annualized_stdev",
    "backtest",
    "check_config",
    "clip_name",
    "compare",
    "config_keys",
    "equal_weight",
    "equity_curve",
    "generate_synthetic",
    "max_drawdown",
    "ppo_surrogate",
    "reward_clip",
    "sharpe",
    "sixty_forty",
    "sortino",
    "sweep",
    "synth",
    "train",
    "turnover",
]
