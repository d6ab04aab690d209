"""Probabilistic multi-step-ahead solar generation forecasting.

Thin Python wrapper around the C++ core: Bayesian BiLSTM/LSTM/RNN
forecasters trained by variational inference (closed-form KL or
Monte-Carlo alpha-beta divergence), Monte-Carlo predictive
distributions, and Pinball/Winkler/RMSE/MAE scoring.
"""

try:
    from ._suncast import (
        ab_coefficient,
        default_config,
        evaluate,
        forecast,
        kl_gaussian,
        load_csv,
        mae,
        pinball,
        rmse,
        save_csv,
        synth_solar,
        train,
        winkler,
    )
except ImportError:  # extension on sys.path instead of inside the package
    from _suncast import (
        ab_coefficient,
        default_config,
        evaluate,
        forecast,
        kl_gaussian,
        load_csv,
        mae,
        pinball,
        rmse,
        save_csv,
        synth_solar,
        train,
        winkler,
    )

__all__ = [
    "ab_coefficient",
    "default_config",
    "evaluate",
    "forecast",
    "kl_gaussian",
    "load_csv",
    "mae",
    "pinball",
    "rmse",
    "save_csv",
    "synth_solar",
    "train",
    "winkler",
]
