"""Named experiment presets.

Each preset is a complete configuration dictionary for one of the headline
experiments; the CLI can run them directly or overlay a config file and
per-key overrides on top.  The ``fig*`` names match the figure-reproduction
scripts under ``scripts/``.
"""

from __future__ import annotations

import copy
from typing import Any

_BASE_MODEL = {
    "alpha": 0.45,
    "gamma": 0.2,
    "loss": 80.0,
    "mu_i": 1.0,
}

_BASE = {
    "smith": {"sigma": 20.0},
    "init": {"y": 0.01, "z_sbar": 0.5, "z_ibar": 0.5},
}


def _preset(model: dict[str, Any], experiment: dict[str, Any]) -> dict[str, Any]:
    cfg = copy.deepcopy(_BASE)
    cfg["model"] = {**_BASE_MODEL, **model}
    cfg["experiment"] = experiment
    return cfg


PRESETS: dict[str, dict[str, Any]] = {
    # Static sweep, protection cost above its floor: V-shaped infection level.
    "fig1-left": _preset(
        {"beta_p": 0.5, "beta_u": 0.65, "c_p": 25.0, "c_u": 32.0},
        {"kind": "static-sweep", "mu_min": 0.01, "mu_max": 0.96, "step": 0.005},
    ),
    # Static sweep, protection cost below its floor: level rises with mu_s.
    "fig1-right": _preset(
        {"beta_p": 0.7, "beta_u": 0.9, "c_p": 19.0, "c_u": 20.0},
        {"kind": "static-sweep", "mu_min": 0.01, "mu_max": 0.96, "step": 0.005},
    ),
    # Static versus dynamic signaling over a finite horizon.
    "fig2": _preset(
        {"beta_p": 0.5, "beta_u": 0.65, "c_p": 20.0, "c_u": 25.0},
        {
            "kind": "compare",
            "horizon_t": 23.0,
            "n_intervals": 46,
            "cost_weight": 0.0,
            "dt": 0.01,
        },
    ),
    # Dynamic signaling with the credibility-penalised stage cost.
    "fig3": _preset(
        {"beta_p": 0.5, "beta_u": 0.65, "c_p": 20.0, "c_u": 25.0},
        {
            "kind": "optimize",
            "horizon_t": 23.0,
            "n_intervals": 46,
            "cost_weight": 0.8,
            "dt": 0.01,
        },
    ),
    # Relaxed infected-signal fidelity: stationary level over the full grid.
    "fig4": _preset(
        {"beta_p": 0.5, "beta_u": 0.65, "c_p": 25.0, "c_u": 32.0},
        {"kind": "grid-mui", "step": 0.005},
    ),
}


def preset(name: str) -> dict[str, Any]:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
