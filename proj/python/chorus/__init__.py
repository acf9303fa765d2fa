"""Chorus-mode ultrasound localization: simulation, locating and tracking."""

import json

from ._core import (
    ConfigError,
    blind_region_area,
    divide_closest_targets,
    monte_carlo_blind_area,
    multi_detectable,
    prob_three_receivers_lb,
    solve_separation_distance,
)
from ._core import _run_json

__all__ = [
    "ConfigError",
    "blind_region_area",
    "divide_closest_targets",
    "monte_carlo_blind_area",
    "multi_detectable",
    "prob_three_receivers_lb",
    "run",
    "solve_separation_distance",
]


def run(config=None, preset="baseline"):
    """Run one experiment.

    `config` holds snake_case keys layered over `preset`; `seed` picks the run.
    Returns a dict with "config", "metrics" and the per-estimate "errors" [m].
    """
    return json.loads(_run_json(json.dumps(config or {}), preset))
