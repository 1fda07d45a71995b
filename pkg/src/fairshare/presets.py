"""Built-in parameter presets fitted from public engagement datasets.

Each preset carries the fitted group shares, homophily probabilities and
Beta shapes for the like-probability distribution of every (group, article)
cell, paired with the default cost/value scalars (cost 1, in-group value
2000, out-group value 200). The datasets report no per-topic cost/value,
so all presets share the defaults.
"""

from __future__ import annotations

from .errors import UnknownPreset
from .model import ModelParams, PreferenceSpec, params_from_preferences

__all__ = ["PRESET_NAMES", "preset", "DEFAULT_COST", "DEFAULT_VALUE_IN", "DEFAULT_VALUE_OUT",
           "DEFAULT_DELTA_LO", "DEFAULT_DELTA_HI", "DEFAULT_T", "DEFAULT_TRIALS", "DEFAULT_AGENTS"]

DEFAULT_COST = 1.0
DEFAULT_VALUE_IN = 2000.0
DEFAULT_VALUE_OUT = 200.0
DEFAULT_DELTA_LO = 0.25
DEFAULT_DELTA_HI = 2.0
DEFAULT_T = 10
DEFAULT_TRIALS = 25
DEFAULT_AGENTS = 100_000

# (pi_A, q_A, q_B, Beta shapes per cell [[A,a],[A,b],[B,a],[B,b]])
_PRESETS = {
    "facebook": (0.500, 0.7200, 0.6800,
                 [(0.95, 1.35), (0.18, 2.76), (0.10, 3.09), (0.88, 1.62)]),
    "twitter-us-elections": (0.432, 0.9877, 1.0000,
                             [(41.46, 556.87), (0.75, 413.47), (6.10, 1519.85), (2153.00, 23467.67)]),
    "twitter-brexit": (0.480, 0.6800, 0.3840,
                       [(1.64, 62.92), (1.72, 380.14), (1.48, 27.40), (39.60, 505.90)]),
    "twitter-abortion": (0.623, 0.5500, 0.8200,
                         [(2.30, 27.59), (0.16, 50.83), (0.25, 7.40), (2.20, 53.70)]),
}

PRESET_NAMES = tuple(_PRESETS)


def _value_for(group: int, article: int) -> float:
    return DEFAULT_VALUE_IN if group == article else DEFAULT_VALUE_OUT


def preset(name: str, T: int = DEFAULT_T) -> tuple[ModelParams, list]:
    """Return (ModelParams, 2x2 PreferenceSpec table) for a named preset.

    Fitted homophily values fall outside the strict theoretical bounds for
    some datasets; the params are built in simulation mode and carry the
    corresponding warnings.
    """
    try:
        pi_A, q_A, q_B, shapes = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
    prefs = [
        [
            PreferenceSpec(
                alpha=shapes[2 * g + s][0],
                beta=shapes[2 * g + s][1],
                cost=DEFAULT_COST,
                value=_value_for(g, s),
            )
            for s in range(2)
        ]
        for g in range(2)
    ]
    params = params_from_preferences(prefs, pi_A=pi_A, q_A=q_A, q_B=q_B, T=T, mode="simulation")
    return params, prefs
