"""Gilbert-Elliott channel environments S1-S4.

Each environment has ten two-state channels with reward 1 in the good
state and 0.1 in the bad state.  ``p01`` is bad->good, ``p10`` good->bad.
"""

from __future__ import annotations

from .markov import ChainSpec

GOOD_REWARD = 1.0
BAD_REWARD = 0.1

TRANSITIONS = {
    "S1": (
        (0.01, 0.01, 0.02, 0.02, 0.03, 0.03, 0.04, 0.04, 0.05, 0.05),
        (0.08, 0.07, 0.08, 0.07, 0.08, 0.07, 0.02, 0.01, 0.02, 0.01),
    ),
    "S2": (
        (0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
        (0.9, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1),
    ),
    "S3": (
        (0.01, 0.1, 0.02, 0.3, 0.04, 0.5, 0.06, 0.7, 0.08, 0.9),
        (0.09, 0.9, 0.08, 0.7, 0.06, 0.5, 0.04, 0.3, 0.02, 0.1),
    ),
    "S4": (
        (0.02, 0.04, 0.04, 0.5, 0.06, 0.05, 0.7, 0.8, 0.9, 0.9),
        (0.03, 0.03, 0.04, 0.4, 0.05, 0.06, 0.6, 0.7, 0.8, 0.9),
    ),
}

# reference mean rewards, with the tolerance implied by their printed precision
TABLE_MEANS = {
    "S1": (0.20, 0.21, 0.28, 0.30, 0.35, 0.37, 0.70, 0.82, 0.74, 0.85),
    "S2": (0.19, 0.19, 0.28, 0.37, 0.46, 0.55, 0.64, 0.73, 0.82, 0.91),
    "S3": (0.19, 0.19, 0.28, 0.37, 0.46, 0.55, 0.64, 0.73, 0.82, 0.91),
    "S4": (0.460, 0.614, 0.550, 0.600, 0.591, 0.509, 0.585, 0.580, 0.577, 0.550),
}
TABLE_TOLERANCE = {"S1": 0.005, "S2": 0.005, "S3": 0.005, "S4": 0.0005}

PRESET_NAMES = tuple(TRANSITIONS)


def preset(name: str) -> list[ChainSpec]:
    try:
        p01s, p10s = TRANSITIONS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    return [
        ChainSpec.two_state(a, b, (BAD_REWARD, GOOD_REWARD), name=f"{name}-ch{k + 1}")
        for k, (a, b) in enumerate(zip(p01s, p10s))
    ]


def table_deviation(name: str) -> list[tuple[int, float, float, float]]:
    """``(channel, computed, reference, |difference|)`` for every channel of a preset."""
    rows = []
    for k, (spec, target) in enumerate(zip(preset(name), TABLE_MEANS[name])):
        mu = spec.analysis.mean_reward
        rows.append((k + 1, mu, target, abs(mu - target)))
    return rows
