"""Runtime arm processes with rested or restless state evolution."""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .markov import ROW_SUM_TOL, ChainError, ChainSpec, as_stochastic_matrix, cumulative_rows, sample_index


class Mode(str, Enum):
    RESTED = "rested"
    RESTLESS = "restless"


def initial_distribution(spec: ChainSpec, initial="stationary") -> np.ndarray:
    """Resolve an initial-distribution choice.

    ``initial`` is ``"stationary"``, ``"uniform"``, an integer state (point
    mass) or an explicit probability vector.
    """
    n = spec.num_states
    if isinstance(initial, str):
        if initial == "stationary":
            return spec.analysis.stationary
        if initial == "uniform":
            return np.full(n, 1.0 / n)
        raise ChainError(f"unknown initial distribution {initial!r}")
    if isinstance(initial, (int, np.integer)):
        if not 0 <= initial < n:
            raise ChainError(f"initial state {initial} out of range for {n} states")
        dist = np.zeros(n)
        dist[initial] = 1.0
        return dist
    dist = np.asarray(initial, dtype=float)
    if dist.shape != (n,):
        raise ChainError(f"initial distribution has shape {dist.shape}, expected ({n},)")
    if np.any(dist < 0) or abs(math.fsum(dist) - 1.0) > ROW_SUM_TOL:
        raise ChainError(f"initial distribution {dist.tolist()} is not a probability vector")
    return dist


class ArmProcess:
    """A played-or-idle Markov arm.

    A rested arm moves by its active matrix only on slots where it is
    played and is frozen otherwise.  A restless arm moves every slot: by the
    active matrix when played, by ``passive`` (default: the active matrix)
    when idle.  A play yields the state *entered* in that slot.

    Each call to :meth:`reset` or to a transition consumes exactly one
    ``rng.random()`` draw, so arms with dedicated streams are reproducible
    and, when ``passive`` equals the active matrix, their restless
    trajectories do not depend on which policy plays them.
    """

    def __init__(self, spec: ChainSpec, mode="restless", rng=None, passive=None, initial="stationary"):
        self.spec = spec
        self.mode = Mode(mode)
        self.rng = rng if rng is not None else np.random.default_rng()
        if passive is None:
            self.passive = spec.transition
        else:
            self.passive = as_stochastic_matrix(passive, "passive")
            if self.passive.shape != spec.transition.shape:
                raise ChainError("passive matrix shape differs from the active matrix")
        self._passive_cum = cumulative_rows(self.passive).tolist()
        self.initial_dist = initial_distribution(spec, initial)
        self._init_cum = cumulative_rows(self.initial_dist[None, :])[0].tolist()
        self.state: int | None = None

    def reset(self, rng=None) -> int:
        rng = rng if rng is not None else self.rng
        self.state = sample_index(self._init_cum, rng.random())
        return self.state

    def advance(self, played: bool, rng=None) -> tuple[int, float] | None:
        """Advance one slot; returns ``(state, reward)`` only when played."""
        if self.state is None:
            raise RuntimeError("arm must be reset before it is advanced")
        rng = rng if rng is not None else self.rng
        if played:
            self.state = sample_index(self.spec._cum_lists[self.state], rng.random())
            return self.state, float(self.spec.rewards[self.state])
        if self.mode is Mode.RESTLESS:
            self.state = sample_index(self._passive_cum[self.state], rng.random())
        return None

    # the operation name used throughout the docs
    slot_advance = advance
