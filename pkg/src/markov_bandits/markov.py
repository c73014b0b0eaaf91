"""Finite Markov chains: validation, stationary analysis, spectral gap, hitting times.

Every arm in the bandit is a finite, discrete-time Markov chain with a
positive reward attached to each state.  This module holds the immutable
:class:`ChainSpec` description and the quantities derived from it that the
policies, regret bounds and simulator need.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Sequence

import numpy as np
from scipy import linalg

ROW_SUM_TOL = 1e-12
GAP_TOL = 1e-12


class ChainError(ValueError):
    """Raised for malformed transition matrices or reward vectors."""


class NotIrreducibleError(ChainError):
    """The chain has a state pair ``(src, dst)`` with ``dst`` unreachable from ``src``."""

    def __init__(self, src: int, dst: int):
        self.pair = (src, dst)
        super().__init__(f"chain is not irreducible: state {dst} is unreachable from state {src}")


class ConditionViolation(ChainError):
    """The multiplicative symmetrization is reducible (zero eigenvalue gap)."""


def as_stochastic_matrix(matrix, name: str = "transition") -> np.ndarray:
    """Validate a square row-stochastic matrix and return a read-only float copy.

    Rows must sum to one within ``ROW_SUM_TOL``; nothing is renormalized.
    """
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ChainError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ChainError(f"{name} contains non-finite entries")
    for x, row in enumerate(m):
        bad = np.flatnonzero((row < 0.0) | (row > 1.0))
        if bad.size:
            raise ChainError(f"{name} row {x} has entry {row[bad[0]]!r} outside [0, 1]")
        total = math.fsum(row)
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise ChainError(f"{name} row {x} sums to {total!r}, expected 1")
    m.setflags(write=False)
    return m


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        x = stack.pop()
        for y in np.flatnonzero(adj[x]):
            if not seen[y]:
                seen[y] = True
                stack.append(int(y))
    return seen


def unreachable_pair(adj: np.ndarray) -> tuple[int, int] | None:
    """First ``(src, dst)`` with ``dst`` not reachable from ``src`` in the graph ``adj``."""
    for src in range(adj.shape[0]):
        seen = _reachable(adj, src)
        if not seen.all():
            return src, int(np.flatnonzero(~seen)[0])
    return None


def period(adj: np.ndarray) -> int:
    """Period of an irreducible chain: gcd of ``level[u] + 1 - level[v]`` over all edges."""
    n = adj.shape[0]
    level = [-1] * n
    level[0] = 0
    queue = [0]
    for x in queue:
        for y in np.flatnonzero(adj[x]):
            if level[y] < 0:
                level[y] = level[x] + 1
                queue.append(int(y))
    diffs = [level[u] + 1 - level[v] for u, v in zip(*np.nonzero(adj))]
    return reduce(math.gcd, diffs, 0)


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """One arm: row-stochastic ``transition`` matrix and a per-state ``rewards`` vector.

    Construction checks shapes and stochasticity only.  Irreducibility,
    aperiodicity and reward positivity are reported by :func:`check_condition1`
    and enforced by the analysis routines that need them.
    """

    transition: np.ndarray
    rewards: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        p = as_stochastic_matrix(self.transition)
        r = np.array(self.rewards, dtype=float).reshape(-1)
        if r.shape[0] != p.shape[0]:
            raise ChainError(f"rewards has {r.shape[0]} entries for a {p.shape[0]}-state chain")
        if not np.all(np.isfinite(r)):
            raise ChainError("rewards contain non-finite entries")
        r.setflags(write=False)
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "rewards", r)

    @classmethod
    def two_state(cls, p01: float, p10: float, rewards=(0.1, 1.0), name: str = "") -> ChainSpec:
        """Gilbert-Elliott channel; state 0 is *bad*, state 1 is *good*."""
        return cls(np.array([[1.0 - p01, p01], [p10, 1.0 - p10]]), rewards, name)

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @cached_property
    def cumulative(self) -> np.ndarray:
        return cumulative_rows(self.transition)

    @cached_property
    def _cum_lists(self) -> list[list[float]]:
        return self.cumulative.tolist()

    @cached_property
    def analysis(self) -> ChainAnalysis:
        return analyze(self)


def cumulative_rows(matrix: np.ndarray) -> np.ndarray:
    """Row-wise cumulative sums with the last column pinned to exactly 1."""
    cum = np.cumsum(matrix, axis=1)
    cum[:, -1] = 1.0
    cum.setflags(write=False)
    return cum


def sample_index(cum_row: Sequence[float], u: float) -> int:
    """Smallest ``j`` with ``u < cum_row[j]``: inverse-CDF draw for ``u`` in [0, 1)."""
    return min(bisect.bisect_right(cum_row, u), len(cum_row) - 1)


def sample_next(spec: ChainSpec, state: int, rng) -> int:
    """Draw the successor of ``state``; consumes exactly one ``rng.random()``."""
    return sample_index(spec._cum_lists[state], rng.random())


def stationary_distribution(spec: ChainSpec) -> np.ndarray:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` directly (last balance equation replaced)."""
    p = spec.transition
    pair = unreachable_pair(p > 0)
    if pair is not None:
        raise NotIrreducibleError(*pair)
    n = p.shape[0]
    a = p.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = linalg.solve(a, b)
    return pi / math.fsum(pi)


def mean_reward(spec: ChainSpec) -> float:
    return float(spec.rewards @ spec.analysis.stationary)


def adjoint(transition: np.ndarray, stationary: np.ndarray) -> np.ndarray:
    """Adjoint of ``P`` on ``l2(pi)``: ``p'_xy = pi_y p_yx / pi_x``."""
    return (transition.T * stationary[None, :]) / stationary[:, None]


def multiplicative_symmetrization(spec: ChainSpec) -> np.ndarray:
    pi = spec.analysis.stationary
    return adjoint(spec.transition, pi) @ spec.transition


def eigenvalue_gap(symmetrization: np.ndarray, stationary: np.ndarray | None = None) -> float:
    """``1 - lambda_2`` of a reversible stochastic matrix.

    The matrix is brought to symmetric form ``D^1/2 S D^-1/2`` with
    ``D = diag(stationary)`` and handed to a symmetric eigensolver.  When
    ``stationary`` is omitted it is solved from ``symmetrization`` itself.
    """
    s = np.asarray(symmetrization, dtype=float)
    if s.shape[0] == 1:
        return 1.0
    if stationary is None:
        try:
            stationary = stationary_distribution(ChainSpec(s, np.ones(s.shape[0])))
        except NotIrreducibleError as exc:
            raise ConditionViolation(f"symmetrization is reducible ({exc})") from exc
    root = np.sqrt(stationary)
    sym = root[:, None] * s / root[None, :]
    sym = 0.5 * (sym + sym.T)
    eig = np.sort(linalg.eigvalsh(sym))[::-1]
    gap = 1.0 - float(eig[1])
    if gap <= GAP_TOL:
        raise ConditionViolation(
            f"eigenvalue gap {gap:.3e} <= 0: multiplicative symmetrization is reducible"
        )
    return gap


def hitting_times(spec: ChainSpec) -> np.ndarray:
    """Mean hitting times ``omega[x, y]`` (slots to first reach ``y`` from ``x``; zero on the diagonal)."""
    p = spec.transition
    n = p.shape[0]
    omega = np.zeros((n, n))
    for y in range(n):
        keep = np.arange(n) != y
        a = np.eye(n - 1) - p[np.ix_(keep, keep)]
        try:
            omega[keep, y] = linalg.solve(a, np.ones(n - 1))
        except linalg.LinAlgError as exc:
            pair = unreachable_pair(p > 0)
            if pair is not None:
                raise NotIrreducibleError(*pair) from exc
            raise
    return omega


@dataclass(frozen=True, eq=False)
class ChainAnalysis:
    stationary: np.ndarray
    adjoint: np.ndarray
    symmetrization: np.ndarray
    eigen_gap: float
    hitting: np.ndarray
    mean_reward: float

    @property
    def pi_min(self) -> float:
        return float(self.stationary.min())

    @property
    def pi_hat_max(self) -> float:
        return float(np.maximum(self.stationary, 1.0 - self.stationary).max())

    @property
    def omega_max(self) -> float:
        return float(self.hitting.max())


def analyze(spec: ChainSpec) -> ChainAnalysis:
    """All stationary quantities of ``spec``; raises if the chain is reducible."""
    pi = stationary_distribution(spec)
    adj = adjoint(spec.transition, pi)
    sym = adj @ spec.transition
    for a in (pi, adj, sym):
        a.setflags(write=False)
    hit = hitting_times(spec)
    hit.setflags(write=False)
    return ChainAnalysis(
        stationary=pi,
        adjoint=adj,
        symmetrization=sym,
        eigen_gap=eigenvalue_gap(sym, pi),
        hitting=hit,
        mean_reward=float(spec.rewards @ pi),
    )


@dataclass
class Condition1Report:
    irreducible: bool
    aperiodic: bool
    symmetrization_irreducible: bool
    rewards_positive: bool
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.irreducible
            and self.aperiodic
            and self.symmetrization_irreducible
            and self.rewards_positive
        )

    def clauses(self) -> dict[str, bool]:
        return {
            "irreducible": self.irreducible,
            "aperiodic": self.aperiodic,
            "symmetrization_irreducible": self.symmetrization_irreducible,
            "rewards_positive": self.rewards_positive,
        }


def check_condition1(spec: ChainSpec) -> Condition1Report:
    """Structural check of every clause; failures are reported, never raised."""
    adj = spec.transition > 0
    msgs = []
    pair = unreachable_pair(adj)
    irreducible = pair is None
    if not irreducible:
        msgs.append(f"state {pair[1]} is unreachable from state {pair[0]}")
    aperiodic = False
    if irreducible:
        d = period(adj)
        aperiodic = d == 1
        if not aperiodic:
            msgs.append(f"chain has period {d}")
    else:
        msgs.append("aperiodicity not evaluated (chain reducible)")
    # (P'P)_xz > 0 iff some y has p_yx > 0 and p_yz > 0, independent of pi.
    sym_adj = (adj.T.astype(int) @ adj.astype(int)) > 0
    sym_pair = unreachable_pair(sym_adj)
    sym_ok = irreducible and sym_pair is None
    if irreducible and sym_pair is not None:
        msgs.append(
            f"multiplicative symmetrization reducible: state {sym_pair[1]} "
            f"unreachable from {sym_pair[0]}"
        )
    bad = np.flatnonzero(spec.rewards <= 0)
    if bad.size:
        msgs.append(f"reward of state {int(bad[0])} is {spec.rewards[bad[0]]!r}, must be > 0")
    return Condition1Report(irreducible, aperiodic, sym_ok, not bad.size, msgs)
