"""Index policies for multi-play Markovian bandits.

``UcbM`` is the multi-play UCB rule for rested arms.  ``RcaM`` is the
regenerative cycle algorithm for restless arms: each arm is played in
blocks delimited by visits to a regenerative state and only the
observations inside regenerative cycles (SB2 sub-blocks) feed its index.

Both classes are driven slot by slot::

    decision = policy.select()
    policy.observe({arm: (state, reward) for arm in decision.arms})

Arm indices are zero-based.  Ties on equal index values go to the lowest
arm index.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class PolicyDecision:
    """Arms played in one slot and the player (1..M) that plays each."""

    arms: tuple[int, ...]
    players: Mapping[int, int]


class PlayerBook:
    """Keeps a continuing arm on its player; freed players take new arms in ascending order."""

    def __init__(self, num_players: int):
        self.num_players = num_players
        self.assignment: dict[int, int] = {}

    def assign(self, keep: Sequence[int], new: Sequence[int]) -> dict[int, int]:
        kept = {a: self.assignment[a] for a in keep}
        free = sorted(set(range(1, self.num_players + 1)) - set(kept.values()))
        for arm, player in zip(new, free):
            kept[arm] = player
        self.assignment = kept
        return dict(kept)

    def release(self, arm: int) -> None:
        self.assignment.pop(arm, None)


def rank_by_mean(means: Sequence[float]) -> list[int]:
    """Arm indices ordered by decreasing mean, ties to the lowest index."""
    return sorted(range(len(means)), key=lambda i: (-means[i], i))


def top_indices(values: Sequence[float], m: int, candidates: Sequence[int] | None = None) -> list[int]:
    if candidates is None:
        candidates = range(len(values))
    return sorted(candidates, key=lambda i: (-values[i], i))[:m]


def oracle_best_m(specs, M: int) -> tuple[int, ...]:
    """The ``M`` arms with the largest stationary mean reward."""
    means = [s.analysis.mean_reward for s in specs]
    order = rank_by_mean(means)
    if M < len(means) and means[order[M - 1]] - means[order[M]] <= 1e-12:
        warnings.warn(
            f"mu^M = mu^(M+1) = {means[order[M]]:.6g}: the M-best set is not strictly "
            "separated, restless regret guarantees need a strict gap",
            stacklevel=2,
        )
    return tuple(sorted(order[:M]))


# --------------------------------------------------------------------------
# UCB-M


def ucbm_initial_schedule(K: int, M: int) -> list[tuple[int, ...]]:
    """Cyclic warm-up: slot ``t`` plays arms ``t, ..., t+M-1`` (mod K)."""
    if not 1 <= M <= K:
        raise ValueError(f"need 1 <= M <= K, got M={M}, K={K}")
    return [tuple(sorted((t + j) % K for j in range(M))) for t in range(K)]


def ucbm_index(sample_mean: float, count: int, t: int, L: float) -> float:
    return sample_mean + math.sqrt(L * math.log(t) / count)


class UcbM:
    def __init__(self, num_arms: int, plays: int, L: float):
        self.K = num_arms
        self.M = plays
        self.L = float(L)
        self._schedule = ucbm_initial_schedule(num_arms, plays)
        self.counts = [0] * num_arms
        self.sums = [0.0] * num_arms
        self.t = 0
        self._pending: set[int] = set()
        self._players = PlayerBook(plays)

    def sample_mean(self, arm: int) -> float:
        return self.sums[arm] / self.counts[arm]

    def indices(self) -> list[float]:
        return [ucbm_index(self.sums[i] / self.counts[i], self.counts[i], self.t, self.L) for i in range(self.K)]

    def select(self) -> PolicyDecision:
        if self._pending:
            raise RuntimeError("previous decision has unobserved arms")
        if self.t < self.K:
            chosen = self._schedule[self.t]
        else:
            chosen = top_indices(self.indices(), self.M)
        prev = self._players.assignment
        keep = [a for a in chosen if a in prev]
        players = self._players.assign(keep, [a for a in chosen if a not in prev])
        self._pending = set(chosen)
        return PolicyDecision(tuple(sorted(chosen)), players)

    def update(self, arm: int, reward: float) -> None:
        if arm not in self._pending:
            raise ValueError(f"arm {arm} was not played in the current slot")
        self._pending.discard(arm)
        self.counts[arm] += 1
        self.sums[arm] += reward
        if not self._pending:
            self.t += 1

    def observe(self, observations: Mapping[int, tuple[int, float]]) -> None:
        if set(observations) != self._pending:
            raise ValueError("observations must cover exactly the arms of the current decision")
        for arm in sorted(observations):
            self.update(arm, observations[arm][1])


# --------------------------------------------------------------------------
# RCA-M


def rcam_index(sb2_reward_sum: float, T2: int, t2: int, L: float) -> float:
    """SB2 sample mean plus ``sqrt(L ln t2 / T2)``."""
    return sb2_reward_sum / T2 + math.sqrt(L * (math.log(t2) if t2 > 0 else 0.0) / T2)


@dataclass
class Block:
    ordinal: int
    arm: int
    player: int
    gamma: int | None
    start: int
    end: int | None = None
    sb1: list[int] = field(default_factory=list)
    sb2: list[int] = field(default_factory=list)
    sb3: int | None = None


class RcaM:
    """Regenerative cycle algorithm with ``M`` plays per slot.

    With ``adaptive=True`` the regenerative state of an arm is re-chosen at
    the start of each of its blocks as the state that would have excluded
    the fewest past observations; switching discards the SB2 statistics
    gathered under the previous state.

    ``rng`` orders blocks that start in the same slot (block ordinals only,
    never the selection).  ``record=True`` keeps every block's sub-block
    contents in :attr:`blocks_log`.
    """

    def __init__(self, num_arms: int, plays: int, L: float, adaptive: bool = False, rng=None, record: bool = False):
        if not 1 <= plays <= num_arms:
            raise ValueError(f"need 1 <= M <= K, got M={plays}, K={num_arms}")
        K = num_arms
        self.K, self.M, self.L = K, plays, float(L)
        self.adaptive = adaptive
        self.rng = rng
        self.record = record
        self.t = 0
        self.t2 = 0
        self.gamma: list[int | None] = [None] * K
        self.T2 = [0] * K
        self.r2 = [0.0] * K
        self.never_played = [True] * K
        self.in_sb2 = [False] * K
        self.blocks = [0] * K
        self.plays = [0] * K
        self.completed_plays = [0] * K
        self.block_plays = [0] * K
        self.last_block_end = 0
        self.blocks_started = 0
        self.active: dict[int, int] = {}
        self.sb2_transitions = [Counter() for _ in range(K)]
        self._prev_sb2: list[int | None] = [None] * K
        self._excluded: list[dict[int, int]] = [{} for _ in range(K)]
        self._seen: list[set[int]] = [set() for _ in range(K)]
        self._observed = [0] * K
        self._players = PlayerBook(plays)
        self._open: dict[int, Block] = {}
        self.blocks_log: list[Block] = []

    def index(self, arm: int) -> float:
        if self.T2[arm] == 0:
            return math.inf
        return rcam_index(self.r2[arm], self.T2[arm], self.t2, self.L)

    def exclusion_counts(self, arm: int) -> dict[int, int]:
        """Observations of ``arm`` that fell before the first visit to ``s`` in their block, per ``s``."""
        return dict(self._excluded[arm])

    def adaptive_gamma(self, arm: int) -> int:
        if self.never_played[arm]:
            raise ValueError(f"arm {arm} has never been played")
        counts = self._excluded[arm]
        return min(counts, key=lambda s: (counts[s], s))

    def _start_block(self, arm: int) -> None:
        self.block_plays[arm] = 0
        self._seen[arm] = set()
        if self.adaptive and not self.never_played[arm]:
            g = self.adaptive_gamma(arm)
            if g != self.gamma[arm]:
                self.gamma[arm] = g
                self.T2[arm] = 0
                self.r2[arm] = 0.0

    def select(self) -> PolicyDecision:
        new = []
        for i in range(self.K):
            if len(self.active) + len(new) >= self.M:
                break
            if self.never_played[i] and i not in self.active:
                new.append(i)
        room = self.M - len(self.active) - len(new)
        if room > 0:
            free = [i for i in range(self.K) if i not in self.active and i not in new]
            values = {i: self.index(i) for i in free}
            new += sorted(free, key=lambda i: (-values[i], i))[:room]
        for arm in new:
            self._start_block(arm)
        players = self._players.assign(list(self.active), new)
        self.active = {a: players[a] for a in sorted(players)}
        order = list(new)
        if len(order) > 1 and self.rng is not None:
            order = [order[k] for k in self.rng.permutation(len(order))]
        for arm in order:
            self.blocks_started += 1
            if self.record:
                self._open[arm] = Block(self.blocks_started, arm, players[arm], self.gamma[arm], self.t + 1)
        return PolicyDecision(tuple(self.active), dict(self.active))

    def observe(self, observations: Mapping[int, tuple[int, float]]) -> None:
        if set(observations) != set(self.active):
            raise ValueError("observations must cover exactly the arms in the active set")
        slot = self.t + 1
        for i in sorted(observations):
            x, reward = observations[i]
            self.plays[i] += 1
            self.block_plays[i] += 1
            self._track_exclusions(i, x)
            blk = self._open.get(i)
            trans = self.sb2_transitions[i]
            if self.never_played[i]:
                self.gamma[i] = x
                self.T2[i] += 1
                self.r2[i] += reward
                self.never_played[i] = False
                self.in_sb2[i] = True
                self._prev_sb2[i] = x
                if blk:
                    blk.gamma = x
                    blk.sb2.append(x)
            elif x != self.gamma[i] and self.in_sb2[i]:
                self.T2[i] += 1
                self.r2[i] += reward
                trans[self._prev_sb2[i], x] += 1
                self._prev_sb2[i] = x
                if blk:
                    blk.sb2.append(x)
            elif x == self.gamma[i] and not self.in_sb2[i]:
                self.T2[i] += 1
                self.r2[i] += reward
                self.in_sb2[i] = True
                self._prev_sb2[i] = x
                if blk:
                    blk.sb2.append(x)
            elif x == self.gamma[i]:
                trans[self._prev_sb2[i], x] += 1
                self.in_sb2[i] = False
                del self.active[i]
                self._players.release(i)
                self.blocks[i] += 1
                self.completed_plays[i] += self.block_plays[i]
                self.last_block_end = slot
                if blk:
                    blk.sb3 = x
                    blk.end = slot
                    self.blocks_log.append(self._open.pop(i))
            elif blk:
                blk.sb1.append(x)
        self.t = slot
        if any(self.in_sb2):
            self.t2 += 1

    def step(self, observations: Mapping[int, tuple[int, float]]) -> PolicyDecision:
        self.observe(observations)
        return self.select()

    def _track_exclusions(self, arm: int, x: int) -> None:
        counts = self._excluded[arm]
        seen = self._seen[arm]
        if x not in counts:
            counts[x] = self._observed[arm]
        for s in counts:
            if s != x and s not in seen:
                counts[s] += 1
        seen.add(x)
        self._observed[arm] += 1

    def open_blocks(self) -> list[Block]:
        return [self._open[a] for a in sorted(self._open)]


def adaptive_gamma(state: RcaM, arm: int) -> int:
    return state.adaptive_gamma(arm)


def sb2_matrix(policy: RcaM, arm: int, num_states: int) -> np.ndarray:
    out = np.zeros((num_states, num_states), dtype=np.int64)
    for (x, y), c in policy.sb2_transitions[arm].items():
        out[x, y] = c
    return out
