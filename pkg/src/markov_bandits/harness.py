"""Seeded Monte-Carlo engine: arms + policy -> weak-regret traces.

Random streams
--------------
Every (base seed, run, arm) triple owns an independent PCG64 stream built
from ``SeedSequence(seed, spawn_key=(run, 0, arm))``; the RCA-M block
tie order of a run uses ``spawn_key=(run, 1)``.  An arm stream is consumed
as one uniform for the initial state, then one per transition: per slot
for restless arms, per play for rested arms.  Runs are therefore
reproducible, independent of execution order, and restless trajectories
do not depend on the policy.
"""

from __future__ import annotations

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .arms import Mode, initial_distribution
from .markov import ChainError, ChainSpec, as_stochastic_matrix, cumulative_rows, sample_index
from .policies import rank_by_mean

POLICIES = ("ucbm", "rcam", "rcam-adaptive")
NATURAL_MODE = {"ucbm": Mode.RESTED, "rcam": Mode.RESTLESS, "rcam-adaptive": Mode.RESTLESS}
ARM_CHANNEL, TIE_CHANNEL = 0, 1


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def default_checkpoints(horizon: int, count: int = 50, start: int = 100) -> tuple[int, ...]:
    """``count`` log-spaced slots from ``start`` (or 1 for short horizons) to ``horizon``."""
    lo = start if horizon > start else 1
    pts = np.unique(np.round(np.geomspace(lo, horizon, count)).astype(np.int64))
    return tuple(int(p) for p in pts)


@dataclass
class ExperimentConfig:
    arms: Sequence[ChainSpec]
    policy: str = "rcam"
    M: int = 2
    L: float = 1.0
    horizon: int = 10_000
    runs: int = 1
    seed: int = 0
    checkpoints: Sequence[int] | None = None
    mode: str | None = None
    initial: object = "stationary"
    passive: Sequence[object] | None = None
    allow_mismatch: bool = False

    def __post_init__(self):
        self.arms = list(self.arms)
        K = len(self.arms)
        if K == 0:
            raise ConfigError("arms", "at least one arm is required")
        if self.policy not in POLICIES:
            raise ConfigError("policy", f"must be one of {', '.join(POLICIES)}, got {self.policy!r}")
        if not isinstance(self.M, (int, np.integer)) or not 1 <= self.M <= K:
            raise ConfigError("M", f"need 1 <= M <= K = {K}, got {self.M!r}")
        if not np.isfinite(self.L) or self.L < 0:
            raise ConfigError("L", f"must be a finite non-negative number, got {self.L!r}")
        if self.horizon < 1:
            raise ConfigError("horizon", "must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs", "must be >= 1")
        mode = Mode(self.mode) if self.mode is not None else NATURAL_MODE[self.policy]
        if mode is not NATURAL_MODE[self.policy] and not self.allow_mismatch:
            raise ConfigError(
                "mode",
                f"policy {self.policy} is meant for {NATURAL_MODE[self.policy].value} arms; "
                f"set allow_mismatch to run it on {mode.value} arms",
            )
        self.mode = mode.value
        if self.checkpoints is None:
            self.checkpoints = default_checkpoints(self.horizon)
        cps = tuple(int(c) for c in self.checkpoints)
        if not cps or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1 or cps[-1] > self.horizon:
            raise ConfigError("checkpoints", "must be strictly increasing slot numbers in [1, horizon]")
        if cps[-1] != self.horizon:
            cps = cps + (self.horizon,)
        self.checkpoints = cps
        passive = list(self.passive) if self.passive is not None else [None] * K
        if len(passive) != K:
            raise ConfigError("passive", f"expected {K} entries, got {len(passive)}")
        for k, q in enumerate(passive):
            if q is not None:
                try:
                    passive[k] = as_stochastic_matrix(q, f"arms[{k}].passive")
                except ChainError as exc:
                    raise ConfigError(f"arms[{k}].passive", str(exc)) from exc
                if passive[k].shape != self.arms[k].transition.shape:
                    raise ConfigError(f"arms[{k}].passive", "shape differs from the transition matrix")
        self.passive = passive

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def restless(self) -> bool:
        return self.mode == Mode.RESTLESS.value


def arm_stream(seed: int, run: int, arm: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run, ARM_CHANNEL, arm))))


def tie_stream(seed: int, run: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run, TIE_CHANNEL))))


def optimal_rate(specs, M: int) -> float:
    """Sum of the ``M`` largest stationary means: expected reward per slot of the best static choice."""
    means = [s.analysis.mean_reward for s in specs]
    return float(sum(means[i] for i in rank_by_mean(means)[:M]))


def weak_regret(reward, specs, M: int, n):
    """``n * (sum of the M largest means) - collected reward``; may be negative for one run."""
    return np.asarray(n, dtype=float) * optimal_rate(specs, M) - np.asarray(reward, dtype=float)


@dataclass
class RegretTrace:
    """Single-run trace, one row per checkpoint.

    ``completed`` is the per-arm play count through the arm's last completed
    block (RCA-M); for UCB-M it equals ``plays``.
    """

    checkpoints: np.ndarray
    reward: np.ndarray
    plays: np.ndarray
    completed: np.ndarray
    blocks: np.ndarray
    last_block_end: np.ndarray
    regret: np.ndarray
    sb2_transitions: np.ndarray
    M: int

    @property
    def normalized_regret(self) -> np.ndarray:
        return self.regret / self.M


@dataclass
class _Prepared:
    cum_active: np.ndarray
    cum_passive: np.ndarray
    rewards: np.ndarray
    nstates: np.ndarray
    init_cum: list
    checkpoints: np.ndarray


def _prepare(config: ExperimentConfig) -> _Prepared:
    K = config.K
    S = max(s.num_states for s in config.arms)
    act = np.ones((K, S, S))
    pas = np.ones((K, S, S))
    rew = np.zeros((K, S))
    init = []
    for k, spec in enumerate(config.arms):
        n = spec.num_states
        act[k, :n, :n] = spec.cumulative
        q = config.passive[k]
        pas[k, :n, :n] = spec.cumulative if q is None else cumulative_rows(q)
        rew[k, :n] = spec.rewards
        try:
            dist = initial_distribution(spec, config.initial)
        except ChainError as exc:
            raise ConfigError("initial", str(exc)) from exc
        init.append(cumulative_rows(dist[None, :])[0].tolist())
    return _Prepared(act, pas, rew, np.array([s.num_states for s in config.arms], dtype=np.int64),
                     init, np.array(config.checkpoints, dtype=np.int64))


def _uniforms(config: ExperimentConfig, run: int, prep: _Prepared):
    n = config.horizon
    u = np.empty((config.K, n + 1))
    init = np.empty(config.K, dtype=np.int64)
    for k in range(config.K):
        u[k] = arm_stream(config.seed, run, k).random(n + 1)
        init[k] = sample_index(prep.init_cum[k], u[k, 0])
    return u, init


def _trace(config: ExperimentConfig, out: dict) -> RegretTrace:
    cps = np.array(config.checkpoints, dtype=np.int64)
    return RegretTrace(
        checkpoints=cps,
        reward=out["reward"],
        plays=out["plays"],
        completed=out["completed"],
        blocks=out["blocks"],
        last_block_end=out["last_block_end"],
        regret=weak_regret(out["reward"], config.arms, config.M, cps),
        sb2_transitions=out["sb2_transitions"],
        M=config.M,
    )


def run_once(config: ExperimentConfig, run: int = 0, backend: str | None = None, _prep=None) -> RegretTrace:
    """Simulate ``config.horizon`` slots of run number ``run``."""
    prep = _prep if _prep is not None else _prepare(config)
    u, init = _uniforms(config, run, prep)
    sim = kernels.get_simulate(backend)
    out = sim(kernels.POLICY_CODES[config.policy], prep.cum_active, prep.cum_passive, prep.rewards,
              prep.nstates, init, u, int(config.M), float(config.L), config.restless, prep.checkpoints)
    return _trace(config, out)


@dataclass
class RunRecord:
    """Full per-slot log of one run (pure-Python kernel only)."""

    trace: RegretTrace
    policy: object
    decisions: list[tuple[int, ...]] = field(default_factory=list)
    observations: list[dict[int, tuple[int, float]]] = field(default_factory=list)
    states: list[tuple[int, ...]] = field(default_factory=list)
    initial_states: tuple[int, ...] = ()


def run_recorded(config: ExperimentConfig, run: int = 0) -> RunRecord:
    """Like :func:`run_once` but logs decisions, observations, every arm state and RCA-M blocks."""
    prep = _prepare(config)
    u, init = _uniforms(config, run, prep)
    decisions, observations, states = [], [], []

    def recorder(slot, obs, state):
        decisions.append(tuple(sorted(obs)))
        observations.append(dict(obs))
        states.append(tuple(state))

    out = kernels.python_simulate(
        kernels.POLICY_CODES[config.policy], prep.cum_active, prep.cum_passive, prep.rewards,
        prep.nstates, init, u, int(config.M), float(config.L), config.restless, prep.checkpoints,
        recorder=recorder, tie_rng=tie_stream(config.seed, run),
    )
    return RunRecord(_trace(config, out), out["policy"], decisions, observations, states, tuple(int(s) for s in init))


@dataclass
class MonteCarloResult:
    checkpoints: np.ndarray
    runs: int
    M: int
    regret_mean: np.ndarray
    regret_std: np.ndarray
    reward_mean: np.ndarray
    T_mean: np.ndarray
    T_std: np.ndarray
    plays_mean: np.ndarray
    blocks_mean: np.ndarray
    traces: list[RegretTrace] | None = None

    @property
    def normalized_regret_mean(self) -> np.ndarray:
        return self.regret_mean / self.M

    @property
    def normalized_regret_std(self) -> np.ndarray:
        return self.regret_std / self.M


def worker_count() -> int:
    env = os.environ.get("BANDIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def aggregate(config: ExperimentConfig, traces: Sequence[RegretTrace], keep_traces: bool = False) -> MonteCarloResult:
    def stack(name):
        return np.stack([getattr(t, name) for t in traces]).astype(float)

    ddof = 1 if len(traces) > 1 else 0
    regret, T = stack("regret"), stack("completed")
    return MonteCarloResult(
        checkpoints=np.array(config.checkpoints, dtype=np.int64),
        runs=len(traces),
        M=config.M,
        regret_mean=regret.mean(axis=0),
        regret_std=regret.std(axis=0, ddof=ddof),
        reward_mean=stack("reward").mean(axis=0),
        T_mean=T.mean(axis=0),
        T_std=T.std(axis=0, ddof=ddof),
        plays_mean=stack("plays").mean(axis=0),
        blocks_mean=stack("blocks").mean(axis=0),
        traces=list(traces) if keep_traces else None,
    )


def monte_carlo(config: ExperimentConfig, workers: int | None = None, backend: str | None = None,
                keep_traces: bool = False) -> MonteCarloResult:
    """``config.runs`` independent runs reduced in run-index order."""
    prep = _prepare(config)
    workers = workers or worker_count()

    def one(run):
        return run_once(config, run, backend, _prep=prep)

    if workers == 1 or config.runs == 1:
        traces = [one(r) for r in range(config.runs)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(one, range(config.runs)))
    return aggregate(config, traces, keep_traces)


def _fmt(x) -> str:
    return "%.12g" % x


def to_csv(result: MonteCarloResult) -> str:
    K = result.T_mean.shape[1]
    buf = io.StringIO()
    header = ["n", "regret_mean", "regret_std", "normalized_regret_mean"] + [f"T_mean_{k + 1}" for k in range(K)]
    buf.write(",".join(header) + "\n")
    for c, n in enumerate(result.checkpoints):
        row = [str(int(n)), _fmt(result.regret_mean[c]), _fmt(result.regret_std[c]),
               _fmt(result.normalized_regret_mean[c])]
        row += [_fmt(v) for v in result.T_mean[c]]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
