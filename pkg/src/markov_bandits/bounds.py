"""Exploration constant and logarithmic regret bounds for UCB-M and RCA-M.

All functions take the arms in their original order and rank them by
stationary mean internally; arm arguments and per-arm outputs use the
original zero-based indices.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .markov import ConditionViolation, check_condition1
from .policies import rank_by_mean

BETA = math.pi**2 / 6
EXPLORATION_FACTOR = 112.0
GAP_TOL = 1e-12


class GapError(ValueError):
    """The M-th and (M+1)-th best mean rewards are not strictly separated."""


@dataclass(frozen=True)
class BoundConstants:
    M: int
    means: np.ndarray
    order: tuple[int, ...]
    optimal: tuple[int, ...]
    suboptimal: tuple[int, ...]
    beta: float
    pi_min: float
    eps_min: float
    S_max: int
    r_max: float
    pi_hat_max: float
    L_min: float
    gap_to_M: dict[int, float]      # mu^M - mu^i
    gap_to_best: dict[int, float]   # mu^1 - mu^i
    C: dict[tuple[int, int], float]  # (suboptimal i, optimal j)
    D: dict[int, float]
    E: dict[int, float]
    F: float
    omega_max: np.ndarray
    arm_pi_min: np.ndarray


def min_exploration_constant(specs) -> float:
    """``112 S_max^2 r_max^2 pi_hat_max^2 / eps_min`` over the arm set."""
    for k, s in enumerate(specs):
        rep = check_condition1(s)
        if not rep.passed:
            raise ConditionViolation(f"arm {k}: " + "; ".join(rep.messages))
    an = [s.analysis for s in specs]
    eps_min = min(a.eigen_gap for a in an)
    if eps_min <= 0:
        raise ConditionViolation("eps_min <= 0")
    S_max = max(s.num_states for s in specs)
    r_max = max(float(s.rewards.max()) for s in specs)
    pi_hat = max(a.pi_hat_max for a in an)
    return EXPLORATION_FACTOR * S_max**2 * r_max**2 * pi_hat**2 / eps_min


def bound_constants(specs, M: int) -> BoundConstants:
    K = len(specs)
    if not 1 <= M < K:
        raise ValueError(f"bounds need 1 <= M < K, got M={M}, K={K}")
    an = [s.analysis for s in specs]
    means = np.array([a.mean_reward for a in an])
    order = rank_by_mean(means)
    optimal, suboptimal = order[:M], order[M:]
    mu1, muM = means[order[0]], means[order[M - 1]]
    if muM - means[order[M]] <= GAP_TOL:
        raise GapError(
            f"mu^M = {muM:.6g} is not strictly above mu^(M+1) = {means[order[M]]:.6g}"
        )
    sizes = [s.num_states for s in specs]
    arm_pi_min = np.array([a.pi_min for a in an])
    omega_max = np.array([a.omega_max for a in an])
    pi_min = float(arm_pi_min.min())
    C = {(i, j): (sizes[i] + sizes[j]) * BETA / pi_min for i in suboptimal for j in optimal}
    D = {i: 1.0 / arm_pi_min[i] + omega_max[i] + 1.0 for i in suboptimal}
    opt_term = sum(means[j] * omega_max[j] for j in optimal)
    E = {i: means[i] * (1.0 + omega_max[i]) + opt_term for i in suboptimal}
    F = sum(means[j] for j in optimal) * (1.0 / pi_min + omega_max.max() + 1.0)
    return BoundConstants(
        M=M,
        means=means,
        order=tuple(order),
        optimal=tuple(optimal),
        suboptimal=tuple(suboptimal),
        beta=BETA,
        pi_min=pi_min,
        eps_min=min(a.eigen_gap for a in an),
        S_max=max(sizes),
        r_max=max(float(s.rewards.max()) for s in specs),
        pi_hat_max=max(a.pi_hat_max for a in an),
        L_min=min_exploration_constant(specs),
        gap_to_M={i: float(muM - means[i]) for i in suboptimal},
        gap_to_best={i: float(mu1 - means[i]) for i in suboptimal},
        C=C,
        D=D,
        E=E,
        F=float(F),
        omega_max=omega_max,
        arm_pi_min=arm_pi_min,
    )


@dataclass(frozen=True)
class LogBound:
    """A bound of the form ``constant + log_coefficient * ln(n)``."""

    log_coefficient: float
    constant: float
    n: float
    omits_state_constant: bool = False

    @property
    def value(self) -> float:
        return self.constant + self.log_coefficient * math.log(self.n)

    def __float__(self) -> float:
        return self.value


def _check_L(c: BoundConstants, L: float) -> None:
    if L < c.L_min:
        warnings.warn(
            f"L = {L:g} is below the sufficient exploration constant {c.L_min:.6g}; "
            "the bound is reported but not guaranteed",
            stacklevel=3,
        )


def theorem1_bound(specs, M: int, L: float, n: float) -> LogBound:
    """UCB-M regret bound for rested arms.

    The additive constant that depends on the state spaces, rewards and
    transition matrices is not available in closed form and is left out;
    ``omits_state_constant`` is always True.
    """
    c = bound_constants(specs, M)
    _check_L(c, L)
    slope = 4.0 * L * sum(c.gap_to_best[i] / c.gap_to_M[i] ** 2 for i in c.suboptimal)
    const = sum(
        c.gap_to_best[i] * (M + sum(c.C[i, j] for j in c.optimal)) for i in c.suboptimal
    )
    return LogBound(slope, const, n, omits_state_constant=True)


def theorem2_bound(specs, M: int, L: float, n: float) -> LogBound:
    """RCA-M regret bound for restless arms."""
    c = bound_constants(specs, M)
    _check_L(c, L)
    weight = {i: c.gap_to_best[i] * c.D[i] + c.E[i] for i in c.suboptimal}
    slope = 4.0 * L * sum(weight[i] / c.gap_to_M[i] ** 2 for i in c.suboptimal)
    const = sum(
        weight[i] * (1.0 + M * sum(c.C[i, j] for j in c.optimal)) for i in c.suboptimal
    ) + c.F
    return LogBound(slope, const, n)


def lemma_play_count_bound(specs, M: int, L: float, n: float, arm: int, mode: str = "rested") -> LogBound:
    """Bound on the expected number of plays of a suboptimal ``arm`` by slot ``n``.

    ``mode="rested"``: ``M + 4L ln n / gap^2 + sum_j C_ij``.
    ``mode="restless"``: ``D_i (4L ln n / gap^2 + 1 + M sum_j C_ij)``.
    """
    c = bound_constants(specs, M)
    if arm not in c.suboptimal:
        raise ValueError(f"arm {arm} is one of the M best arms")
    csum = sum(c.C[arm, j] for j in c.optimal)
    slope = 4.0 * L / c.gap_to_M[arm] ** 2
    if mode == "rested":
        return LogBound(slope, M + csum, n)
    if mode == "restless":
        d = c.D[arm]
        return LogBound(d * slope, d * (1.0 + M * csum), n)
    raise ValueError(f"unknown mode {mode!r}")
