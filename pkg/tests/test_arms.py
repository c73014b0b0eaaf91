import math

import numpy as np
import pytest

from markov_bandits.arms import ArmProcess, Mode, initial_distribution
from markov_bandits.markov import ChainError, ChainSpec

CH1 = ChainSpec.two_state(0.01, 0.08)


def test_point_mass_initial(rng):
    arm = ArmProcess(ChainSpec.two_state(0.3, 0.4), rng=rng, initial=0)
    assert all(arm.reset() == 0 for _ in range(200))


def test_stationary_initial_frequency():
    spec = ChainSpec.two_state(0.9, 0.1)
    arm = ArmProcess(spec, rng=np.random.default_rng(1))
    n = 10**5
    good = sum(arm.reset() for _ in range(n))
    assert abs(good - 0.9 * n) < 3 * math.sqrt(n * 0.9 * 0.1)


def test_initial_distribution_choices():
    np.testing.assert_allclose(initial_distribution(CH1, "uniform"), [0.5, 0.5])
    np.testing.assert_allclose(initial_distribution(CH1, [0.25, 0.75]), [0.25, 0.75])
    with pytest.raises(ChainError):
        initial_distribution(CH1, [0.5, 0.6])
    with pytest.raises(ChainError):
        initial_distribution(CH1, 5)
    with pytest.raises(ChainError):
        initial_distribution(CH1, "warm")


def test_rested_arm_frozen_when_idle(rng):
    arm = ArmProcess(ChainSpec.two_state(0.5, 0.5), mode="rested", rng=rng)
    s = arm.reset()
    for _ in range(10**5):
        assert arm.advance(False) is None
    assert arm.state == s


def test_restless_identity_passive_is_frozen(rng):
    arm = ArmProcess(ChainSpec.two_state(0.5, 0.5), mode=Mode.RESTLESS, rng=rng, passive=np.eye(2))
    s = arm.reset()
    for _ in range(10**4):
        arm.advance(False)
    assert arm.state == s


def test_restless_idle_moves(rng):
    arm = ArmProcess(ChainSpec.two_state(0.5, 0.5), mode="restless", rng=rng)
    arm.reset()
    seen = set()
    for _ in range(100):
        arm.advance(False)
        seen.add(arm.state)
    assert seen == {0, 1}


def test_one_draw_per_call():
    r1 = np.random.default_rng(3)
    arm = ArmProcess(ChainSpec.two_state(0.3, 0.2), rng=r1)
    arm.reset()
    for k in range(50):
        arm.advance(k % 2 == 0)
    r2 = np.random.default_rng(3)
    r2.random(51)
    assert r1.random() == r2.random()


def test_advance_requires_reset(rng):
    with pytest.raises(RuntimeError):
        ArmProcess(CH1, rng=rng).advance(True)


def test_passive_shape_checked(rng):
    with pytest.raises(ChainError):
        ArmProcess(CH1, rng=rng, passive=np.eye(3))


def test_ergodic_mean_s1_channel1():
    """Continuously played: mean reward within 3 batch-means sigma of 0.20, and within 0.01."""
    arm = ArmProcess(CH1, rng=np.random.default_rng(77))
    arm.reset()
    n = 10**6
    rewards = np.fromiter((arm.advance(True)[1] for _ in range(n)), float, n)
    batches = rewards.reshape(100, -1).mean(axis=1)
    mean = rewards.mean()
    se = batches.std(ddof=1) / math.sqrt(len(batches))
    assert abs(mean - 0.2) < 3 * se
    assert abs(mean - 0.2) < 0.01
