import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from markov_bandits.markov import (
    ChainError,
    ChainSpec,
    ConditionViolation,
    NotIrreducibleError,
    adjoint,
    check_condition1,
    eigenvalue_gap,
    hitting_times,
    mean_reward,
    multiplicative_symmetrization,
    sample_index,
    sample_next,
    stationary_distribution,
)
from markov_bandits.presets import PRESET_NAMES, preset

from conftest import power_stationary

prob = st.floats(min_value=0.01, max_value=0.99)


def random_chain(seed, n):
    r = np.random.default_rng(seed)
    p = r.uniform(0.05, 1.0, size=(n, n))
    p /= p.sum(axis=1, keepdims=True)
    return ChainSpec(p, r.uniform(0.1, 1.0, size=n))


class TestStationary:
    def test_symmetric_two_state(self):
        np.testing.assert_allclose(stationary_distribution(ChainSpec.two_state(0.5, 0.5)), [0.5, 0.5], atol=1e-14)

    def test_s1_channel1_closed_form_and_power_iteration(self):
        spec = ChainSpec.two_state(0.01, 0.08)
        pi = stationary_distribution(spec)
        np.testing.assert_allclose(pi, [8 / 9, 1 / 9], atol=1e-12)
        np.testing.assert_allclose(pi, power_stationary(spec.transition), atol=1e-10)

    def test_doubly_stochastic_three_state(self):
        p = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        np.testing.assert_allclose(stationary_distribution(ChainSpec(p, [1, 1, 1])), [1 / 3] * 3, atol=1e-14)

    def test_reducible_names_pair(self):
        p = np.array([[1.0, 0.0], [0.5, 0.5]])
        with pytest.raises(NotIrreducibleError) as exc:
            stationary_distribution(ChainSpec(p, [1, 1]))
        assert exc.value.pair == (0, 1)
        assert "1" in str(exc.value) and "0" in str(exc.value)

    @given(st.integers(0, 10**6), st.integers(2, 6))
    def test_invariants_random_chain(self, seed, n):
        spec = random_chain(seed, n)
        pi = stationary_distribution(spec)
        assert abs(pi.sum() - 1) < 1e-12
        assert np.all(pi >= 0)
        np.testing.assert_allclose(pi @ spec.transition, pi, atol=1e-12)

    @given(prob, prob)
    def test_two_state_closed_form(self, a, b):
        pi = stationary_distribution(ChainSpec.two_state(a, b))
        assert pi[1] == pytest.approx(a / (a + b), abs=1e-12)


class TestMeanReward:
    def test_table_examples(self):
        assert mean_reward(ChainSpec.two_state(0.01, 0.08)) == pytest.approx(0.2, abs=1e-12)
        assert mean_reward(ChainSpec.two_state(0.1, 0.9)) == pytest.approx(0.19, abs=1e-12)

    @given(st.integers(0, 10**6), st.integers(1, 5), st.floats(0.1, 5.0))
    def test_constant_reward(self, seed, n, c):
        spec = random_chain(seed, n)
        spec = ChainSpec(spec.transition, [c] * n)
        assert mean_reward(spec) == pytest.approx(c, rel=1e-12)


class TestSymmetrization:
    def test_uniform_two_state(self):
        np.testing.assert_allclose(multiplicative_symmetrization(ChainSpec.two_state(0.5, 0.5)), 0.5, atol=1e-14)

    def test_s1_channel1_is_p_squared(self):
        spec = ChainSpec.two_state(0.01, 0.08)
        p = spec.transition
        expected = np.array([
            [p[0, 0] * p[0, 0] + p[0, 1] * p[1, 0], p[0, 0] * p[0, 1] + p[0, 1] * p[1, 1]],
            [p[1, 0] * p[0, 0] + p[1, 1] * p[1, 0], p[1, 0] * p[0, 1] + p[1, 1] * p[1, 1]],
        ])
        np.testing.assert_allclose(multiplicative_symmetrization(spec), expected, atol=1e-14)

    @given(prob, prob)
    def test_reversible_gives_square(self, a, b):
        spec = ChainSpec.two_state(a, b)
        np.testing.assert_allclose(multiplicative_symmetrization(spec), spec.transition @ spec.transition, atol=1e-12)

    @given(st.integers(0, 10**6), st.integers(2, 5))
    def test_adjoint_properties(self, seed, n):
        spec = random_chain(seed, n)
        pi = stationary_distribution(spec)
        adj = adjoint(spec.transition, pi)
        np.testing.assert_allclose(adj.sum(axis=1), 1.0, atol=1e-12)
        # detailed balance of the symmetrization: pi_x s_xy = pi_y s_yx
        s = multiplicative_symmetrization(spec)
        flow = pi[:, None] * s
        np.testing.assert_allclose(flow, flow.T, atol=1e-12)


class TestEigenGap:
    def test_uniform(self):
        spec = ChainSpec.two_state(0.5, 0.5)
        assert spec.analysis.eigen_gap == pytest.approx(1.0, abs=1e-12)

    def test_s1_channel1(self):
        assert ChainSpec.two_state(0.01, 0.08).analysis.eigen_gap == pytest.approx(1 - 0.91**2, abs=1e-12)

    def test_s2_channel5(self):
        assert ChainSpec.two_state(0.4, 0.6).analysis.eigen_gap == pytest.approx(1.0, abs=1e-12)

    @given(prob, prob)
    def test_two_state_closed_form(self, a, b):
        assert ChainSpec.two_state(a, b).analysis.eigen_gap == pytest.approx(1 - (1 - a - b) ** 2, abs=1e-12)

    def test_reducible_symmetrization_raises(self):
        # P'P for the deterministic 2-cycle is the identity
        with pytest.raises(ConditionViolation):
            eigenvalue_gap(np.eye(2), np.array([0.5, 0.5]))

    @given(st.integers(0, 10**6), st.integers(2, 5))
    def test_gap_in_unit_interval(self, seed, n):
        spec = random_chain(seed, n)
        eps = spec.analysis.eigen_gap
        assert 0 < eps <= 1 + 1e-12
        eig = np.sort(np.linalg.eigvals(spec.analysis.symmetrization).real)[::-1]
        assert eps == pytest.approx(1 - eig[1], abs=1e-9)


class TestHittingTimes:
    def test_diagonal_zero(self):
        h = hitting_times(random_chain(3, 4))
        np.testing.assert_array_equal(np.diag(h), 0.0)

    def test_geometric(self):
        assert hitting_times(ChainSpec.two_state(0.5, 0.3))[0, 1] == pytest.approx(2.0)
        assert hitting_times(ChainSpec.two_state(0.01, 0.08))[0, 1] == pytest.approx(100.0)

    @given(prob, prob)
    def test_two_state_omega_max(self, a, b):
        spec = ChainSpec.two_state(a, b)
        assert spec.analysis.omega_max == pytest.approx(max(1 / a, 1 / b), rel=1e-10)

    def test_first_step_equation(self):
        spec = random_chain(7, 4)
        h, p = hitting_times(spec), spec.transition
        for y in range(4):
            for x in range(4):
                if x != y:
                    rhs = 1 + sum(p[x, z] * h[z, y] for z in range(4) if z != y)
                    assert h[x, y] == pytest.approx(rhs, rel=1e-10)

    def test_mean_return_time_is_inverse_stationary(self):
        spec = random_chain(11, 3)
        h, p, pi = hitting_times(spec), spec.transition, spec.analysis.stationary
        for y in range(3):
            ret = 1 + sum(p[y, z] * h[z, y] for z in range(3) if z != y)
            assert ret == pytest.approx(1 / pi[y], rel=1e-10)


class TestSampling:
    def test_degenerate_row(self, rng):
        spec = ChainSpec(np.array([[1.0, 0.0], [0.5, 0.5]]), [1, 1])
        assert all(sample_next(spec, 0, rng) == 0 for _ in range(1000))

    def test_good_row_frequencies(self):
        spec = ChainSpec.two_state(0.01, 0.08)
        rng = np.random.default_rng(2024)
        u = rng.random(10**6)
        cum = spec.cumulative[1]
        nxt = (u >= cum[0]).astype(int)
        n = len(u)
        count_bad = int((nxt == 0).sum())
        sigma = math.sqrt(n * 0.08 * 0.92)
        assert abs(count_bad - n * 0.08) < 3 * sigma
        # the scalar path agrees with the vectorized comparison
        assert [sample_index(cum, x) for x in u[:1000]] == list(nxt[:1000])

    def test_same_seed_same_draw(self):
        spec = random_chain(5, 4)
        a = [sample_next(spec, 1, np.random.default_rng(9)) for _ in range(3)]
        assert len(set(a)) == 1

    def test_u_near_one_is_clamped(self):
        assert sample_index([0.3, 0.7, 1.0 - 1e-17], 1.0 - 1e-16) == 2


class TestValidation:
    def test_row_sum(self):
        with pytest.raises(ChainError, match="row 1"):
            ChainSpec(np.array([[0.5, 0.5], [0.5, 0.4]]), [1, 1])

    def test_negative_entry(self):
        with pytest.raises(ChainError):
            ChainSpec(np.array([[1.2, -0.2], [0.5, 0.5]]), [1, 1])

    def test_shape_mismatch(self):
        with pytest.raises(ChainError):
            ChainSpec(np.eye(2), [1, 1, 1])

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_presets_pass_condition(self, name):
        assert all(check_condition1(s).passed for s in preset(name))

    def test_periodic(self):
        rep = check_condition1(ChainSpec.two_state(1.0, 1.0))
        assert rep.irreducible and not rep.aperiodic and not rep.passed
        assert not rep.symmetrization_irreducible

    def test_zero_reward(self):
        rep = check_condition1(ChainSpec.two_state(0.3, 0.3, rewards=(0.0, 1.0)))
        assert not rep.rewards_positive and not rep.passed
        assert rep.irreducible and rep.aperiodic

    def test_reducible(self):
        rep = check_condition1(ChainSpec(np.array([[1.0, 0.0], [0.5, 0.5]]), [1, 1]))
        assert not rep.irreducible
        assert any("unreachable" in m for m in rep.messages)

    def test_symmetrization_reducible_but_aperiodic(self):
        # 0 -> 1 -> 2 -> {0, 1}: irreducible and aperiodic, yet P'P splits {0, 1} from {2}
        p = np.array([[0, 1, 0], [0, 0, 1], [0.5, 0.5, 0]], dtype=float)
        spec = ChainSpec(p, [1, 1, 1])
        rep = check_condition1(spec)
        assert rep.irreducible and rep.aperiodic
        assert not rep.symmetrization_irreducible and not rep.passed
        with pytest.raises(ConditionViolation):
            spec.analysis
