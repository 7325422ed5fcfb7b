"""
Tests for src/expert_advice_lab/capacity.py

Coverage
--------
- q_functional: identical experts, distinct Dirac experts, the two-expert
  closed form, the 0/0 convention, range over random matrices, invariance
  under relabelling actions or experts
- capacity_estimate: known suprema, never below Q at the played point or at
  random points of the simplex
- capacity_bruteforce: grid oracle values and misuse
- CapacityTracker: averages with and without diagnostics
"""

import numpy as np
import pytest

from src.expert_advice_lab.capacity import (
    CapacityTracker,
    capacity_bruteforce,
    capacity_estimate,
    q_functional,
)
from src.expert_advice_lab.exceptions import InputError

PAIR = np.array([[1.0, 0.0], [0.5, 0.5]])
THREE_DELTAS = np.eye(3)


def _pair_closed_form(t: float) -> float:
    return (3 * t + 1) / (2 * t + 2) - 0.5


# ---------------------------------------------------------------------------
# q_functional
# ---------------------------------------------------------------------------


class TestQFunctional:
    def test_identical_experts_vanish(self) -> None:
        advice = np.tile([0.1, 0.7, 0.2], (5, 1))
        for tau in (np.full(5, 0.2), np.array([0.5, 0.5, 0.0, 0.0, 0.0])):
            assert q_functional(advice, tau) == pytest.approx(0.0, abs=1e-12)

    def test_distinct_deltas_at_uniform(self) -> None:
        assert q_functional(THREE_DELTAS, np.full(3, 1 / 3)) == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_pair_closed_form(self, t: float) -> None:
        assert q_functional(PAIR, [t, 1 - t]) == pytest.approx(_pair_closed_form(t), abs=1e-12)

    def test_pair_at_uniform_is_one_third(self) -> None:
        assert q_functional(PAIR, [0.5, 0.5]) == pytest.approx(1 / 3, abs=1e-12)

    def test_unsupported_action_contributes_zero(self) -> None:
        # tau puts all weight on expert 0, which never plays action 1
        assert q_functional(PAIR, [1.0, 0.0]) == 0.0

    def test_range_over_random_matrices(self) -> None:
        rng = np.random.default_rng(3)
        for _ in range(1000):
            n, k = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            concentration = float(rng.choice([0.1, 1.0, 10.0]))
            advice = rng.dirichlet(np.full(k, concentration), size=n)
            tau = rng.dirichlet(np.ones(n))
            value = q_functional(advice, tau)
            assert 0.0 <= value <= min(k, n) - 1 + 1e-9

    def test_invariant_under_relabelling(self) -> None:
        rng = np.random.default_rng(8)
        for _ in range(200):
            n, k = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            advice = rng.dirichlet(np.full(k, 0.5), size=n)
            tau = rng.dirichlet(np.ones(n))
            value = q_functional(advice, tau)
            actions = rng.permutation(k)
            assert q_functional(advice[:, actions], tau) == pytest.approx(value, abs=1e-12)
            experts = rng.permutation(n)
            assert q_functional(advice[experts], tau[experts]) == pytest.approx(value, abs=1e-12)

    def test_dimension_mismatch_raises(self) -> None:
        with pytest.raises(InputError):
            q_functional(PAIR, [1 / 3] * 3)


# ---------------------------------------------------------------------------
# capacity_estimate
# ---------------------------------------------------------------------------


class TestCapacityEstimate:
    def test_identical_experts(self) -> None:
        report = capacity_estimate(np.tile([0.3, 0.7], (4, 1)))
        assert report.capacity_estimate == pytest.approx(0.0, abs=1e-12)

    def test_three_distinct_deltas(self) -> None:
        assert capacity_estimate(THREE_DELTAS).capacity_estimate == pytest.approx(2.0, abs=5e-3)

    def test_pair_supremum_is_approached(self) -> None:
        report = capacity_estimate(PAIR)
        assert report.capacity_estimate == pytest.approx(0.5, abs=5e-3)
        assert report.capacity_estimate <= 0.5 + 1e-9

    def test_duplicated_deltas(self) -> None:
        advice = np.vstack([np.eye(3), np.eye(3)])
        assert capacity_estimate(advice).capacity_estimate == pytest.approx(2.0, abs=5e-3)

    def test_not_below_played_point(self) -> None:
        rng = np.random.default_rng(5)
        for _ in range(50):
            advice = rng.dirichlet(np.ones(4), size=6)
            weights = rng.dirichlet(np.ones(6))
            report = capacity_estimate(advice, max_iters=100, weights=weights)
            assert report.q_at_played == pytest.approx(q_functional(advice, weights))
            assert report.capacity_estimate >= report.q_at_played
            assert report.capacity_estimate <= min(advice.shape) - 1 + 1e-9

    def test_dominates_q_at_random_points(self) -> None:
        rng = np.random.default_rng(9)
        for _ in range(10):
            advice = rng.dirichlet(np.ones(4), size=5)
            estimate = capacity_estimate(advice).capacity_estimate
            taus = rng.dirichlet(np.full(5, float(rng.choice([0.2, 1.0, 5.0]))), size=100)
            for tau in taus:
                assert estimate >= q_functional(advice, tau) - 1e-6

    def test_respects_iteration_cap(self) -> None:
        report = capacity_estimate(np.random.default_rng(0).dirichlet(np.ones(5), size=5), max_iters=1)
        # one iteration per start: uniform plus one vertex start per expert
        assert report.iterations <= 6

    def test_invalid_arguments(self) -> None:
        with pytest.raises(InputError):
            capacity_estimate(PAIR, max_iters=0)
        with pytest.raises(InputError):
            capacity_estimate(PAIR, tol=0.0)


# ---------------------------------------------------------------------------
# capacity_bruteforce
# ---------------------------------------------------------------------------


class TestCapacityBruteforce:
    def test_identical_experts(self) -> None:
        assert capacity_bruteforce(np.tile([0.5, 0.5], (3, 1)), 0.05) == pytest.approx(0.0, abs=1e-12)

    def test_pair(self) -> None:
        assert capacity_bruteforce(PAIR, 1e-4) == pytest.approx(0.49995, abs=1e-4)

    def test_three_deltas(self) -> None:
        assert capacity_bruteforce(THREE_DELTAS, 1e-2) == pytest.approx(2.0, abs=2e-2)

    def test_agrees_with_ascent_for_small_n(self) -> None:
        rng = np.random.default_rng(17)
        for _ in range(5):
            advice = rng.dirichlet(np.ones(3), size=3)
            grid = capacity_bruteforce(advice, 0.01)
            ascent = capacity_estimate(advice).capacity_estimate
            assert ascent >= grid - 1e-3

    def test_refuses_more_than_four_experts(self) -> None:
        with pytest.raises(InputError):
            capacity_bruteforce(np.eye(5), 0.1)


# ---------------------------------------------------------------------------
# CapacityTracker
# ---------------------------------------------------------------------------


def test_tracker_without_diagnostics_reports_only_q() -> None:
    tracker = CapacityTracker()
    assert tracker.observe(THREE_DELTAS, np.full(3, 1 / 3)) == pytest.approx(2.0)
    assert tracker.observe(PAIR[[0, 0]], [0.5, 0.5]) == pytest.approx(0.0)
    assert tracker.mean_q == pytest.approx(1.0)
    assert tracker.mean_capacity is None


def test_tracker_with_diagnostics_bounds_q_average() -> None:
    tracker = CapacityTracker(diagnostics=True)
    rng = np.random.default_rng(23)
    for _ in range(20):
        tracker.observe(rng.dirichlet(np.ones(3), size=4), rng.dirichlet(np.ones(4)))
    assert tracker.mean_q <= tracker.mean_capacity + 1e-6
