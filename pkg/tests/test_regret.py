"""
Tests for src/expert_advice_lab/regret.py

Coverage
--------
- compute_regret: hand-computed value, incomplete runs
- regret is centred at zero when no expert can be beaten
- best_expert tie-breaking, seed_statistics
"""

import math

import numpy as np
import pytest

from src.expert_advice_lab.environments import Instance, SeedStreams, generate_random_instance
from src.expert_advice_lab.exceptions import InputError
from src.expert_advice_lab.policies import QFTRLPolicy, tuning_theorem1
from src.expert_advice_lab.regret import best_expert, compute_regret, seed_statistics
from src.expert_advice_lab.services.protocols import RoundRecord, run_standard_round


def _record(t: int, loss: float) -> RoundRecord:
    return RoundRecord(
        seed=0, t=t, expert=0, action=0, loss=loss, q_value=0.0,
        epoch_exponent=None, restarted=False, p_max=1.0,
    )


@pytest.fixture
def two_round_instance() -> Instance:
    advice = np.array([[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.5, 0.5]]])
    losses = np.array([[0.2, 0.6], [1.0, 0.0]])
    return Instance(advice=advice, losses=losses)


def test_hand_computed_regret(two_round_instance) -> None:
    # expert totals: 0.2 + 1.0 = 1.2 and 0.6 + 0.5 = 1.1
    records = [_record(1, 0.6), _record(2, 1.0)]
    assert compute_regret(records, two_round_instance) == pytest.approx(1.6 - 1.1)


def test_incomplete_run_is_rejected(two_round_instance) -> None:
    with pytest.raises(InputError):
        compute_regret([_record(1, 0.0)], two_round_instance)
    with pytest.raises(InputError):
        compute_regret([_record(2, 0.0), _record(1, 0.0)], two_round_instance)


@pytest.mark.parametrize("n_experts, advice_model", [(4, "identical"), (1, "iid_dirichlet")])
def test_regret_is_centred_when_no_expert_can_be_beaten(n_experts: int, advice_model: str) -> None:
    instance = generate_random_instance(n_experts, 3, 200, advice_model=advice_model, seed=21)
    regrets = []
    for seed in range(30):
        policy = QFTRLPolicy(n_experts, tuning_theorem1(n_experts, 3, 200))
        streams = SeedStreams.from_seed(seed)
        records = [run_standard_round(instance, t, policy, streams) for t in range(1, 201)]
        regrets.append(compute_regret(records, instance))
    stats = seed_statistics(regrets)
    assert abs(stats.mean) <= 4 * stats.standard_error


def test_best_expert_ties_go_to_lowest_index() -> None:
    assert best_expert(np.array([[0.5, 0.2, 0.2], [0.3, 0.4, 0.4]])) == (1, pytest.approx(0.6))


def test_seed_statistics() -> None:
    stats = seed_statistics([1.0, 2.0, 3.0])
    assert stats.mean == 2.0
    assert stats.std == pytest.approx(1.0)
    assert stats.standard_error == pytest.approx(1 / math.sqrt(3))
    assert seed_statistics([4.0]).std == 0.0
    with pytest.raises(InputError):
        seed_statistics([])
