"""Hindsight regret of a run and seed-level statistics."""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from .environments import Instance
from .exceptions import InputError

if TYPE_CHECKING:
    from .services.protocols import RoundRecord


@dataclass(frozen=True)
class SeedStatistics:
    mean: float
    std: float
    standard_error: float
    count: int


def best_expert(expert_losses: npt.NDArray[np.float64]) -> Tuple[int, float]:
    """Index and total of the hindsight-best expert; ties go to the lowest index.

    Totals use ``math.fsum`` so the result does not depend on summation order.
    """
    totals = [math.fsum(expert_losses[:, i]) for i in range(expert_losses.shape[1])]
    index = min(range(len(totals)), key=lambda i: (totals[i], i))
    return index, totals[index]


def compute_regret(records: Sequence["RoundRecord"], instance: Instance) -> float:
    """Learner's realised loss minus the best expert's cumulative expected loss.

    Raises:
        InputError: the records do not cover rounds 1..T exactly once, in order.
    """
    rounds = [record.t for record in records]
    if rounds != list(range(1, instance.horizon + 1)):
        raise InputError(
            f"incomplete run: {len(records)} records for horizon {instance.horizon}"
        )
    learner = math.fsum(record.loss for record in records)
    _, best = best_expert(instance.expert_loss_matrix())
    return learner - best


def seed_statistics(values: Sequence[float]) -> SeedStatistics:
    """Mean, sample standard deviation and standard error over seeds."""
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        raise InputError("no values to summarise")
    std = float(data.std(ddof=1)) if data.size > 1 else 0.0
    return SeedStatistics(
        mean=float(data.mean()),
        std=std,
        standard_error=std / math.sqrt(data.size),
        count=int(data.size),
    )
