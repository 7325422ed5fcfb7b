"""Per-round quantities of the expert-advice bandit: mixtures, expert losses, estimators.

Advice for one round is an ``(N, K)`` row-stochastic array whose row ``i`` is
the action distribution recommended by expert ``i``. Losses are length-``K``
vectors with entries in ``[0, 1]``. Experts and actions are 0-based.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from .exceptions import InputError, ProtocolViolation

ROW_SUM_TOL = 1e-12


class EstimateKind(str, Enum):
    """Which loss estimator produced a LossEstimate."""

    IMPORTANCE_WEIGHTED = "importance_weighted"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class LossEstimate:
    """Per-expert loss estimate for one round."""

    values: npt.NDArray[np.float64]
    kind: EstimateKind


def as_advice_matrix(rows, renormalize: bool = False) -> npt.NDArray[np.float64]:
    """Validate (and optionally renormalise) an advice matrix.

    Renormalisation is meant for instance construction only; the round loop
    works on already validated arrays.
    """
    matrix = np.array(rows, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] == 0:
        raise InputError(f"advice must be a non-empty (N, K) matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)) or np.any(matrix < 0.0):
        raise InputError("advice entries must be finite and non-negative")
    sums = matrix.sum(axis=1)
    if renormalize:
        if np.any(sums <= 0.0):
            raise InputError("advice rows must carry positive mass")
        matrix /= sums[:, None]
        sums = matrix.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL) or np.any(matrix > 1.0):
        raise InputError("advice rows must be probability vectors")
    return matrix


def as_loss_vector(values) -> npt.NDArray[np.float64]:
    vector = np.array(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise InputError(f"loss must be a non-empty vector, got shape {vector.shape}")
    if not np.all(np.isfinite(vector)) or np.any(vector < 0.0) or np.any(vector > 1.0):
        raise InputError("loss entries must lie in [0, 1]")
    return vector


def _check_experts(advice: npt.NDArray[np.float64], weights: npt.NDArray[np.float64]) -> None:
    if advice.ndim != 2 or weights.ndim != 1 or advice.shape[0] != weights.shape[0]:
        raise InputError(
            f"dimension mismatch: advice {advice.shape} vs expert weights {weights.shape}"
        )


def mixture(weights, advice) -> npt.NDArray[np.float64]:
    """Action distribution phi(a) = sum_i p(i) theta^i(a)."""
    p = np.asarray(weights, dtype=np.float64)
    matrix = np.asarray(advice, dtype=np.float64)
    _check_experts(matrix, p)
    return p @ matrix


def expert_losses(advice, loss) -> npt.NDArray[np.float64]:
    """Expected loss y(i) = <theta^i, loss> of every expert."""
    matrix = np.asarray(advice, dtype=np.float64)
    vector = np.asarray(loss, dtype=np.float64)
    if matrix.ndim != 2 or vector.ndim != 1 or matrix.shape[1] != vector.shape[0]:
        raise InputError(f"dimension mismatch: advice {matrix.shape} vs loss {vector.shape}")
    return matrix @ vector


def iw_estimate(advice, weights, played_action: int, observed_loss: float) -> LossEstimate:
    """Importance-weighted estimate theta^i(A) * loss(A) / phi(A).

    Only the column of the played action is read, so rows of experts that put
    no mass on it may be zero (restricted feedback) without changing the result.

    Raises:
        ProtocolViolation: phi(played_action) is zero.
    """
    p = np.asarray(weights, dtype=np.float64)
    matrix = np.asarray(advice, dtype=np.float64)
    _check_experts(matrix, p)
    if not 0 <= played_action < matrix.shape[1]:
        raise InputError(f"played action {played_action} outside [0, {matrix.shape[1]})")
    column = matrix[:, played_action]
    phi = float(p @ column)
    if phi <= 0.0:
        raise ProtocolViolation(
            f"action {played_action} has zero probability under the mixture; it cannot have been played"
        )
    return LossEstimate(values=column * (observed_loss / phi), kind=EstimateKind.IMPORTANCE_WEIGHTED)


def shift_estimate(estimate: LossEstimate, observed_loss: float) -> LossEstimate:
    """Shifted estimate y~(i) = y^(i) - loss(A); entries are at least -1."""
    if estimate.kind is not EstimateKind.IMPORTANCE_WEIGHTED:
        raise InputError(f"only importance-weighted estimates can be shifted, got {estimate.kind.value}")
    return LossEstimate(values=estimate.values - observed_loss, kind=EstimateKind.SHIFTED)
