"""FTRL steps over the probability simplex with Tsallis and Shannon regularizers.

The Tsallis step minimises

    eta * <L, p> + psi_q(p),   psi_q(p) = (1 - sum_i p_i^q) / (1 - q),

over the simplex. Stationarity gives, for a scalar multiplier lam,

    p_i(lam) = [(1 - q) * (eta * L_i + lam) / q] ** (-1 / (1 - q)),

and sum_i p_i(lam) is strictly decreasing on the admissible range, so the
multiplier is found with a bracketed scalar root finder.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field
from scipy.optimize import brentq
from scipy.special import softmax

from .exceptions import InputError, NumericalError

logger = logging.getLogger(__name__)

SimplexPoint = npt.NDArray[np.float64]

SIMPLEX_TOL = 1e-12
_DUAL_XTOL = 1e-14
_MAX_BRACKET_EXPANSIONS = 60


class TsallisParams(BaseModel):
    """Exponent and learning rate of a q-Tsallis FTRL step."""

    model_config = {"frozen": True}

    q: float = Field(gt=0.0, lt=1.0, description="Tsallis exponent, strictly inside (0, 1)")
    eta: float = Field(gt=0.0, description="Learning rate")


@dataclass(frozen=True)
class FTRLSolution:
    """Primal weights together with the certified dual multiplier."""

    weights: SimplexPoint
    multiplier: float
    residual: float


def _as_finite_vector(values, name: str) -> npt.NDArray[np.float64]:
    vector = np.asarray(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise InputError(f"{name} must be a non-empty vector, got shape {vector.shape}")
    if not np.all(np.isfinite(vector)):
        raise InputError(f"{name} contains non-finite entries")
    return vector


def check_simplex(weights, tol: float = SIMPLEX_TOL) -> SimplexPoint:
    """Return *weights* as an array after checking it lies on the simplex."""
    point = _as_finite_vector(weights, "weights")
    if np.any(point < 0.0):
        raise InputError("weights must be non-negative")
    if abs(point.sum() - 1.0) > tol:
        raise InputError(f"weights sum to {point.sum():.15f}, expected 1 within {tol}")
    return point


def uniform(n: int) -> SimplexPoint:
    if n < 1:
        raise InputError(f"simplex dimension must be >= 1, got {n}")
    return np.full(n, 1.0 / n)


def tsallis_entropy(weights, q: float) -> float:
    """Negative q-Tsallis entropy psi_q(p) = (1 - sum p_i^q) / (1 - q)."""
    if not 0.0 < q < 1.0:
        raise InputError(f"q must lie in (0, 1), got {q}")
    point = np.asarray(weights, dtype=np.float64)
    return float((1.0 - np.sum(point**q)) / (1.0 - q))


def ftrl_objective(weights, cumulative_loss, params: TsallisParams) -> float:
    """eta * <L, p> + psi_q(p)."""
    point = np.asarray(weights, dtype=np.float64)
    loss = np.asarray(cumulative_loss, dtype=np.float64)
    return float(params.eta * loss @ point + tsallis_entropy(point, params.q))


def _weights_at(shifted: npt.NDArray[np.float64], lam: float, q: float) -> npt.NDArray[np.float64]:
    # log-space evaluation keeps exponents near -1/(1-q) ~ -1000 from overflowing
    base = (1.0 - q) * (shifted + lam) / q
    return np.exp(-np.log(base) / (1.0 - q))


def solve_ftrl_dual(cumulative_loss, params: TsallisParams) -> FTRLSolution:
    """Solve the Tsallis FTRL step and return weights plus the dual multiplier.

    The multiplier is reported in the frame of the caller's losses, so that
    ``eta * L_i + multiplier = q / (1 - q) * p_i ** (q - 1)`` holds at the
    solution.

    Weights are strictly positive in exact arithmetic. In floating point an
    entry underflows to exactly 0.0 once roughly
    ``log(1 + (1 - q) / q * eta * (L_i - min L)) / (1 - q)`` exceeds 745. Only
    q close to 1 with large loss gaps gets there; for q = 0.999 it takes a gap
    of roughly 1100 in ``eta * L``. Such entries are returned as zeros, the
    rest still sum to one, and ``kkt_residual`` skips them.

    Raises:
        InputError: a loss entry is not finite.
        NumericalError: the dual bracket could not be established.
    """
    loss = _as_finite_vector(cumulative_loss, "cumulative_loss")
    q, eta = params.q, params.eta
    n = loss.size
    offset = eta * float(loss.min())
    shifted = eta * loss - offset
    if n == 1:
        return FTRLSolution(weights=np.ones(1), multiplier=q / (1.0 - q) - offset, residual=0.0)

    def excess(lam: float) -> float:
        return float(_weights_at(shifted, lam, q).sum() - 1.0)

    # min(shifted) = 0: at lam = q/(1-q) the smallest-loss entry alone has weight 1,
    # at lam = q N^(1-q)/(1-q) every entry is at most 1/N.
    low = q / (1.0 - q)
    high = q * n ** (1.0 - q) / (1.0 - q)
    for _ in range(_MAX_BRACKET_EXPANSIONS):
        if excess(low) >= 0.0:
            break
        low *= 0.5
    else:
        raise NumericalError("lower dual bracket not found", bracket=(low, high), residual=excess(low))
    for _ in range(_MAX_BRACKET_EXPANSIONS):
        if excess(high) <= 0.0:
            break
        high *= 2.0
    else:
        raise NumericalError("upper dual bracket not found", bracket=(low, high), residual=excess(high))

    if excess(low) == 0.0:
        lam = low
    elif excess(high) == 0.0:
        lam = high
    else:
        lam = brentq(excess, low, high, xtol=_DUAL_XTOL, maxiter=500)

    weights = _weights_at(shifted, lam, q)
    total = weights.sum()
    residual = abs(total - 1.0)
    if not np.isfinite(total) or residual > 1e-6:
        raise NumericalError("primal weights infeasible after dual solve", bracket=(low, high), residual=residual)
    weights = weights / total
    logger.debug(f"Tsallis step: n={n}, q={q:.4f}, eta={eta:.4g}, lam={lam:.6g}, residual={residual:.2e}")
    return FTRLSolution(weights=weights, multiplier=lam - offset, residual=residual)


def kkt_residual(solution: FTRLSolution, cumulative_loss, params: TsallisParams) -> float:
    """Largest relative violation of ``eta * L_i + lam = q / (1 - q) * p_i ** (q - 1)``.

    Coordinates whose weight underflowed to zero are skipped; the simplex
    defect of the weights is folded in.
    """
    loss = _as_finite_vector(cumulative_loss, "cumulative_loss")
    q, eta = params.q, params.eta
    weights = solution.weights
    positive = weights > 0.0
    lhs = eta * loss[positive] + solution.multiplier
    rhs = q / (1.0 - q) * weights[positive] ** (q - 1.0)
    stationarity = float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1.0)))
    feasibility = max(abs(float(weights.sum()) - 1.0), float(-min(weights.min(), 0.0)))
    return max(stationarity, feasibility)


def solve_ftrl_step(cumulative_loss, params: TsallisParams) -> SimplexPoint:
    """argmin over the simplex of eta * <L, p> + psi_q(p)."""
    return solve_ftrl_dual(cumulative_loss, params).weights


def solve_shannon_step(cumulative_loss, eta: float) -> SimplexPoint:
    """Exponential weights p_i proportional to exp(-eta * L_i) (the EXP4 update)."""
    loss = _as_finite_vector(cumulative_loss, "cumulative_loss")
    if not eta > 0.0 or not math.isfinite(eta):
        raise InputError(f"eta must be a positive finite real, got {eta}")
    return softmax(-eta * loss)


def rate_cap(q: float, b: float, c: float) -> float:
    """Largest admissible learning rate (q / ((1 - q) b)) * (1 - c^((q - 1) / (2 - q))).

    The cap keeps the FTRL step's local-norm analysis valid when the loss
    estimates are bounded below by -b.
    """
    if not 0.0 < q < 1.0:
        raise InputError(f"q must lie in (0, 1), got {q}")
    if not b > 0.0:
        raise InputError(f"b must be positive, got {b}")
    if not c > 1.0:
        raise InputError(f"c must exceed 1, got {c}")
    exponent = (q - 1.0) / (2.0 - q)
    return (q / ((1.0 - q) * b)) * -math.expm1(exponent * math.log1p(c - 1.0))
