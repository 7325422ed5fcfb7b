"""Chi-squared dissimilarity Q(tau) of a round's advice and its capacity sup_tau Q(tau).

    Q(tau) = sum_a [sum_i tau(i) theta^i(a)^2] / [sum_j tau(j) theta^j(a)] - 1

equals sum_i tau(i) * chi2(theta^i || mixture_tau). It vanishes when all
experts agree and never exceeds min(K, N) - 1.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import numpy.typing as npt

from .exceptions import InputError
from .tsallis import uniform

logger = logging.getLogger(__name__)

_VERTEX_EPSILON = 1e-3
_INITIAL_STEP = 1.0
_MIN_STEP = 1e-12
_MAX_BRUTEFORCE_EXPERTS = 4


@dataclass
class CapacityReport:
    """Outcome of a capacity ascent for one round."""

    q_at_played: float
    capacity_estimate: float
    argmax_weights: npt.NDArray[np.float64] = field(repr=False)
    iterations: int


def _q_batch(advice: npt.NDArray[np.float64], taus: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Q for every row of *taus*, using 0/0 := 0 for actions no weighted expert supports."""
    numerators = taus @ (advice * advice)
    denominators = taus @ advice
    ratios = np.divide(
        numerators,
        denominators,
        out=np.zeros_like(numerators),
        where=numerators > 0.0,
    )
    return np.maximum(ratios.sum(axis=1) - 1.0, 0.0)


def _check_shapes(advice, tau) -> tuple:
    matrix = np.asarray(advice, dtype=np.float64)
    weights = np.asarray(tau, dtype=np.float64)
    if matrix.ndim != 2 or weights.ndim != 1 or matrix.shape[0] != weights.shape[0]:
        raise InputError(f"dimension mismatch: advice {matrix.shape} vs tau {weights.shape}")
    return matrix, weights


def q_functional(advice, tau) -> float:
    """Q(tau) for one round of advice, clamped at 0."""
    matrix, weights = _check_shapes(advice, tau)
    return float(_q_batch(matrix, weights[None, :])[0])


def _q_gradient(advice: npt.NDArray[np.float64], tau: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    numerators = tau @ (advice * advice)
    denominators = tau @ advice
    support = denominators > 0.0
    inv = np.divide(1.0, denominators, out=np.zeros_like(denominators), where=support)
    # dQ/dtau_i = sum_a theta_ia^2 / d_a - theta_ia * n_a / d_a^2
    return (advice * advice) @ inv - advice @ (numerators * inv * inv)


def _ascend(
    advice: npt.NDArray[np.float64], start: npt.NDArray[np.float64], max_iters: int, tol: float
) -> tuple:
    """Normalised exponentiated-gradient ascent with backtracking from *start*."""
    tau = start
    value = q_functional(advice, tau)
    step = _INITIAL_STEP
    iterations = 0
    while iterations < max_iters:
        iterations += 1
        gradient = _q_gradient(advice, tau)
        scale = np.max(np.abs(gradient))
        if scale == 0.0:
            break
        direction = gradient / scale
        improved = False
        while step >= _MIN_STEP:
            logits = np.log(tau) + step * direction
            candidate = np.exp(logits - logits.max())
            candidate /= candidate.sum()
            if np.any(candidate <= 0.0):
                step *= 0.5
                continue
            candidate_value = q_functional(advice, candidate)
            if candidate_value > value:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        gain = candidate_value - value
        tau, value = candidate, candidate_value
        step = min(step * 2.0, 64.0)
        if gain < tol:
            break
    return tau, value, iterations


def capacity_estimate(
    advice,
    max_iters: int = 500,
    tol: float = 1e-9,
    weights: Optional[npt.ArrayLike] = None,
) -> CapacityReport:
    """Lower bound on sup_tau Q(tau) by multi-start ascent.

    Starts from the uniform point and from (1 - eps) e_i + eps * uniform for
    every expert i; the best value found is returned. *weights* (the policy's
    proposal for the round) only fills ``q_at_played``; it defaults to uniform.
    Non-convergence returns the best value so far.
    """
    if max_iters < 1:
        raise InputError(f"max_iters must be >= 1, got {max_iters}")
    if not tol > 0.0:
        raise InputError(f"tol must be positive, got {tol}")
    matrix = np.asarray(advice, dtype=np.float64)
    n_experts = matrix.shape[0]
    centre = uniform(n_experts)
    played = centre if weights is None else np.asarray(weights, dtype=np.float64)
    q_played = q_functional(matrix, played)

    starts = [centre]
    if n_experts > 1:
        for i in range(n_experts):
            start = _VERTEX_EPSILON * centre
            start[i] += 1.0 - _VERTEX_EPSILON
            starts.append(start)

    best_tau, best_value, total_iterations = centre, q_functional(matrix, centre), 0
    for start in starts:
        tau, value, iterations = _ascend(matrix, start, max_iters, tol)
        total_iterations += iterations
        if value > best_value:
            best_tau, best_value = tau, value

    ceiling = min(matrix.shape) - 1.0
    return CapacityReport(
        q_at_played=q_played,
        capacity_estimate=min(max(best_value, q_played), ceiling + tol),
        argmax_weights=best_tau if best_value >= q_played else played,
        iterations=total_iterations,
    )


def _simplex_grid(n: int, steps: int) -> npt.NDArray[np.int64]:
    """All non-negative integer vectors of length *n* summing to *steps*."""
    if n == 1:
        return np.array([[steps]], dtype=np.int64)
    if n == 2:
        head = np.arange(steps + 1, dtype=np.int64)
        return np.column_stack([head, steps - head])
    blocks = []
    for first in range(steps + 1):
        rest = _simplex_grid(n - 1, steps - first)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def capacity_bruteforce(advice, grid_step: float) -> float:
    """Maximum of Q over a simplex grid of spacing *grid_step* (test oracle, N <= 4)."""
    matrix = np.asarray(advice, dtype=np.float64)
    n_experts = matrix.shape[0]
    if n_experts > _MAX_BRUTEFORCE_EXPERTS:
        raise InputError(f"brute-force capacity is limited to N <= {_MAX_BRUTEFORCE_EXPERTS}, got {n_experts}")
    if not 0.0 < grid_step <= 1.0:
        raise InputError(f"grid_step must lie in (0, 1], got {grid_step}")
    steps = int(round(1.0 / grid_step))
    start = time.time()
    if n_experts == 1:
        return q_functional(matrix, np.ones(1))
    best = 0.0
    # one leading coordinate at a time keeps the batch size at O(steps^(N-2))
    for first in range(steps + 1):
        rest = _simplex_grid(n_experts - 1, steps - first)
        taus = np.column_stack([np.full(len(rest), first), rest]) / steps
        best = max(best, float(_q_batch(matrix, taus).max()))
    logger.debug(f"Brute-force capacity over {steps} steps done in {time.time() - start:.3f}s")
    return best


class CapacityTracker:
    """Running averages of Q_t(p_t) and, optionally, of capacity estimates."""

    def __init__(self, diagnostics: bool = False, max_iters: int = 500, tol: float = 1e-9) -> None:
        self.diagnostics = diagnostics
        self.max_iters = max_iters
        self.tol = tol
        self.q_values: List[float] = []
        self.capacities: List[float] = []

    def observe(self, advice, weights) -> float:
        """Record round quantities and return Q_t(p_t)."""
        if self.diagnostics:
            report = capacity_estimate(advice, self.max_iters, self.tol, weights=weights)
            self.q_values.append(report.q_at_played)
            self.capacities.append(report.capacity_estimate)
            return report.q_at_played
        value = q_functional(advice, weights)
        self.q_values.append(value)
        return value

    @property
    def mean_q(self) -> float:
        return float(np.mean(self.q_values)) if self.q_values else 0.0

    @property
    def mean_capacity(self) -> Optional[float]:
        """C-bar estimate; None when diagnostics are off."""
        if not self.diagnostics or not self.capacities:
            return None
        return float(np.mean(self.capacities))
