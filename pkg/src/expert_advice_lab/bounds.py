"""Closed-form regret bounds and the restricted-advice lower-bound rate."""

import math
from dataclasses import dataclass

from .exceptions import InputError


def _positive_log2(value: float) -> float:
    """log2(x)_+ with log2(0)_+ = 0."""
    return math.log2(value) if value > 1.0 else 0.0


def theorem1_bound(n_experts: int, n_actions: int, horizon: int) -> float:
    """2 sqrt(e xi T (2 + ln(N / xi))) with xi = min(K, N)."""
    if n_experts < 1 or n_actions < 1 or horizon < 1:
        raise InputError("N, K and T must all be >= 1")
    xi = min(n_actions, n_experts)
    return 2.0 * math.sqrt(math.e * xi * horizon * (2.0 + math.log(n_experts / xi)))


@dataclass(frozen=True)
class Theorem2Bound:
    """Value of the instance-based bound and the terms that make it up."""

    value: float
    sqrt_term: float
    guess_term: float
    restart_term: float
    applicable: bool


def theorem2_bound(n_experts: int, horizon: int, cbar: float, initial_guess: float) -> Theorem2Bound:
    """Instance-based bound of the doubling policy for an input guess J.

        38 e sqrt(U T ln(e^2 N / (U v 1)))
        + log2(cbar / J)_+
        + (18 e / 5) log2(4 ((J T v cbar T) ^ ln(e^2 N)) / (J T))_+ ln(e^2 N)
        + 1,                                         U = cbar v J.

    ``applicable`` is False when T < ln(e^2 N); the value is still returned.
    """
    if n_experts < 1 or horizon < 1:
        raise InputError("N and T must be >= 1")
    if cbar < 0.0:
        raise InputError(f"cbar must be non-negative, got {cbar}")
    if not 0.0 < initial_guess <= n_experts:
        raise InputError(f"J must lie in (0, N], got {initial_guess}")
    log_scale = 2.0 + math.log(n_experts)
    effective = max(cbar, initial_guess)
    sqrt_term = 38.0 * math.e * math.sqrt(effective * horizon * (log_scale - math.log(max(effective, 1.0))))
    guess_term = _positive_log2(cbar / initial_guess)
    guess_mass = initial_guess * horizon
    restart_ratio = 4.0 * min(max(guess_mass, cbar * horizon), log_scale) / guess_mass
    restart_term = (18.0 * math.e / 5.0) * _positive_log2(restart_ratio) * log_scale
    return Theorem2Bound(
        value=sqrt_term + guess_term + restart_term + 1.0,
        sqrt_term=sqrt_term,
        guess_term=guess_term,
        restart_term=restart_term,
        applicable=horizon >= log_scale,
    )


def theorem2_preset_bound(n_experts: int, horizon: int, cbar: float) -> Theorem2Bound:
    """Specialisation to J = ln(e^2 N) / T.

        38 e sqrt(cbar T ln(e^2 N / (cbar v 1))) + log2(cbar T / ln(e^2 N))_+ + 46 e ln(e^2 N) + 1
    """
    if n_experts < 1 or horizon < 1:
        raise InputError("N and T must be >= 1")
    if cbar < 0.0:
        raise InputError(f"cbar must be non-negative, got {cbar}")
    log_scale = 2.0 + math.log(n_experts)
    sqrt_term = 38.0 * math.e * math.sqrt(cbar * horizon * (log_scale - math.log(max(cbar, 1.0))))
    guess_term = _positive_log2(cbar * horizon / log_scale)
    restart_term = 46.0 * math.e * log_scale
    return Theorem2Bound(
        value=sqrt_term + guess_term + restart_term + 1.0,
        sqrt_term=sqrt_term,
        guess_term=guess_term,
        restart_term=restart_term,
        applicable=horizon >= log_scale,
    )


def restricted_lower_bound_rate(n_experts: int, n_actions: int, horizon: int) -> float:
    """sqrt(K T ln(N / K)): the order of the restricted-advice minimax regret (no constant)."""
    if not n_experts > n_actions >= 2 or horizon < 1:
        raise InputError("rate is defined for N > K >= 2 and T >= 1")
    return math.sqrt(n_actions * horizon * math.log(n_experts / n_actions))
