"""Learner policies for bandits with expert advice.

Every policy follows the same two-step contract per round:

    weights = policy.propose()          # depends on past feedback only
    policy.update(advice, action, loss) # advice may be the restricted view

``propose`` never sees the current round's advice, which is what keeps the
Tsallis and Shannon policies valid under the restricted protocol.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, List, Optional

import numpy as np
import numpy.typing as npt

from .advice import iw_estimate, shift_estimate
from .capacity import q_functional
from .exceptions import InputError
from .tsallis import TsallisParams, rate_cap, solve_ftrl_step, solve_shannon_step, uniform

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Tuning
# ---------------------------------------------------------------------------


def _tsallis_exponent(log_ratio: float) -> float:
    return 0.5 * (1.0 + log_ratio / (math.sqrt(log_ratio**2 + 4.0) + 2.0))


def tuning_theorem1(n_experts: int, n_actions: int, horizon: int) -> TsallisParams:
    """Worst-case tuning with xi = min(K, N).

    q = (1 + ln(N/xi) / (sqrt(ln(N/xi)^2 + 4) + 2)) / 2
    eta = sqrt(2 q N^(1-q) / (T (1-q) xi^q))
    """
    if n_experts < 1 or n_actions < 1 or horizon < 1:
        raise InputError("N, K and T must all be >= 1")
    xi = min(n_actions, n_experts)
    q = _tsallis_exponent(math.log(n_experts / xi))
    eta = math.sqrt(2.0 * q * n_experts ** (1.0 - q) / (horizon * (1.0 - q) * xi**q))
    return TsallisParams(q=q, eta=eta)


def tuning_doubling(epoch_exponent: int, n_experts: int, horizon: int) -> TsallisParams:
    """Tuning of the epoch whose capacity guess is 2^r.

    q_r uses ln(N / 2^r) in place of ln(N / xi); eta_r is the smaller of the
    variance-balancing rate and rate_cap(q_r, 1, e).
    """
    if n_experts < 1 or horizon < 1:
        raise InputError("N and T must be >= 1")
    if epoch_exponent > math.log2(n_experts):
        raise InputError(f"epoch exponent {epoch_exponent} exceeds log2(N) = {math.log2(n_experts):.4f}")
    log_ratio = math.log(n_experts) - epoch_exponent * math.log(2.0)
    q = _tsallis_exponent(log_ratio)
    cap = rate_cap(q, 1.0, math.e)
    spread = n_experts ** (1.0 - q) - 1.0
    if spread <= 0.0:
        # a single expert: every rate gives the same iterates
        return TsallisParams(q=q, eta=cap)
    balanced = math.sqrt(q * spread / (math.e * horizon * (1.0 - q) * 2.0 ** (epoch_exponent * q)))
    return TsallisParams(q=q, eta=min(balanced, cap))


def tuning_exp4(n_experts: int, n_actions: int, horizon: int) -> float:
    """EXP4 rate sqrt(2 ln N / (min(K, N) T)); ln 2 stands in for ln N when N = 1."""
    if n_experts < 1 or n_actions < 1 or horizon < 1:
        raise InputError("N, K and T must all be >= 1")
    return math.sqrt(2.0 * math.log(max(n_experts, 2)) / (min(n_actions, n_experts) * horizon))


def theorem2_initial_guess(n_experts: int, horizon: int) -> float:
    """J = ln(e^2 N) / T."""
    return (2.0 + math.log(n_experts)) / horizon


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------


@dataclass
class PolicyState:
    """Current weights p_t and the running sum of loss estimates of the epoch."""

    weights: npt.NDArray[np.float64]
    cumulative_estimates: npt.NDArray[np.float64]
    params: Optional[TsallisParams] = None

    @classmethod
    def fresh(cls, n_experts: int, params: Optional[TsallisParams] = None) -> "PolicyState":
        return cls(weights=uniform(n_experts), cumulative_estimates=np.zeros(n_experts), params=params)


@dataclass
class RestartEvent:
    round: int
    q_average: float
    old_exponent: int
    new_exponent: int


@dataclass
class DoublingState:
    """Epoch bookkeeping of the doubling policy (1-based rounds)."""

    epoch_exponent: int
    epoch_start: int
    q_running_sum: float
    initial_guess: float
    horizon: int
    restarts: List[RestartEvent] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


class Policy(ABC):
    """Stateful learner with a strict propose -> update alternation."""

    name: ClassVar[str]
    requires_full_advice: ClassVar[bool] = False

    def __init__(self, n_experts: int, params: Optional[TsallisParams] = None) -> None:
        if n_experts < 1:
            raise InputError(f"need at least one expert, got {n_experts}")
        self.n_experts = n_experts
        self.state = PolicyState.fresh(n_experts, params)
        self.rounds_played = 0

    def propose(self) -> npt.NDArray[np.float64]:
        """Current distribution p_t over experts; does not mutate state."""
        return self.state.weights.copy()

    @abstractmethod
    def update(self, advice, played_action: int, observed_loss: float) -> None:
        """Consume the feedback of the round that followed the last proposal."""

    @property
    def epoch_exponent(self) -> Optional[int]:
        return None

    @property
    def restarted_last_round(self) -> bool:
        return False


class QFTRLPolicy(Policy):
    """q-FTRL with fixed (q, eta); accumulates importance-weighted estimates.

    With ``shifted=True`` the shifted estimates are accumulated instead; the
    iterates are the same because the shift is uniform across experts.
    """

    name = "qftrl"

    def __init__(self, n_experts: int, params: TsallisParams, shifted: bool = False) -> None:
        super().__init__(n_experts, params)
        self.shifted = shifted

    def update(self, advice, played_action: int, observed_loss: float) -> None:
        estimate = iw_estimate(advice, self.state.weights, played_action, observed_loss)
        if self.shifted:
            estimate = shift_estimate(estimate, observed_loss)
        self.state.cumulative_estimates += estimate.values
        self.state.weights = solve_ftrl_step(self.state.cumulative_estimates, self.state.params)
        self.rounds_played += 1


class EXP4Policy(Policy):
    """Exponential weights over experts with importance-weighted estimates."""

    name = "exp4"

    def __init__(self, n_experts: int, eta: float) -> None:
        if not eta > 0.0:
            raise InputError(f"eta must be positive, got {eta}")
        super().__init__(n_experts)
        self.eta = eta

    def update(self, advice, played_action: int, observed_loss: float) -> None:
        estimate = iw_estimate(advice, self.state.weights, played_action, observed_loss)
        self.state.cumulative_estimates += estimate.values
        self.state.weights = solve_shannon_step(self.state.cumulative_estimates, self.eta)
        self.rounds_played += 1


class DoublingQFTRLPolicy(Policy):
    """q-FTRL restarted whenever the epoch's average Q_t(p_t) outgrows its guess.

    The restart test ``sum_{s=m_t}^t Q_s(p_s) / T > 2^(r_t + 1)`` is strict and
    is evaluated on the round's proposal before the FTRL step. On a restart the
    weights return to uniform, the estimate sum is cleared and the exponent
    jumps to ceil(log2(average)) - 1.
    """

    name = "qftrl-doubling"
    requires_full_advice = True

    def __init__(self, n_experts: int, horizon: int, initial_guess: float) -> None:
        if not 0.0 < initial_guess <= n_experts:
            raise InputError(f"J must lie in (0, N] = (0, {n_experts}], got {initial_guess}")
        if horizon < 1:
            raise InputError(f"horizon must be >= 1, got {horizon}")
        exponent = math.ceil(math.log2(initial_guess)) - 1
        super().__init__(n_experts, tuning_doubling(exponent, n_experts, horizon))
        self.doubling = DoublingState(
            epoch_exponent=exponent,
            epoch_start=1,
            q_running_sum=0.0,
            initial_guess=initial_guess,
            horizon=horizon,
        )
        self._restarted = False

    @classmethod
    def with_theorem2_preset(cls, n_experts: int, horizon: int) -> "DoublingQFTRLPolicy":
        """Initial guess J = ln(e^2 N) / T, clamped to N for very short horizons."""
        guess = theorem2_initial_guess(n_experts, horizon)
        if guess > n_experts:
            logger.warning(
                f"Preset J = {guess:.4g} exceeds N = {n_experts} (T = {horizon} < ln(e^2 N) / N); using J = N"
            )
            guess = float(n_experts)
        return cls(n_experts, horizon, guess)

    @property
    def epoch_exponent(self) -> int:
        return self.doubling.epoch_exponent

    @property
    def restarted_last_round(self) -> bool:
        return self._restarted

    @property
    def restart_count(self) -> int:
        return len(self.doubling.restarts)

    def update(self, advice, played_action: int, observed_loss: float) -> None:
        state, doubling = self.state, self.doubling
        round_index = self.rounds_played + 1
        doubling.q_running_sum += q_functional(advice, state.weights)
        estimate = iw_estimate(advice, state.weights, played_action, observed_loss)
        q_average = doubling.q_running_sum / doubling.horizon

        self._restarted = q_average > 2.0 ** (doubling.epoch_exponent + 1)
        if self._restarted:
            new_exponent = math.ceil(math.log2(q_average)) - 1
            doubling.restarts.append(
                RestartEvent(
                    round=round_index,
                    q_average=q_average,
                    old_exponent=doubling.epoch_exponent,
                    new_exponent=new_exponent,
                )
            )
            message = (
                f"Restart at round {round_index}: average Q {q_average:.4g} > 2^{doubling.epoch_exponent + 1}, "
                f"exponent {doubling.epoch_exponent} -> {new_exponent}"
            )
            if round_index >= doubling.horizon:
                message += " (final round, reset state is never used)"
            logger.info(message)
            doubling.epoch_exponent = new_exponent
            doubling.epoch_start = round_index + 1
            doubling.q_running_sum = 0.0
            self.state = PolicyState.fresh(
                self.n_experts, tuning_doubling(new_exponent, self.n_experts, doubling.horizon)
            )
        else:
            state.cumulative_estimates += estimate.values
            state.weights = solve_ftrl_step(state.cumulative_estimates, state.params)
        self.rounds_played += 1
