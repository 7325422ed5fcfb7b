"""Instances, instance generators and the clique feedback-graph reduction.

Rounds are 1-based (``t`` in ``1..T``); experts, actions, vertices and cliques
are 0-based. A feedback-graph clique ``k`` owns the vertices ``i`` with
``i % M == k`` and, after the reduction, the actions ``2k`` (loss 0) and
``2k + 1`` (loss 1). With odd K the last action belongs to no clique.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
import numpy.typing as npt

from .advice import ROW_SUM_TOL
from .exceptions import InputError

logger = logging.getLogger(__name__)

DEFAULT_GAP = 0.05
_SWITCH_ADVANTAGE = 0.2


class AdviceModel(str, Enum):
    IID_DIRICHLET = "iid_dirichlet"
    CLUSTERED = "clustered"
    IDENTICAL = "identical"


class LossModel(str, Enum):
    IID_UNIFORM = "iid_uniform"
    ADVERSARIAL_SWITCH = "adversarial_switch"


# ---------------------------------------------------------------------------
# RNG discipline
# ---------------------------------------------------------------------------


@dataclass
class SeedStreams:
    """Independent generators per role, all derived from one run seed."""

    seed: int
    policy: np.random.Generator
    environment: np.random.Generator
    instance: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "SeedStreams":
        policy, environment, instance = np.random.SeedSequence(seed).spawn(3)
        return cls(
            seed=seed,
            policy=np.random.default_rng(policy),
            environment=np.random.default_rng(environment),
            instance=np.random.default_rng(instance),
        )


def draw_index(rng: np.random.Generator, distribution: npt.NDArray[np.float64]) -> int:
    """Inverse-CDF draw; never returns an index of zero probability."""
    cumulative = np.cumsum(distribution)
    index = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    index = min(index, distribution.size - 1)
    while distribution[index] <= 0.0:
        index -= 1
    return index


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """T rounds of (N, K) advice matrices and length-K loss vectors."""

    advice: npt.NDArray[np.float64] = field(repr=False)
    losses: npt.NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        advice, losses = self.advice, self.losses
        if advice.ndim != 3 or losses.ndim != 2:
            raise InputError(f"advice must be (T, N, K) and losses (T, K), got {advice.shape} and {losses.shape}")
        if advice.shape[0] != losses.shape[0] or advice.shape[2] != losses.shape[1]:
            raise InputError(f"advice {advice.shape} and losses {losses.shape} disagree on T or K")
        if advice.shape[0] == 0:
            raise InputError("an instance needs at least one round")
        if np.any(advice < 0.0) or np.any(np.abs(advice.sum(axis=2) - 1.0) > ROW_SUM_TOL):
            raise InputError("every advice row must be a probability vector")
        if np.any(losses < 0.0) or np.any(losses > 1.0):
            raise InputError("losses must lie in [0, 1]")
        advice.setflags(write=False)
        losses.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.advice.shape[0]

    @property
    def n_experts(self) -> int:
        return self.advice.shape[1]

    @property
    def n_actions(self) -> int:
        return self.advice.shape[2]

    def round(self, t: int) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """(advice, loss) of round *t* (1-based)."""
        if not 1 <= t <= self.horizon:
            raise InputError(f"round {t} outside [1, {self.horizon}]")
        return self.advice[t - 1], self.losses[t - 1]

    def expert_loss_matrix(self) -> npt.NDArray[np.float64]:
        """(T, N) array of y_t(i)."""
        return np.einsum("tnk,tk->tn", self.advice, self.losses)


@dataclass(frozen=True)
class FeedbackGraphInstance:
    """Binary vertex losses on a graph of M disjoint self-looped cliques."""

    losses: npt.NDArray[np.int8] = field(repr=False)
    clique_count: int
    clique_assignment: npt.NDArray[np.int64] = field(repr=False)
    planted_vertex: Optional[int] = None

    def __post_init__(self) -> None:
        if self.losses.ndim != 2 or self.losses.shape[0] == 0:
            raise InputError(f"losses must be a non-empty (T, N) array, got {self.losses.shape}")
        if not np.isin(self.losses, (0, 1)).all():
            raise InputError("feedback-graph losses must be binary")
        if self.clique_count < 1:
            raise InputError(f"need at least one clique, got {self.clique_count}")
        expected = np.arange(self.n_vertices) % self.clique_count
        if self.clique_assignment.shape != expected.shape or not np.array_equal(self.clique_assignment, expected):
            raise InputError("clique assignment must map vertex i to clique i mod M")

    @classmethod
    def from_losses(cls, losses, clique_count: int, planted_vertex: Optional[int] = None) -> "FeedbackGraphInstance":
        table = np.asarray(losses, dtype=np.int8)
        return cls(
            losses=table,
            clique_count=clique_count,
            clique_assignment=np.arange(table.shape[1]) % clique_count,
            planted_vertex=planted_vertex,
        )

    @property
    def horizon(self) -> int:
        return self.losses.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.losses.shape[1]

    def clique_members(self, clique: int) -> npt.NDArray[np.int64]:
        return np.flatnonzero(self.clique_assignment == clique)


@dataclass(frozen=True)
class RestrictedFeedback:
    """What the learner sees under the restricted protocol."""

    played_action: int
    observed_loss: float
    revealed_advice: Dict[int, npt.NDArray[np.float64]]

    def partial_advice(self, n_experts: int, n_actions: int) -> npt.NDArray[np.float64]:
        """Advice matrix with unrevealed experts as zero rows.

        Unrevealed experts are known to put no mass on the played action, so
        the played column of this matrix is exact.
        """
        matrix = np.zeros((n_experts, n_actions))
        for expert, row in self.revealed_advice.items():
            matrix[expert] = row
        return matrix


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _random_advice(
    model: AdviceModel, n_experts: int, n_actions: int, horizon: int, groups: int, rng: np.random.Generator
) -> npt.NDArray[np.float64]:
    if model is AdviceModel.IID_DIRICHLET:
        advice = rng.dirichlet(np.ones(n_actions), size=(horizon, n_experts))
    elif model is AdviceModel.IDENTICAL:
        shared = rng.dirichlet(np.ones(n_actions), size=horizon)
        advice = np.repeat(shared[:, None, :], n_experts, axis=1)
    else:
        if not 1 <= groups <= min(n_actions, n_experts):
            raise InputError(f"groups must lie in [1, min(K, N)] = [1, {min(n_actions, n_experts)}], got {groups}")
        # each round the g groups recommend Dirac masses on g distinct actions
        actions = np.argsort(rng.random((horizon, n_actions)), axis=1)[:, :groups]
        membership = np.arange(n_experts) % groups
        advice = np.zeros((horizon, n_experts, n_actions))
        chosen = actions[:, membership]
        advice[np.arange(horizon)[:, None], np.arange(n_experts)[None, :], chosen] = 1.0
    # Dirichlet rows can miss 1 by a few ulps; renormalise once here, never in the round loop
    return advice / advice.sum(axis=2, keepdims=True)


def _random_losses(
    model: LossModel, n_actions: int, horizon: int, rng: np.random.Generator, switches: int = 2
) -> npt.NDArray[np.float64]:
    if model is LossModel.IID_UNIFORM:
        return rng.random((horizon, n_actions))
    # piecewise-stationary Bernoulli losses whose best action changes at every block
    block = -(-horizon // switches)
    means = np.full((horizon, n_actions), 0.5)
    order = rng.permutation(n_actions)
    for index in range(switches):
        means[index * block:(index + 1) * block, order[index % n_actions]] = 0.5 - _SWITCH_ADVANTAGE
    return (rng.random((horizon, n_actions)) < means).astype(np.float64)


def generate_random_instance(
    n_experts: int,
    n_actions: int,
    horizon: int,
    advice_model: str = AdviceModel.IID_DIRICHLET,
    loss_model: str = LossModel.IID_UNIFORM,
    seed: Optional[int] = None,
    groups: int = 4,
    rng: Optional[np.random.Generator] = None,
) -> Instance:
    """Random instance from named advice and loss models.

    ``identical`` gives every expert the same row (zero capacity);
    ``clustered`` splits experts into *groups* blocks of identical Dirac
    rows on distinct actions, so that Q equals ``groups - 1`` whenever every
    block carries weight.
    """
    try:
        advice_kind = AdviceModel(advice_model)
        loss_kind = LossModel(loss_model)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if n_experts < 1 or n_actions < 1 or horizon < 1:
        raise InputError("N, K and T must all be >= 1")
    generator = rng if rng is not None else np.random.default_rng(seed)
    advice = _random_advice(advice_kind, n_experts, n_actions, horizon, groups, generator)
    losses = _random_losses(loss_kind, n_actions, horizon, generator)
    return Instance(advice=advice, losses=losses)


def generate_hard_fg_losses(
    n_vertices: int,
    n_actions: int,
    horizon: int,
    gap: float = DEFAULT_GAP,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> FeedbackGraphInstance:
    """Stochastic clique instance with one planted better vertex.

    One clique and one of its vertices are picked uniformly; that vertex draws
    Bernoulli(1/2 - gap) losses, every other vertex Bernoulli(1/2).
    """
    if not n_vertices > n_actions >= 2:
        raise InputError(f"need N > K >= 2, got N={n_vertices}, K={n_actions}")
    if not 0.0 <= gap <= 0.5:
        raise InputError(f"gap must lie in [0, 1/2], got {gap}")
    generator = rng if rng is not None else np.random.default_rng(seed)
    clique_count = n_actions // 2
    clique = int(generator.integers(clique_count))
    members = np.flatnonzero(np.arange(n_vertices) % clique_count == clique)
    planted = int(generator.choice(members))
    means = np.full(n_vertices, 0.5)
    means[planted] = 0.5 - gap
    losses = (generator.random((horizon, n_vertices)) < means).astype(np.int8)
    return FeedbackGraphInstance.from_losses(losses, clique_count, planted_vertex=planted)


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------


def _check_reduction(fg: FeedbackGraphInstance, n_actions: int) -> None:
    if not fg.n_vertices > n_actions >= 2:
        raise InputError(f"reduction needs N > K >= 2, got N={fg.n_vertices}, K={n_actions}")
    if fg.clique_count != n_actions // 2:
        raise InputError(f"instance has {fg.clique_count} cliques but K={n_actions} needs {n_actions // 2}")


def reduction_loss(n_actions: int) -> npt.NDArray[np.float64]:
    """Loss 0 on every clique's first action, 1 on its second and on a spurious last action."""
    loss = np.ones(n_actions)
    loss[0:2 * (n_actions // 2):2] = 0.0
    return loss


def reduction_round(
    fg: FeedbackGraphInstance, t: int, n_actions: int
) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Advice and loss of round *t* of the reduced instance, built from that round alone."""
    _check_reduction(fg, n_actions)
    if not 1 <= t <= fg.horizon:
        raise InputError(f"round {t} outside [1, {fg.horizon}]")
    vertex_losses = fg.losses[t - 1].astype(np.int64)
    advice = np.zeros((fg.n_vertices, n_actions))
    advice[np.arange(fg.n_vertices), 2 * fg.clique_assignment + vertex_losses] = 1.0
    return advice, reduction_loss(n_actions)


def build_reduction_instance(fg: FeedbackGraphInstance, n_actions: int) -> Instance:
    """Map a clique feedback-graph instance to an expert-advice instance.

    Expert i in clique k recommends the Dirac mass on action 2k when its
    vertex loss is 0 and on 2k + 1 otherwise, so y_t(i) equals the vertex loss.
    """
    _check_reduction(fg, n_actions)
    if n_actions % 2 == 1:
        logger.info(f"K={n_actions} is odd: action {n_actions - 1} is spurious and never recommended")
    horizon, n_experts = fg.losses.shape
    advice = np.zeros((horizon, n_experts, n_actions))
    targets = 2 * fg.clique_assignment[None, :] + fg.losses.astype(np.int64)
    advice[np.arange(horizon)[:, None], np.arange(n_experts)[None, :], targets] = 1.0
    losses = np.tile(reduction_loss(n_actions), (horizon, 1))
    return Instance(advice=advice, losses=losses)
