"""Single-round interaction protocols between a policy and an environment."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..capacity import CapacityTracker, q_functional
from ..environments import (
    FeedbackGraphInstance,
    Instance,
    RestrictedFeedback,
    SeedStreams,
    draw_index,
    reduction_loss,
    reduction_round,
)
from ..exceptions import ProtocolViolation
from ..policies import Policy

logger = logging.getLogger(__name__)


@dataclass
class RoundRecord:
    """Per-round log line; ``t`` is 1-based, expert and action are 0-based."""

    seed: int
    t: int
    expert: int
    action: int
    loss: float
    q_value: float
    epoch_exponent: Optional[int]
    restarted: bool
    p_max: float
    cumulative_regret: float = float("nan")
    revealed: Optional[Tuple[int, ...]] = field(default=None, repr=False, compare=False)


def _log_q(tracker: Optional[CapacityTracker], advice, weights) -> float:
    if tracker is None:
        return q_functional(advice, weights)
    return tracker.observe(advice, weights)


def _finish(policy: Policy, streams: SeedStreams, t: int, expert: int, action: int,
            loss: float, q_value: float, exponent: Optional[int], weights) -> RoundRecord:
    return RoundRecord(
        seed=streams.seed,
        t=t,
        expert=expert,
        action=action,
        loss=loss,
        q_value=q_value,
        epoch_exponent=exponent,
        restarted=policy.restarted_last_round,
        p_max=float(weights.max()),
    )


def run_standard_round(
    instance: Instance,
    t: int,
    policy: Policy,
    streams: SeedStreams,
    tracker: Optional[CapacityTracker] = None,
) -> RoundRecord:
    """Reveal all advice, draw I_t ~ p_t then A_t ~ theta^{I_t}, deliver full feedback."""
    advice, loss = instance.round(t)
    weights = policy.propose()
    exponent = policy.epoch_exponent
    expert = draw_index(streams.policy, weights)
    action = draw_index(streams.environment, advice[expert])
    observed = float(loss[action])
    q_value = _log_q(tracker, advice, weights)
    policy.update(advice, action, observed)
    logger.debug(f"[seed {streams.seed}] round {t}: expert {expert}, action {action}, loss {observed:.4f}")
    return _finish(policy, streams, t, expert, action, observed, q_value, exponent, weights)


def run_restricted_round(
    instance: Instance,
    t: int,
    policy: Policy,
    streams: SeedStreams,
    tracker: Optional[CapacityTracker] = None,
) -> RoundRecord:
    """The learner commits to an expert blind; only experts supporting A_t are revealed.

    Raises:
        ProtocolViolation: the policy needs the full advice matrix.
    """
    if policy.requires_full_advice:
        raise ProtocolViolation(f"policy {policy.name!r} needs full advice and cannot run under the restricted protocol")
    weights = policy.propose()
    exponent = policy.epoch_exponent
    advice, loss = instance.round(t)
    expert = draw_index(streams.policy, weights)
    action = draw_index(streams.environment, advice[expert])
    observed = float(loss[action])
    revealed = np.flatnonzero(advice[:, action] > 0.0)
    feedback = RestrictedFeedback(
        played_action=action,
        observed_loss=observed,
        revealed_advice={int(i): advice[i].copy() for i in revealed},
    )
    q_value = _log_q(tracker, advice, weights)
    policy.update(feedback.partial_advice(instance.n_experts, instance.n_actions), action, observed)
    record = _finish(policy, streams, t, expert, action, observed, q_value, exponent, weights)
    record.revealed = tuple(int(i) for i in revealed)
    return record


def run_feedback_graph_round(
    fg: FeedbackGraphInstance,
    t: int,
    policy: Policy,
    streams: SeedStreams,
    n_actions: int,
    tracker: Optional[CapacityTracker] = None,
) -> RoundRecord:
    """Play a clique feedback-graph round through an expert-advice policy.

    The wrapped policy picks a vertex as its expert; only the losses of that
    vertex's clique are read. From them the played action and its loss are
    synthesised, and the advice rows of the clique members whose loss matches
    the vertex loss are revealed. Those are exactly the experts with positive
    mass on the played action. The record's ``action`` is the synthesised
    action and ``loss`` the vertex loss.
    """
    if policy.requires_full_advice:
        raise ProtocolViolation(f"policy {policy.name!r} needs full advice and cannot play a feedback graph")
    weights = policy.propose()
    exponent = policy.epoch_exponent
    vertex = draw_index(streams.policy, weights)
    clique = int(fg.clique_assignment[vertex])
    members = fg.clique_members(clique)
    observed_losses = fg.losses[t - 1, members].astype(np.int64)
    vertex_loss = int(fg.losses[t - 1, vertex])
    action = 2 * clique + vertex_loss
    revealed = {}
    for member, member_loss in zip(members, observed_losses):
        if member_loss != vertex_loss:
            continue
        row = np.zeros(n_actions)
        row[action] = 1.0
        revealed[int(member)] = row
    feedback = RestrictedFeedback(
        played_action=action,
        observed_loss=float(reduction_loss(n_actions)[action]),
        revealed_advice=revealed,
    )
    # Q is harness-side bookkeeping and may read the whole round
    full_advice, _ = reduction_round(fg, t, n_actions)
    q_value = _log_q(tracker, full_advice, weights)
    policy.update(feedback.partial_advice(fg.n_vertices, n_actions), action, feedback.observed_loss)
    record = _finish(policy, streams, t, vertex, action, float(vertex_loss), q_value, exponent, weights)
    record.revealed = tuple(revealed)
    return record
