"""Orchestrates a full experiment: seeds, rounds, regret, bounds and output files."""

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..bounds import theorem1_bound, theorem2_bound
from ..capacity import CapacityTracker
from ..config import RunConfig, Settings, get_settings
from ..environments import (
    FeedbackGraphInstance,
    Instance,
    SeedStreams,
    build_reduction_instance,
    generate_hard_fg_losses,
    generate_random_instance,
)
from ..exceptions import InputError
from ..instance_io import read_header, read_instance
from ..policies import DoublingQFTRLPolicy, RestartEvent, theorem2_initial_guess
from ..regret import compute_regret, seed_statistics
from .policy_factory import PolicyFactory
from .protocols import RoundRecord, run_feedback_graph_round, run_restricted_round, run_standard_round
from .results_writer import ROUNDS_FILE, SUMMARY_FILE, ResultsWriter
from .run_validator import RunValidator
from .seed_processor import SeedOutcome, SeedProcessor

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Summary models
# ---------------------------------------------------------------------------


class RestartSummary(BaseModel):
    round: int
    q_average: float
    old_exponent: int
    new_exponent: int


class SeedSummary(BaseModel):
    seed: int
    regret: Optional[float] = None
    q_average: Optional[float] = None
    capacity_estimate: Optional[float] = Field(
        default=None, description="Average of per-round capacity estimates (diagnostics only)"
    )
    restarts: List[RestartSummary] = Field(default_factory=list)
    error: Optional[str] = None


class BoundSummary(BaseModel):
    theorem1: float
    initial_guess: float
    theorem2_q_average: Optional[float] = Field(
        default=None, description="Instance bound with cbar = mean Q_t(p_t), a certified lower bound on C-bar"
    )
    theorem2_capacity: Optional[float] = Field(
        default=None, description="Instance bound with cbar = mean capacity estimate"
    )
    theorem2_applicable: bool
    max_restarts: int


class RunSummary(BaseModel):
    run_id: str
    policy: str
    protocol: str
    n_experts: int
    n_actions: int
    horizon: int
    seeds: List[SeedSummary]
    seeds_failed: int
    mean_regret: Optional[float] = None
    std_regret: Optional[float] = None
    se_regret: Optional[float] = None
    mean_q_average: Optional[float] = None
    mean_capacity: Optional[float] = None
    bounds: BoundSummary


# ---------------------------------------------------------------------------
# Pipeline results
# ---------------------------------------------------------------------------


@dataclass
class SeedResult:
    """Everything one seed produced."""

    records: List[RoundRecord] = field(repr=False)
    regret: float
    q_average: float
    capacity_estimate: Optional[float]
    restarts: List[RestartEvent]


@dataclass
class ExperimentResult:
    """Output of the experiment pipeline."""

    summary: RunSummary
    rounds_path: Path
    summary_path: Path
    outcomes: List[SeedOutcome] = field(repr=False)


@dataclass
class _SeedEnvironment:
    instance: Instance
    graph: Optional[FeedbackGraphInstance] = None


class ExperimentPipeline:
    """
    Runs the configured policy on every seed and aggregates the results.

    Instances come from, in order of precedence: the instance file (shared by
    all seeds), the instance seed (one generated instance shared by all seeds),
    or each seed's own instance stream.
    """

    def __init__(self, config: RunConfig, settings: Optional[Settings] = None) -> None:
        RunValidator.validate(config.policy, config.protocol)
        self._config = config
        self._settings = settings or get_settings()
        self._seed_processor = SeedProcessor()
        if config.instance_file is not None:
            self.horizon, self.n_experts, self.n_actions = read_header(config.instance_file)
            if config.initial_guess is not None and config.initial_guess > self.n_experts:
                raise InputError(f"J = {config.initial_guess} exceeds N = {self.n_experts} of {config.instance_file}")
        else:
            self.horizon, self.n_experts, self.n_actions = config.horizon, config.n_experts, config.n_actions
        self._shared: Optional[_SeedEnvironment] = None
        if config.instance_file is not None:
            self._shared = _SeedEnvironment(read_instance(config.instance_file))
        elif config.instance_seed is not None:
            self._shared = self._generate(SeedStreams.from_seed(config.instance_seed).instance)

    async def execute(self, run_id: str, progress_callback=None) -> ExperimentResult:
        config = self._config
        total_start = time.time()
        logger.info(
            f"[{run_id}] Experiment started: policy={config.policy}, protocol={config.protocol}, "
            f"N={self.n_experts}, K={self.n_actions}, T={self.horizon}, {len(config.seeds)} seed(s)"
        )
        if progress_callback is not None:
            progress_callback.on_seeds_total(len(config.seeds))

        outcomes = await self._seed_processor.process_seeds(
            self._run_seed,
            config.seeds,
            run_id,
            config.max_workers,
            on_seed_done=progress_callback.on_seed_done if progress_callback else None,
        )

        summary = self._summarize(run_id, outcomes)
        records = [record for outcome in outcomes if outcome.ok for record in outcome.result.records]
        rounds_path = ResultsWriter.write_rounds(Path(config.out_dir) / ROUNDS_FILE, records)
        summary_path = ResultsWriter.write_summary(Path(config.out_dir) / SUMMARY_FILE, summary)

        logger.info(
            f"[{run_id}] Experiment complete in {time.time() - total_start:.3f}s "
            f"({len(outcomes) - summary.seeds_failed}/{len(outcomes)} seeds, mean regret {summary.mean_regret})"
        )
        return ExperimentResult(
            summary=summary,
            rounds_path=rounds_path,
            summary_path=summary_path,
            outcomes=outcomes,
        )

    # ------------------------------------------------------------------
    # Per-seed run
    # ------------------------------------------------------------------

    def _generate(self, rng: np.random.Generator) -> _SeedEnvironment:
        config = self._config
        if config.instance_model == "hard_clique":
            graph = generate_hard_fg_losses(self.n_experts, self.n_actions, self.horizon, gap=config.gap, rng=rng)
            return _SeedEnvironment(build_reduction_instance(graph, self.n_actions), graph)
        instance = generate_random_instance(
            self.n_experts,
            self.n_actions,
            self.horizon,
            advice_model=config.instance_model,
            loss_model=config.loss_model,
            groups=config.groups,
            rng=rng,
        )
        return _SeedEnvironment(instance)

    def _run_seed(self, seed: int) -> SeedResult:
        config = self._config
        streams = SeedStreams.from_seed(seed)
        environment = self._shared if self._shared is not None else self._generate(streams.instance)
        instance = environment.instance
        policy = PolicyFactory.build(config, self.n_experts, self.n_actions, self.horizon)
        tracker = CapacityTracker(
            diagnostics=config.capacity_diagnostics,
            max_iters=self._settings.capacity_max_iters,
            tol=self._settings.capacity_tol,
        )

        expert_losses = instance.expert_loss_matrix()
        running_best = np.zeros(self.n_experts)
        learner_loss = 0.0
        records: List[RoundRecord] = []
        for t in range(1, self.horizon + 1):
            if config.protocol == "standard":
                record = run_standard_round(instance, t, policy, streams, tracker)
            elif environment.graph is not None:
                record = run_feedback_graph_round(environment.graph, t, policy, streams, self.n_actions, tracker)
            else:
                record = run_restricted_round(instance, t, policy, streams, tracker)
            learner_loss += record.loss
            running_best += expert_losses[t - 1]
            record.cumulative_regret = learner_loss - float(running_best.min())
            records.append(record)

        restarts = list(policy.doubling.restarts) if isinstance(policy, DoublingQFTRLPolicy) else []
        return SeedResult(
            records=records,
            regret=compute_regret(records, instance),
            q_average=tracker.mean_q,
            capacity_estimate=tracker.mean_capacity,
            restarts=restarts,
        )

    # ------------------------------------------------------------------
    # Aggregation
    # ------------------------------------------------------------------

    def _initial_guess(self) -> float:
        if self._config.initial_guess is not None:
            return self._config.initial_guess
        return min(theorem2_initial_guess(self.n_experts, self.horizon), float(self.n_experts))

    def _summarize(self, run_id: str, outcomes: List[SeedOutcome]) -> RunSummary:
        start = time.time()
        seeds: List[SeedSummary] = []
        for outcome in outcomes:
            if not outcome.ok:
                seeds.append(SeedSummary(seed=outcome.seed, error=outcome.error))
                continue
            result: SeedResult = outcome.result
            seeds.append(
                SeedSummary(
                    seed=outcome.seed,
                    regret=result.regret,
                    q_average=result.q_average,
                    capacity_estimate=result.capacity_estimate,
                    restarts=[RestartSummary(**asdict(event)) for event in result.restarts],
                )
            )
        succeeded = [outcome.result for outcome in outcomes if outcome.ok]

        mean_regret = std_regret = se_regret = mean_q = mean_capacity = None
        if succeeded:
            stats = seed_statistics([result.regret for result in succeeded])
            mean_regret, std_regret, se_regret = stats.mean, stats.std, stats.standard_error
            mean_q = float(np.mean([result.q_average for result in succeeded]))
            capacities = [result.capacity_estimate for result in succeeded if result.capacity_estimate is not None]
            mean_capacity = float(np.mean(capacities)) if capacities else None

        guess = self._initial_guess()
        q_bound = theorem2_bound(self.n_experts, self.horizon, mean_q, guess) if mean_q is not None else None
        capacity_bound = (
            theorem2_bound(self.n_experts, self.horizon, mean_capacity, guess) if mean_capacity is not None else None
        )
        bounds = BoundSummary(
            theorem1=theorem1_bound(self.n_experts, self.n_actions, self.horizon),
            initial_guess=guess,
            theorem2_q_average=q_bound.value if q_bound else None,
            theorem2_capacity=capacity_bound.value if capacity_bound else None,
            theorem2_applicable=self.horizon >= 2.0 + math.log(self.n_experts),
            max_restarts=math.ceil(math.log2(self.n_experts / guess)) + 1,
        )
        logger.info(f"[{run_id}] Aggregated {len(succeeded)} seed(s) in {time.time() - start:.3f}s")
        return RunSummary(
            run_id=run_id,
            policy=self._config.policy,
            protocol=self._config.protocol,
            n_experts=self.n_experts,
            n_actions=self.n_actions,
            horizon=self.horizon,
            seeds=seeds,
            seeds_failed=len(outcomes) - len(succeeded),
            mean_regret=mean_regret,
            std_regret=std_regret,
            se_regret=se_regret,
            mean_q_average=mean_q,
            mean_capacity=mean_capacity,
            bounds=bounds,
        )
