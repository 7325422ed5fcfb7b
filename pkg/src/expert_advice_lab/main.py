"""FastAPI application for launching experiments as background jobs.

This module is kept thin: it owns the HTTP contract (request/response
models, route handlers, error boundaries) and delegates the work to the
services layer.
"""

import asyncio
import logging
import time
from typing import Annotated, Dict, List, Literal, Optional

from fastapi import BackgroundTasks, FastAPI, HTTPException
from pydantic import BaseModel, Field, ValidationError

from .bounds import theorem1_bound, theorem2_bound, theorem2_preset_bound
from .config import RunConfig, get_settings
from .exceptions import LabError
from .policies import theorem2_initial_guess
from .services.experiment_pipeline import ExperimentPipeline, RunSummary
from .services.job_store import ExperimentJob, JobStatus, JobStore
from .services.seed_processor import SeedOutcome

# Module-level store shared across all requests
job_store = JobStore()

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

_settings = get_settings()
logging.basicConfig(
    level=getattr(logging, _settings.log_level),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[
        logging.FileHandler(_settings.log_file),
        logging.StreamHandler(),
    ],
)
logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# FastAPI application
# ---------------------------------------------------------------------------

app = FastAPI(
    title="Expert Advice Lab API",
    description=(
        "Run bandits-with-expert-advice experiments and evaluate regret bounds.\n\n"
        "## Endpoints\n"
        "- **POST /experiments** – Start an experiment in the background; returns a job id.\n"
        "- **GET /experiments/{job_id}** – Job status, seed progress and the run summary.\n"
        "- **POST /bounds** – Closed-form regret bound values.\n"
        "- **GET /health** – Liveness probe.\n"
    ),
    version="0.1.0",
    docs_url="/docs",
    redoc_url="/redoc",
    license_info={"name": "MIT"},
)

# ---------------------------------------------------------------------------
# Request / response models
# ---------------------------------------------------------------------------


class ExperimentRequest(BaseModel):
    """Request model for an experiment run."""

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "policy": "qftrl",
                    "protocol": "standard",
                    "n_experts": 16,
                    "n_actions": 4,
                    "horizon": 1000,
                    "seeds": "0..4",
                }
            ]
        }
    }

    policy: Annotated[
        Literal["exp4", "qftrl", "qftrl-doubling"],
        Field(description="Learner policy."),
    ] = "qftrl"
    protocol: Annotated[
        Literal["standard", "restricted"],
        Field(description="`restricted` hides advice until the expert is chosen."),
    ] = "standard"
    n_experts: Annotated[int, Field(ge=1, le=4096, description="Number of experts N.")] = 8
    n_actions: Annotated[int, Field(ge=1, le=1024, description="Number of actions K.")] = 2
    horizon: Annotated[int, Field(ge=1, le=1_000_000, description="Number of rounds T.")] = 1000
    initial_guess: Annotated[
        Optional[float],
        Field(default=None, gt=0.0, description="Doubling policy initial guess J; defaults to ln(e^2 N)/T."),
    ] = None
    instance_model: Annotated[
        Literal["iid_dirichlet", "clustered", "identical", "hard_clique"],
        Field(description="Instance family generated per seed."),
    ] = "iid_dirichlet"
    loss_model: Annotated[
        Literal["iid_uniform", "adversarial_switch"],
        Field(description="Loss process of random instances."),
    ] = "iid_uniform"
    groups: Annotated[int, Field(ge=1, description="Group count of the clustered model.")] = 4
    seeds: Annotated[
        str,
        Field(description="Seed range `a..b` or comma list.", examples=["0..9", "1,2,3"]),
    ] = "0"
    capacity_diagnostics: Annotated[
        bool,
        Field(description="Estimate the per-round capacity (slow)."),
    ] = False
    max_workers: Annotated[int, Field(ge=1, le=32, description="Seeds run concurrently.")] = 3


class AsyncJobResponse(BaseModel):
    job_id: str


class JobStatusResponse(BaseModel):
    job_id: str
    status: JobStatus
    seeds_done: int
    seeds_total: int
    seeds_failed: int = 0
    seed_regrets: Dict[int, float] = Field(default_factory=dict, description="Regret of every seed finished so far")
    seed_errors: Dict[int, str] = Field(default_factory=dict, description="Error of every failed seed")
    result: Optional[RunSummary] = None
    error: Optional[str] = None

    @classmethod
    def from_job(cls, job: ExperimentJob) -> "JobStatusResponse":
        return cls(
            job_id=job.job_id,
            status=job.status,
            seeds_done=job.seeds_done,
            seeds_total=job.seeds_total,
            seeds_failed=job.seeds_failed,
            seed_regrets=job.seed_regrets,
            seed_errors=job.seed_errors,
            result=job.summary,
            error=job.error,
        )


class BoundsRequest(BaseModel):
    n_experts: Annotated[int, Field(ge=1)]
    n_actions: Annotated[int, Field(ge=1)]
    horizon: Annotated[int, Field(ge=1)]
    cbar: Annotated[float, Field(ge=0.0)] = 0.0
    initial_guess: Annotated[Optional[float], Field(default=None, gt=0.0)] = None


class BoundsResponse(BaseModel):
    theorem1: float
    theorem2: float
    theorem2_preset: float
    theorem2_applicable: bool
    initial_guess: float
    terms: List[float] = Field(description="sqrt, guess and restart terms of the general theorem 2 bound")


# ---------------------------------------------------------------------------
# Async experiment helpers
# ---------------------------------------------------------------------------


class _PipelineProgress:
    """Bridges ExperimentPipeline progress events to the JobStore."""

    def __init__(self, job_id: str, store: JobStore) -> None:
        self._job_id = job_id
        self._store = store

    def on_seeds_total(self, seeds_total: int) -> None:
        self._store.set_running(self._job_id, seeds_total)

    def on_seed_done(self, outcome: SeedOutcome, seeds_done: int, seeds_total: int) -> None:
        self._store.record_seed(self._job_id, outcome)


def _run_experiment_background(job_id: str, config: RunConfig, store: JobStore) -> None:
    """Synchronous background task that runs the experiment pipeline."""
    progress = _PipelineProgress(job_id, store)
    run_id = f"job_{job_id[:8]}"
    try:
        pipeline = ExperimentPipeline(config)
        result = asyncio.run(pipeline.execute(run_id, progress_callback=progress))
        store.set_done(job_id, result.summary)
    except Exception as exc:
        logger.error(f"[{run_id}] Experiment failed: {exc}")
        store.set_failed(job_id, str(exc))


# ---------------------------------------------------------------------------
# Routes
# ---------------------------------------------------------------------------


@app.get("/health", tags=["Meta"], summary="Liveness probe")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "service": "expert-advice-lab"}


@app.post(
    "/experiments",
    response_model=AsyncJobResponse,
    status_code=202,
    tags=["Experiments"],
    summary="Start an experiment",
    responses={400: {"description": "Inconsistent configuration (e.g. J > N, doubling under restricted)."}},
)
async def start_experiment(request: ExperimentRequest, background_tasks: BackgroundTasks):
    """Validate the configuration and run the experiment in the background."""
    request_id = f"req_{int(time.time() * 1000)}"
    try:
        config = RunConfig(
            **request.model_dump(),
            out_dir=get_settings().output_dir / request_id,
        )
        ExperimentPipeline(config)
    except (ValidationError, LabError) as exc:
        logger.error(f"[{request_id}] Rejected experiment: {exc}")
        raise HTTPException(status_code=400, detail=str(exc)) from exc

    job_id = job_store.create_job()
    logger.info(f"[{request_id}] POST /experiments → job {job_id}")
    background_tasks.add_task(_run_experiment_background, job_id, config, job_store)
    return AsyncJobResponse(job_id=job_id)


@app.get(
    "/experiments/{job_id}",
    response_model=JobStatusResponse,
    tags=["Experiments"],
    summary="Poll an experiment",
    responses={404: {"description": "Unknown job id."}},
)
async def get_experiment(job_id: str):
    job = job_store.get_job(job_id)
    if job is None:
        raise HTTPException(status_code=404, detail=f"Job {job_id} not found")
    return JobStatusResponse.from_job(job)


@app.post("/bounds", response_model=BoundsResponse, tags=["Bounds"], summary="Evaluate regret bounds")
async def evaluate_bounds(request: BoundsRequest):
    n, t = request.n_experts, request.horizon
    guess = request.initial_guess
    if guess is None:
        guess = min(theorem2_initial_guess(n, t), float(n))
    try:
        general = theorem2_bound(n, t, request.cbar, guess)
        preset = theorem2_preset_bound(n, t, request.cbar)
        theorem1 = theorem1_bound(n, request.n_actions, t)
    except LabError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return BoundsResponse(
        theorem1=theorem1,
        theorem2=general.value,
        theorem2_preset=preset.value,
        theorem2_applicable=general.applicable,
        initial_guess=guess,
        terms=[general.sqrt_term, general.guess_term, general.restart_term],
    )
