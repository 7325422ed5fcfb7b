"""In-memory store of experiments launched over HTTP.

A job moves pending → running → done | failed. While it runs, every finished
seed is recorded with its regret or its error, so a poll shows partial
results before the run summary exists. One lock guards all mutations
because seeds finish on worker threads.
"""

import dataclasses
import threading
import uuid
from enum import Enum
from typing import Dict, Optional

from .experiment_pipeline import RunSummary, SeedResult
from .seed_processor import SeedOutcome


class JobStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclasses.dataclass
class ExperimentJob:
    job_id: str
    status: JobStatus = JobStatus.PENDING
    seeds_total: int = 0
    seeds_done: int = 0
    seed_regrets: Dict[int, float] = dataclasses.field(default_factory=dict)
    seed_errors: Dict[int, str] = dataclasses.field(default_factory=dict)
    summary: Optional[RunSummary] = None
    error: Optional[str] = None

    @property
    def seeds_failed(self) -> int:
        return len(self.seed_errors)


class JobStore:
    def __init__(self) -> None:
        self._jobs: Dict[str, ExperimentJob] = {}
        self._lock = threading.Lock()

    def create_job(self) -> str:
        job_id = str(uuid.uuid4())
        with self._lock:
            self._jobs[job_id] = ExperimentJob(job_id=job_id)
        return job_id

    def get_job(self, job_id: str) -> Optional[ExperimentJob]:
        """Snapshot of the job; later updates do not show through it."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return None
            return dataclasses.replace(
                job, seed_regrets=dict(job.seed_regrets), seed_errors=dict(job.seed_errors)
            )

    def set_running(self, job_id: str, seeds_total: int) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is not None:
                job.status = JobStatus.RUNNING
                job.seeds_total = seeds_total

    def record_seed(self, job_id: str, outcome: SeedOutcome) -> None:
        """Count a finished seed and keep its regret, or its error if it failed."""
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                return
            job.seeds_done += 1
            if not outcome.ok:
                job.seed_errors[outcome.seed] = outcome.error or "unknown error"
            elif isinstance(outcome.result, SeedResult):
                job.seed_regrets[outcome.seed] = outcome.result.regret

    def set_done(self, job_id: str, summary: RunSummary) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is not None:
                job.status = JobStatus.DONE
                job.summary = summary

    def set_failed(self, job_id: str, error: str) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is not None:
                job.status = JobStatus.FAILED
                job.error = error
