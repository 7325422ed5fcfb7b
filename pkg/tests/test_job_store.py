"""
Tests for src/expert_advice_lab/services/job_store.py

Coverage
--------
- create_job: UUID id, pending job with no seeds recorded
- get_job: None for unknown ids, snapshots that later updates do not touch
- record_seed: regrets of successful seeds, errors of failed ones, thread safety
- set_done keeps the typed run summary; set_failed keeps the error
- unknown ids are ignored by every mutator
"""

import threading
import uuid

import pytest

from src.expert_advice_lab.services.experiment_pipeline import BoundSummary, RunSummary, SeedResult, SeedSummary
from src.expert_advice_lab.services.job_store import JobStatus, JobStore
from src.expert_advice_lab.services.seed_processor import SeedOutcome


@pytest.fixture()
def store() -> JobStore:
    return JobStore()


def _seed_result(regret: float) -> SeedResult:
    return SeedResult(records=[], regret=regret, q_average=0.5, capacity_estimate=None, restarts=[])


def _summary(seeds_failed: int = 0) -> RunSummary:
    return RunSummary(
        run_id="job_test",
        policy="qftrl",
        protocol="standard",
        n_experts=4,
        n_actions=2,
        horizon=50,
        seeds=[SeedSummary(seed=0, regret=1.5, q_average=0.5)],
        seeds_failed=seeds_failed,
        mean_regret=1.5,
        bounds=BoundSummary(theorem1=20.0, initial_guess=0.0677, theorem2_applicable=True, max_restarts=7),
    )


# ---------------------------------------------------------------------------
# create_job / get_job
# ---------------------------------------------------------------------------


def test_create_job_returns_valid_uuid(store: JobStore) -> None:
    uuid.UUID(store.create_job())


def test_new_job_is_pending_and_empty(store: JobStore) -> None:
    job_id = store.create_job()
    job = store.get_job(job_id)
    assert job.job_id == job_id
    assert job.status is JobStatus.PENDING
    assert (job.seeds_done, job.seeds_total, job.seeds_failed) == (0, 0, 0)
    assert job.summary is None and job.error is None


def test_get_job_returns_none_for_unknown_id(store: JobStore) -> None:
    assert store.get_job("nonexistent-id") is None


def test_snapshot_is_not_updated_by_later_seeds(store: JobStore) -> None:
    job_id = store.create_job()
    store.set_running(job_id, seeds_total=2)
    snapshot = store.get_job(job_id)
    store.record_seed(job_id, SeedOutcome(seed=0, result=_seed_result(3.0)))
    store.record_seed(job_id, SeedOutcome(seed=1, error="NumericalError: no bracket"))
    assert snapshot.seeds_done == 0
    assert snapshot.seed_regrets == {} and snapshot.seed_errors == {}
    assert store.get_job(job_id).seeds_done == 2


# ---------------------------------------------------------------------------
# Seed progress
# ---------------------------------------------------------------------------


def test_set_running_records_seed_total(store: JobStore) -> None:
    job_id = store.create_job()
    store.set_running(job_id, seeds_total=20)
    job = store.get_job(job_id)
    assert job.status is JobStatus.RUNNING
    assert job.seeds_total == 20


def test_record_seed_keeps_regrets_and_errors(store: JobStore) -> None:
    job_id = store.create_job()
    store.set_running(job_id, seeds_total=3)
    store.record_seed(job_id, SeedOutcome(seed=4, result=_seed_result(-0.25)))
    store.record_seed(job_id, SeedOutcome(seed=7, error="ProtocolViolation: zero mass"))
    store.record_seed(job_id, SeedOutcome(seed=9, result=_seed_result(2.0)))
    job = store.get_job(job_id)
    assert job.seeds_done == 3
    assert job.seeds_failed == 1
    assert job.seed_regrets == {4: -0.25, 9: 2.0}
    assert job.seed_errors == {7: "ProtocolViolation: zero mass"}


def test_record_seed_thread_safe(store: JobStore) -> None:
    job_id = store.create_job()
    total = 50
    store.set_running(job_id, seeds_total=total)
    threads = [
        threading.Thread(
            target=store.record_seed,
            args=(job_id, SeedOutcome(seed=seed, result=_seed_result(float(seed)))),
        )
        for seed in range(total)
    ]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    job = store.get_job(job_id)
    assert job.seeds_done == total
    assert job.seed_regrets == {seed: float(seed) for seed in range(total)}


# ---------------------------------------------------------------------------
# Terminal states
# ---------------------------------------------------------------------------


def test_set_done_stores_summary(store: JobStore) -> None:
    job_id = store.create_job()
    summary = _summary()
    store.set_done(job_id, summary)
    job = store.get_job(job_id)
    assert job.status is JobStatus.DONE
    assert job.summary == summary
    assert job.summary.bounds.max_restarts == 7


def test_set_failed_stores_error(store: JobStore) -> None:
    job_id = store.create_job()
    store.set_failed(job_id, "InputError: bad instance")
    job = store.get_job(job_id)
    assert job.status is JobStatus.FAILED
    assert job.error == "InputError: bad instance"


def test_mutators_ignore_unknown_ids(store: JobStore) -> None:
    store.set_running("missing", 3)
    store.record_seed("missing", SeedOutcome(seed=0, result=_seed_result(1.0)))
    store.set_done("missing", _summary())
    store.set_failed("missing", "x")
    assert store.get_job("missing") is None
