"""Service for running one experiment over many seeds."""

import asyncio
import functools
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, List, Optional

logger = logging.getLogger(__name__)


@dataclass
class SeedOutcome:
    """Result of one seed, or the error that aborted it."""

    seed: int
    result: Optional[Any] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class SeedProcessor:
    """
    Runs a per-seed callable for every seed, preserving seed order.

    For a single seed the run happens inline in the event loop. For several
    seeds a ThreadPoolExecutor is used; each worker owns its seed's policy,
    instance and generators, and nothing is shared between workers.
    """

    async def process_seeds(
        self,
        run_seed: Callable[[int], Any],
        seeds: List[int],
        run_id: str,
        max_workers: int = 3,
        on_seed_done: Optional[Callable[[SeedOutcome, int, int], None]] = None,
    ) -> List[SeedOutcome]:
        """
        Run *run_seed* for every seed.

        Args:
            run_seed:     Callable doing the whole run of one seed.
            seeds:        Ordered seed list.
            run_id:       Identifier used for correlated log lines.
            max_workers:  Maximum parallel threads when len(seeds) > 1.
            on_seed_done: Optional callback(outcome, seeds_done, total_seeds)
                          fired after each seed finishes, failed seeds
                          included.
                          Called from worker threads.

        Returns:
            One SeedOutcome per seed, in the order of *seeds*. A seed that
            raises is reported with its error and does not abort the others.
        """
        total = len(seeds)
        done_count = [0]
        done_lock = threading.Lock()

        def _report(outcome: SeedOutcome) -> None:
            if on_seed_done is None:
                return
            with done_lock:
                done_count[0] += 1
                n = done_count[0]
            on_seed_done(outcome, n, total)

        if total == 1:
            return [self._run_one(run_seed, seeds[0], run_id, _report)]

        logger.info(f"[{run_id}] Starting parallel run: {total} seeds, {max_workers} workers")
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = [
                loop.run_in_executor(
                    executor,
                    functools.partial(self._run_one, run_seed, seed, run_id, _report),
                )
                for seed in seeds
            ]
            results = await asyncio.gather(*futures, return_exceptions=True)

        outcomes: List[SeedOutcome] = []
        for seed, result in zip(seeds, results):
            if isinstance(result, BaseException):
                logger.error(f"[{run_id}] Seed {seed} raised outside its worker: {result}")
                outcomes.append(SeedOutcome(seed=seed, error=str(result)))
            else:
                outcomes.append(result)
        failed = sum(1 for outcome in outcomes if not outcome.ok)
        logger.info(f"[{run_id}] Parallel run complete: {total - failed}/{total} seeds succeeded")
        return outcomes

    def _run_one(
        self,
        run_seed: Callable[[int], Any],
        seed: int,
        run_id: str,
        seed_done_hook: Optional[Callable[[SeedOutcome], None]] = None,
    ) -> SeedOutcome:
        start = time.time()
        logger.info(f"[{run_id}] Seed {seed} started")
        try:
            outcome = SeedOutcome(seed=seed, result=run_seed(seed))
            logger.info(f"[{run_id}] Seed {seed} done in {time.time() - start:.3f}s")
        except Exception as exc:
            logger.error(f"[{run_id}] Seed {seed} failed after {time.time() - start:.3f}s: {exc}")
            outcome = SeedOutcome(seed=seed, error=f"{type(exc).__name__}: {exc}")
        if seed_done_hook is not None:
            seed_done_hook(outcome)
        return outcome
