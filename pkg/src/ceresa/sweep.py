"""Parallel evaluation of many (N, k) jobs with the cache owned by the parent process.

Workers only compute; the parent looks up the cache, hands out misses, writes
every finished result to the cache as it arrives, and returns the outcomes in
job order so the emitted table never depends on completion order.
"""

from __future__ import annotations

import logging
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Sequence

from .cache import CacheKey, ResultCache
from .curve import CurveParams
from .errors import KOutOfRange
from .volume import DEFAULT_READING, VolumeResult, f_N_k, max_k, required_precision

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Job:
    N: int
    k: int = 1
    m: int | None = None
    m_choice: str = "small"
    digits: int = 10
    method: str = "both"
    reading: str = DEFAULT_READING
    prec_bits: int | None = None

    def resolved(self) -> Job:
        """Fill in m and prec_bits so the job maps to exactly one cache key."""
        m = self.m if self.m is not None else CurveParams.canonical(self.N, self.m_choice).m
        if not 1 <= self.k <= max_k(self.N):
            raise KOutOfRange(f"k={self.k} is outside [1, {max_k(self.N)}] for N={self.N}")
        prec = self.prec_bits or required_precision(self.N, self.k, self.digits)
        return Job(self.N, self.k, m, self.m_choice, self.digits, self.method, self.reading, prec)

    def key(self) -> CacheKey:
        return CacheKey(self.N, self.m, self.k, self.prec_bits, self.method, self.reading)


@dataclass
class Outcome:
    job: Job
    result: VolumeResult | None = None
    error: str | None = None
    cached: bool = False


def run_job(job: Job) -> dict:
    """Worker entry point; returns plain data so it pickles cheaply."""
    try:
        r = f_N_k(job.N, job.k, job.prec_bits, job.method, m=job.m, reading=job.reading)
        return {"ok": True, "result": r.to_dict(with_elapsed=True)}
    except Exception as exc:  # recorded per row, the sweep carries on
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}", "trace": traceback.format_exc()}


def _absorb(outcome: Outcome, payload: dict, cache: ResultCache | None) -> None:
    if payload["ok"]:
        outcome.result = VolumeResult.from_dict(payload["result"])
        if cache is not None:
            cache.put(outcome.result)
    else:
        outcome.error = payload["error"]
        log.error("N=%d k=%d failed: %s", outcome.job.N, outcome.job.k, payload["trace"])


def run_jobs(jobs: Sequence[Job], n_workers: int = 1, cache: ResultCache | None = None,
             progress: Callable[[Outcome], None] | None = None) -> list[Outcome]:
    outcomes: list[Outcome] = []
    todo: list[int] = []
    for job in jobs:
        try:
            job = job.resolved()
        except Exception as exc:
            outcomes.append(Outcome(job, error=f"{type(exc).__name__}: {exc}"))
            continue
        hit = cache.get(job.key()) if cache is not None else None
        outcomes.append(Outcome(job, result=hit, cached=hit is not None))
        if hit is None:
            todo.append(len(outcomes) - 1)
        elif progress:
            progress(outcomes[-1])

    if n_workers <= 1 or len(todo) <= 1:
        for i in todo:
            _absorb(outcomes[i], run_job(outcomes[i].job), cache)
            if progress:
                progress(outcomes[i])
        return outcomes

    # largest N first keeps the pool busy until the end
    todo.sort(key=lambda i: -outcomes[i].job.N)
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        futures = {pool.submit(run_job, outcomes[i].job): i for i in todo}
        for fut in as_completed(futures):
            i = futures[fut]
            try:
                payload = fut.result()
            except Exception as exc:  # worker died
                payload = {"ok": False, "error": f"{type(exc).__name__}: {exc}", "trace": ""}
            _absorb(outcomes[i], payload, cache)
            if progress:
                progress(outcomes[i])
    return outcomes


__all__ = ["Job", "Outcome", "run_job", "run_jobs"]
