"""Asynchronous explanation jobs.

Explanations are slow (hundreds to thousands of model calls), and blocking
the API on them measurably hurt perceived dependability, so they run on a
bounded worker pool: at most K jobs concurrently, the rest queued FIFO.
Status only ever moves forward: queued -> running -> done | failed.
"""

from __future__ import annotations

import hashlib
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

_ORDER = {"queued": 0, "running": 1, "done": 2, "failed": 2}


@dataclass
class ExplainJob:
    job_id: str
    seed: int
    status: str = "queued"
    submitted_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )
    result: dict | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "status": self.status,
            "submitted_at": self.submitted_at,
            "seed": self.seed,
            "result": self.result,
            "error": self.error,
        }


def derive_seed(job_id: str) -> int:
    return int.from_bytes(hashlib.sha256(job_id.encode()).digest()[:4], "big")


class JobManager:
    def __init__(self, concurrency: int = 2):
        self._pool = ThreadPoolExecutor(max_workers=max(1, concurrency))
        self._jobs: dict[str, ExplainJob] = {}
        self._lock = threading.Lock()

    def submit(self, work: Callable[[ExplainJob], dict], seed: int | None = None) -> ExplainJob:
        job_id = uuid.uuid4().hex[:12]
        job = ExplainJob(job_id=job_id, seed=derive_seed(job_id) if seed is None else seed)
        with self._lock:
            self._jobs[job_id] = job
        self._pool.submit(self._run, job, work)
        return job

    def _advance(self, job: ExplainJob, status: str):
        with self._lock:
            if _ORDER[status] < _ORDER[job.status]:
                raise RuntimeError(f"job {job.job_id}: illegal transition {job.status} -> {status}")
            job.status = status

    def _run(self, job: ExplainJob, work: Callable[[ExplainJob], dict]):
        self._advance(job, "running")
        try:
            result = work(job)
        except Exception as exc:
            with self._lock:
                job.error = f"{type(exc).__name__}: {exc}"
            self._advance(job, "failed")
            return
        with self._lock:
            job.result = result
        self._advance(job, "done")

    def get(self, job_id: str) -> ExplainJob | None:
        with self._lock:
            return self._jobs.get(job_id)

    def shutdown(self):
        self._pool.shutdown(wait=False, cancel_futures=True)
