"""Threaded parameter sweeps with results reported in parameter order."""

import queue
import threading
import logging
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from typing import Any, Callable, Optional

from config_manager import SWEEP_WORKERS
from numeric_utils import format_rational, parse_rational

logger = logging.getLogger("measureit.sweep_queue")


def parse_sweep(text):
    """"name=lo:hi:step" -> (name, [lo, lo + step, ..., <= hi]) with exact rationals."""
    name, sep, body = text.partition("=")
    parts = body.split(":")
    if not sep or not name.strip() or len(parts) != 3:
        raise ValueError(f"sweep must look like name=lo:hi:step, got {text!r}")
    lo, hi, step = (parse_rational(p) for p in parts)
    if step <= 0:
        raise ValueError("sweep step must be positive")
    if hi < lo:
        raise ValueError("sweep upper end lies below its lower end")
    count = int((hi - lo) / step) + 1
    return name.strip(), [lo + k * step for k in range(count)]


@dataclass
class SweepJob:
    index: int
    value: Fraction
    status: str = "pending"  # pending, processing, completed, failed
    result: Any = None
    error: Optional[str] = None
    created_at: datetime = None
    completed_at: datetime = None

    def __post_init__(self):
        if self.created_at is None:
            self.created_at = datetime.now()


class SweepQueue:
    """Worker threads evaluating one function at many parameter values."""

    def __init__(self, evaluate: Callable[[Fraction], Any], workers=None):
        self.evaluate = evaluate
        self.queue = queue.Queue()
        self.jobs = {}
        self.lock = threading.Lock()
        self.workers = [
            threading.Thread(target=self._process_queue, daemon=True)
            for _ in range(max(1, workers or SWEEP_WORKERS))
        ]
        for worker in self.workers:
            worker.start()

    def add_job(self, value) -> int:
        with self.lock:
            index = len(self.jobs)
            job = SweepJob(index=index, value=value)
            self.jobs[index] = job
        self.queue.put(job)
        return index

    def get_queue_status(self):
        with self.lock:
            counts = {}
            for job in self.jobs.values():
                counts[job.status] = counts.get(job.status, 0) + 1
            return {"queue_size": self.queue.qsize(), "jobs": counts}

    def _process_queue(self):
        while True:
            job = self.queue.get()
            if job is None:
                self.queue.task_done()
                return
            with self.lock:
                job.status = "processing"
            try:
                result = self.evaluate(job.value)
                with self.lock:
                    job.result = result
                    job.status = "completed"
            except Exception as e:
                with self.lock:
                    job.status = "failed"
                    job.error = str(e)
                logger.error(f"Sweep point {format_rational(job.value)} failed: {e}")
            finally:
                job.completed_at = datetime.now()
                self.queue.task_done()

    def close(self):
        for _ in self.workers:
            self.queue.put(None)
        for worker in self.workers:
            worker.join()

    def results(self):
        """Block until every job ran; jobs in submission order."""
        self.queue.join()
        with self.lock:
            return [self.jobs[i] for i in sorted(self.jobs)]


def run_sweep(evaluate, values, workers=None):
    """Evaluate at every value concurrently; returns the jobs ordered like `values`."""
    sweep = SweepQueue(evaluate, workers)
    try:
        for value in values:
            sweep.add_job(value)
        jobs = sweep.results()
    finally:
        sweep.close()
    failed = sum(1 for job in jobs if job.status == "failed")
    logger.info(f"Sweep finished: {len(jobs)} points, {failed} failed")
    return jobs
