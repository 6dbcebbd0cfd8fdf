import threading
import time
from fractions import Fraction

import pytest

from numeric_utils import DomainError
from sweep_queue import SweepQueue, parse_sweep, run_sweep


def test_parse_sweep():
    assert parse_sweep("t=0:1/2:1/4") == ("t", [Fraction(0), Fraction(1, 4), Fraction(1, 2)])
    assert parse_sweep(" s = 1/3:1/3:1") == ("s", [Fraction(1, 3)])
    assert parse_sweep("tol=0.1:0.35:0.1")[1] == [Fraction(1, 10), Fraction(2, 10), Fraction(3, 10)]


@pytest.mark.parametrize("text", ["t", "t=0:1", "=0:1:1", "t=0:1:0", "t=1:0:1", "t=a:b:c"])
def test_parse_sweep_rejects(text):
    with pytest.raises(ValueError):
        parse_sweep(text)


def test_results_keep_parameter_order():
    def slow_square(x):
        # Earlier points finish last
        time.sleep(float(1 - x) / 50)
        return x * x

    values = [Fraction(k, 8) for k in range(8)]
    jobs = run_sweep(slow_square, values, workers=4)
    assert [job.value for job in jobs] == values
    assert [job.result for job in jobs] == [v * v for v in values]
    assert all(job.status == "completed" for job in jobs)


def test_failures_are_recorded_per_point():
    def evaluate(x):
        if x == 1:
            raise DomainError("diverges at 1")
        return x

    jobs = run_sweep(evaluate, [Fraction(0), Fraction(1), Fraction(2)], workers=2)
    assert [job.status for job in jobs] == ["completed", "failed", "completed"]
    assert jobs[1].error == "diverges at 1"
    assert jobs[2].completed_at is not None


def test_queue_status_and_shutdown():
    release = threading.Event()
    sweep = SweepQueue(lambda x: release.wait(5) and x, workers=1)
    sweep.add_job(Fraction(1))
    sweep.add_job(Fraction(2))
    status = sweep.get_queue_status()
    assert sum(status["jobs"].values()) == 2
    release.set()
    assert [job.result for job in sweep.results()] == [Fraction(1), Fraction(2)]
    sweep.close()
    assert not any(worker.is_alive() for worker in sweep.workers)
