"""Benchmark procedures over the task runtime.

Five cases: a manual-callback sum baseline, left- and right-associated
recursive sums, and two cartesian-product shapes (separate cell/list
functions vs. one merged comprehension).  Every case verifies its result
against a closed-form oracle; no timing row is emitted on a mismatch.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from typing import Callable

from .descriptors import INT, Collection, task_domain
from .keywords import Each
from .registry import default_registry
from .task import (
    DeterministicScheduler,
    PoolScheduler,
    blocking_await,
    task_bind,
    task_unit,
    use_scheduler,
)
from .trampoline import StackProbe, set_stack_probe

AWAIT_TIMEOUT = 600.0


class BenchGateError(Exception):
    """A case produced a result that disagrees with its oracle."""


@dataclass(frozen=True)
class BenchResult:
    case: str
    size: int
    iterations: int
    wall_time_ns: int
    ops_per_sec: float
    stack_probe_max: int

    def row(self) -> dict:
        return {
            "case": self.case,
            "size": self.size,
            "iterations": self.iterations,
            "wall_time_ns": self.wall_time_ns,
            "ops_per_sec": self.ops_per_sec,
            "stack_probe_max": self.stack_probe_max,
        }


# ---------------------------------------------------------------------------
# Sum procedures: size unit tasks, reduced to one total.


def _unit_tasks(size):
    return [task_unit(1) for _ in range(size)]


def sum_baseline(tasks):
    """Manual callback threading: the loop itself is the CPS function and
    the only allocation per step is the handler closure."""

    def task(callback):
        def loop(index, accumulator):
            if index == len(tasks):
                return callback(accumulator)
            return tasks[index](lambda i: loop(index + 1, i + accumulator))

        return loop(0, 0)

    return task


def sum_left(tasks, index=0):
    """Left-associated reduction: the addition happens after the recursive
    total returns, so a pending continuation accumulates per element."""
    if index == len(tasks):
        return task_unit(0)
    return task_bind(
        tasks[index],
        lambda i: task_bind(
            sum_left(tasks, index + 1),
            lambda accumulator: task_unit(i + accumulator),
        ),
    )


def sum_right(tasks, index=0, accumulator=0):
    """Right-associated reduction with an accumulator: the recursive call is
    the handler's tail result, so the loop runs in constant stack."""
    if index == len(tasks):
        return task_unit(accumulator)
    return task_bind(
        tasks[index],
        lambda i: sum_right(tasks, index + 1, i + accumulator),
    )


# ---------------------------------------------------------------------------
# Cartesian procedures: all ordered pairs over two task lists, each cell
# contributing the two awaited values.


def _each_interpretation():
    registry = default_registry()
    domain = task_domain(Collection("List", INT))
    interp, _trace = registry.resolve("Each", domain)
    return interp


def cartesian_traverse(each_interp, rows, columns):
    def cell_task(task_x, task_y):
        return task_bind(
            task_x,
            lambda x: task_bind(task_y, lambda y: task_unit([x, y])),
        )

    return each_interp.apply(
        Each(rows),
        lambda task_x: each_interp.apply(
            Each(columns),
            lambda task_y: cell_task(task_x, task_y),
        ),
    )


def cartesian_comprehension(each_interp, tasks):
    """Cell and list collapsed into one expression: awaits happen inline
    under the element enumeration instead of in a helper task."""
    return each_interp.apply(
        Each(tasks),
        lambda task_x: task_bind(
            task_x,
            lambda x: each_interp.apply(
                Each(tasks),
                lambda task_y: task_bind(
                    task_y, lambda y: task_unit([x, y])
                ),
            ),
        ),
    )


# ---------------------------------------------------------------------------
# Case registry.


@dataclass(frozen=True)
class BenchCase:
    name: str
    default_size: int
    setup: Callable[[int], Callable[[], object]]
    oracle: Callable[[int], object]


def _setup_sum(builder):
    def setup(size):
        tasks = _unit_tasks(size)
        return lambda: builder(tasks)

    return setup


def _setup_cartesian_traverse(size):
    interp = _each_interpretation()
    rows = _unit_tasks(size)
    columns = _unit_tasks(size)
    return lambda: cartesian_traverse(interp, rows, columns)


def _setup_cartesian_comprehension(size):
    interp = _each_interpretation()
    tasks = _unit_tasks(size)
    return lambda: cartesian_comprehension(interp, tasks)


def _cartesian_oracle(size):
    return [1, 1] * (size * size)


CASES = {
    case.name: case
    for case in (
        BenchCase("sum-baseline", 1000, _setup_sum(sum_baseline), lambda n: n),
        BenchCase("sum-left", 1000, _setup_sum(sum_left), lambda n: n),
        BenchCase("sum-right", 1000, _setup_sum(sum_right), lambda n: n),
        BenchCase("cartesian-traverse", 50, _setup_cartesian_traverse,
                  _cartesian_oracle),
        BenchCase("cartesian-comprehension", 50, _setup_cartesian_comprehension,
                  _cartesian_oracle),
    )
}


def make_scheduler(spec: str):
    if spec == "deterministic":
        return DeterministicScheduler()
    if spec.startswith("pool:"):
        return PoolScheduler(int(spec.split(":", 1)[1]))
    if spec == "pool":
        return PoolScheduler()
    raise ValueError(f"unknown scheduler {spec!r}")


def run_case(case_name: str, size: int | None = None,
             scheduler: str = "deterministic",
             iterations: int = 1) -> BenchResult:
    """Run one case, verifying every iteration's result against the oracle.

    The row is only constructed after all checks pass, so a wrong result can
    never yield a timing.
    """
    case = CASES[case_name]
    if size is None:
        size = case.default_size
    build = case.setup(size)
    expected = case.oracle(size)

    sched = make_scheduler(scheduler)
    probe = StackProbe()
    previous = set_stack_probe(probe)
    try:
        with use_scheduler(sched):
            started = time.perf_counter_ns()
            for _ in range(iterations):
                result = blocking_await(build(), timeout=AWAIT_TIMEOUT,
                                        scheduler=sched)
                if result != expected:
                    raise BenchGateError(
                        f"{case_name} size {size}: computed "
                        f"{_summarize(result)}, oracle {_summarize(expected)}"
                    )
            wall_time_ns = time.perf_counter_ns() - started
    finally:
        set_stack_probe(previous)
        if hasattr(sched, "shutdown"):
            sched.shutdown()

    return BenchResult(
        case=case_name,
        size=size,
        iterations=iterations,
        wall_time_ns=wall_time_ns,
        ops_per_sec=iterations * size / (wall_time_ns / 1_000_000_000),
        stack_probe_max=probe.max_depth,
    )


def _summarize(value):
    if isinstance(value, list) and len(value) > 8:
        return f"list of {len(value)} elements starting {value[:4]}"
    return repr(value)


def format_rows(results, fmt: str) -> str:
    rows = [result.row() for result in results]
    if fmt == "json":
        return json.dumps(rows, indent=2)
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
        return out.getvalue()
    raise ValueError(f"unknown format {fmt!r}")
