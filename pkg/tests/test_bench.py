"""Benchmark harness: oracle gates, row schema, formatting, schedulers."""

import csv
import io
import json

import pytest

from dslkit.bench import (
    CASES,
    BenchCase,
    BenchGateError,
    BenchResult,
    cartesian_comprehension,
    cartesian_traverse,
    format_rows,
    make_scheduler,
    run_case,
    sum_baseline,
    sum_left,
    sum_right,
    _each_interpretation,
    _unit_tasks,
)
from dslkit.task import (
    DeterministicScheduler,
    PoolScheduler,
    blocking_await,
    use_scheduler,
)

ROW_FIELDS = [
    "case", "size", "iterations", "wall_time_ns", "ops_per_sec",
    "stack_probe_max",
]


def run(task):
    sched = DeterministicScheduler()
    with use_scheduler(sched):
        return blocking_await(task, timeout=10.0, scheduler=sched)


class TestProcedures:
    def test_sum_baseline(self):
        assert run(sum_baseline(_unit_tasks(5))) == 5

    def test_sum_of_zero_tasks(self):
        assert run(sum_baseline(_unit_tasks(0))) == 0
        assert run(sum_left(_unit_tasks(0))) == 0
        assert run(sum_right(_unit_tasks(0))) == 0

    def test_sum_left(self):
        assert run(sum_left(_unit_tasks(7))) == 7

    def test_sum_right(self):
        assert run(sum_right(_unit_tasks(7))) == 7

    def test_cartesian_traverse(self):
        interp = _each_interpretation()
        result = run(cartesian_traverse(interp, _unit_tasks(3), _unit_tasks(3)))
        assert result == [1, 1] * 9

    def test_cartesian_comprehension(self):
        interp = _each_interpretation()
        result = run(cartesian_comprehension(interp, _unit_tasks(3)))
        assert result == [1, 1] * 9


class TestRunCase:
    @pytest.mark.parametrize("name", sorted(CASES))
    def test_every_case_passes_its_gate_small(self, name):
        result = run_case(name, size=5)
        assert result.case == name
        assert result.size == 5
        assert result.iterations == 1
        assert result.wall_time_ns > 0

    def test_default_sizes(self):
        assert CASES["sum-baseline"].default_size == 1000
        assert CASES["sum-right"].default_size == 1000
        assert CASES["cartesian-traverse"].default_size == 50

    def test_row_schema_and_order(self):
        row = run_case("sum-right", size=5).row()
        assert list(row.keys()) == ROW_FIELDS

    def test_ops_per_sec_consistent_with_wall_time(self):
        result = run_case("sum-right", size=20, iterations=3)
        expected = 3 * 20 / (result.wall_time_ns / 1_000_000_000)
        assert result.ops_per_sec == pytest.approx(expected)

    def test_stack_probe_recorded(self):
        result = run_case("sum-right", size=50)
        assert result.stack_probe_max > 0

    def test_right_sum_probe_is_size_independent(self):
        small = run_case("sum-right", size=100)
        large = run_case("sum-right", size=10_000)
        assert small.stack_probe_max == large.stack_probe_max

    def test_gate_failure_raises_before_any_row(self, monkeypatch):
        broken = BenchCase(
            "sum-right", 1000, CASES["sum-right"].setup, lambda n: n + 1
        )
        monkeypatch.setitem(CASES, "sum-right", broken)
        with pytest.raises(BenchGateError, match="sum-right size 5"):
            run_case("sum-right", size=5)

    def test_pool_scheduler_spec(self):
        result = run_case("sum-right", size=5, scheduler="pool:2")
        assert result.size == 5

    def test_unknown_case(self):
        with pytest.raises(KeyError):
            run_case("nope")


class TestMakeScheduler:
    def test_deterministic(self):
        assert isinstance(make_scheduler("deterministic"),
                          DeterministicScheduler)

    def test_pool_sized(self):
        sched = make_scheduler("pool:3")
        try:
            assert isinstance(sched, PoolScheduler)
        finally:
            sched.shutdown()

    def test_pool_default(self):
        sched = make_scheduler("pool")
        try:
            assert isinstance(sched, PoolScheduler)
        finally:
            sched.shutdown()

    def test_unknown_spec(self):
        with pytest.raises(ValueError, match="unknown scheduler"):
            make_scheduler("threads")


class TestFormatRows:
    @pytest.fixture
    def result(self):
        return BenchResult(
            case="sum-right", size=10, iterations=2,
            wall_time_ns=4_000_000, ops_per_sec=5000.0, stack_probe_max=11,
        )

    def test_json_array(self, result):
        rows = json.loads(format_rows([result], "json"))
        assert rows == [result.row()]

    def test_csv_round_trips_numerically(self, result):
        text = format_rows([result], "csv")
        parsed = next(iter(csv.DictReader(io.StringIO(text))))
        assert parsed["case"] == "sum-right"
        assert int(parsed["size"]) == result.size
        assert int(parsed["iterations"]) == result.iterations
        assert int(parsed["wall_time_ns"]) == result.wall_time_ns
        assert float(parsed["ops_per_sec"]) == result.ops_per_sec
        assert int(parsed["stack_probe_max"]) == result.stack_probe_max

    def test_csv_header_order(self, result):
        header = format_rows([result], "csv").splitlines()[0]
        assert header.split(",") == ROW_FIELDS

    def test_unknown_format(self, result):
        with pytest.raises(ValueError, match="unknown format"):
            format_rows([result], "yaml")
