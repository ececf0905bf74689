"""Lazy stream cells: memoization, poisoning, lazy concatenation."""

import pytest

from dslkit.lazystream import EMPTY, Cons, concat, from_list


def counting(result):
    calls = []

    def thunk():
        calls.append(1)
        return result

    return thunk, calls


def test_round_trip():
    assert from_list([1, 2, 3]).to_list() == [1, 2, 3]
    assert from_list([]).to_list() == []
    assert from_list(iter("abc")).to_list() == ["a", "b", "c"]


def test_take_stops_early_and_short():
    stream = from_list([1, 2, 3])
    assert stream.take(2) == [1, 2]
    assert stream.take(10) == [1, 2, 3]
    assert EMPTY.take(3) == []


def test_empty_accessors_raise():
    assert EMPTY.is_empty
    with pytest.raises(IndexError):
        EMPTY.head
    with pytest.raises(IndexError):
        EMPTY.tail


def test_tail_is_memoized():
    thunk, calls = counting(from_list([2]))
    stream = Cons(1, thunk)
    assert stream.tail.head == 2
    assert stream.tail.head == 2
    assert calls == [1]


def test_failing_tail_is_poisoned_not_retried():
    calls = []

    def thunk():
        calls.append(1)
        raise RuntimeError("boom")

    stream = Cons(1, thunk)
    for _ in range(3):
        with pytest.raises(RuntimeError, match="boom"):
            stream.tail
    assert calls == [1]


def test_concat_is_lazy_in_rest():
    # Advancing past element k forces cell k+1, so only take(1) leaves the
    # appended tail untouched.
    thunk, calls = counting(from_list([3, 4]))
    combined = concat(from_list([1, 2]), thunk)
    assert combined.take(1) == [1]
    assert calls == []
    assert combined.to_list() == [1, 2, 3, 4]
    assert calls == [1]


def test_concat_with_empty_head_forces_rest():
    thunk, calls = counting(from_list([1]))
    assert concat(EMPTY, thunk).to_list() == [1]
    assert calls == [1]


def test_iteration_protocol():
    assert list(from_list([1, 2, 3])) == [1, 2, 3]


def test_long_forcing_is_stack_safe():
    def count_up(n):
        return Cons(n, lambda: count_up(n + 1))

    assert count_up(0).take(50_000)[-1] == 49_999
