"""Memoized lazy streams.

A stream is either empty or a cons cell whose tail is computed on first
access and cached, so generator-style code pays for each element once and an
infinite stream can be forced element by element in constant native stack.
"""

from __future__ import annotations


_UNFORCED = object()


class LazyStream:
    __slots__ = ()

    @property
    def is_empty(self):
        raise NotImplementedError

    def take(self, n):
        """First n elements as a list (fewer if the stream ends early)."""
        out = []
        node = self
        while n > 0 and not node.is_empty:
            out.append(node.head)
            node = node.tail
            n -= 1
        return out

    def to_list(self):
        out = []
        node = self
        while not node.is_empty:
            out.append(node.head)
            node = node.tail
        return out

    def __iter__(self):
        node = self
        while not node.is_empty:
            yield node.head
            node = node.tail


class Empty(LazyStream):
    __slots__ = ()

    @property
    def is_empty(self):
        return True

    @property
    def head(self):
        raise IndexError("head of empty stream")

    @property
    def tail(self):
        raise IndexError("tail of empty stream")

    def __repr__(self):
        return "Stream()"


EMPTY = Empty()


class Cons(LazyStream):
    __slots__ = ("head", "_tail_thunk", "_tail")

    def __init__(self, head, tail_thunk):
        self.head = head
        self._tail_thunk = tail_thunk
        self._tail = _UNFORCED

    @property
    def is_empty(self):
        return False

    @property
    def tail(self):
        # The thunk runs at most once; an exception is cached and re-raised so
        # retries cannot observe a second evaluation.
        if self._tail is _UNFORCED:
            try:
                self._tail = self._tail_thunk()
            except BaseException as exc:
                self._tail = _Poisoned(exc)
            self._tail_thunk = None
        if isinstance(self._tail, _Poisoned):
            raise self._tail.exc
        return self._tail

    def __repr__(self):
        return f"Stream({self.head!r}, ...)"


class _Poisoned:
    __slots__ = ("exc",)

    def __init__(self, exc):
        self.exc = exc


def from_list(items) -> LazyStream:
    stream = EMPTY
    for item in reversed(list(items)):
        stream = Cons(item, (lambda s: lambda: s)(stream))
    return stream


def concat(stream: LazyStream, rest_thunk) -> LazyStream:
    """Lazy append: rest_thunk is not forced until `stream` is exhausted."""
    if stream.is_empty:
        return rest_thunk()
    return Cons(stream.head, lambda: concat(stream.tail, rest_thunk))
