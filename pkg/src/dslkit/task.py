"""The asynchronous task domain.

A task is a curried continuation: run(success)(failure) -> Trampoline[Unit],
where success maps the value to the failure-accepting rest and failure maps
an exception to a trampoline.  Every built task suspends before delivering,
so long bind chains unwind on the trampoline runner in constant native
stack.  Exactly one of success/failure is invoked, exactly once, per run.

Schedulers drive trampolines: a deterministic single-threaded queue with
virtual time for tests, and a fixed-size worker pool for benchmarks.
`blocking_await` installs a scheduler, drives the task to completion and
returns (or raises) its outcome.
"""

from __future__ import annotations

import heapq
import itertools
import os
import threading
from collections import deque
from dataclasses import dataclass
from typing import Any

from . import deferred as deferred_mod
from .core import DslError, Interpretation, KeywordValue
from .deferred import BlockingTimeout, Deferred
from .descriptors import (ANY, HINT, Collection, ErrorLayer, Fn, PVar,
                          TrampolineType, UNIT)
from .keywords import (collection_kind, concat_collections, empty_collection,
                       iterate_source)
from .trampoline import Done, More, probe_point, run_trampoline


# ---------------------------------------------------------------------------
# Schedulers

_current_scheduler = None


class SchedulerError(DslError):
    pass


def current_scheduler():
    if _current_scheduler is None:
        raise SchedulerError("no scheduler installed; drive tasks through blocking_await")
    return _current_scheduler


class _Installed:
    def __init__(self, scheduler):
        self.scheduler = scheduler

    def __enter__(self):
        global _current_scheduler
        self.previous = _current_scheduler
        _current_scheduler = self.scheduler
        self.previous_pump = deferred_mod.set_pump_hook(self.scheduler.pump)
        return self.scheduler

    def __exit__(self, *exc_info):
        global _current_scheduler
        _current_scheduler = self.previous
        deferred_mod.set_pump_hook(self.previous_pump)
        return False


def use_scheduler(scheduler):
    return _Installed(scheduler)


class DeterministicScheduler:
    """Single-threaded FIFO queue with virtual time.

    Jobs run in submission order; delayed jobs run when the queue drains and
    virtual time advances to their deadline.  Identical submissions yield
    identical execution orders, which the one-shot and ordering tests rely
    on.
    """

    def __init__(self):
        self._queue = deque()
        self._timers = []
        self._ticket = itertools.count()
        self.now = 0

    def submit(self, job):
        self._queue.append(job)

    def submit_delayed(self, job, delay):
        heapq.heappush(self._timers, (self.now + delay, next(self._ticket), job))

    def run_one(self) -> bool:
        if self._queue:
            self._queue.popleft()()
            return True
        if self._timers:
            deadline, _, job = heapq.heappop(self._timers)
            self.now = max(self.now, deadline)
            job()
            return True
        return False

    # The deferred module pumps this while blocking.
    def pump(self) -> bool:
        return self.run_one()

    def drive_until(self, check, timeout=None):
        while not check():
            if not self.run_one():
                raise BlockingTimeout(
                    "scheduler queue drained with the awaited outcome still pending"
                    + (f" (timeout {timeout}s)" if timeout is not None else ""))


class PoolScheduler:
    """Fixed-size worker pool; size defaults to the available parallelism."""

    def __init__(self, size=None):
        self.size = size or os.cpu_count() or 1
        from concurrent.futures import ThreadPoolExecutor
        self._pool = ThreadPoolExecutor(max_workers=self.size)

    def submit(self, job):
        self._pool.submit(job)

    def submit_delayed(self, job, delay):
        timer = threading.Timer(delay, lambda: self.submit(job))
        timer.daemon = True
        timer.start()

    def pump(self) -> bool:
        return False

    def drive_until(self, check, timeout=None):
        event = threading.Event()
        # Poll: outcomes are appended by worker threads.
        waited = 0.0
        step = 0.001
        while not check():
            event.wait(step)
            waited += step
            if timeout is not None and waited >= timeout:
                raise BlockingTimeout(f"task still pending after {timeout}s")

    def shutdown(self):
        self._pool.shutdown(wait=False)


# ---------------------------------------------------------------------------
# Task constructors and combinators

def task_unit(value):
    """Task that succeeds with `value` after one suspension step."""

    def run(k):
        def faildom(fk):
            def step():
                probe_point()
                return k(value)(fk)
            return More(step)
        return faildom

    return run


def task_raise(error):
    """Task that fails with `error` after one suspension step."""

    def run(_k):
        def faildom(fk):
            return More(lambda: fk(error))
        return faildom

    return run


def task_bind(task, fn):
    """Sequence `fn` after `task`; synchronous errors in `fn` fail the task."""

    def run(k):
        def faildom(fk):
            def on_value(v):
                def rest(fk2):
                    def step():
                        probe_point()
                        try:
                            next_task = fn(v)
                        except Exception as exc:
                            return fk2(exc)
                        return next_task(k)(fk2)
                    return More(step)
                return rest
            return More(lambda: task(on_value)(fk))
        return faildom

    return run


def task_map(task, fn):
    return task_bind(task, lambda v: task_unit(fn(v)))


def task_delay(fn):
    """Task that computes fn() when run, routing errors to the failure side."""

    def run(k):
        def faildom(fk):
            def step():
                try:
                    value = fn()
                except Exception as exc:
                    return fk(exc)
                return k(value)(fk)
            return More(step)
        return faildom

    return run


def task_from_deferred(d: Deferred):
    """Task that settles with the deferred's outcome; resumption is scheduled
    as a fresh job so completer stacks never nest into the continuation."""

    def run(k):
        def faildom(fk):
            scheduler = current_scheduler()

            def settled(ok, payload):
                if ok:
                    scheduler.submit(lambda: run_trampoline(k(payload)(fk)))
                else:
                    scheduler.submit(lambda: run_trampoline(fk(payload)))

            d.on_complete(settled)
            return Done(None)
        return faildom

    return run


def try_protect(body, on_error=None, finalizer=None):
    """Run `body`; on failure run `on_error(error)` (its outcome replaces the
    failure); run `finalizer` exactly once on every path before the outcome
    propagates, and let a finalizer failure supersede the pending outcome."""

    def run(k):
        def faildom(fk):
            def finish(proceed):
                if finalizer is None:
                    return proceed()
                return finalizer(lambda _u: lambda _fk: More(proceed))(
                    lambda fin_error: More(lambda: fk(fin_error)))

            def deliver_success(v):
                return finish(lambda: k(v)(fk))

            def deliver_failure(e):
                return finish(lambda: fk(e))

            def on_body_success(v):
                # Drop the body's failure continuation: the protected region
                # is over once the body has succeeded.
                return lambda _bfk: More(lambda: deliver_success(v))

            def on_body_failure(e):
                if on_error is None:
                    return More(lambda: deliver_failure(e))

                def step():
                    try:
                        handled = on_error(e)
                    except Exception as exc:
                        return deliver_failure(exc)
                    return handled(
                        lambda v: lambda _bfk: More(lambda: deliver_success(v)))(
                        lambda e2: More(lambda: deliver_failure(e2)))
                return More(step)

            def start():
                try:
                    return body(on_body_success)(on_body_failure)
                except Exception as exc:
                    return on_body_failure(exc)

            return More(start)
        return faildom

    return run


def blocking_await(task, timeout=None, scheduler=None):
    """Drive a task to completion on a scheduler and return its value.

    The failure outcome re-raises; a run that can no longer make progress (or
    exceeds `timeout` seconds on the pool scheduler) raises BlockingTimeout.
    """
    own = scheduler is None
    sched = scheduler or DeterministicScheduler()
    outcome = []

    def succeed(value):
        def faildom(_fk):
            if outcome:
                raise DslError("task outcome delivered twice")
            outcome.append((True, value))
            return Done(None)
        return faildom

    def fail(error):
        if outcome:
            raise DslError("task outcome delivered twice")
        outcome.append((False, error))
        return Done(None)

    with use_scheduler(sched):
        sched.submit(lambda: run_trampoline(task(succeed)(fail)))
        sched.drive_until(lambda: outcome, timeout)
    if own and isinstance(sched, PoolScheduler):
        sched.shutdown()
    ok, payload = outcome[0]
    if ok:
        return payload
    raise payload if isinstance(payload, BaseException) else DslError(repr(payload))


# ---------------------------------------------------------------------------
# Task-domain keywords

@dataclass(frozen=True)
class Fork(KeywordValue):
    elements: Any
    kind = "Fork"


TASK_ANSWER = ErrorLayer(TrampolineType(UNIT))
_TASK_COLLECTION_PATTERN = Fn(Fn(Collection("?", ANY), TASK_ANSWER), TASK_ANSWER)
_TASK_COLLECTION_HINT_PATTERN = Fn(Fn(Collection("?", HINT), TASK_ANSWER), TASK_ANSWER)


def _branch_collection_kind(domain):
    if domain is not None:
        inner = domain.param.param
        return collection_kind(inner)
    return "List"


def fork_join(kw, handler, domain=None):
    """Start handler(a) for every element concurrently; join the collection
    results in input order.  All branches settle before a failure (the first
    in input order) propagates."""
    elements = iterate_source(kw.elements)
    kind = _branch_collection_kind(domain)

    def run(k):
        def faildom(fk):
            n = len(elements)
            if n == 0:
                return More(lambda: k(empty_collection(kind))(fk))
            scheduler = current_scheduler()
            lock = threading.Lock()
            settled = [False] * n
            ok_flags = [False] * n
            payloads = [None] * n
            remaining = [n]

            def finish():
                for i in range(n):
                    if not ok_flags[i]:
                        return fk(payloads[i])
                return k(concat_collections(kind, payloads))(fk)

            def settle(i, ok, payload):
                with lock:
                    if settled[i]:
                        raise DslError(f"fork branch {i} settled twice")
                    settled[i] = True
                    ok_flags[i] = ok
                    payloads[i] = payload
                    remaining[0] -= 1
                    done = remaining[0] == 0
                if done:
                    scheduler.submit(lambda: run_trampoline(More(finish)))

            def branch_job(i, element):
                def job():
                    def branch_k(v):
                        def branch_faildom(_bfk):
                            settle(i, True, v)
                            return Done(None)
                        return branch_faildom

                    def branch_fk(e):
                        settle(i, False, e)
                        return Done(None)

                    try:
                        branch_task = handler(element)
                    except Exception as exc:
                        settle(i, False, exc)
                        return
                    run_trampoline(branch_task(branch_k)(branch_fk))
                return job

            for i, element in enumerate(elements):
                scheduler.submit(branch_job(i, element))
            return Done(None)
        return faildom

    return run


def each_sequential(kw, handler, domain=None):
    """Run handler(a) for the elements in order, concatenating the collection
    results; the first failure aborts the remainder."""
    elements = iterate_source(kw.elements)
    kind = _branch_collection_kind(domain)

    def run(k):
        def faildom(fk):
            parts = []

            def step(i):
                if i == len(elements):
                    return k(concat_collections(kind, parts))(fk)
                try:
                    element_task = handler(elements[i])
                except Exception as exc:
                    return fk(exc)

                def on_value(v):
                    def rest(_fk2):
                        parts.append(v)
                        return More(lambda: step(i + 1))
                    return rest

                return element_task(on_value)(fk)

            return More(lambda: step(0))
        return faildom

    return run


fork_tasks = Interpretation(
    name="forkDsl",
    keyword_kind="Fork",
    domain_pattern=_TASK_COLLECTION_PATTERN,
    fn=fork_join,
    handler_calls="once per element",
)

each_tasks = Interpretation(
    name="eachTaskDsl",
    keyword_kind="Each",
    domain_pattern=_TASK_COLLECTION_PATTERN,
    fn=each_sequential,
    handler_calls="once per element",
)


def _continue_task(kw, handler, domain):
    return task_unit(empty_collection(_branch_collection_kind(domain)))


continue_task = Interpretation(
    name="continueTaskDsl",
    keyword_kind="Continue",
    domain_pattern=_TASK_COLLECTION_PATTERN,
    fn=_continue_task,
    handler_calls="never",
)


def _return_singleton_task(kw, handler, domain):
    kind = _branch_collection_kind(domain)
    return task_unit(concat_collections(kind, [[kw.return_value]]))


return_singleton_task = Interpretation(
    name="returnSingletonTaskDsl",
    keyword_kind="Return",
    domain_pattern=_TASK_COLLECTION_HINT_PATTERN,
    fn=_return_singleton_task,
    handler_calls="never",
)


# ---------------------------------------------------------------------------
# Byte buffers and the in-memory asynchronous channel

class ByteBuffer:
    """A position/limit byte window, just enough for channel loops."""

    def __init__(self, data: bytearray, position: int = 0, limit: int | None = None):
        self.data = data
        self.position = position
        self.limit = len(data) if limit is None else limit

    @classmethod
    def allocate(cls, capacity: int) -> "ByteBuffer":
        return cls(bytearray(capacity), 0, capacity)

    @classmethod
    def wrap(cls, payload: bytes) -> "ByteBuffer":
        return cls(bytearray(payload), 0, len(payload))

    @property
    def remaining(self) -> int:
        return self.limit - self.position

    def take(self, count: int) -> bytes:
        chunk = bytes(self.data[self.position:self.position + count])
        self.position += count
        return chunk

    def put(self, chunk: bytes) -> int:
        count = min(len(chunk), self.remaining)
        self.data[self.position:self.position + count] = chunk[:count]
        self.position += count
        return count

    def written_bytes(self) -> bytes:
        return bytes(self.data[:self.position])


class ChannelClosed(DslError):
    pass


class AsyncChannel:
    """In-memory byte channel.

    Reads complete with the byte count, or -1 once the input side has
    finished and the buffered bytes are drained.  Operations on a closed
    channel fail in the task's error channel.  Deliveries preserve write
    order.  `loopback()` wires the write side back to the read side, which
    the echo demo uses.
    """

    def __init__(self, loopback: bool = False):
        self._incoming = bytearray()
        self._waiters = deque()
        self._end_of_input = False
        self._closed = False
        self._loopback = loopback
        self._lock = threading.Lock()
        self.peer: "AsyncChannel | None" = None

    @classmethod
    def loopback(cls) -> "AsyncChannel":
        return cls(loopback=True)

    @classmethod
    def pipe(cls) -> tuple["AsyncChannel", "AsyncChannel"]:
        left, right = cls(), cls()
        left.peer, right.peer = right, left
        return left, right

    def feed(self, payload: bytes):
        """Deliver bytes to the read side (the producer's half)."""
        with self._lock:
            if self._closed:
                raise ChannelClosed("channel is closed")
            if self._end_of_input:
                raise ChannelClosed("input side already finished")
            self._incoming.extend(payload)
            waiters = self._drainable_waiters()
        self._wake(waiters)

    def finish_input(self):
        with self._lock:
            self._end_of_input = True
            waiters = self._drainable_waiters()
        self._wake(waiters)

    def close(self):
        with self._lock:
            self._closed = True
            waiters = list(self._waiters)
            self._waiters.clear()
        for waiter in waiters:
            waiter(False, ChannelClosed("channel closed while read pending"))

    def _drainable_waiters(self):
        # Woken waiters re-attempt under the lock, so waking every parked
        # reader is safe: whoever loses the race just parks again.
        if not (self._incoming or self._end_of_input):
            return []
        ready = list(self._waiters)
        self._waiters.clear()
        return ready

    def _wake(self, waiters):
        for waiter in waiters:
            waiter(True, None)

    def _read_or_park(self, buffer: ByteBuffer, waiter):
        """One atomic step: ('data', n) | ('eof',) | None (waiter parked).

        Parking happens in the same lock acquisition as the failed read so a
        concurrent feed cannot slip in between and strand the waiter.
        """
        with self._lock:
            if self._closed:
                raise ChannelClosed("read on closed channel")
            if self._incoming:
                count = min(len(self._incoming), buffer.remaining)
                chunk = bytes(self._incoming[:count])
                del self._incoming[:count]
                buffer.put(chunk)
                return ("data", count)
            if self._end_of_input:
                return ("eof",)
            self._waiters.append(waiter)
            return None

    def _write_now(self, buffer: ByteBuffer) -> int:
        with self._lock:
            if self._closed:
                raise ChannelClosed("write on closed channel")
            chunk = buffer.take(buffer.remaining)
            target = self if self._loopback else self.peer
        # feed() takes the target's lock, which for a loopback channel is
        # this very lock, so it must run outside the block above.
        if target is None:
            raise ChannelClosed("channel has no write destination")
        target.feed(chunk)
        return len(chunk)


def channel_read(channel: AsyncChannel, buffer: ByteBuffer):
    """Task reading available bytes into `buffer`: completes with the count
    moved, or -1 at end of stream; parks until bytes arrive."""

    def run(k):
        def faildom(fk):
            scheduler = current_scheduler()

            def deliver(result):
                if result[0] == "eof":
                    return k(-1)(fk)
                return k(result[1])(fk)

            def waiter(ok, error):
                if not ok:
                    scheduler.submit(lambda: run_trampoline(fk(error)))
                    return
                scheduler.submit(lambda: run_trampoline(More(attempt)))

            def attempt():
                try:
                    result = channel._read_or_park(buffer, waiter)
                except Exception as exc:
                    return fk(exc)
                if result is None:
                    return Done(None)
                return deliver(result)

            return More(attempt)
        return faildom

    return run


def channel_write(channel: AsyncChannel, buffer: ByteBuffer):
    """Task writing the buffer's remaining bytes; completes with the count."""

    def run(k):
        def faildom(fk):
            def step():
                try:
                    count = channel._write_now(buffer)
                except Exception as exc:
                    return fk(exc)
                return k(count)(fk)
            return More(step)
        return faildom

    return run
