"""One-shot deferred values.

A Deferred settles exactly once, with a value or an error.  Callbacks added
before completion fire in registration order on the completer's stack;
callbacks added after completion fire immediately.  A lock keeps settling
safe under the worker-pool scheduler; the deterministic scheduler never
contends on it.
"""

from __future__ import annotations

import threading


_PENDING = "pending"
_SUCCEEDED = "succeeded"
_FAILED = "failed"

# Installed by the task schedulers: a zero-argument callable that runs one
# pending scheduler job, or returns False when there is none.  Blocking waits
# pump it so single-threaded runs cannot deadlock against their own queue.
_pump_hook = None


def set_pump_hook(hook):
    global _pump_hook
    previous = _pump_hook
    _pump_hook = hook
    return previous


class DeferredError(Exception):
    pass


class BlockingTimeout(DeferredError):
    pass


class Deferred:
    def __init__(self):
        self._state = _PENDING
        self._payload = None
        self._callbacks = []
        self._lock = threading.Lock()
        self._event = threading.Event()

    @classmethod
    def successful(cls, value) -> "Deferred":
        d = cls()
        d.succeed(value)
        return d

    @classmethod
    def failed(cls, error) -> "Deferred":
        d = cls()
        d.fail(error)
        return d

    @property
    def is_completed(self):
        return self._state != _PENDING

    def succeed(self, value):
        self._settle(_SUCCEEDED, value)

    def fail(self, error):
        self._settle(_FAILED, error)

    def _settle(self, state, payload):
        with self._lock:
            if self._state != _PENDING:
                raise DeferredError("deferred already completed")
            self._state = state
            self._payload = payload
            callbacks, self._callbacks = self._callbacks, []
        self._event.set()
        for cb in callbacks:
            cb(state == _SUCCEEDED, payload)

    def on_complete(self, callback):
        """callback(ok: bool, payload) runs once, after settlement."""
        with self._lock:
            if self._state == _PENDING:
                self._callbacks.append(callback)
                return
            state, payload = self._state, self._payload
        callback(state == _SUCCEEDED, payload)

    def map(self, fn) -> "Deferred":
        out = Deferred()

        def step(ok, payload):
            if not ok:
                out.fail(payload)
                return
            try:
                out.succeed(fn(payload))
            except Exception as exc:
                out.fail(exc)

        self.on_complete(step)
        return out

    def flat_map(self, fn) -> "Deferred":
        out = Deferred()

        def step(ok, payload):
            if not ok:
                out.fail(payload)
                return
            try:
                next_deferred = fn(payload)
            except Exception as exc:
                out.fail(exc)
                return
            next_deferred.on_complete(
                lambda ok2, p2: out.succeed(p2) if ok2 else out.fail(p2))

        self.on_complete(step)
        return out

    def block(self, timeout=None):
        """Wait for completion, pumping the ambient scheduler when one is
        installed, and return the value (or raise the failure).

        timeout is in seconds; None waits without bound.  When the only
        scheduler is a drained single-threaded queue, a pending result is a
        deadlock and is reported as a timeout regardless of the limit.
        """
        while not self._event.is_set():
            pump = _pump_hook
            if pump is not None and pump():
                continue
            if not self._event.wait(timeout if timeout is not None else 0.05):
                if timeout is not None:
                    raise BlockingTimeout(
                        f"deferred still pending after {timeout}s")
                if pump is not None and not pump():
                    raise BlockingTimeout(
                        "deferred pending with an empty scheduler queue")
        if self._state == _FAILED:
            payload = self._payload
            raise payload if isinstance(payload, BaseException) \
                else DeferredError(repr(payload))
        return self._payload
