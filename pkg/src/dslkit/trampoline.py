"""Trampolined computations.

A Trampoline is either a finished Done(value) or a suspended More(step) whose
step returns the next Trampoline.  The runner unrolls suspensions in a loop,
so arbitrarily long chains of steps use constant native stack.  An optional
stack probe samples native recursion depth while steps run; benchmarks and
stack-safety tests install it.
"""

from __future__ import annotations

import sys


class Trampoline:
    __slots__ = ()


class Done(Trampoline):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class More(Trampoline):
    __slots__ = ("step",)

    def __init__(self, step):
        self.step = step


def run_trampoline(t: Trampoline):
    while isinstance(t, More):
        t = t.step()
    if not isinstance(t, Done):
        raise TypeError(f"trampoline step produced {t!r}, expected Done or More")
    return t.value


def frame_depth() -> int:
    depth = 0
    frame = sys._getframe()
    while frame is not None:
        depth += 1
        frame = frame.f_back
    return depth


class StackProbe:
    """Samples native frame depth every `stride` recorded events.

    A prime stride keeps sampling cheap while still visiting every phase of a
    periodic call pattern, so the observed maximum is stable across run
    lengths.
    """

    def __init__(self, stride: int = 61):
        self.stride = stride
        self.counter = 0
        self.max_depth = 0
        self.samples = 0

    def record(self):
        self.counter += 1
        if self.counter % self.stride:
            return
        depth = frame_depth()
        self.samples += 1
        if depth > self.max_depth:
            self.max_depth = depth


_probe: StackProbe | None = None


def set_stack_probe(probe: StackProbe | None) -> StackProbe | None:
    global _probe
    previous = _probe
    _probe = probe
    return previous


def probe_point():
    if _probe is not None:
        _probe.record()
