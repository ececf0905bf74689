"""Keyword values and their direct interpretations.

Each keyword is a small immutable request.  The interpretations here cover
the stream, deferred, state and collection domains; the task domain's
keywords (Fork, plus task-shaped Each/Return/Continue) live in the task
module.  Instance names are the identifiers resolution traces report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from . import lazystream
from .core import Interpretation, KeywordValue
from .deferred import Deferred
from .descriptors import (ANY, HINT, Collection, Descriptor, DeferredType, Fn,
                          PVar, Stream, sniff)
from .lazystream import Cons, EMPTY, LazyStream

# Timeout (seconds) for the blocking tail of the deferred-stream Await
# instance; None waits without bound.
BLOCKING_TAIL_TIMEOUT = None


def set_blocking_tail_timeout(seconds):
    global BLOCKING_TAIL_TIMEOUT
    previous = BLOCKING_TAIL_TIMEOUT
    BLOCKING_TAIL_TIMEOUT = seconds
    return previous


# ---------------------------------------------------------------------------
# Keyword values


@dataclass(frozen=True)
class Yield(KeywordValue):
    element: Any
    kind = "Yield"


@dataclass(frozen=True)
class Await(KeywordValue):
    deferred: Deferred
    kind = "Await"


@dataclass(frozen=True)
class Shift(KeywordValue):
    """Wraps a CPS function so it can be applied as a keyword; the
    interpretation simply forwards the handler to it."""

    continuation: Any
    kind = "Shift"


@dataclass(frozen=True)
class Return(KeywordValue):
    return_value: Any
    kind = "Return"

    def resolution_hint(self):
        return sniff(self.return_value)


@dataclass(frozen=True)
class Get(KeywordValue):
    state_type: Descriptor
    kind = "Get"

    def resolution_hint(self):
        return self.state_type


@dataclass(frozen=True)
class Put(KeywordValue):
    state_type: Descriptor
    value: Any
    kind = "Put"

    def resolution_hint(self):
        return self.state_type


@dataclass(frozen=True)
class Each(KeywordValue):
    elements: Any
    kind = "Each"


@dataclass(frozen=True)
class Continue(KeywordValue):
    kind = "Continue"


CONTINUE = Continue()


# ---------------------------------------------------------------------------
# Ordered set and collection building

class OrderedSet:
    """A set that iterates in insertion order, so comprehension targets stay
    deterministic."""

    def __init__(self, items=()):
        self._items = dict.fromkeys(items)

    def add(self, item):
        self._items[item] = None

    def __contains__(self, item):
        return item in self._items

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        if isinstance(other, OrderedSet):
            return set(self._items) == set(other._items)
        if isinstance(other, (set, frozenset)):
            return set(self._items) == other
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._items))

    def __repr__(self):
        return "OrderedSet(" + ", ".join(repr(x) for x in self) + ")"


def iterate_source(source):
    """Elements of an Each/Fork source: lists, tuples, strings (characters),
    ranges, ordered sets, plain sets and lazy streams."""
    if isinstance(source, (list, tuple, range, OrderedSet)):
        return list(source)
    if isinstance(source, str):
        return list(source)
    if isinstance(source, (set, frozenset)):
        return list(source)
    if isinstance(source, LazyStream):
        return source.to_list()
    raise TypeError(f"cannot iterate {type(source).__name__} as a source")


def build_collection(kind: str, items):
    if kind == "Set":
        return OrderedSet(items)
    return list(items)


def empty_collection(kind: str):
    return build_collection(kind, ())


def concat_collections(kind: str, parts):
    if kind == "Set":
        merged = OrderedSet()
        for part in parts:
            for item in part:
                merged.add(item)
        return merged
    merged = []
    for part in parts:
        merged.extend(part)
    return merged


def collection_kind(descriptor) -> str:
    if isinstance(descriptor, Collection):
        return descriptor.kind
    return "List"


# ---------------------------------------------------------------------------
# Stream instances

def _yield_into_stream(kw, handler, domain):
    # The rest of the computation becomes the lazily forced tail.
    return Cons(kw.element, lambda: handler(None))


yield_stream = Interpretation(
    name="yieldDsl",
    keyword_kind="Yield",
    domain_pattern=Stream(ANY),
    fn=_yield_into_stream,
)


def _yield_into_deferred_stream(kw, handler, domain):
    return Cons(Deferred.successful(kw.element), lambda: handler(None))


yield_deferred_stream = Interpretation(
    name="yieldDeferredDsl",
    keyword_kind="Yield",
    domain_pattern=Stream(DeferredType(ANY)),
    fn=_yield_into_deferred_stream,
)


def _await_into_deferred(kw, handler, domain):
    return kw.deferred.flat_map(handler)


await_deferred = Interpretation(
    name="awaitDsl",
    keyword_kind="Await",
    domain_pattern=DeferredType(ANY),
    fn=_await_into_deferred,
)


def _await_into_deferred_stream(kw, handler, domain):
    # The head is a deferred first element that settles once the awaited value
    # arrives; forcing the tail blocks (bounded by the module timeout) until
    # the rest of the stream is known.
    rest = kw.deferred.map(handler)
    head = rest.flat_map(lambda stream: stream.head)
    return Cons(head, lambda: rest.block(BLOCKING_TAIL_TIMEOUT).tail)


await_deferred_stream = Interpretation(
    name="awaitDeferredStreamDsl",
    keyword_kind="Await",
    domain_pattern=Stream(DeferredType(ANY)),
    fn=_await_into_deferred_stream,
)


# ---------------------------------------------------------------------------
# Control instances

def _shift_forward(kw, handler, domain):
    return kw.continuation(handler)


shift_forward = Interpretation(
    name="shiftDsl",
    keyword_kind="Shift",
    domain_pattern=ANY,
    fn=_shift_forward,
)


def _return_direct(kw, handler, domain):
    return kw.return_value


return_direct = Interpretation(
    name="returnDsl",
    keyword_kind="Return",
    domain_pattern=HINT,
    fn=_return_direct,
    handler_calls="never",
)


def _return_into_continuation(kw, handler, domain):
    # Deliver straight to the continuation parameter; the handler (the
    # skipped rest of the body) is dropped.
    return lambda k: k(kw.return_value)


return_continuation = Interpretation(
    name="returnContinuationDsl",
    keyword_kind="Return",
    domain_pattern=Fn(Fn(HINT, PVar("r")), PVar("r")),
    fn=_return_into_continuation,
    handler_calls="never",
)


# ---------------------------------------------------------------------------
# State instances

def _get_state(kw, handler, domain):
    return lambda state: handler(state)(state)


get_state = Interpretation(
    name="getDsl",
    keyword_kind="Get",
    domain_pattern=Fn(HINT, ANY),
    fn=_get_state,
)


def _put_state(kw, handler, domain):
    return lambda _previous: handler(None)(kw.value)


put_state = Interpretation(
    name="putDsl",
    keyword_kind="Put",
    domain_pattern=Fn(HINT, ANY),
    fn=_put_state,
)


# ---------------------------------------------------------------------------
# Collection instances

def _each_into_collection(kw, handler, domain):
    items = iterate_source(kw.elements)
    kind = collection_kind(domain)
    if not items:
        return empty_collection(kind)
    return concat_collections(kind, [handler(item) for item in items])


each_collection = Interpretation(
    name="eachDsl",
    keyword_kind="Each",
    domain_pattern=Collection("?", ANY),
    fn=_each_into_collection,
)


def _each_into_stream(kw, handler, domain):
    items = iterate_source(kw.elements)

    def go(i):
        if i >= len(items):
            return EMPTY
        return lazystream.concat(handler(items[i]), lambda: go(i + 1))

    return go(0)


each_stream = Interpretation(
    name="eachStreamDsl",
    keyword_kind="Each",
    domain_pattern=Stream(ANY),
    fn=_each_into_stream,
)


def _continue_skip(kw, handler, domain):
    return empty_collection(collection_kind(domain))


continue_collection = Interpretation(
    name="continueDsl",
    keyword_kind="Continue",
    domain_pattern=Collection("?", ANY),
    fn=_continue_skip,
    handler_calls="never",
)


def _continue_stream(kw, handler, domain):
    return EMPTY


continue_stream = Interpretation(
    name="continueStreamDsl",
    keyword_kind="Continue",
    domain_pattern=Stream(ANY),
    fn=_continue_stream,
    handler_calls="never",
)
