"""Built-in values available to every script.

Covers collection and string helpers, 32-bit integer arithmetic for the
random-number example, keyword constructors, result-type constants used
as state selectors, channel plumbing, and the task helpers the rewrite
targets (``tryProtect``, ``taskRaise``).
"""

from __future__ import annotations

import math

from .. import lazystream
from ..deferred import Deferred
from ..descriptors import (
    ANY,
    BOOLEAN,
    Collection,
    DOUBLE,
    INT,
    STRING,
    UNIT,
)
from ..keywords import (
    Await,
    CONTINUE,
    Each,
    Get,
    OrderedSet,
    Put,
    Return,
    Shift,
    Yield,
)
from ..lazystream import EMPTY, LazyStream
from ..task import (
    AsyncChannel,
    ByteBuffer,
    Fork,
    channel_read,
    channel_write,
    current_scheduler,
    task_from_deferred,
    task_raise,
    try_protect,
)


class ScriptError(Exception):
    """A value thrown by script code."""

    def __init__(self, payload):
        super().__init__(repr(payload))
        self.payload = payload


_MASK32 = 0xFFFFFFFF


def display(value) -> str:
    """Render a script value the way the example outputs spell it."""
    if value is None:
        return "()"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "List(" + ", ".join(display(item) for item in value) + ")"
    if isinstance(value, OrderedSet):
        items = list(value)
        try:
            items.sort()
        except TypeError:
            items.sort(key=display)
        return "Set(" + ", ".join(display(item) for item in items) + ")"
    if isinstance(value, LazyStream):
        return "Stream(...)"
    return repr(value)


class _Placeholder:
    """Value whose extraction plugs the continuation in as the result."""

    def __init__(self, name, adapt=None):
        self._name = name
        self._adapt = adapt

    def cps_apply(self, handler):
        if self._adapt is None:
            return handler
        adapt = self._adapt
        return lambda value: handler(adapt(value))

    def __repr__(self):
        return self._name


STRING_PLACEHOLDER = _Placeholder("StringPlaceholder")
INT_PLACEHOLDER = _Placeholder("IntPlaceholder", adapt=display)


# --- collection and string helpers -----------------------------------------


def _head(xs):
    if isinstance(xs, LazyStream):
        return xs.head
    return xs[0]


def _tail(xs):
    if isinstance(xs, LazyStream):
        return xs.tail
    return xs[1:]


def _is_empty(xs):
    if isinstance(xs, LazyStream):
        return xs is EMPTY or xs.is_empty
    return len(xs) == 0


def _cons(item, xs):
    if isinstance(xs, LazyStream):
        return lazystream.Cons(item, lambda: xs)
    return [item] + list(xs)


def _append(xs, item):
    return list(xs) + [item]


def _contains(collection, item):
    return item in collection


def _join_str(parts, separator):
    return separator.join(display(part) for part in parts)


def _until(lo, hi):
    return range(lo, hi)


def _until_by(lo, hi, step):
    return range(lo, hi, step)


def _size(xs):
    return len(xs)


def _to_list(value):
    if isinstance(value, LazyStream):
        return value.to_list()
    return list(value)


# --- 32-bit integer arithmetic ----------------------------------------------


def _i32_xor(a, b):
    return (a ^ b) & _MASK32


def _i32_shl(a, b):
    return (a << b) & _MASK32


def _i32_shr(a, b):
    """Logical (unsigned) right shift."""
    return (a & _MASK32) >> b


# --- tasks, deferreds and channels -------------------------------------------


def _task_raise(payload):
    if isinstance(payload, BaseException):
        return task_raise(payload)
    return task_raise(ScriptError(payload))


def _try_protect(body, on_error, finalizer):
    return try_protect(body, on_error or None, finalizer or None)


def _fetch_page(url):
    return Deferred.successful("content of " + url)


def _fetch_content(url):
    """Task that resolves to a page body after a scheduler delay.

    The first example host gets the longer delay, so ordered collection of
    forked results is observable.
    """
    delay = 0.002 if "example.com" in url else 0.001
    deferred = Deferred()
    current_scheduler().submit_delayed(
        lambda: deferred.succeed("content of " + url), delay
    )
    return task_from_deferred(deferred)


def _wrap_buffer(text):
    return ByteBuffer.wrap(text.encode("utf-8"))


def _allocate_buffer(capacity):
    return ByteBuffer.allocate(capacity)


def _byte_size(text):
    return len(text.encode("utf-8"))


def _decode_buffer(buffer):
    return buffer.written_bytes().decode("utf-8")


def _remaining(buffer):
    return buffer.remaining


def _close_channel(channel):
    channel.close()


def _end_of_input(channel):
    channel.finish_input()


BUILTINS = {
    # collection and string helpers
    "head": _head,
    "tail": _tail,
    "isEmpty": _is_empty,
    "cons": _cons,
    "append": _append,
    "contains": _contains,
    "joinStr": _join_str,
    "size": _size,
    "toList": _to_list,
    "until": _until,
    "untilBy": _until_by,
    "upper": lambda s: s.upper(),
    "last": lambda s: s[-1],
    "toString": display,
    # numerics
    "sqrt": math.sqrt,
    "ceil": math.ceil,
    "toInt": int,
    "i32xor": _i32_xor,
    "i32shl": _i32_shl,
    "i32shr": _i32_shr,
    # keyword constructors and constants
    "Yield": Yield,
    "Await": Await,
    "Get": Get,
    "Put": Put,
    "Each": Each,
    "Return": Return,
    "Shift": Shift,
    "Fork": Fork,
    "Continue": CONTINUE,
    # result-type constants (state selectors and hints)
    "Int": INT,
    "Double": DOUBLE,
    "String": STRING,
    "Boolean": BOOLEAN,
    "Unit": UNIT,
    "Vector": Collection("Vector", ANY),
    # placeholders
    "StringPlaceholder": STRING_PLACEHOLDER,
    "IntPlaceholder": INT_PLACEHOLDER,
    # streams
    "emptyStream": EMPTY,
    # tasks and channels
    "tryProtect": _try_protect,
    "taskRaise": _task_raise,
    "fetchPage": _fetch_page,
    "fetchContent": _fetch_content,
    "loopbackChannel": AsyncChannel.loopback,
    "wrapBuffer": _wrap_buffer,
    "allocateBuffer": _allocate_buffer,
    "byteSize": _byte_size,
    "decodeBuffer": _decode_buffer,
    "remaining": _remaining,
    "channelRead": channel_read,
    "channelWrite": channel_write,
    "closeChannel": _close_channel,
    "endOfInput": _end_of_input,
}
