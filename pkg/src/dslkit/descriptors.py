"""Structural descriptors for interpretation domains.

A descriptor is a small immutable tree describing the *shape* of a domain:
streams, deferred values, functions, continuations, trampolines, collections,
an error layer, plain scalars, and unit.  Instance resolution matches keyword
kinds against these shapes, so descriptors need decidable structural equality
and a tolerant pattern matcher, not a real type system.
"""

from __future__ import annotations

from dataclasses import dataclass


class Descriptor:
    """Base class for domain descriptor nodes. Instances are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class Scalar(Descriptor):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class UnitType(Descriptor):
    def __repr__(self):
        return "Unit"


@dataclass(frozen=True)
class Stream(Descriptor):
    element: Descriptor

    def __repr__(self):
        return f"Stream[{self.element!r}]"


@dataclass(frozen=True)
class DeferredType(Descriptor):
    element: Descriptor

    def __repr__(self):
        return f"Deferred[{self.element!r}]"


@dataclass(frozen=True)
class Fn(Descriptor):
    param: Descriptor
    result: Descriptor

    def __repr__(self):
        return f"Fn[{self.param!r}, {self.result!r}]"


@dataclass(frozen=True)
class Cont(Descriptor):
    """Continuation domain: (value -> answer) -> answer.

    Kept as surface syntax only; `canonicalize` rewrites it to nested Fn so a
    single function-domain rule covers continuation domains during matching.
    """

    answer: Descriptor
    value: Descriptor

    def __repr__(self):
        return f"Cont[{self.answer!r}, {self.value!r}]"


@dataclass(frozen=True)
class TrampolineType(Descriptor):
    element: Descriptor

    def __repr__(self):
        return f"Trampoline[{self.element!r}]"


@dataclass(frozen=True)
class Collection(Descriptor):
    kind: str
    element: Descriptor

    def __repr__(self):
        return f"{self.kind}[{self.element!r}]"


@dataclass(frozen=True)
class ErrorLayer(Descriptor):
    """The (error -> inner) -> inner layer wrapped around a domain."""

    inner: Descriptor

    def __repr__(self):
        return f"Error[{self.inner!r}]"


# Pattern-only nodes. They never appear in canonical concrete descriptors but
# may appear in instance patterns (and in sniffed descriptors, for Any).


@dataclass(frozen=True)
class AnyType(Descriptor):
    def __repr__(self):
        return "Any"


@dataclass(frozen=True)
class HintType(Descriptor):
    """Matches the resolution hint supplied with the keyword (or anything,
    when no hint is given)."""

    def __repr__(self):
        return "Hint"


@dataclass(frozen=True)
class PVar(Descriptor):
    """Pattern variable: matches any subtree, consistently within a pattern."""

    name: str

    def __repr__(self):
        return f"?{self.name}"


UNIT = UnitType()
ANY = AnyType()
HINT = HintType()


def canonicalize(desc: Descriptor) -> Descriptor:
    """Rewrite Cont(answer, value) to Fn(Fn(value, answer), answer), recursively."""
    match desc:
        case Cont(answer, value):
            a = canonicalize(answer)
            v = canonicalize(value)
            return Fn(Fn(v, a), a)
        case Stream(e):
            return Stream(canonicalize(e))
        case DeferredType(e):
            return DeferredType(canonicalize(e))
        case Fn(p, r):
            return Fn(canonicalize(p), canonicalize(r))
        case TrampolineType(e):
            return TrampolineType(canonicalize(e))
        case Collection(k, e):
            return Collection(k, canonicalize(e))
        case ErrorLayer(i):
            return ErrorLayer(canonicalize(i))
        case _:
            return desc


def matches(pattern: Descriptor, target: Descriptor, hint: Descriptor | None = None,
            bindings: dict | None = None) -> bool:
    """Structural match of a canonical target against a pattern.

    Any in either tree matches everything (sniffed targets may contain Any for
    unknown element shapes).  Hint nodes stand for the keyword's resolution
    hint; with no hint they degrade to Any.  PVar binds consistently.
    """
    if bindings is None:
        bindings = {}
    if isinstance(pattern, HintType):
        if hint is None:
            return True
        return matches(hint, target, None, bindings)
    if isinstance(pattern, AnyType) or isinstance(target, AnyType):
        return True
    if isinstance(pattern, PVar):
        bound = bindings.get(pattern.name)
        if bound is None:
            bindings[pattern.name] = target
            return True
        return bound == target
    if type(pattern) is not type(target):
        return False
    match pattern:
        case Scalar(name):
            return name == target.name
        case UnitType():
            return True
        case Stream(e) | DeferredType(e) | TrampolineType(e) | ErrorLayer(e):
            return matches(e, target_child(target), hint, bindings)
        case Fn(p, r):
            return (matches(p, target.param, hint, bindings)
                    and matches(r, target.result, hint, bindings))
        case Collection(k, e):
            # "?" is the wildcard collection kind, usable in patterns only.
            if k != "?" and target.kind != "?" and k != target.kind:
                return False
            return matches(e, target.element, hint, bindings)
        case _:
            return False


def target_child(desc: Descriptor) -> Descriptor:
    match desc:
        case Stream(e) | DeferredType(e) | TrampolineType(e):
            return e
        case ErrorLayer(i):
            return i
        case _:
            raise TypeError(f"no child for {desc!r}")


INT = Scalar("Int")
DOUBLE = Scalar("Double")
STRING = Scalar("String")
BOOLEAN = Scalar("Boolean")


def task_domain(value: Descriptor) -> Descriptor:
    """Task[A]: a continuation of A whose answer carries error and trampoline
    layers, i.e. Cont(Error[Trampoline[Unit]], A)."""
    return Cont(ErrorLayer(TrampolineType(UNIT)), value)


def sniff(value) -> Descriptor:
    """Best-effort descriptor of a runtime value, used as a resolution hint.

    Container element shapes degrade to Any when mixed or empty; callables
    have no visible shape at all.
    """
    if value is None:
        return UNIT
    if isinstance(value, bool):
        return BOOLEAN
    if isinstance(value, int):
        return INT
    if isinstance(value, float):
        return DOUBLE
    if isinstance(value, str):
        return STRING
    if isinstance(value, (list, tuple)):
        return Collection("List", _sniff_elements(value))
    if isinstance(value, (set, frozenset)):
        return Collection("Set", _sniff_elements(value))
    # Late imports keep descriptors free of runtime dependencies.
    from .lazystream import LazyStream
    from .deferred import Deferred
    if isinstance(value, LazyStream):
        return Stream(ANY)
    if isinstance(value, Deferred):
        return DeferredType(ANY)
    if callable(value):
        return Fn(ANY, ANY)
    return ANY


def _sniff_elements(items) -> Descriptor:
    shapes = {sniff(x) for x in items}
    if len(shapes) == 1:
        return shapes.pop()
    return ANY


# A tiny parser for descriptor syntax used in script headers and tests:
#   Stream[Int], Cont[Stream[String], Int], Fn[Double, Fn[Int, String]],
#   Task[List[String]], List[Int], Error[Trampoline[Unit]], Vector, Any.

_NULLARY = {
    "Unit": UNIT,
    "Any": ANY,
    "Hint": HINT,
}


def parse_descriptor(text: str) -> Descriptor:
    desc, rest = _parse(text.strip())
    if rest.strip():
        raise ValueError(f"trailing descriptor text: {rest!r}")
    return desc


def _parse(text: str):
    name, rest = _read_name(text)
    args = []
    rest = rest.lstrip()
    if rest.startswith("["):
        rest = rest[1:]
        while True:
            arg, rest = _parse(rest.lstrip())
            args.append(arg)
            rest = rest.lstrip()
            if rest.startswith(","):
                rest = rest[1:]
                continue
            if rest.startswith("]"):
                rest = rest[1:]
                break
            raise ValueError(f"expected ',' or ']' in descriptor at {rest!r}")
    return _build(name, args), rest


def _read_name(text: str):
    i = 0
    while i < len(text) and (text[i].isalnum() or text[i] == "_"):
        i += 1
    if i == 0:
        raise ValueError(f"expected descriptor name at {text!r}")
    return text[:i], text[i:]


def _build(name: str, args: list) -> Descriptor:
    def arity(n):
        if len(args) != n:
            raise ValueError(f"{name} takes {n} argument(s), got {len(args)}")

    if name in _NULLARY:
        arity(0)
        return _NULLARY[name]
    if name == "Stream":
        arity(1)
        return Stream(args[0])
    if name == "Deferred":
        arity(1)
        return DeferredType(args[0])
    if name == "Fn":
        arity(2)
        return Fn(args[0], args[1])
    if name == "Cont":
        arity(2)
        return Cont(args[0], args[1])
    if name == "Trampoline":
        arity(1)
        return TrampolineType(args[0])
    if name == "Error":
        arity(1)
        return ErrorLayer(args[0])
    if name == "Task":
        arity(1)
        return task_domain(args[0])
    if name in ("List", "Set", "Vector") and args:
        arity(1)
        return Collection(name, args[0])
    if args:
        arity(1)
        return Collection(name, args[0])
    return Scalar(name)
