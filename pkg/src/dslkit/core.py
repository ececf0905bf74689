"""The keyword/interpretation protocol and instance resolution.

A keyword value is a small immutable request (a kind plus payload).  An
interpretation gives one keyword kind meaning inside one domain shape by
consuming the keyword and a handler (the reified rest of the computation) and
producing a domain value.  A registry holds direct interpretations and
derivation rules; `resolve` finds the interpretation for a (kind, domain)
query, preferring direct instances and otherwise peeling domain layers with
derivation rules, depth-first in registration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional

from .descriptors import Descriptor, canonicalize, matches


class KeywordValue:
    """Base class for keyword values.

    Subclasses are frozen dataclasses carrying the payload.  `kind` is an open
    string identifier; unrelated code can add new kinds without touching this
    module.  `resolution_hint` exposes the payload shape that instance
    patterns may constrain on (state slot for Get/Put, produced-value shape
    for Return), or None when resolution needs no hint.
    """

    kind: str = "?"

    def resolution_hint(self) -> Optional[Descriptor]:
        return None


class DslError(Exception):
    """Base class for protocol errors."""


class ProtocolViolation(DslError):
    """An interpretation was applied to a keyword of the wrong kind."""


class RegistrationError(DslError):
    """Invalid registry mutation: duplicates or writes after freeze."""


class ResolutionError(DslError):
    """No interpretation found. Carries the attempted search tree."""

    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts or []


class DepthLimitError(ResolutionError):
    """Resolution ran out of derivation depth before finding a match."""


@dataclass(frozen=True)
class ResolutionTrace:
    """Names of the rules and the final instance, outermost first."""

    steps: tuple[str, ...]

    def __iter__(self):
        return iter(self.steps)

    def __repr__(self):
        return "[" + ", ".join(self.steps) + "]"


@dataclass(frozen=True)
class Interpretation:
    """One keyword kind given meaning inside one domain shape.

    `fn(keyword, handler, domain)` produces the domain value.  `domain` is the
    concrete canonical descriptor the interpretation was resolved against;
    instances that build empty collections or task results need it, the rest
    ignore it.  `handler_calls` documents how many times `fn` may invoke the
    handler; it is part of each instance's contract, not enforced here.
    """

    name: str
    keyword_kind: str
    domain_pattern: Descriptor
    fn: Callable[[KeywordValue, Callable, Optional[Descriptor]], Any]
    domain: Optional[Descriptor] = None
    handler_calls: str = "once"

    def apply(self, keyword: KeywordValue, handler: Callable) -> Any:
        return self.fn(keyword, handler, self.domain)


def cps_apply(keyword: KeywordValue, handler: Callable, interp: Interpretation) -> Any:
    """Apply one keyword under `interp`, delegating the rest to `handler`."""
    if interp.keyword_kind != keyword.kind:
        raise ProtocolViolation(
            f"interpretation {interp.name} handles kind {interp.keyword_kind!r}, "
            f"got keyword of kind {keyword.kind!r}")
    return interp.apply(keyword, handler)


@dataclass(frozen=True)
class DerivationRule:
    """Builds an interpretation for a composite domain from one for an inner
    domain.

    `peel(domain)` returns the inner descriptor when the rule applies, else
    None.  `lift(inner, domain)` wraps an interpretation for the peeled
    descriptor back into one for `domain`.
    """

    name: str
    peel: Callable[[Descriptor], Optional[Descriptor]]
    lift: Callable[[Interpretation, Descriptor], Interpretation]


@dataclass(frozen=True)
class InstanceRegistry:
    """Immutable collection of direct instances and derivation rules.

    Registration returns a new registry; duplicate (kind, pattern) entries are
    rejected.  A registry must be frozen before resolution, after which no
    further registration is accepted.  Direct instances are tried in
    registration order, then derivation rules in registration order,
    depth-first with a bounded derivation depth.
    """

    instances: tuple[Interpretation, ...] = ()
    rules: tuple[DerivationRule, ...] = ()
    max_depth: int = 16
    frozen: bool = False

    def register_instance(self, interp: Interpretation) -> "InstanceRegistry":
        if self.frozen:
            raise RegistrationError("registry is frozen")
        for existing in self.instances:
            if (existing.keyword_kind == interp.keyword_kind
                    and existing.domain_pattern == interp.domain_pattern):
                raise RegistrationError(
                    f"duplicate instance for kind {interp.keyword_kind!r} "
                    f"and pattern {interp.domain_pattern!r}")
        return replace(self, instances=self.instances + (interp,))

    def register_rule(self, rule: DerivationRule) -> "InstanceRegistry":
        if self.frozen:
            raise RegistrationError("registry is frozen")
        if any(r.name == rule.name for r in self.rules):
            raise RegistrationError(f"duplicate derivation rule {rule.name!r}")
        return replace(self, rules=self.rules + (rule,))

    def freeze(self) -> "InstanceRegistry":
        return replace(self, frozen=True)

    def resolve(self, kind: str, domain: Descriptor,
                hint: Optional[Descriptor] = None):
        return resolve(self, kind, domain, hint)

    def replay(self, trace: ResolutionTrace, domain: Descriptor):
        """Recompose the interpretation a trace describes, without searching."""
        desc = canonicalize(domain)
        return _replay(self, list(trace.steps), desc)


def register_instance(registry: InstanceRegistry, interp: Interpretation) -> InstanceRegistry:
    return registry.register_instance(interp)


def resolve(registry: InstanceRegistry, kind: str, domain: Descriptor,
            hint: Optional[Descriptor] = None) -> tuple[Interpretation, ResolutionTrace]:
    """Find the interpretation for (kind, domain).

    Direct instances win; otherwise derivation rules peel one layer each,
    recursing depth-first in registration order.  Deterministic: equal inputs
    produce equal traces.
    """
    if not registry.frozen:
        raise RegistrationError("registry must be frozen before resolution")
    desc = canonicalize(domain)
    attempts: list[tuple[tuple[str, ...], str]] = []
    hit_depth_limit = [False]

    def search(current: Descriptor, depth: int, path: tuple[str, ...],
               seen: frozenset):
        for inst in registry.instances:
            if inst.keyword_kind != kind:
                continue
            if matches(inst.domain_pattern, current, hint):
                bound = replace(inst, domain=current)
                return bound, (inst.name,)
        attempts.append((path, f"no direct instance for {kind!r} at {current!r}"))
        for rule in registry.rules:
            inner = rule.peel(current)
            if inner is None:
                continue
            guard = (rule.name, current)
            if guard in seen:
                continue
            if depth <= 0:
                hit_depth_limit[0] = True
                attempts.append((path + (rule.name,), "depth exhausted"))
                continue
            found = search(canonicalize(inner), depth - 1,
                           path + (rule.name,), seen | {guard})
            if found is not None:
                inner_interp, steps = found
                lifted = rule.lift(inner_interp, current)
                lifted = replace(lifted, domain=current)
                return lifted, (rule.name,) + steps
        return None

    found = search(desc, registry.max_depth, (), frozenset())
    if found is None:
        if hit_depth_limit[0]:
            raise DepthLimitError(
                f"derivation depth {registry.max_depth} exhausted resolving "
                f"{kind!r} against {desc!r}", attempts)
        raise ResolutionError(
            f"no interpretation for {kind!r} against {desc!r}", attempts)
    interp, steps = found
    return interp, ResolutionTrace(steps)


def _replay(registry: InstanceRegistry, steps: list[str], desc: Descriptor) -> Interpretation:
    name = steps[0]
    if len(steps) == 1:
        for inst in registry.instances:
            if inst.name == name:
                return replace(inst, domain=desc)
        raise ResolutionError(f"unknown instance {name!r} in trace")
    for rule in registry.rules:
        if rule.name == name:
            inner_desc = rule.peel(desc)
            if inner_desc is None:
                raise ResolutionError(
                    f"rule {name!r} does not apply to {desc!r} during replay")
            inner = _replay(registry, steps[1:], canonicalize(inner_desc))
            lifted = rule.lift(inner, desc)
            return replace(lifted, domain=desc)
    raise ResolutionError(f"unknown derivation rule {name!r} in trace")
