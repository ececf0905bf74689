"""Derivation rules: build interpretations for composite domains.

Three rules cover the domain algebra: function domains capture the pending
argument and re-apply it inside the handler; error domains route synchronous
handler failures into the nearest raise continuation; trampoline-guarded
domains defer each application inside a suspension step so long keyword
chains unwind in constant native stack.
"""

from __future__ import annotations

from dataclasses import replace

from .core import DerivationRule, Interpretation
from .descriptors import Descriptor, ErrorLayer, Fn, TrampolineType
from .trampoline import More


def derive_function_domain(inner: Interpretation) -> Interpretation:
    """Lift an interpretation over D to one over Fn(S, D).

    The produced domain value waits for the argument s and reruns the rest of
    the computation with s applied to every handler result.
    """

    def fn(kw, handler, domain):
        def lifted(s):
            return inner.apply(kw, lambda v: handler(v)(s))
        return lifted

    return Interpretation(
        name=f"derive_function({inner.name})",
        keyword_kind=inner.keyword_kind,
        domain_pattern=Fn(inner.domain_pattern, inner.domain_pattern),
        fn=fn,
        handler_calls=inner.handler_calls,
    )


def derive_error_domain(inner: Interpretation) -> Interpretation:
    """Lift an interpretation over D to one over Error(D).

    Errors raised synchronously while the handler builds or unwraps its
    result are routed to the raise continuation instead of escaping.
    """

    def fn(kw, handler, domain):
        def lifted(raise_k):
            def guarded(v):
                try:
                    return handler(v)(raise_k)
                except Exception as exc:
                    return raise_k(exc)
            return inner.apply(kw, guarded)
        return lifted

    return Interpretation(
        name=f"derive_error({inner.name})",
        keyword_kind=inner.keyword_kind,
        domain_pattern=ErrorLayer(inner.domain_pattern),
        fn=fn,
        handler_calls=inner.handler_calls,
    )


def tower_depth(descriptor: Descriptor):
    """Number of pending applications between a domain value and its
    trampoline leaf, or None when the domain has no trampoline leaf."""
    depth = 0
    node = descriptor
    while True:
        if isinstance(node, TrampolineType):
            return depth
        if isinstance(node, Fn):
            node = node.result
        elif isinstance(node, ErrorLayer):
            node = node.inner
        else:
            return None
        depth += 1


def derive_trampoline_domain(inner: Interpretation, depth: int | None = None) -> Interpretation:
    """Guard an interpretation whose domain bottoms out at a trampoline.

    The lifted application collects the domain's pending arguments and then
    suspends, so the underlying application only runs when the trampoline
    runner pulls the next step.  One application equals the unguarded result
    after running; N chained applications unwind in O(1) native stack.
    """

    def fn(kw, handler, domain):
        n = depth
        if domain is not None:
            measured = tower_depth(domain)
            if measured is not None:
                n = measured
        if n is None:
            n = 1

        def collect(args, remaining):
            if remaining == 0:
                def step():
                    value = inner.apply(kw, handler)
                    for arg in args:
                        value = value(arg)
                    return value
                return More(step)
            return lambda arg: collect(args + (arg,), remaining - 1)

        return collect((), n)

    return Interpretation(
        name=f"derive_trampoline({inner.name})",
        keyword_kind=inner.keyword_kind,
        domain_pattern=inner.domain_pattern,
        fn=fn,
        handler_calls=inner.handler_calls,
    )


def _peel_function(descriptor):
    if isinstance(descriptor, Fn):
        return descriptor.result
    return None


def _peel_error(descriptor):
    if isinstance(descriptor, ErrorLayer):
        return descriptor.inner
    return None


def _peel_trampoline(descriptor):
    # Guarding does not peel a layer; the resolver's cycle guard keeps the
    # rule from reapplying to the same descriptor on one search path.
    depth = tower_depth(descriptor)
    if depth is not None and depth >= 1:
        return descriptor
    return None


rule_function = DerivationRule(
    name="derive_function",
    peel=_peel_function,
    lift=lambda inner, domain: derive_function_domain(inner),
)

rule_error = DerivationRule(
    name="derive_error",
    peel=_peel_error,
    lift=lambda inner, domain: derive_error_domain(inner),
)

rule_trampoline = DerivationRule(
    name="derive_trampoline",
    peel=_peel_trampoline,
    lift=lambda inner, domain: derive_trampoline_domain(inner, tower_depth(domain)),
)

DEFAULT_RULES = (rule_function, rule_error, rule_trampoline)
