"""Instance resolution: exact traces, preference order, determinism."""

import pytest

from dslkit.core import (
    DepthLimitError,
    InstanceRegistry,
    Interpretation,
    RegistrationError,
    ResolutionError,
)
from dslkit.derivation import DEFAULT_RULES
from dslkit.descriptors import (
    ANY,
    DOUBLE,
    INT,
    STRING,
    Collection,
    Cont,
    DeferredType,
    Fn,
    Stream,
    canonicalize,
    task_domain,
)
from dslkit.keywords import Get, Yield, yield_stream
from dslkit.registry import default_registry

VECTOR = Collection("Vector", ANY)
FORMATTER_DOMAIN = Fn(DOUBLE, Fn(INT, Fn(VECTOR, STRING)))
GENERATOR_DOMAIN = Cont(Stream(STRING), INT)


@pytest.fixture(scope="module")
def registry():
    return default_registry()


class TestExactTraces:
    def test_get_direct(self, registry):
        _, trace = registry.resolve("Get", Fn(VECTOR, STRING), hint=VECTOR)
        assert list(trace) == ["getDsl"]

    def test_get_through_two_function_layers(self, registry):
        _, trace = registry.resolve("Get", FORMATTER_DOMAIN, hint=VECTOR)
        assert list(trace) == ["derive_function", "derive_function", "getDsl"]

    def test_return_through_three_function_layers(self, registry):
        _, trace = registry.resolve("Return", FORMATTER_DOMAIN, hint=STRING)
        assert list(trace) == [
            "derive_function",
            "derive_function",
            "derive_function",
            "returnDsl",
        ]

    def test_yield_lifts_into_generator_domain(self, registry):
        _, trace = registry.resolve("Yield", GENERATOR_DOMAIN)
        assert list(trace) == ["derive_function", "yieldDsl"]

    def test_return_in_generator_domain_is_direct(self, registry):
        _, trace = registry.resolve("Return", GENERATOR_DOMAIN, hint=INT)
        assert list(trace) == ["returnContinuationDsl"]

    def test_each_in_task_domain(self, registry):
        _, trace = registry.resolve(
            "Each", task_domain(Collection("List", INT))
        )
        assert list(trace) == ["eachTaskDsl"]

    def test_yield_in_deferred_domain_fails(self, registry):
        with pytest.raises(ResolutionError) as excinfo:
            registry.resolve("Yield", DeferredType(INT))
        assert excinfo.value.attempts

    def test_more_specific_stream_instance_wins(self, registry):
        interp, trace = registry.resolve("Yield", Stream(DeferredType(STRING)))
        assert interp.name == "yieldDeferredDsl"
        assert list(trace) == ["yieldDeferredDsl"]


class TestPreference:
    def test_direct_instance_beats_derivation(self):
        # In the default registry, Yield over a generator domain resolves via
        # derive_function.  A direct instance for the very same canonical
        # shape must short-circuit that derivation.
        direct = Interpretation(
            name="directGeneratorYield",
            keyword_kind="Yield",
            domain_pattern=canonicalize(GENERATOR_DOMAIN),
            fn=lambda kw, handler, domain: ("direct", kw.element),
        )
        registry = (
            InstanceRegistry()
            .register_instance(direct)
            .register_instance(yield_stream)
        )
        for rule in DEFAULT_RULES:
            registry = registry.register_rule(rule)
        registry = registry.freeze()

        interp, trace = registry.resolve("Yield", GENERATOR_DOMAIN)
        assert list(trace) == ["directGeneratorYield"]
        assert interp.apply(Yield("x"), lambda _: None) == ("direct", "x")

    def test_registration_order_breaks_ties(self):
        first = Interpretation(
            name="first", keyword_kind="Yield", domain_pattern=Stream(ANY),
            fn=lambda kw, h, d: "first",
        )
        second = Interpretation(
            name="second", keyword_kind="Yield",
            domain_pattern=Stream(INT),
            fn=lambda kw, h, d: "second",
        )
        registry = (
            InstanceRegistry()
            .register_instance(first)
            .register_instance(second)
            .freeze()
        )
        interp, _ = registry.resolve("Yield", Stream(INT))
        assert interp.name == "first"


class TestDeterminism:
    def test_hundred_identical_calls(self, registry):
        outcomes = {
            (
                registry.resolve("Get", FORMATTER_DOMAIN, hint=VECTOR)[0].name,
                tuple(registry.resolve("Get", FORMATTER_DOMAIN, hint=VECTOR)[1]),
            )
            for _ in range(100)
        }
        assert outcomes == {
            (
                "derive_function(derive_function(getDsl))",
                ("derive_function", "derive_function", "getDsl"),
            )
        }


class TestReplay:
    def test_replay_matches_search(self, registry):
        interp, trace = registry.resolve("Get", FORMATTER_DOMAIN, hint=VECTOR)
        replayed = registry.replay(trace, FORMATTER_DOMAIN)
        keyword = Get(VECTOR)
        handler = lambda v: lambda d: lambda i: lambda s: (v, d, i, s)
        direct = interp.apply(keyword, handler)(1.5)(7)(["a"])
        again = replayed.apply(keyword, handler)(1.5)(7)(["a"])
        assert direct == again == (["a"], 1.5, 7, ["a"])

    def test_replay_rejects_unknown_names(self, registry):
        from dslkit.core import ResolutionTrace

        with pytest.raises(ResolutionError):
            registry.replay(ResolutionTrace(("nope",)), Stream(STRING))


class TestRegistryLifecycle:
    def test_resolution_requires_freeze(self):
        registry = InstanceRegistry().register_instance(yield_stream)
        with pytest.raises(RegistrationError):
            registry.resolve("Yield", Stream(STRING))

    def test_registration_after_freeze_rejected(self):
        registry = InstanceRegistry().freeze()
        with pytest.raises(RegistrationError):
            registry.register_instance(yield_stream)

    def test_duplicate_pattern_rejected(self):
        registry = InstanceRegistry().register_instance(yield_stream)
        clone = Interpretation(
            name="other", keyword_kind="Yield",
            domain_pattern=yield_stream.domain_pattern,
            fn=lambda kw, h, d: None,
        )
        with pytest.raises(RegistrationError):
            registry.register_instance(clone)

    def test_depth_limit_reported(self):
        registry = default_registry(max_depth=2)
        deep = Fn(INT, Fn(INT, Fn(INT, Fn(VECTOR, STRING))))
        with pytest.raises(DepthLimitError):
            registry.resolve("Get", deep, hint=VECTOR)
