"""Shared test utilities: script loading, law checks, random task graphs."""

import functools
import pathlib
import random

from dslkit.deferred import Deferred
from dslkit.descriptors import (
    ANY,
    DOUBLE,
    INT,
    STRING,
    Collection,
    Cont,
    Fn,
    Stream,
    canonicalize,
    task_domain,
)
from dslkit.keywords import Each, Get, Put, Return, Shift, iterate_source
from dslkit.lang import Evaluator, parse_program
from dslkit.lazystream import from_list
from dslkit.registry import default_registry
from dslkit.task import (
    AsyncChannel,
    ByteBuffer,
    DeterministicScheduler,
    blocking_await,
    channel_read,
    channel_write,
    current_scheduler,
    task_bind,
    task_from_deferred,
    task_map,
    task_raise,
    task_unit,
    try_protect,
    use_scheduler,
)

SCRIPTS = (
    pathlib.Path(__file__).resolve().parent.parent / "src" / "dslkit" / "scripts"
)


def script_text(name: str) -> str:
    return (SCRIPTS / name).read_text()


def load_script(name: str) -> Evaluator:
    evaluator = Evaluator()
    evaluator.load(parse_program(script_text(name)))
    return evaluator


# ---------------------------------------------------------------------------
# Algebraic law material.
#
# The constructors below build continuations, continuation functions and
# handlers from small data, so the same shapes can be drawn by hypothesis
# strategies and by plain seeded loops.

VECTOR = Collection("Vector", ANY)


@functools.lru_cache(maxsize=1)
def _registry():
    return default_registry()


def shift_correspondence():
    """unit/bind of the continuation monad: unit delivers through the
    continuation-domain Return instance, bind goes through the forwarding
    interpretation of wrapped continuations."""
    domain = canonicalize(Cont(INT, INT))
    shift_interp, _ = _registry().resolve("Shift", domain)
    return_interp, _ = _registry().resolve("Return", domain, hint=INT)

    def unit(a):
        return return_interp.apply(Return(a), None)

    def bind(c, f):
        return lambda h: shift_interp.apply(Shift(c), lambda v: f(v)(h))

    return unit, bind


CONT_MODES = ("pure", "fanout", "post")


def make_cont(unit, mode, a, b):
    if mode == "pure":
        return unit(a)
    if mode == "fanout":
        return lambda h: (h(a), h(b))
    return lambda h: (b, h(a))


KFUN_MODES = ("add", "const", "fanout", "post")


def make_kfun(unit, mode, d):
    if mode == "add":
        return lambda v: unit(v + d)
    if mode == "const":
        return lambda v: unit(d)
    if mode == "fanout":
        return lambda v: (lambda h: (h(v), h(v + d)))
    return lambda v: (lambda h: (d, h(v)))


HANDLER_MODES = ("tag", "affine")


def make_handler(mode, s):
    if mode == "tag":
        return lambda v: ("obs", s, v)
    return lambda v: 3 * v + s


def assert_monad_laws(a, c, f, g, h):
    unit, bind = shift_correspondence()
    assert bind(unit(a), f)(h) == f(a)(h)
    assert bind(c, unit)(h) == c(h)
    assert bind(bind(c, f), g)(h) == bind(c, lambda v: bind(f(v), g))(h)


def check_monad_laws(samples: int, seed: int) -> int:
    unit, _ = shift_correspondence()
    rng = random.Random(seed)
    checked = 0
    for _ in range(samples):
        a = rng.randrange(-50, 51)
        c = make_cont(unit, rng.choice(CONT_MODES),
                      rng.randrange(-50, 51), rng.randrange(-50, 51))
        f = make_kfun(unit, rng.choice(KFUN_MODES), rng.randrange(-9, 10))
        g = make_kfun(unit, rng.choice(KFUN_MODES), rng.randrange(-9, 10))
        h = make_handler(rng.choice(HANDLER_MODES), rng.randrange(100))
        assert_monad_laws(a, c, f, g, h)
        checked += 3
    return checked


def derivation_pair(kind):
    """The same keyword kind resolved one function layer apart."""
    inner_domain = Fn(INT, Fn(VECTOR, STRING))
    outer_domain = Fn(DOUBLE, inner_domain)
    derived, _ = _registry().resolve(kind, outer_domain, hint=VECTOR)
    inner, _ = _registry().resolve(kind, inner_domain, hint=VECTOR)
    return derived, inner


def assert_derivation_law(derived, inner, keyword, h, s, i, vec):
    # Lifting over a function layer means: apply under the layer, then feed
    # the layer's argument to whatever the handler produced.
    lhs = derived.apply(keyword, h)(s)(i)(vec)
    rhs = inner.apply(keyword, lambda v: h(v)(s))(i)(vec)
    assert lhs == rhs


def check_derivation_law(samples: int, seed: int) -> int:
    pairs = {kind: derivation_pair(kind) for kind in ("Get", "Put")}
    rng = random.Random(seed)
    checked = 0
    for _ in range(samples):
        salt = rng.randrange(1000)

        def h(v, _salt=salt):
            return lambda s: lambda i: lambda vec: ("obs", _salt, v, s, i, vec)

        s = rng.random()
        i = rng.randrange(100)
        vec = ("vec", rng.randrange(10))
        keywords = {
            "Get": Get(VECTOR),
            "Put": Put(VECTOR, ("vec", rng.randrange(10))),
        }
        for kind, (derived, inner) in pairs.items():
            assert_derivation_law(derived, inner, keywords[kind], h, s, i, vec)
            checked += 1
    return checked


def state_interpretations():
    domain = Fn(VECTOR, STRING)
    get_interp, _ = _registry().resolve("Get", domain, hint=VECTOR)
    put_interp, _ = _registry().resolve("Put", domain, hint=VECTOR)
    return get_interp, put_interp


def assert_state_laws(s0, s1, s2, salt):
    get_interp, put_interp = state_interpretations()

    def end(v):
        return lambda s: ("end", salt, v, s)

    # Writing twice is writing the second value.
    assert (
        put_interp.apply(Put(VECTOR, s1),
                         lambda _: put_interp.apply(Put(VECTOR, s2), end))(s0)
        == put_interp.apply(Put(VECTOR, s2), end)(s0)
    )
    # A read after a write sees the written value.
    assert (
        put_interp.apply(Put(VECTOR, s1),
                         lambda _: get_interp.apply(Get(VECTOR), end))(s0)
        == put_interp.apply(Put(VECTOR, s1), lambda _: end(s1))(s0)
    )
    # Two consecutive reads see the same value.
    def pair(a):
        return lambda b: lambda s: ("pair", salt, a, b, s)

    assert (
        get_interp.apply(Get(VECTOR),
                         lambda a: get_interp.apply(Get(VECTOR), pair(a)))(s0)
        == get_interp.apply(Get(VECTOR), lambda a: pair(a)(a))(s0)
    )
    # Writing back what was just read changes nothing.
    assert (
        get_interp.apply(Get(VECTOR),
                         lambda a: put_interp.apply(Put(VECTOR, a), end))(s0)
        == end(None)(s0)
    )


def check_state_laws(samples: int, seed: int) -> int:
    rng = random.Random(seed)
    checked = 0
    for _ in range(samples):
        s0, s1, s2 = (("vec", rng.randrange(10)) for _ in range(3))
        assert_state_laws(s0, s1, s2, rng.randrange(1000))
        checked += 4
    return checked


EACH_BODY_MODES = ("repeat", "tagged", "empty")


def make_each_body(mode, k):
    if mode == "repeat":
        return lambda x: [x] * (abs(k) % 4)
    if mode == "tagged":
        return lambda x: [("t", k, x)]
    return lambda x: []


def brute_flat_map(items, fn):
    out = []
    for item in items:
        out.extend(fn(item))
    return out


def each_interpretations():
    registry = _registry()
    each_list, _ = registry.resolve("Each", Collection("List", INT))
    each_set, _ = registry.resolve("Each", Collection("Set", INT))
    each_stream, _ = registry.resolve("Each", Stream(INT))
    each_task, _ = registry.resolve(
        "Each", task_domain(Collection("List", INT))
    )
    return each_list, each_set, each_stream, each_task


def assert_each_law(source, body):
    each_list, each_set, each_stream, each_task = each_interpretations()
    items = iterate_source(source)
    expected = brute_flat_map(items, body)

    assert each_list.apply(Each(source), body) == expected

    set_result = each_set.apply(Each(source), body)
    assert list(set_result) == list(dict.fromkeys(expected))

    stream = each_stream.apply(Each(source), lambda x: from_list(body(x)))
    assert stream.to_list() == expected

    task = each_task.apply(
        Each([task_unit(item) for item in items]),
        lambda t: task_bind(t, lambda v: task_unit(body(v))),
    )
    scheduler = DeterministicScheduler()
    with use_scheduler(scheduler):
        awaited = blocking_await(task, timeout=10.0, scheduler=scheduler)
    assert awaited == expected


def check_each_law(samples: int, seed: int) -> int:
    rng = random.Random(seed)
    checked = 0
    for _ in range(samples):
        source = [rng.randrange(-20, 21) for _ in range(rng.randrange(9))]
        if rng.random() < 0.3:
            source = tuple(source)
        body = make_each_body(rng.choice(EACH_BODY_MODES), rng.randrange(-5, 6))
        assert_each_law(source, body)
        checked += 4
    return checked


# ---------------------------------------------------------------------------
# Channel echo round trip.


def write_all(channel, buffer):
    if buffer.remaining == 0:
        return task_unit(None)
    return task_bind(
        channel_write(channel, buffer), lambda _n: write_all(channel, buffer)
    )


def read_all(channel, buffer):
    def step(count):
        if count == -1:
            return task_unit(buffer.written_bytes())
        if buffer.remaining == 0:
            from dslkit.core import DslError

            raise DslError("read buffer exhausted before end of stream")
        return task_bind(channel_read(channel, buffer), step)

    return task_bind(channel_read(channel, buffer), step)


def echo_round_trip(payload: bytes, read_capacity: int) -> bytes:
    scheduler = DeterministicScheduler()
    with use_scheduler(scheduler):
        channel = AsyncChannel.loopback()
        read_buffer = ByteBuffer.allocate(read_capacity)

        def after_write(_unit):
            channel.finish_input()
            return read_all(channel, read_buffer)

        task = task_bind(
            write_all(channel, ByteBuffer.wrap(payload)), after_write
        )
        return blocking_await(task, timeout=10.0, scheduler=scheduler)


# ---------------------------------------------------------------------------
# Random task graphs.
#
# A graph spec is a nested tuple; `build_graph_task` assembles the matching
# task with an invocation counter on every callback it creates, and
# `graph_oracle` predicts the outcome by structural recursion, independent of
# the runtime.  Counters let callers assert the one-shot discipline: no
# callback runs twice, and callbacks on the success path run exactly once.


def make_graph(rng: random.Random, depth: int):
    if depth == 0:
        roll = rng.random()
        if roll < 0.45:
            return ("unit", rng.randrange(100))
        if roll < 0.65:
            return ("raise", ValueError(f"leaf{rng.randrange(100)}"))
        delay = rng.choice([0.0, 0.5, 1.0])
        if roll < 0.85:
            return ("deferred_ok", rng.randrange(100), delay)
        return ("deferred_err", ValueError(f"later{rng.randrange(100)}"), delay)
    roll = rng.random()
    if roll < 0.15:
        return make_graph(rng, 0)
    if roll < 0.30:
        return ("delay", make_graph(rng, depth - 1))
    if roll < 0.45:
        return ("map", make_graph(rng, depth - 1), rng.randrange(10))
    if roll < 0.55:
        return ("map_raise", make_graph(rng, depth - 1),
                ValueError(f"mid{rng.randrange(100)}"))
    if roll < 0.80:
        pick = rng.random()
        if pick < 0.40:
            kont = ("k_add", rng.randrange(10))
        elif pick < 0.55:
            kont = ("k_raise", ValueError(f"kb{rng.randrange(100)}"))
        elif pick < 0.70:
            kont = ("k_throw", ValueError(f"kt{rng.randrange(100)}"))
        else:
            kont = ("k_chain", make_graph(rng, depth - 1))
        return ("bind", make_graph(rng, depth - 1), kont)
    return ("protect", make_graph(rng, depth - 1),
            rng.random() < 0.5, rng.randrange(1000))


def graph_oracle(spec):
    """Predicted outcome: ("ok", value) or ("err", exception instance)."""
    head = spec[0]
    if head in ("unit", "deferred_ok"):
        return ("ok", spec[1])
    if head in ("raise", "deferred_err"):
        return ("err", spec[1])
    if head == "delay":
        return graph_oracle(spec[1])
    if head == "map":
        outcome = graph_oracle(spec[1])
        return ("ok", outcome[1] + spec[2]) if outcome[0] == "ok" else outcome
    if head == "map_raise":
        outcome = graph_oracle(spec[1])
        return ("err", spec[2]) if outcome[0] == "ok" else outcome
    if head == "bind":
        outcome = graph_oracle(spec[1])
        if outcome[0] == "err":
            return outcome
        kind, payload = spec[2]
        if kind == "k_add":
            return ("ok", outcome[1] + payload)
        if kind in ("k_raise", "k_throw"):
            return ("err", payload)
        inner = graph_oracle(payload)
        return ("ok", outcome[1] + inner[1]) if inner[0] == "ok" else inner
    outcome = graph_oracle(spec[1])
    if outcome[0] == "err" and spec[2]:
        return ("ok", spec[3])
    return outcome


class CallProbe:
    __slots__ = ("label", "count", "must_run")

    def __init__(self, label, must_run):
        self.label = label
        self.count = 0
        self.must_run = must_run

    def bump(self):
        self.count += 1


class ProbeSet:
    def __init__(self):
        self.probes = []

    def counter(self, label, must_run) -> CallProbe:
        probe = CallProbe(label, must_run)
        self.probes.append(probe)
        return probe

    def verify(self):
        for probe in self.probes:
            assert probe.count <= 1, f"{probe.label} ran {probe.count} times"
            if probe.must_run:
                assert probe.count == 1, f"{probe.label} never ran"


def build_graph_task(spec, probes: ProbeSet):
    head = spec[0]
    if head == "unit":
        return task_unit(spec[1])
    if head == "raise":
        return task_raise(spec[1])
    if head in ("deferred_ok", "deferred_err"):
        deferred = Deferred()
        settle = (
            (lambda: deferred.succeed(spec[1]))
            if head == "deferred_ok"
            else (lambda: deferred.fail(spec[1]))
        )
        current_scheduler().submit_delayed(settle, spec[2])
        return task_from_deferred(deferred)
    if head == "delay":
        # Defer even the construction of the subgraph until run time.
        return task_bind(
            task_unit(None), lambda _: build_graph_task(spec[1], probes)
        )
    if head == "map":
        probe = probes.counter("map", graph_oracle(spec[1])[0] == "ok")

        def mapper(value):
            probe.bump()
            return value + spec[2]

        return task_map(build_graph_task(spec[1], probes), mapper)
    if head == "map_raise":
        probe = probes.counter("map_raise", graph_oracle(spec[1])[0] == "ok")

        def raiser(value):
            probe.bump()
            raise spec[2]

        return task_map(build_graph_task(spec[1], probes), raiser)
    if head == "bind":
        kind, payload = spec[2]
        probe = probes.counter("bind", graph_oracle(spec[1])[0] == "ok")

        def handler(value):
            probe.bump()
            if kind == "k_add":
                return task_unit(value + payload)
            if kind == "k_raise":
                return task_raise(payload)
            if kind == "k_throw":
                raise payload
            inner_probe = probes.counter(
                "chain", graph_oracle(payload)[0] == "ok"
            )

            def join(inner_value):
                inner_probe.bump()
                return value + inner_value

            return task_map(build_graph_task(payload, probes), join)

        return task_bind(build_graph_task(spec[1], probes), handler)
    # protect
    fin_probe = probes.counter("finalizer", True)

    def finalizer(k):
        fin_probe.bump()
        return task_unit(None)(k)

    on_error = None
    if spec[2]:
        err_probe = probes.counter("recover", graph_oracle(spec[1])[0] == "err")

        def on_error(error):
            err_probe.bump()
            return task_unit(spec[3])

    return try_protect(build_graph_task(spec[1], probes), on_error, finalizer)


def check_graph(spec) -> None:
    """Run one graph and assert outcome and one-shot discipline."""
    expected = graph_oracle(spec)
    probes = ProbeSet()
    scheduler = DeterministicScheduler()
    with use_scheduler(scheduler):
        task = build_graph_task(spec, probes)
        try:
            value = blocking_await(task, timeout=60.0, scheduler=scheduler)
            actual = ("ok", value)
        except ValueError as error:
            actual = ("err", error)
    assert actual[0] == expected[0], f"{spec}: {actual} != {expected}"
    if expected[0] == "ok":
        assert actual[1] == expected[1], f"{spec}: {actual} != {expected}"
    else:
        assert actual[1] is expected[1], f"{spec}: wrong error instance"
    probes.verify()


def check_random_graphs(count: int, seed: int, max_depth: int = 3) -> int:
    rng = random.Random(seed)
    for _ in range(count):
        check_graph(make_graph(rng, rng.randrange(max_depth + 1)))
    return count
