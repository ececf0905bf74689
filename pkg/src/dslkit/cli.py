"""Command-line front end.

`run` executes a bundled example (or a script file with a `main` function)
and compares its output against the embedded expectation; `transform`
prints a script's continuation-passing rewrite; `bench` times the
benchmark procedures with machine-readable rows.
"""

from __future__ import annotations

import argparse
import pathlib
import sys
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from .bench import CASES, BenchGateError, format_rows, run_case
from .descriptors import ErrorLayer
from .lang import (
    Evaluator,
    LangError,
    display,
    parse_program,
    print_program,
    transform_program,
)
from .lang.evaluate import _cont_shaped
from .lazystream import LazyStream
from .task import DeterministicScheduler, blocking_await, use_scheduler


def _script_text(filename: str) -> str:
    return (resources.files("dslkit") / "scripts" / filename).read_text()


def _load(filename: str) -> Evaluator:
    evaluator = Evaluator()
    evaluator.load(parse_program(_script_text(filename)))
    return evaluator


def _stream_lines(stream: LazyStream) -> list[str]:
    return [display(element) for element in stream.to_list()]


def _await_lines(evaluator, name, *args) -> list[str]:
    scheduler = DeterministicScheduler()
    with use_scheduler(scheduler):
        task = evaluator.call(name, *args)
        value = blocking_await(task, timeout=30.0, scheduler=scheduler)
    return [display(value)]


def _run_xorshift(evaluator) -> list[str]:
    stream = evaluator.call("xorshiftRandomGenerator", 2463534242)
    return [str(element) for element in stream.take(5)]


def _run_printf(evaluator) -> list[str]:
    return [
        evaluator.call("f1"),
        evaluator.call("f2")("World"),
        evaluator.call("f3")("x")(3),
    ]


def _run_async_generator(evaluator) -> list[str]:
    scheduler = DeterministicScheduler()
    with use_scheduler(scheduler):
        pages = evaluator.call(
            "asyncPages", "http://example.com/", "http://example.org/"
        )
        return [page.block(timeout=30.0) for page in pages.to_list()]


@dataclass(frozen=True)
class Example:
    script: str
    runner: Callable[[Evaluator], list[str]]
    expected: tuple[str, ...]


EXAMPLES = {
    "xorshift": Example(
        "xorshift.dsl",
        _run_xorshift,
        ("723471715", "2497366906", "2064144800", "2008045182", "3532304609"),
    ),
    "printf": Example(
        "printf.dsl",
        _run_printf,
        ("Hello World!", "Hello World!", "The value of x is 3."),
    ),
    "prefix": Example(
        "prefix.dsl",
        lambda ev: [display(ev.call("prefix", [1, 2, 3]))],
        ("List(List(1), List(1, 2), List(1, 2, 3))",),
    ),
    "returnable-generator": Example(
        "returnable-generator.dsl",
        lambda ev: _stream_lines(ev.call("generatorTest")),
        (
            "before returnableGenerator",
            "inside returnableGenerator",
            "after returnableGenerator",
            "the return value of returnableGenerator is 1",
        ),
    ),
    "early-generator": Example(
        "early-generator.dsl",
        lambda ev: _stream_lines(ev.call("earlyGeneratorTest")),
        (
            "before earlyGenerator",
            "inside earlyGenerator",
            "early return",
            "after earlyGenerator",
            "the return value of earlyGenerator is 1",
        ),
    ),
    "state-single": Example(
        "state-single.dsl",
        lambda ev: [ev.call("upperCasedLastCharacter")("foo")],
        ("O",),
    ),
    "state-formatter": Example(
        "state-formatter.dsl",
        lambda ev: [ev.call("formatter")(0.5)(42)([])],
        ("x=0.5,y=42",),
    ),
    "composite": Example(
        "composite.dsl",
        lambda ev: [display(ev.call("compositeNumbersBelow", 15))],
        ("Set(4, 6, 8, 9, 10, 12, 14)",),
    ),
    "primes": Example(
        "primes.dsl",
        lambda ev: [display(ev.call("primeNumbersBelow", 15))],
        ("List(2, 3, 5, 7, 11, 13)",),
    ),
    "heterogeneous": Example(
        "heterogeneous.dsl",
        lambda ev: [display(ev.call("heterogeneous"))],
        ("List(fooL, fooD, fooK, barL, barD, barK, bazL, bazD, bazK)",),
    ),
    "gcc-flags": Example(
        "gcc-flags.dsl",
        lambda ev: _stream_lines(
            ev.call("gccFlagBuilder", "main.c", ["lib1/include", "lib2/include"])
        ),
        ("gcc", "-c", "main.c", "-I", "lib1/include", "-I", "lib2/include"),
    ),
    "async-generator": Example(
        "async-generator.dsl",
        _run_async_generator,
        ("content of http://example.com/", "content of http://example.org/"),
    ),
    "fork-demo": Example(
        "fork-demo.dsl",
        lambda ev: _await_lines(
            ev, "parallelDownload", ["http://example.com/", "http://example.org/"]
        ),
        ("List(content of http://example.com/, content of http://example.org/)",),
    ),
    "channel-echo": Example(
        "channel-echo.dsl",
        lambda ev: _await_lines(ev, "echoMain", "Hello, DSL!"),
        ("Hello, DSL!",),
    ),
}


def _domain_is_task(domain) -> bool:
    if domain is None or not _cont_shaped(domain):
        return False
    return isinstance(domain.result, ErrorLayer)


def cmd_run(target: str) -> int:
    example = EXAMPLES.get(target)
    if example is not None:
        evaluator = _load(example.script)
        lines = example.runner(evaluator)
        for line in lines:
            print(line)
        return 0 if tuple(lines) == example.expected else 1

    path = pathlib.Path(target)
    if not path.is_file():
        print(f"dslkit run: unknown example or file {target!r}", file=sys.stderr)
        return 2
    evaluator = Evaluator()
    evaluator.load(parse_program(path.read_text()))
    try:
        entry = evaluator.lookup("main")
    except LangError:
        print(f"dslkit run: {target} has no main function", file=sys.stderr)
        return 2
    scheduler = DeterministicScheduler()
    with use_scheduler(scheduler):
        value = entry()
        if _domain_is_task(getattr(entry, "domain", None)):
            value = blocking_await(value, timeout=30.0, scheduler=scheduler)
        if isinstance(value, LazyStream):
            for line in _stream_lines(value):
                print(line)
        else:
            print(display(value))
    return 0


def cmd_transform(file: str, eta: bool) -> int:
    try:
        text = pathlib.Path(file).read_text()
    except OSError as exc:
        print(f"dslkit transform: {exc}", file=sys.stderr)
        return 1
    try:
        program = transform_program(parse_program(text), eta=eta)
    except LangError as exc:
        print(f"dslkit transform: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(print_program(program))
    return 0


def cmd_bench(case: str, size: int | None, scheduler: str, fmt: str,
              iterations: int) -> int:
    try:
        result = run_case(case, size=size, scheduler=scheduler,
                          iterations=iterations)
    except BenchGateError as exc:
        print(f"dslkit bench: {exc}", file=sys.stderr)
        return 1
    print(format_rows([result], fmt))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dslkit",
        description="Run, transform, and benchmark direct-style scripts.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser(
        "run", help="run a bundled example or a script file's main function"
    )
    run_parser.add_argument(
        "target", help=f"one of {', '.join(sorted(EXAMPLES))}, or a .dsl path"
    )

    transform_parser = commands.add_parser(
        "transform", help="print a script's continuation-passing rewrite"
    )
    transform_parser.add_argument("file")
    transform_parser.add_argument(
        "--no-eta", action="store_true",
        help="keep the wrapper function around tail continuations",
    )

    bench_parser = commands.add_parser(
        "bench", help="time a benchmark procedure"
    )
    bench_parser.add_argument("--case", required=True, choices=sorted(CASES))
    bench_parser.add_argument("--size", type=int, default=None)
    bench_parser.add_argument(
        "--scheduler", default="deterministic",
        help="deterministic or pool:<n>",
    )
    bench_parser.add_argument(
        "--format", default="json", choices=("json", "csv"), dest="fmt"
    )
    bench_parser.add_argument("--iterations", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.target)
    if args.command == "transform":
        return cmd_transform(args.file, eta=not args.no_eta)
    return cmd_bench(args.case, args.size, args.scheduler, args.fmt,
                     args.iterations)


if __name__ == "__main__":
    sys.exit(main())
