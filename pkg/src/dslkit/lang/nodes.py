"""AST node types for the direct-style script language.

Programs are sequences of function definitions.  Function bodies are
represented as chains of ``Let`` nodes: every statement is a ``Let`` whose
``rest`` is the remainder of the block, and a block's final expression is
the innermost ``rest``.  This shape keeps the continuation-passing rewrite
a fold over one spine instead of a walk over statement lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple


class LangError(ValueError):
    """Base for script-processing failures: parse, transform, evaluate."""


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Lit(Node):
    """Literal constant: int, float, str, bool, or None (unit)."""

    value: object


UNIT_LIT = Lit(None)


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class ListLit(Node):
    """Bracketed list literal ``[a, b, c]``."""

    items: Tuple[Node, ...]


@dataclass(frozen=True)
class CollLit(Node):
    """Collection builder ``List { block }`` / ``Set { block }``.

    The block produces one element; effect keywords inside the block fan
    the builder out, so the literal itself always wraps a single value.
    """

    kind: str
    body: Node


@dataclass(frozen=True)
class Lambda(Node):
    params: Tuple[str, ...]
    body: Node


@dataclass(frozen=True)
class ContLambda(Node):
    """Continuation block.

    ``cont { body }`` (``deliver`` True) is the source form: the body's
    result is handed to an implicit continuation parameter.  The rewrite
    makes that parameter explicit, producing ``cont (name) { body }``
    (``deliver`` False), which applies the named continuation itself.
    Both forms parse; only the explicit form evaluates.
    """

    param: Optional[str]
    body: Node
    deliver: bool


@dataclass(frozen=True)
class Apply(Node):
    fn: Node
    args: Tuple[Node, ...]


@dataclass(frozen=True)
class CpsApply(Node):
    """``target.cpsApply(handler)``: feed ``handler`` to an effect value."""

    target: Node
    handler: Node


@dataclass(frozen=True)
class Bang(Node):
    """``!expr``: extract the value produced by an effect expression.

    Only meaningful in source programs; the rewrite eliminates every
    occurrence, and the evaluator rejects any that remain.
    """

    expr: Node


@dataclass(frozen=True)
class Let(Node):
    """One statement plus the rest of its block.

    ``name`` is None for bare expression statements.  ``rest`` is the
    remainder of the block; a block's result expression appears as the
    deepest ``rest``.
    """

    name: Optional[str]
    rhs: Node
    rest: Node


@dataclass(frozen=True)
class If(Node):
    cond: Node
    then: Node
    els: Node


@dataclass(frozen=True)
class While(Node):
    cond: Node
    body: Node


@dataclass(frozen=True)
class TryExpr(Node):
    body: Node
    catch_name: Optional[str]
    catch_body: Optional[Node]
    finally_body: Optional[Node]


@dataclass(frozen=True)
class Throw(Node):
    value: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class UnaryOp(Node):
    op: str
    operand: Node


@dataclass(frozen=True)
class Reset(Node):
    """Explicit delimiter: effects inside ``reset { block }`` stay inside."""

    body: Node


@dataclass(frozen=True)
class FunDef(Node):
    name: str
    params: Tuple[str, ...]
    domain_text: Optional[str]
    body: Node


@dataclass(frozen=True)
class Program(Node):
    defs: Tuple[FunDef, ...] = field(default_factory=tuple)


def block_of(statements, result) -> Node:
    """Fold ``[(name, rhs), ...]`` plus a result expression into a Let chain."""
    node = result
    for name, rhs in reversed(statements):
        node = Let(name, rhs, node)
    return node


def unfold_block(node: Node):
    """Inverse of :func:`block_of`: a Let chain back to (statements, result)."""
    statements = []
    while isinstance(node, Let):
        statements.append((node.name, node.rhs))
        node = node.rest
    return statements, node
