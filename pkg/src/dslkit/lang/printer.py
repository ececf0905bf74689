"""Pretty-printer for script ASTs.

The output is valid input for :mod:`dslkit.lang.parser`, so transformed
programs can be written out, re-read, and evaluated.  Explicit
continuation closures print as ``cont (name) { ... }`` to keep their
domain-peeling behavior across a round trip.
"""

from __future__ import annotations

from .nodes import (
    Apply,
    Bang,
    BinOp,
    CollLit,
    ContLambda,
    CpsApply,
    FunDef,
    If,
    Lambda,
    Let,
    ListLit,
    Lit,
    Node,
    Program,
    Reset,
    Throw,
    TryExpr,
    UnaryOp,
    Var,
    While,
    unfold_block,
)

_INDENT = "    "

# Binding strength, loosest first.  Postfix forms bind tightest.
_COMPARE = ("==", "!=", "<", "<=", ">", ">=")
_ADDITIVE = ("+", "-")
_MULTIPLICATIVE = ("*", "/", "%")


def _precedence(node: Node) -> int:
    if isinstance(node, Throw):
        return 0
    if isinstance(node, BinOp):
        if node.op in _COMPARE:
            return 1
        if node.op in _ADDITIVE:
            return 2
        return 3
    if isinstance(node, (Bang, UnaryOp)):
        return 4
    return 5


def _escape(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"')
    return out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")


def print_program(program: Program) -> str:
    return "\n\n".join(print_fundef(d) for d in program.defs) + "\n"


def print_fundef(fundef: FunDef) -> str:
    header = f"fun {fundef.name}({', '.join(fundef.params)})"
    if fundef.domain_text:
        header += f" -> {fundef.domain_text}"
    return header + " " + _block(fundef.body, 0)


def print_expression(node: Node) -> str:
    return _expr(node, 0)


def _block(body: Node, depth: int) -> str:
    statements, result = unfold_block(body)
    inner = _INDENT * (depth + 1)
    lines = []
    for name, rhs in statements:
        if name is None:
            lines.append(inner + _statement(rhs, depth + 1))
        else:
            lines.append(inner + f"let {name} = " + _expr(rhs, depth + 1))
    # A trailing unit result stays implicit only after `let`/`while`, where
    # the parser reproduces it; anywhere else it must be spelled out.
    unit_result = isinstance(result, Lit) and result.value is None
    reparses_as_unit = bool(statements) and (
        statements[-1][0] is not None or isinstance(statements[-1][1], While)
    )
    if not (unit_result and reparses_as_unit):
        lines.append(inner + _expr(result, depth + 1))
    return "{\n" + "\n".join(lines) + "\n" + _INDENT * depth + "}"


def _statement(node: Node, depth: int) -> str:
    if isinstance(node, While):
        return (
            f"while ({_expr(node.cond, depth)}) " + _block(node.body, depth)
        )
    return _expr(node, depth)


def _child(node: Node, parent_prec: int, depth: int) -> str:
    text = _expr(node, depth)
    if _precedence(node) < parent_prec:
        return f"({text})"
    return text


def _expr(node: Node, depth: int) -> str:
    if isinstance(node, Lit):
        value = node.value
        if value is None:
            return "()"
        if value is True:
            return "true"
        if value is False:
            return "false"
        if isinstance(value, str):
            return f'"{_escape(value)}"'
        return repr(value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, ListLit):
        return "[" + ", ".join(_expr(item, depth) for item in node.items) + "]"
    if isinstance(node, CollLit):
        return f"{node.kind} " + _block(node.body, depth)
    if isinstance(node, Lambda):
        return f"fun({', '.join(node.params)}) " + _block(node.body, depth)
    if isinstance(node, ContLambda):
        if node.deliver:
            return "cont " + _block(node.body, depth)
        return f"cont ({node.param}) " + _block(node.body, depth)
    if isinstance(node, Apply):
        fn = _child(node.fn, 5, depth)
        return fn + "(" + ", ".join(_expr(a, depth) for a in node.args) + ")"
    if isinstance(node, CpsApply):
        target = _child(node.target, 5, depth)
        return f"{target}.cpsApply({_expr(node.handler, depth)})"
    if isinstance(node, Bang):
        return "!" + _child(node.expr, 5, depth)
    if isinstance(node, UnaryOp):
        return node.op + _child(node.operand, 5, depth)
    if isinstance(node, BinOp):
        prec = _precedence(node)
        left = _child(node.left, prec, depth)
        right = _child(node.right, prec + 1, depth)
        return f"{left} {node.op} {right}"
    if isinstance(node, If):
        text = f"if ({_expr(node.cond, depth)}) " + _block(node.then, depth)
        els = node.els
        if isinstance(els, Lit) and els.value is None:
            return text
        if isinstance(els, If):
            return text + " else " + _expr(els, depth)
        return text + " else " + _block(els, depth)
    if isinstance(node, While):
        return _statement(node, depth)
    if isinstance(node, TryExpr):
        text = "try " + _block(node.body, depth)
        if node.catch_body is not None:
            text += f" catch ({node.catch_name}) " + _block(node.catch_body, depth)
        if node.finally_body is not None:
            text += " finally " + _block(node.finally_body, depth)
        return text
    if isinstance(node, Throw):
        return "throw " + _expr(node.value, depth)
    if isinstance(node, Reset):
        return "reset " + _block(node.body, depth)
    raise TypeError(f"unprintable node: {node!r}")
