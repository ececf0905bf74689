"""Continuation-passing rewrite for the script language.

Every function body is an implicit delimiter: ``!expr`` inside it turns
into ``expr.cpsApply(fun(name) { rest })`` where ``rest`` is the remainder
of the body.  Control statements whose branches contain effects are
rewritten structurally:

- ``if`` joins its branches through a continuation function unless it is
  the final expression, in which case each branch ends the body on its own.
- ``while`` becomes a self-recursive loop function threading an explicit
  continuation.
- ``try``/``catch``/``finally`` and ``throw`` lower onto ``tryProtect`` and
  ``taskRaise`` and are only allowed when the declared result type has an
  error layer.

Effect extractions never escape ``fun``, ``cont``, or ``reset`` bodies;
collection builders (``List { ... }`` / ``Set { ... }``) are transparent,
which is what makes them comprehensions.
"""

from __future__ import annotations

import dataclasses
import re

from ..descriptors import ErrorLayer, canonicalize, parse_descriptor
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
    LangError,
    Let,
    ListLit,
    Lit,
    Node,
    Program,
    Reset,
    Throw,
    TryExpr,
    UnaryOp,
    UNIT_LIT,
    Var,
    While,
    block_of,
    unfold_block,
)


class TransformError(LangError):
    pass


_FRESH_RE = re.compile(r"^\$(\d+)$")

# Subtrees that delimit effect extraction: their bodies are rewritten as
# independent units and bangs inside them never escape.
_DELIMITERS = (Lambda, ContLambda, Reset)


def _child_nodes(node: Node):
    for field in dataclasses.fields(node):
        value = getattr(node, field.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item


def _map_children(node: Node, fn):
    changes = {}
    for field in dataclasses.fields(node):
        value = getattr(node, field.name)
        if isinstance(value, Node):
            new = fn(value)
            if new is not value:
                changes[field.name] = new
        elif isinstance(value, tuple) and any(isinstance(i, Node) for i in value):
            new = tuple(fn(i) if isinstance(i, Node) else i for i in value)
            if new != value:
                changes[field.name] = new
    if changes:
        return dataclasses.replace(node, **changes)
    return node


def _max_fresh(node: Node) -> int:
    best = 0

    def visit(n: Node):
        nonlocal best
        names = []
        if isinstance(n, Var):
            names.append(n.name)
        elif isinstance(n, Lambda):
            names.extend(n.params)
        elif isinstance(n, ContLambda) and n.param:
            names.append(n.param)
        elif isinstance(n, Let) and n.name:
            names.append(n.name)
        for name in names:
            match = _FRESH_RE.match(name)
            if match:
                best = max(best, int(match.group(1)))
        for child in _child_nodes(n):
            visit(child)

    visit(node)
    return best


def contains_error_layer(descriptor) -> bool:
    if descriptor is None:
        return False
    if isinstance(descriptor, ErrorLayer):
        return True
    for field in dataclasses.fields(descriptor):
        value = getattr(descriptor, field.name)
        if hasattr(value, "__dataclass_fields__") and contains_error_layer(value):
            return True
    return False


class _Rewriter:
    def __init__(self, error_capable: bool, counter: int):
        self.error_capable = error_capable
        self.counter = counter

    def fresh(self) -> str:
        self.counter += 1
        return f"${self.counter}"

    # --- effect analysis ---------------------------------------------------

    def needs_cps(self, node: Node) -> bool:
        if isinstance(node, Bang):
            return True
        if isinstance(node, (TryExpr, Throw)) and self.error_capable:
            return True
        if isinstance(node, _DELIMITERS):
            return False
        return any(self.needs_cps(child) for child in _child_nodes(node))

    # --- block rewriting ---------------------------------------------------

    def block(self, body: Node, wrap):
        statements, result = unfold_block(body)
        return self._chain(list(statements), result, wrap)

    def _chain(self, statements, result, wrap):
        if not statements:
            return self._result(result, wrap)
        name, rhs = statements[0]
        rest = statements[1:]

        def rest_builder():
            return self._chain(rest, result, wrap)

        if isinstance(rhs, While):
            if not self.needs_cps(rhs):
                return Let(
                    name,
                    While(self.pure(rhs.cond), self.block(rhs.body, None)),
                    rest_builder(),
                )
            return self._lower_while(rhs, rest_builder)
        if isinstance(rhs, TryExpr):
            return self._lower_try(name, rhs, rest_builder)
        if isinstance(rhs, Throw):
            return self._lower_throw(rhs, rest_builder)
        if isinstance(rhs, If) and self.needs_cps(rhs):
            return self._join_if(name, rhs, rest_builder)
        return self._plain_statement(name, rhs, rest_builder)

    def _plain_statement(self, name, rhs, rest_builder):
        steps, residual = self._hoist(rhs)
        if (
            isinstance(rhs, Bang)
            and steps
            and steps[-1][0] == "bang"
            and isinstance(residual, Var)
            and residual.name == steps[-1][1]
        ):
            if name is not None:
                steps[-1] = ("bang", name, steps[-1][2])
            return self._emit(steps, rest_builder)
        if name is None and isinstance(residual, (Var, Lit)):
            return self._emit(steps, rest_builder)
        return self._emit(
            steps, lambda: Let(name, self.pure(residual), rest_builder())
        )

    def _result(self, result, wrap):
        deliver = wrap or (lambda r: r)
        if isinstance(result, If) and self.needs_cps(result):
            steps, cond = self._hoist(result.cond)
            return self._emit(
                steps,
                lambda: If(
                    self.pure(cond),
                    self.block(result.then, wrap),
                    self.block(result.els, wrap),
                ),
            )
        if isinstance(result, While):
            return self._chain([(None, result)], UNIT_LIT, wrap)
        if isinstance(result, TryExpr) and (
            self.error_capable or self.needs_cps(result)
        ):
            name = self.fresh()
            return self._chain([(name, result)], Var(name), wrap)
        if isinstance(result, Throw):
            return self._chain([(None, result)], UNIT_LIT, wrap)
        steps, residual = self._hoist(result)
        return self._emit(steps, lambda: deliver(self.pure(residual)))

    # --- hoisting ------------------------------------------------------------

    def _hoist(self, expr):
        steps = []
        residual = self._hoist_into(expr, steps)
        return steps, residual

    def _hoist_into(self, expr, steps):
        if isinstance(expr, Bang):
            target = self._hoist_into(expr.expr, steps)
            name = self.fresh()
            steps.append(("bang", name, target))
            return Var(name)
        if isinstance(expr, (Var, Lit)) or isinstance(expr, _DELIMITERS):
            return expr
        if isinstance(expr, CollLit):
            if not self.needs_cps(expr):
                return expr
            inner_stmts, inner_result = unfold_block(expr.body)
            for stmt_name, stmt_rhs in inner_stmts:
                self._hoist_statement(stmt_name, stmt_rhs, steps)
            return CollLit(expr.kind, self._hoist_into(inner_result, steps))
        if isinstance(expr, (If, TryExpr, While, Throw)):
            if not self.needs_cps(expr):
                return expr
            name = self.fresh()
            steps.append(("ctrl", name, expr))
            return Var(name)
        if isinstance(expr, (Apply, CpsApply, BinOp, UnaryOp, ListLit)):
            return _map_children(expr, lambda child: self._hoist_into(child, steps))
        raise TransformError(f"cannot extract effects from {type(expr).__name__}")

    def _hoist_statement(self, name, rhs, steps):
        if isinstance(rhs, (While, TryExpr, Throw)) or (
            isinstance(rhs, If) and self.needs_cps(rhs)
        ):
            if self.needs_cps(rhs) or isinstance(rhs, TryExpr):
                steps.append(("ctrl", name, rhs))
                return
        if isinstance(rhs, Bang):
            target = self._hoist_into(rhs.expr, steps)
            steps.append(("bang", name or self.fresh(), target))
            return
        residual = self._hoist_into(rhs, steps)
        if name is not None or not isinstance(residual, (Var, Lit)):
            steps.append(("pure", name, residual))

    # --- emission --------------------------------------------------------------

    def _emit(self, steps, tail_builder):
        if not steps:
            return tail_builder()
        kind, name, payload = steps[0]
        rest = steps[1:]

        def rest_builder():
            return self._emit(rest, tail_builder)

        if kind == "bang":
            return CpsApply(self.pure(payload), Lambda((name,), rest_builder()))
        if kind == "pure":
            return Let(name, self.pure(payload), rest_builder())
        if isinstance(payload, If):
            return self._join_if(name, payload, rest_builder)
        if isinstance(payload, While):
            return self._lower_while(payload, rest_builder)
        if isinstance(payload, TryExpr):
            return self._lower_try(name, payload, rest_builder)
        return self._lower_throw(payload, rest_builder)

    # --- control lowering --------------------------------------------------------

    def _join_if(self, name, if_node, rest_builder):
        steps, cond = self._hoist(if_node.cond)
        join = self.fresh()
        bind = name if name is not None else self.fresh()

        def deliver(result):
            return Apply(Var(join), (result,))

        def build():
            return Let(
                join,
                Lambda((bind,), rest_builder()),
                If(
                    self.pure(cond),
                    self.block(if_node.then, deliver),
                    self.block(if_node.els, deliver),
                ),
            )

        return self._emit(steps, build)

    def _lower_while(self, while_node, rest_builder):
        loop = self.fresh()
        k = self.fresh()
        resume = self.fresh()
        statements, result = unfold_block(while_node.body)
        statements = list(statements)
        if not (isinstance(result, Lit) and result.value is None):
            statements.append((None, result))
        repeat = Apply(Var(loop), (Var(k),))
        loop_chain = If(
            while_node.cond,
            block_of(statements, repeat),
            Apply(Var(k), (UNIT_LIT,)),
        )
        loop_body = self.block(loop_chain, None)
        return Let(
            loop,
            Lambda((k,), loop_body),
            Apply(Var(loop), (Lambda((resume,), rest_builder()),)),
        )

    def _lower_try(self, name, try_node, rest_builder):
        if not self.error_capable:
            if self.needs_cps(try_node):
                raise TransformError(
                    "try with effects requires an error-capable result type"
                )
            return Let(name, self.pure(try_node), rest_builder())
        body_k = self.fresh()
        body = ContLambda(
            body_k,
            self.block(try_node.body, lambda r: Apply(Var(body_k), (r,))),
            deliver=False,
        )
        if try_node.catch_body is None:
            on_error = Lit(None)
        else:
            catch_k = self.fresh()
            on_error = Lambda(
                (try_node.catch_name,),
                ContLambda(
                    catch_k,
                    self.block(
                        try_node.catch_body, lambda r: Apply(Var(catch_k), (r,))
                    ),
                    deliver=False,
                ),
            )
        if try_node.finally_body is None:
            finalizer = Lit(None)
        else:
            fin_k = self.fresh()
            finalizer = ContLambda(
                fin_k,
                self.block(
                    try_node.finally_body, lambda r: Apply(Var(fin_k), (r,))
                ),
                deliver=False,
            )
        bind = name if name is not None else self.fresh()
        return CpsApply(
            Apply(Var("tryProtect"), (body, on_error, finalizer)),
            Lambda((bind,), rest_builder()),
        )

    def _lower_throw(self, throw_node, rest_builder):
        if not self.error_capable:
            return Let(None, Throw(self.pure(throw_node.value)), rest_builder())
        steps, value = self._hoist(throw_node.value)
        dead = self.fresh()

        def build():
            return CpsApply(
                Apply(Var("taskRaise"), (self.pure(value),)),
                Lambda((dead,), rest_builder()),
            )

        return self._emit(steps, build)

    # --- pure rewriting: recurse into nested delimited bodies ---------------------

    def pure(self, node: Node) -> Node:
        if isinstance(node, Bang):
            raise TransformError("effect extraction escaped rewriting")
        if isinstance(node, Lambda):
            return Lambda(node.params, self.block(node.body, None))
        if isinstance(node, ContLambda):
            if node.deliver:
                k = self.fresh()
                return ContLambda(
                    k,
                    self.block(node.body, lambda r: Apply(Var(k), (r,))),
                    deliver=False,
                )
            return ContLambda(node.param, self.block(node.body, None), deliver=False)
        if isinstance(node, Reset):
            return self.block(node.body, None)
        if isinstance(node, CollLit):
            return CollLit(node.kind, self.block(node.body, None))
        if isinstance(node, Let):
            statements, result = unfold_block(node)
            return block_of(
                [(n, self.pure(r)) for n, r in statements], self.pure(result)
            )
        return _map_children(node, self.pure)


def eta_reduce(node: Node) -> Node:
    """Collapse ``x.cpsApply(fun(v) { k(v) })`` to ``x.cpsApply(k)``."""
    node = _map_children(node, eta_reduce)
    if isinstance(node, CpsApply) and isinstance(node.handler, Lambda):
        handler = node.handler
        if (
            len(handler.params) == 1
            and isinstance(handler.body, Apply)
            and isinstance(handler.body.fn, Var)
            and len(handler.body.args) == 1
            and isinstance(handler.body.args[0], Var)
            and handler.body.args[0].name == handler.params[0]
            and handler.body.fn.name != handler.params[0]
        ):
            return CpsApply(node.target, Var(handler.body.fn.name))
    return node


def fundef_domain(fundef: FunDef):
    if fundef.domain_text is None:
        return None
    return canonicalize(parse_descriptor(fundef.domain_text))


def transform_fundef(fundef: FunDef, eta: bool = True) -> FunDef:
    domain = fundef_domain(fundef)
    rewriter = _Rewriter(contains_error_layer(domain), _max_fresh(fundef.body))
    body = rewriter.block(fundef.body, None)
    if eta:
        body = eta_reduce(body)
    return FunDef(fundef.name, fundef.params, fundef.domain_text, body)


def transform_program(program: Program, eta: bool = True) -> Program:
    return Program(tuple(transform_fundef(d, eta) for d in program.defs))


def assert_no_bang(node: Node):
    """Raise if any effect extraction survived the rewrite."""
    if isinstance(node, Bang) or (isinstance(node, ContLambda) and node.deliver):
        raise TransformError("untransformed effect syntax remains")
    for child in _child_nodes(node):
        assert_no_bang(child)
