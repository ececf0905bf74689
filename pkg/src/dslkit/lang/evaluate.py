"""Evaluator for rewritten script programs.

Every declared function evaluates against one fixed result descriptor: the
one written after ``->``.  Closures capture the descriptor of the context
that created them, and ``cont (k) { ... }`` bodies run against the peeled
descriptor when the context is continuation-shaped.  ``target.cpsApply(h)``
dispatches on the target:

- keyword values resolve an interpretation against the context descriptor;
- placeholder-style objects supply their own ``cps_apply``;
- plain callables are task-bound in a full task context, continuation-bound
  in other continuation-shaped contexts, and applied directly otherwise.
"""

from __future__ import annotations

from ..core import KeywordValue
from ..descriptors import ErrorLayer, Fn
from ..registry import default_registry
from ..task import task_bind
from .builtins import BUILTINS, ScriptError, display
from .nodes import (
    Apply,
    Bang,
    BinOp,
    CollLit,
    ContLambda,
    CpsApply,
    If,
    Lambda,
    LangError,
    Let,
    ListLit,
    Lit,
    Program,
    Reset,
    Throw,
    TryExpr,
    UnaryOp,
    Var,
    While,
)
from .transform import fundef_domain, transform_program
from ..keywords import build_collection


class EvalError(LangError):
    pass


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, vars=None, parent=None):
        self.vars = vars if vars is not None else {}
        self.parent = parent

    def lookup(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        raise EvalError(f"unbound name {name!r}")

    def define(self, name, value):
        self.vars[name] = value


def _cont_shaped(descriptor) -> bool:
    return (
        isinstance(descriptor, Fn)
        and isinstance(descriptor.param, Fn)
        and descriptor.param.result == descriptor.result
    )


def _peel_cont(descriptor):
    if _cont_shaped(descriptor):
        return descriptor.result
    return descriptor


class Closure:
    """A script function: fixed parameter list, body, captured scope and
    captured result descriptor."""

    __slots__ = ("machine", "params", "body", "env", "domain", "name")

    def __init__(self, machine, params, body, env, domain, name="<fun>"):
        self.machine = machine
        self.params = params
        self.body = body
        self.env = env
        self.domain = domain
        self.name = name

    def __call__(self, *args):
        if len(args) != len(self.params):
            raise EvalError(
                f"{self.name} takes {len(self.params)} argument(s), got {len(args)}"
            )
        env = Env(dict(zip(self.params, args)), self.env)
        return self.machine.eval(self.body, env, self.domain)

    def __repr__(self):
        return f"<fun {self.name}({', '.join(self.params)})>"


class Evaluator:
    def __init__(self, registry=None):
        self.registry = registry if registry is not None else default_registry()
        self.globals = Env(dict(BUILTINS))

    def load(self, program: Program, rewrite: bool = True) -> "Evaluator":
        if rewrite:
            program = transform_program(program)
        for fundef in program.defs:
            closure = Closure(
                self,
                fundef.params,
                fundef.body,
                self.globals,
                fundef_domain(fundef),
                name=fundef.name,
            )
            self.globals.define(fundef.name, closure)
        return self

    def lookup(self, name):
        return self.globals.lookup(name)

    def call(self, name, *args):
        return self.lookup(name)(*args)

    # --- the interpreter loop -------------------------------------------------

    def eval(self, node, env, domain):
        while True:
            if isinstance(node, Lit):
                return node.value
            if isinstance(node, Var):
                return env.lookup(node.name)
            if isinstance(node, Let):
                if node.name is not None and isinstance(
                    node.rhs, (Lambda, ContLambda)
                ):
                    # bind the slot first so the closure can call itself
                    env = Env({}, env)
                    env.define(node.name, None)
                    value = self.eval(node.rhs, env, domain)
                    env.vars[node.name] = value
                else:
                    value = self.eval(node.rhs, env, domain)
                    if node.name is not None:
                        env = Env({node.name: value}, env)
                node = node.rest
                continue
            if isinstance(node, If):
                node = node.then if self.eval(node.cond, env, domain) else node.els
                continue
            if isinstance(node, Reset):
                node = node.body
                continue
            return self._eval_other(node, env, domain)

    def _eval_other(self, node, env, domain):
        if isinstance(node, Apply):
            fn = self.eval(node.fn, env, domain)
            args = [self.eval(a, env, domain) for a in node.args]
            if not callable(fn):
                raise EvalError(f"not callable: {fn!r}")
            return fn(*args)
        if isinstance(node, CpsApply):
            target = self.eval(node.target, env, domain)
            handler = self.eval(node.handler, env, domain)
            return self.cps_apply(target, handler, domain)
        if isinstance(node, Lambda):
            return Closure(self, node.params, node.body, env, domain)
        if isinstance(node, ContLambda):
            if node.deliver:
                raise EvalError("continuation block was not rewritten")
            return Closure(
                self,
                (node.param,),
                node.body,
                env,
                _peel_cont(domain) if domain is not None else None,
                name="<cont>",
            )
        if isinstance(node, BinOp):
            return self._binop(
                node.op,
                self.eval(node.left, env, domain),
                self.eval(node.right, env, domain),
            )
        if isinstance(node, UnaryOp):
            return -self.eval(node.operand, env, domain)
        if isinstance(node, ListLit):
            return [self.eval(item, env, domain) for item in node.items]
        if isinstance(node, CollLit):
            return build_collection(node.kind, [self.eval(node.body, env, domain)])
        if isinstance(node, While):
            while self.eval(node.cond, env, domain):
                self.eval(node.body, env, domain)
            return None
        if isinstance(node, TryExpr):
            return self._native_try(node, env, domain)
        if isinstance(node, Throw):
            raise ScriptError(self.eval(node.value, env, domain))
        if isinstance(node, Bang):
            raise EvalError("effect extraction was not rewritten")
        raise EvalError(f"cannot evaluate {type(node).__name__}")

    def cps_apply(self, target, handler, domain):
        if isinstance(target, KeywordValue):
            if domain is None:
                raise EvalError(
                    f"keyword {target.kind} needs a declared result type"
                )
            interp, _trace = self.registry.resolve(
                target.kind, domain, hint=target.resolution_hint()
            )
            return interp.apply(target, handler)
        if hasattr(target, "cps_apply"):
            return target.cps_apply(handler)
        if callable(target):
            if domain is not None and _cont_shaped(domain):
                if isinstance(domain.result, ErrorLayer):
                    return task_bind(target, handler)
                return lambda k: target(lambda v: handler(v)(k))
            return target(handler)
        raise EvalError(f"cannot extract from {target!r}")

    def _native_try(self, node, env, domain):
        try:
            try:
                return self.eval(node.body, env, domain)
            except ScriptError as error:
                if node.catch_body is None:
                    raise
                catch_env = Env({node.catch_name: error.payload}, env)
                return self.eval(node.catch_body, catch_env, domain)
        finally:
            if node.finally_body is not None:
                self.eval(node.finally_body, env, domain)

    @staticmethod
    def _binop(op, left, right):
        if op == "+":
            if isinstance(left, str) or isinstance(right, str):
                return display(left) + display(right)
            if isinstance(left, (list, tuple)):
                return list(left) + list(right)
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            return left / right
        if op == "%":
            return left % right
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        raise EvalError(f"unknown operator {op!r}")
