"""Direct-style script language: parser, CPS rewrite, printer, evaluator."""

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
    Var,
    While,
    block_of,
    unfold_block,
)
from .parser import ParseError, parse_expression, parse_program
from .printer import print_expression, print_fundef, print_program
from .transform import (
    TransformError,
    assert_no_bang,
    eta_reduce,
    fundef_domain,
    transform_fundef,
    transform_program,
)
from .builtins import BUILTINS, ScriptError, display
from .evaluate import EvalError, Evaluator

__all__ = [
    "Apply", "Bang", "BinOp", "CollLit", "ContLambda", "CpsApply", "FunDef",
    "If", "Lambda", "LangError", "Let", "ListLit", "Lit", "Node", "Program",
    "Reset", "Throw", "TryExpr", "UnaryOp", "Var", "While", "block_of",
    "unfold_block",
    "ParseError", "parse_expression", "parse_program",
    "print_expression", "print_fundef", "print_program",
    "TransformError", "assert_no_bang", "eta_reduce", "fundef_domain",
    "transform_fundef", "transform_program",
    "BUILTINS", "ScriptError", "display",
    "EvalError", "Evaluator",
]
