"""Parser for the direct-style script language.

The surface syntax is a small brace language:

    fun name(a, b) -> Stream[Int] {
        let x = !Yield(a)
        if (x > b) { ... } else { ... }
        result
    }

Statements are separated by newlines or semicolons.  ``!expr`` marks an
effect extraction, ``cont { ... }`` builds an explicit continuation
closure, and ``List { ... }`` / ``Set { ... }`` are single-element
collection builders used for comprehensions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

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
    Program,
    Reset,
    Throw,
    TryExpr,
    UnaryOp,
    UNIT_LIT,
    Var,
    While,
    block_of,
)


class ParseError(LangError):
    pass


KEYWORDS = {
    "fun", "let", "if", "else", "while", "try", "catch", "finally",
    "throw", "cont", "reset", "true", "false",
}

COLLECTION_HEADS = {"List", "Set"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>//[^\n]*)
  | (?P<newline>\n)
  | (?P<float>\d+\.\d+)
  | (?P<int>\d+)
  | (?P<string>"(?:\\.|[^"\\])*")
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*|\$\d+)
  | (?P<punct>->|==|!=|<=|>=|[()\[\]{},.;!=<>+\-*/%])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int


def tokenize(source: str):
    tokens = []
    line = 1
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ParseError(f"line {line}: unexpected character {source[pos]!r}")
        pos = match.end()
        kind = match.lastgroup
        text = match.group()
        if kind == "newline":
            tokens.append(Token("newline", "\n", line))
            line += 1
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "punct":
            tokens.append(Token(text, text, line))
        else:
            tokens.append(Token(kind, text, line))
    tokens.append(Token("eof", "", line))
    return tokens


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}


def _unquote(text: str) -> str:
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            i += 1
            esc = body[i]
            out.append(_ESCAPES.get(esc, esc))
        else:
            out.append(ch)
        i += 1
    return "".join(out)


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    # --- token plumbing ---------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str) -> Token:
        token = self.peek()
        if token.kind != kind:
            raise ParseError(
                f"line {token.line}: expected {kind!r}, found {token.text!r}"
            )
        return self.advance()

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def at_name(self, text: str) -> bool:
        token = self.peek()
        return token.kind == "name" and token.text == text

    def skip_newlines(self):
        while self.at("newline") or self.at(";"):
            self.advance()

    # --- program ----------------------------------------------------------

    def parse_program(self) -> Program:
        defs = []
        self.skip_newlines()
        while not self.at("eof"):
            defs.append(self.parse_fundef())
            self.skip_newlines()
        return Program(tuple(defs))

    def parse_fundef(self) -> FunDef:
        token = self.peek()
        if not self.at_name("fun"):
            raise ParseError(f"line {token.line}: expected 'fun', found {token.text!r}")
        self.advance()
        name = self.expect("name").text
        params = self.parse_params()
        domain_text = None
        if self.at("->"):
            self.advance()
            domain_text = self.parse_domain_text()
        body = self.parse_block()
        return FunDef(name, params, domain_text, body)

    def parse_params(self):
        self.expect("(")
        self.skip_newlines()
        params = []
        if not self.at(")"):
            while True:
                params.append(self.expect("name").text)
                self.skip_newlines()
                if self.at(","):
                    self.advance()
                    self.skip_newlines()
                    continue
                break
        self.expect(")")
        return tuple(params)

    def parse_domain_text(self) -> str:
        # Stored in one canonical spelling (", " after commas) so printing a
        # parsed definition reproduces its source bytes.
        parts = []
        while not self.at("{"):
            token = self.advance()
            if token.kind in ("eof", "newline"):
                raise ParseError(f"line {token.line}: unterminated result type")
            parts.append(token.text)
        if not parts:
            token = self.peek()
            raise ParseError(f"line {token.line}: missing result type after '->'")
        return "".join(parts).replace(",", ", ")

    # --- blocks and statements ---------------------------------------------

    def parse_block(self):
        """Parse ``{ statements }`` into a Let chain."""
        self.expect("{")
        statements = []
        self.skip_newlines()
        while not self.at("}"):
            statements.append(self.parse_statement())
            if self.at("newline") or self.at(";"):
                self.skip_newlines()
            elif not self.at("}"):
                token = self.peek()
                raise ParseError(
                    f"line {token.line}: expected end of statement, found {token.text!r}"
                )
        self.expect("}")
        if not statements:
            return UNIT_LIT
        last_name, last_rhs = statements[-1]
        if last_name is None and not isinstance(last_rhs, While):
            return block_of(statements[:-1], last_rhs)
        return block_of(statements, UNIT_LIT)

    def parse_statement(self):
        if self.at_name("let"):
            self.advance()
            name = self.expect("name").text
            self.expect("=")
            self.skip_newlines()
            return (name, self.parse_expr())
        if self.at_name("while"):
            self.advance()
            self.expect("(")
            self.skip_newlines()
            cond = self.parse_expr()
            self.skip_newlines()
            self.expect(")")
            body = self.parse_block()
            return (None, While(cond, body))
        return (None, self.parse_expr())

    # --- expressions --------------------------------------------------------

    def parse_expr(self):
        if self.at_name("throw"):
            self.advance()
            return Throw(self.parse_expr())
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        while self.peek().kind in ("==", "!=", "<", "<=", ">", ">="):
            op = self.advance().kind
            self.skip_newlines()
            left = BinOp(op, left, self.parse_additive())
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            self.skip_newlines()
            left = BinOp(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.peek().kind in ("*", "/", "%"):
            op = self.advance().kind
            self.skip_newlines()
            left = BinOp(op, left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.at("!"):
            self.advance()
            return Bang(self.parse_unary())
        if self.at("-"):
            self.advance()
            return UnaryOp("-", self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self):
        node = self.parse_primary()
        while True:
            if self.at("("):
                node = Apply(node, self.parse_args())
            elif self.at("."):
                self.advance()
                method = self.expect("name")
                if method.text != "cpsApply":
                    raise ParseError(
                        f"line {method.line}: unknown method {method.text!r}"
                    )
                self.expect("(")
                self.skip_newlines()
                handler = self.parse_expr()
                self.skip_newlines()
                self.expect(")")
                node = CpsApply(node, handler)
            else:
                return node

    def parse_args(self):
        self.expect("(")
        self.skip_newlines()
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expr())
                self.skip_newlines()
                if self.at(","):
                    self.advance()
                    self.skip_newlines()
                    continue
                break
        self.expect(")")
        return tuple(args)

    def parse_primary(self):
        token = self.peek()
        if token.kind == "int":
            self.advance()
            return Lit(int(token.text))
        if token.kind == "float":
            self.advance()
            return Lit(float(token.text))
        if token.kind == "string":
            self.advance()
            return Lit(_unquote(token.text))
        if token.kind == "(":
            self.advance()
            if self.at(")"):
                self.advance()
                return UNIT_LIT
            self.skip_newlines()
            inner = self.parse_expr()
            self.skip_newlines()
            self.expect(")")
            return inner
        if token.kind == "[":
            self.advance()
            self.skip_newlines()
            items = []
            if not self.at("]"):
                while True:
                    items.append(self.parse_expr())
                    self.skip_newlines()
                    if self.at(","):
                        self.advance()
                        self.skip_newlines()
                        continue
                    break
            self.expect("]")
            return ListLit(tuple(items))
        if token.kind == "name":
            return self.parse_name_form(token)
        raise ParseError(f"line {token.line}: unexpected token {token.text!r}")

    def parse_name_form(self, token: Token):
        text = token.text
        if text == "true":
            self.advance()
            return Lit(True)
        if text == "false":
            self.advance()
            return Lit(False)
        if text == "fun":
            self.advance()
            params = self.parse_params()
            return Lambda(params, self.parse_block())
        if text == "cont":
            self.advance()
            if self.at("("):
                self.advance()
                param = self.expect("name").text
                self.expect(")")
                return ContLambda(param, self.parse_block(), deliver=False)
            return ContLambda(None, self.parse_block(), deliver=True)
        if text == "reset":
            self.advance()
            return Reset(self.parse_block())
        if text == "if":
            return self.parse_if()
        if text == "try":
            return self.parse_try()
        if text == "throw":
            self.advance()
            return Throw(self.parse_expr())
        if text in COLLECTION_HEADS and self.tokens[self.pos + 1].kind == "{":
            self.advance()
            return CollLit(text, self.parse_block())
        if text in KEYWORDS and text not in ("true", "false"):
            raise ParseError(f"line {token.line}: misplaced keyword {text!r}")
        self.advance()
        return Var(text)

    def parse_if(self):
        self.expect("name")  # 'if'
        self.expect("(")
        self.skip_newlines()
        cond = self.parse_expr()
        self.skip_newlines()
        self.expect(")")
        then = self.parse_block()
        els = UNIT_LIT
        save = self.pos
        self.skip_newlines()
        if self.at_name("else"):
            self.advance()
            if self.at_name("if"):
                els = self.parse_if()
            else:
                els = self.parse_block()
        else:
            self.pos = save
        return If(cond, then, els)

    def parse_try(self):
        self.expect("name")  # 'try'
        body = self.parse_block()
        catch_name = None
        catch_body = None
        finally_body = None
        save = self.pos
        self.skip_newlines()
        if self.at_name("catch"):
            self.advance()
            self.expect("(")
            catch_name = self.expect("name").text
            self.expect(")")
            catch_body = self.parse_block()
            save = self.pos
            self.skip_newlines()
        if self.at_name("finally"):
            self.advance()
            finally_body = self.parse_block()
        else:
            self.pos = save
        if catch_body is None and finally_body is None:
            token = self.peek()
            raise ParseError(f"line {token.line}: try needs catch or finally")
        return TryExpr(body, catch_name, catch_body, finally_body)


def parse_program(source: str) -> Program:
    return Parser(source).parse_program()


def parse_expression(source: str):
    """Parse a single expression (used by tests and the prompt tooling)."""
    parser = Parser(source)
    parser.skip_newlines()
    expr = parser.parse_expr()
    parser.skip_newlines()
    parser.expect("eof")
    return expr
