"""Arithmetic expression language for matrix entries.

Problem files carry entries as text in the two grid variables ``t`` (column
time) and ``tp`` (row time). Grammar, in EBNF:

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = "-" unary | power ;
    power    = atom [ "^" exponent ] ;
    exponent = [ "-" ] number ;
    atom     = number | "t" | "tp" | func "(" expr ")" | "(" expr ")" ;
    func     = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "sinh" | "cosh" ;
    number   = digits [ "." digits ] [ ("e" | "E") [sign] digits ] ;

Binary "+", "-", "*", "/" are left associative; "^" binds tighter than unary
minus and its exponent must be a (possibly negated) numeric literal, which
makes chained "^" a syntax error rather than an associativity puzzle. There
is no implicit multiplication: "2t" is rejected. Unknown identifiers are
rejected at parse time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, EvaluationError, ExprSyntaxError, UnknownIdentifierError

__all__ = ["Expr", "Num", "Var", "Neg", "BinOp", "Call", "parse", "evaluate", "to_source", "to_callable", "FUNCTIONS"]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")
VARIABLES = ("t", "tp")


class Expr:
    """Base class of expression nodes; all nodes are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


# ---------------------------------------------------------------------------
# tokenizer

_OPERATORS = set("+-*/^()")


def _tokenize(source: str):
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPERATORS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                value = float(text)
            except ValueError:
                raise ExprSyntaxError(f"bad number {text!r}", i)
            tokens.append(("num", value, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("ident", source[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


# ---------------------------------------------------------------------------
# recursive descent parser

class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            negate = False
            if self.peek()[0] == "-":
                self.advance()
                negate = True
            tok = self.advance()
            if tok[0] != "num":
                raise ExprSyntaxError("exponent must be a numeric literal", tok[2])
            exponent: Expr = Num(tok[1])
            if negate:
                exponent = Neg(exponent)
            node = BinOp("^", node, exponent)
        return node

    def atom(self) -> Expr:
        tok = self.advance()
        kind, value, pos = tok
        if kind == "num":
            return Num(value)
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            if value in VARIABLES:
                if self.peek()[0] == "(":
                    raise ArityError(f"variable {value!r} is not callable", self.peek()[2])
                return Var(value)
            if value in FUNCTIONS:
                if self.peek()[0] != "(":
                    raise ArityError(f"function {value!r} needs one parenthesized argument", pos)
                self.advance()
                arg = self.expr()
                if self.peek()[0] == ",":
                    raise ArityError(f"function {value!r} takes exactly one argument", self.peek()[2])
                self.expect(")")
                return Call(value, arg)
            raise UnknownIdentifierError(f"unknown identifier {value!r}", pos)
        raise ExprSyntaxError(f"unexpected token {value!r}", pos)


def parse(source: str) -> Expr:
    """Parse expression text into a tree."""
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# evaluation

_MATH_FNS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sinh": math.sinh,
    "cosh": math.cosh,
}

_NUMPY_FNS = {name: getattr(np, name) for name in FUNCTIONS}


def evaluate(e: Expr, t: float, tp: float) -> float:
    """Evaluate at one point with real semantics.

    Domain violations (log of a non-positive number, division by zero,
    fractional power of a negative base, overflow) raise EvaluationError.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return float(t) if e.name == "t" else float(tp)
    if isinstance(e, Neg):
        return -evaluate(e.arg, t, tp)
    if isinstance(e, BinOp):
        a = evaluate(e.left, t, tp)
        b = evaluate(e.right, t, tp)
        try:
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if e.op == "/":
                return a / b
            result = math.pow(a, b)
        except ZeroDivisionError as exc:
            raise EvaluationError(f"division by zero in {to_source(e)!r}") from exc
        except (ValueError, OverflowError) as exc:
            raise EvaluationError(f"domain error in {to_source(e)!r}: {exc}") from exc
        return result
    if isinstance(e, Call):
        arg = evaluate(e.arg, t, tp)
        try:
            return _MATH_FNS[e.fn](arg)
        except (ValueError, OverflowError) as exc:
            raise EvaluationError(f"domain error in {e.fn}({arg!r}): {exc}") from exc
    raise TypeError(f"not an expression node: {e!r}")


def to_callable(e: Expr):
    """Compile to a vectorized callable f(tp, t) suitable for grid sampling.

    Uses numpy semantics, so domain violations surface as non-finite values
    (the sampler turns those into EvaluationError).
    """

    def run(node, tp, t):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return t if node.name == "t" else tp
        if isinstance(node, Neg):
            return -run(node.arg, tp, t)
        if isinstance(node, BinOp):
            a = run(node.left, tp, t)
            b = run(node.right, tp, t)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                return a / b
            return np.power(a, b)
        if isinstance(node, Call):
            return _NUMPY_FNS[node.fn](run(node.arg, tp, t))
        raise TypeError(f"not an expression node: {node!r}")

    def f(tp, t):
        with np.errstate(all="ignore"):
            value = run(e, tp, t)
        return value + np.zeros_like(np.asarray(tp, dtype=float) + np.asarray(t, dtype=float))

    return f


# ---------------------------------------------------------------------------
# printing

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_source(e: Expr) -> str:
    """Render a tree back to text that reparses to an identical tree."""

    def render(node):
        if isinstance(node, Num):
            return _format_number(node.value), 5
        if isinstance(node, Var):
            return node.name, 5
        if isinstance(node, Call):
            inner, _ = render(node.arg)
            return f"{node.fn}({inner})", 5
        if isinstance(node, Neg):
            inner, prec = render(node.arg)
            if prec < _PRECEDENCE["neg"]:
                inner = f"({inner})"
            return f"-{inner}", _PRECEDENCE["neg"]
        if isinstance(node, BinOp):
            prec = _PRECEDENCE[node.op]
            left, lp = render(node.left)
            if lp < prec:
                left = f"({left})"
            if node.op == "^":
                right = (
                    f"-{_format_number(node.right.arg.value)}"
                    if isinstance(node.right, Neg)
                    else _format_number(node.right.value)
                )
                return f"{left}^{right}", prec
            right, rp = render(node.right)
            # left associativity: an equal-precedence right child needs parens
            # to reparse to the same tree
            if rp <= prec:
                right = f"({right})"
            return f"{left} {node.op} {right}", prec
        raise TypeError(f"not an expression node: {node!r}")

    text, _ = render(e)
    return text
