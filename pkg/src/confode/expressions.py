"""Arithmetic expressions in the time variable, with exact derivatives.

Config files name coefficient functions as plain text ("1 + 0.5*t",
"exp(-t)*sin(2*t)").  This module parses that text, differentiates the tree
symbolically, and packages both channels as a ScalarField, so that fields
coming from configs are as sharp as fields written in Python.

Grammar (caret is right associative, tighter than unary minus):

    expr   := term  (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "t" | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Functions: sin cos tan exp log sqrt abs sinh cosh, and two-argument pow,
which parses into the same node as the caret.  Failures raise
ExpressionError carrying the byte offset into the source text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

from .fields import ScalarField, from_callable

__all__ = ["Expression", "ExpressionError", "parse_expression"]


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class ExpressionError(ValueError):
    """Parse failure, pointing at the offending byte of the source text."""

    def __init__(self, message: str, text: str, pos: int):
        # pos is a character index; report it as a byte offset so the
        # message stays meaningful for callers slicing encoded configs
        self.offset = len(text[:pos].encode("utf-8"))
        super().__init__(f"{message} at offset {self.offset}")


# ---------------------------------------------------------------------------
# tokens
# ---------------------------------------------------------------------------

_ONE_ARG = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh")
_TWO_ARG = ("pow",)
_PUNCT = "+-*/^(),"

Token = Tuple[str, str, int]  # kind, text, char position


def _tokens(text: str) -> Iterator[Token]:
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _PUNCT:
            yield (c, c, i)
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            num = text[i:j]
            if num.count(".") > 1:
                raise ExpressionError(f"bad number {num!r}", text, i)
            yield ("num", num, i)
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            yield ("name", text[i:j], i)
            i = j
            continue
        raise ExpressionError(f"unexpected character {c!r}", text, i)
    yield ("end", "", n)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

# nodes: ("num", x) ("t",) ("neg", u) ("call", name, u) and
# ("add"|"sub"|"mul"|"div"|"pow", u, v)

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks: List[Token] = list(_tokens(text))
        self.k = 0

    def peek(self) -> Token:
        return self.toks[self.k]

    def take(self, kind: Optional[str] = None) -> Token:
        tok = self.toks[self.k]
        if kind is not None and tok[0] != kind:
            what = f"{tok[1]!r}" if tok[0] != "end" else "end of text"
            raise ExpressionError(f"expected {kind!r}, found {what}", self.text, tok[2])
        self.k += 1
        return tok

    def expr(self) -> tuple:
        node = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self) -> tuple:
        node = self.unary()
        while self.peek()[0] in "*/":
            op = self.take()[0]
            node = ("mul" if op == "*" else "div", node, self.unary())
        return node

    def unary(self) -> tuple:
        if self.peek()[0] == "-":
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self) -> tuple:
        node = self.atom()
        if self.peek()[0] == "^":
            self.take()
            node = ("pow", node, self.unary())
        return node

    def atom(self) -> tuple:
        kind, text, pos = self.peek()
        if kind == "num":
            self.take()
            return ("num", float(text))
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind == "name":
            self.take()
            if text == "t":
                return ("t",)
            if text in _ONE_ARG:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return ("call", text, arg)
            if text in _TWO_ARG:
                self.take("(")
                base = self.expr()
                self.take(",")
                expo = self.expr()
                self.take(")")
                return ("pow", base, expo)
            raise ExpressionError(f"unknown identifier {text!r}", self.text, pos)
        what = f"{text!r}" if kind != "end" else "end of text"
        raise ExpressionError(f"expected a value, found {what}", self.text, pos)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

_FN: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
    "sinh": math.sinh,
    "cosh": math.cosh,
}


def _eval(node: tuple, t: float) -> float:
    op = node[0]
    if op == "num":
        return node[1]
    if op == "t":
        return t
    if op == "neg":
        return -_eval(node[1], t)
    if op == "call":
        return _FN[node[1]](_eval(node[2], t))
    u = _eval(node[1], t)
    v = _eval(node[2], t)
    if op == "add":
        return u + v
    if op == "sub":
        return u - v
    if op == "mul":
        return u * v
    if op == "div":
        return u / v
    # caret: integer exponents of negative bases are fine, fractional are not,
    # which matches math.pow
    return math.pow(u, v)


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

_NUM_ZERO = ("num", 0.0)
_NUM_ONE = ("num", 1.0)


def _is_num(node: tuple, value: Optional[float] = None) -> bool:
    return node[0] == "num" and (value is None or node[1] == value)


def _add(u: tuple, v: tuple) -> tuple:
    if _is_num(u, 0.0):
        return v
    if _is_num(v, 0.0):
        return u
    if _is_num(u) and _is_num(v):
        return ("num", u[1] + v[1])
    return ("add", u, v)


def _sub(u: tuple, v: tuple) -> tuple:
    if _is_num(v, 0.0):
        return u
    if _is_num(u) and _is_num(v):
        return ("num", u[1] - v[1])
    if _is_num(u, 0.0):
        return ("neg", v)
    return ("sub", u, v)


def _mul(u: tuple, v: tuple) -> tuple:
    if _is_num(u, 0.0) or _is_num(v, 0.0):
        return _NUM_ZERO
    if _is_num(u, 1.0):
        return v
    if _is_num(v, 1.0):
        return u
    if _is_num(u) and _is_num(v):
        return ("num", u[1] * v[1])
    return ("mul", u, v)


def _div(u: tuple, v: tuple) -> tuple:
    if _is_num(u, 0.0):
        return _NUM_ZERO
    if _is_num(v, 1.0):
        return u
    return ("div", u, v)


def _pow(u: tuple, v: tuple) -> tuple:
    if _is_num(v, 1.0):
        return u
    if _is_num(v, 0.0):
        return _NUM_ONE
    return ("pow", u, v)


def _diff(node: tuple) -> tuple:
    op = node[0]
    if op == "num":
        return _NUM_ZERO
    if op == "t":
        return _NUM_ONE
    if op == "neg":
        return ("neg", _diff(node[1]))
    if op == "add":
        return _add(_diff(node[1]), _diff(node[2]))
    if op == "sub":
        return _sub(_diff(node[1]), _diff(node[2]))
    if op == "mul":
        u, v = node[1], node[2]
        return _add(_mul(_diff(u), v), _mul(u, _diff(v)))
    if op == "div":
        u, v = node[1], node[2]
        num = _sub(_mul(_diff(u), v), _mul(u, _diff(v)))
        return _div(num, _pow(v, ("num", 2.0)))
    if op == "pow":
        u, v = node[1], node[2]
        if _is_num(v):
            # constant exponent keeps negative bases differentiable
            coef = _mul(v, _pow(u, ("num", v[1] - 1.0)))
            return _mul(coef, _diff(u))
        # general exponent through exp(v log u), valid where u > 0
        inner = _add(_mul(_diff(v), ("call", "log", u)), _div(_mul(v, _diff(u)), u))
        return _mul(node, inner)
    name, arg = node[1], node[2]
    da = _diff(arg)
    if name == "sin":
        outer: tuple = ("call", "cos", arg)
    elif name == "cos":
        outer = ("neg", ("call", "sin", arg))
    elif name == "tan":
        outer = _div(_NUM_ONE, _pow(("call", "cos", arg), ("num", 2.0)))
    elif name == "exp":
        outer = node
    elif name == "log":
        outer = _div(_NUM_ONE, arg)
    elif name == "sqrt":
        outer = _div(_NUM_ONE, _mul(("num", 2.0), node))
    elif name == "abs":
        # sign of the argument; the kink at zero stays undefined
        outer = _div(arg, node)
    elif name == "sinh":
        outer = ("call", "cosh", arg)
    else:
        outer = ("call", "sinh", arg)
    return _mul(outer, da)


# ---------------------------------------------------------------------------
# public surface
# ---------------------------------------------------------------------------

def _render(node: tuple) -> str:
    op = node[0]
    if op == "num":
        return f"{node[1]:g}"
    if op == "t":
        return "t"
    if op == "neg":
        return f"(-{_render(node[1])})"
    if op == "call":
        return f"{node[1]}({_render(node[2])})"
    sym = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[op]
    return f"({_render(node[1])} {sym} {_render(node[2])})"


@dataclass(frozen=True)
class Expression:
    """A parsed expression tree; callable, with a symbolic derivative."""

    root: tuple
    text: str

    def __call__(self, t: float) -> float:
        return float(_eval(self.root, float(t)))

    def derivative(self) -> "Expression":
        d = _diff(self.root)
        return Expression(d, _render(d))

    def to_field(self) -> ScalarField:
        d = self.derivative()
        return from_callable(self.__call__, d.__call__, self.text.strip())


def parse_expression(text: str) -> Expression:
    if not text or not text.strip():
        raise ExpressionError("empty expression", text, 0)
    parser = _Parser(text)
    root = parser.expr()
    parser.take("end")
    return Expression(root, text)
