"""A small expression language for symbols sigma(k, x).

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := number | 'k' '[' digit ']' | 'x' '[' digit ']' | 'Lambda'
            | 'expi' '(' int (',' int)* ')'
            | ('sin' | 'cos') '(' expr ')'
            | 'pow' '(' expr ',' number ')'
            | '(' expr ')'

``Lambda`` is the configured weight at ``k``; ``expi(c_1, ..., c_n)`` is
``exp(2 pi i c.x)``.  Lattice and torus coordinates are 1-based:
``k[1]`` is the first coordinate.  Numbers may carry a leading sign.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "SymbolSyntaxError",
    "Num",
    "KVar",
    "XVar",
    "Lam",
    "Expi",
    "Func",
    "Pow",
    "BinOp",
    "SymbolExpression",
    "parse_symbol",
    "evaluate",
    "to_text",
]


class SymbolSyntaxError(ValueError):
    """Parse or validation error with a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class KVar:
    index: int


@dataclass(frozen=True)
class XVar:
    index: int


@dataclass(frozen=True)
class Lam:
    pass


@dataclass(frozen=True)
class Expi:
    coeffs: tuple


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: float


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, KVar, XVar, Lam, Expi, Func, Pow, BinOp]

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<number>[0-9.])
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/(),\[\]])
    """,
    re.VERBOSE,
)

_NUMBER = re.compile(r"^(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?$")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise SymbolSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "number":
            # greedy scan so that "1.2.3" or "1e" is reported as one malformed number
            end = m.end()
            while end < len(text) and (
                text[end].isalnum()
                or text[end] == "."
                or (text[end] in "+-" and text[end - 1] in "eE")
            ):
                end += 1
            chunk = text[pos:end]
            if not _NUMBER.match(chunk):
                raise SymbolSyntaxError(f"malformed number {chunk!r}", line, col)
            toks.append(_Tok("number", chunk, line, col))
            pos = end
            continue
        elif kind != "ws":
            toks.append(_Tok(kind, chunk, line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    FUNCS = ("sin", "cos")

    def __init__(self, text: str, n: int | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.n = n

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            got = tok.text or "end of input"
            raise SymbolSyntaxError(f"expected {text!r}, got {got!r}", tok.line, tok.col)
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise SymbolSyntaxError(f"unexpected {tok.text!r}", tok.line, tok.col)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            node = BinOp(op, node, self.factor())
        return node

    def signed_number(self) -> tuple[float, _Tok]:
        tok = self.next()
        sign = 1.0
        start = tok
        if tok.text in ("+", "-"):
            sign = -1.0 if tok.text == "-" else 1.0
            tok = self.next()
        if tok.kind != "number":
            raise SymbolSyntaxError(f"expected a number, got {tok.text or 'end of input'!r}", tok.line, tok.col)
        return sign * float(tok.text), start

    def index(self, var: str, tok: _Tok) -> int:
        self.expect("[")
        d = self.next()
        if d.kind != "number" or not d.text.isdigit() or len(d.text) != 1:
            raise SymbolSyntaxError(f"{var}[...] takes a single digit", d.line, d.col)
        self.expect("]")
        idx = int(d.text)
        if idx < 1 or (self.n is not None and idx > self.n):
            bound = f"1..{self.n}" if self.n is not None else ">= 1"
            raise SymbolSyntaxError(f"index {var}[{idx}] out of range {bound}", d.line, d.col)
        return idx

    def factor(self) -> Node:
        tok = self.peek()
        if tok.kind == "number" or (tok.text == "-" and self.toks[self.i + 1].kind == "number"):
            value, _ = self.signed_number()
            return Num(value)
        if tok.text == "(":
            self.next()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind != "name":
            raise SymbolSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col)
        self.next()
        name = tok.text
        if name == "Lambda":
            return Lam()
        if name in ("k", "x"):
            idx = self.index(name, tok)
            return KVar(idx) if name == "k" else XVar(idx)
        if name == "expi":
            self.expect("(")
            coeffs = []
            while True:
                value, ctok = self.signed_number()
                if value != int(value):
                    raise SymbolSyntaxError("expi coefficients must be integers", ctok.line, ctok.col)
                coeffs.append(int(value))
                if self.peek().text == ",":
                    self.next()
                    continue
                break
            self.expect(")")
            if self.n is not None and len(coeffs) != self.n:
                raise SymbolSyntaxError(
                    f"expi takes {self.n} coefficient(s), got {len(coeffs)}", tok.line, tok.col
                )
            return Expi(tuple(coeffs))
        if name in self.FUNCS:
            self.expect("(")
            arg = self.expr()
            if self.peek().text == ",":
                t = self.peek()
                raise SymbolSyntaxError(f"{name} takes 1 argument", t.line, t.col)
            self.expect(")")
            return Func(name, arg)
        if name == "pow":
            self.expect("(")
            base = self.expr()
            if self.peek().text != ",":
                t = self.peek()
                raise SymbolSyntaxError("pow takes 2 arguments", t.line, t.col)
            self.next()
            exponent, _ = self.signed_number()
            if self.peek().text == ",":
                t = self.peek()
                raise SymbolSyntaxError("pow takes 2 arguments", t.line, t.col)
            self.expect(")")
            return Pow(base, exponent)
        raise SymbolSyntaxError(f"unknown identifier {name!r}", tok.line, tok.col)


def _num_text(v: float) -> str:
    return repr(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(float(v))


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(node: Node) -> str:
    """Canonical text; ``parse_symbol(to_text(t)).tree == t``."""
    if isinstance(node, Num):
        text = _num_text(node.value)
        return f"({text})" if node.value < 0 else text
    if isinstance(node, KVar):
        return f"k[{node.index}]"
    if isinstance(node, XVar):
        return f"x[{node.index}]"
    if isinstance(node, Lam):
        return "Lambda"
    if isinstance(node, Expi):
        return "expi(" + ", ".join(str(c) for c in node.coeffs) + ")"
    if isinstance(node, Func):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, Pow):
        return f"pow({to_text(node.base)}, {_num_text(node.exponent)})"
    if isinstance(node, BinOp):
        left = to_text(node.left)
        right = to_text(node.right)
        if isinstance(node.left, BinOp) and _PREC[node.left.op] < _PREC[node.op]:
            left = f"({left})"
        # operators are left-associative: parenthesize a right operand of equal precedence
        if isinstance(node.right, BinOp) and _PREC[node.right.op] <= _PREC[node.op]:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class SymbolExpression:
    source: str
    tree: Node

    def __str__(self) -> str:
        return to_text(self.tree)

    def max_index(self) -> int:
        """Largest coordinate index or expi arity used (0 if none)."""

        def walk(node):
            if isinstance(node, (KVar, XVar)):
                return node.index
            if isinstance(node, Expi):
                return len(node.coeffs)
            if isinstance(node, Func):
                return walk(node.arg)
            if isinstance(node, Pow):
                return walk(node.base)
            if isinstance(node, BinOp):
                return max(walk(node.left), walk(node.right))
            return 0

        return walk(self.tree)


def parse_symbol(text: str, n: int | None = None) -> SymbolExpression:
    """Parse ``text``; with ``n`` given, coordinate indices and expi arity are checked."""
    return SymbolExpression(text, _Parser(text, n).parse())


def evaluate(expr: SymbolExpression | Node, k: np.ndarray, x: np.ndarray, weight) -> np.ndarray:
    """Evaluate on broadcastable coordinate arrays ``k``, ``x`` of shape ``(n, ...)``."""
    node = expr.tree if isinstance(expr, SymbolExpression) else expr
    lam_cache = {}

    def lam():
        if "v" not in lam_cache:
            lam_cache["v"] = weight(k)
        return lam_cache["v"]

    def ev(node):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, KVar):
            return k[node.index - 1].astype(float)
        if isinstance(node, XVar):
            return x[node.index - 1]
        if isinstance(node, Lam):
            return lam()
        if isinstance(node, Expi):
            phase = sum(c * x[j] for j, c in enumerate(node.coeffs))
            return np.exp(2j * np.pi * phase)
        if isinstance(node, Func):
            return getattr(np, node.name)(ev(node.arg))
        if isinstance(node, Pow):
            base = np.asarray(ev(node.base))
            if node.exponent == int(node.exponent):
                return base ** int(node.exponent) if node.exponent >= 0 else 1.0 / base ** int(-node.exponent)
            return np.power(base.astype(complex) if np.iscomplexobj(base) or np.any(base < 0) else base, node.exponent)
        if isinstance(node, BinOp):
            a, b = ev(node.left), ev(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            return a / b
        raise TypeError(f"not an expression node: {node!r}")

    return ev(node)
