"""
Tiny expression language for scalar functions of ``x1..xn``.

Config files describe metric entries and embedding components as text such as
``"exp(0.6*sin(2*pi*x1))"``.  This module parses that text into an immutable
AST, evaluates it (vectorised over numpy arrays), prints it back and
differentiates it symbolically.

Grammar, loosest binding first::

    expr    := term   (('+' | '-') term)*
    term    := power  (('*' | '/') power)*
    power   := unary  ('^' unary)*
    unary   := '-' unary | primary
    primary := NUMBER | 'pi' | VAR | FUNC '(' args ')' | '(' expr ')'

All binary operators associate to the left, ``^`` included, and unary minus
binds tighter than ``^`` (so ``-x1^2`` is ``(-x1)^2``).  A minus sign directly
in front of a numeric literal is folded into the literal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    ArityError,
    ExprEvaluationError,
    ExprSyntaxError,
    UnknownIdentifierError,
)

__all__ = [
    "Num", "Var", "Const", "Neg", "BinOp", "Call", "Expr",
    "parse", "to_text", "evaluate", "differentiate", "variables",
    "FUNCTIONS",
]

FUNCTIONS = {"sin": 1, "cos": 1, "exp": 1, "log": 1, "sqrt": 1, "pow": 2}
CONSTANTS = {"pi": np.pi}


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, x1 is Var(1)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Neg:
    arg: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple

    def __str__(self):
        return to_text(self)


Expr = Union[Num, Var, Const, Neg, BinOp, Call]


# --------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)
_VAR_RE = re.compile(r"x([1-9][0-9]*)$")


def _tokenize(text):
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", end))
    return tokens


class _Parser:
    def __init__(self, text, n):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.power()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.power())
        return node

    def power(self):
        node = self.unary()
        while self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            node = BinOp("^", node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            arg = self.unary()
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Neg(arg)
        return self.primary()

    def primary(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                return self.call(val, pos)
            if val in CONSTANTS:
                return Const(val)
            m = _VAR_RE.match(val)
            if m and 1 <= int(m.group(1)) <= self.n:
                return Var(int(m.group(1)))
            raise UnknownIdentifierError(f"unknown identifier {val!r}", pos)
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", pos)
        raise ExprSyntaxError(f"unexpected token {val!r}", pos)

    def call(self, name, pos):
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(f"unknown function {name!r}", pos)
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == "," and self.peek()[0] == "op":
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", pos
            )
        return Call(name, tuple(args))


def parse(text: str, n: int) -> Expr:
    """Parse ``text`` into an expression over the variables ``x1..xn``."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, n).parse()


# --------------------------------------------------------------------------
# Printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_UNARY_PREC = 4
_ATOM_PREC = 5


def _fmt_num(v):
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg) or (isinstance(e, Num) and e.value < 0):
        return _UNARY_PREC
    return _ATOM_PREC


def to_text(e: Expr) -> str:
    """Render ``e`` with the minimal parentheses that survive a re-parse."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_text(a) for a in e.args)})"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        if _prec(e.arg) < _UNARY_PREC or isinstance(e.arg, Num):
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[e.op]
    left = to_text(e.left)
    right = to_text(e.right)
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left}{e.op}{right}" if e.op in "*/^" else f"{left} {e.op} {right}"


def variables(e: Expr) -> set:
    """Indices of the variables that occur in ``e``."""
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Neg):
        return variables(e.arg)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call):
        out = set()
        for a in e.args:
            out |= variables(a)
        return out
    return set()


# --------------------------------------------------------------------------
# Evaluation

def _pow(base, expo, node):
    base = np.asarray(base, dtype=float)
    expo = np.asarray(expo, dtype=float)
    bad = (base < 0) & (expo != np.round(expo))
    if np.any(bad):
        raise ExprEvaluationError("negative base with non-integer exponent", node)
    if np.any((base == 0) & (expo < 0)):
        raise ExprEvaluationError("zero raised to a negative power", node)
    return np.power(base, expo)


def _eval(e, cols):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return cols[e.index - 1]
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Neg):
        return -_eval(e.arg, cols)
    if isinstance(e, BinOp):
        a = _eval(e.left, cols)
        b = _eval(e.right, cols)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if np.any(np.asarray(b) == 0):
                raise ExprEvaluationError("division by zero", e)
            return a / b
        return _pow(a, b, e)
    args = [_eval(a, cols) for a in e.args]
    name = e.name
    if name == "sin":
        return np.sin(args[0])
    if name == "cos":
        return np.cos(args[0])
    if name == "exp":
        return np.exp(args[0])
    if name == "log":
        if np.any(np.asarray(args[0]) <= 0):
            raise ExprEvaluationError("log of non-positive value", e)
        return np.log(args[0])
    if name == "sqrt":
        if np.any(np.asarray(args[0]) < 0):
            raise ExprEvaluationError("sqrt of negative value", e)
        return np.sqrt(args[0])
    return _pow(args[0], args[1], e)


def evaluate(e: Expr, x):
    """
    Evaluate ``e`` at ``x``.

    ``x`` is either one point of shape ``(n,)``, giving a float, or a batch of
    shape ``(..., n)``, giving an array of shape ``(...)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    cols = [x[..., i] for i in range(x.shape[-1])]
    with np.errstate(all="ignore"):
        out = _eval(e, cols)
    out = np.broadcast_to(np.asarray(out, dtype=float), x.shape[:-1])
    if out.ndim == 0:
        return float(out)
    return np.array(out)


# --------------------------------------------------------------------------
# Differentiation (with literal constant folding)

ZERO = Num(0.0)
ONE = Num(1.0)


def _is(e, v):
    return isinstance(e, Num) and e.value == v


def _neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    return BinOp("*", a, b)


def _div(a, b):
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return BinOp("/", a, b)


def _powe(a, b):
    if _is(b, 1):
        return a
    if _is(b, 0):
        return ONE
    return BinOp("^", a, b)


def differentiate(e: Expr, i: int) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to ``x{i}``."""
    if i < 1:
        raise ValueError(f"variable index must be >= 1, got {i}")
    if isinstance(e, (Num, Const)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == i else ZERO
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg, i))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        da, db = differentiate(a, i), differentiate(b, i)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if e.op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), _powe(b, Num(2.0)))
        return _dpow(a, b, da, db)
    (a, *rest) = e.args
    da = differentiate(a, i)
    if e.name == "sin":
        return _mul(Call("cos", (a,)), da)
    if e.name == "cos":
        return _neg(_mul(Call("sin", (a,)), da))
    if e.name == "exp":
        return _mul(e, da)
    if e.name == "log":
        return _div(da, a)
    if e.name == "sqrt":
        return _div(da, _mul(Num(2.0), e))
    b = rest[0]
    return _dpow(a, b, da, differentiate(b, i))


def _dpow(a, b, da, db):
    # d(a^b) = b a^(b-1) da + a^b log(a) db; the log term is dropped when b is
    # constant so negative bases with integer exponents stay evaluable.
    if _is(db, 0):
        return _mul(_mul(b, _powe(a, _sub(b, ONE))), da)
    power = BinOp("^", a, b)
    return _mul(power, _add(_mul(db, Call("log", (a,))), _div(_mul(b, da), a)))
