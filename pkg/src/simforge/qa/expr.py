"""Small infix expression language for symbolic answers.

Grammar (``^`` binds tighter than unary minus, and is right-associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | SYMBOL | FUNC "(" expr ")" | "(" expr ")"

``·`` and ``×`` are read as ``*`` and ``−`` as ``-``. Symbols are
identifiers such as ``m_1``, ``v_0`` or ``theta``; ``pi`` is a constant.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..errors import QAError

FUNCS = {
    "sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "tan": math.tan,
    "asin": math.asin, "acos": math.acos, "atan": math.atan,
    "exp": math.exp, "log": math.log,
}
CONSTS = {"pi": math.pi}

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(.))")
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


def _tokens(text: str) -> list[tuple[str, str]]:
    text = text.replace("·", "*").replace("×", "*").replace("−", "-")
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        elif op in "+-*/^()":
            out.append(("op", op))
        else:
            raise QAError(f"unexpected character {op!r} in expression {text!r}")
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise QAError(f"malformed expression {self.text!r}: expected {value or 'a token'}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.i != len(self.toks):
            raise QAError(f"malformed expression {self.text!r}: trailing {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCS:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return Call(val, arg)
            return Sym(val)
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        raise QAError(f"malformed expression {self.text!r}: unexpected {val!r}")


def parse(text: str):
    if not isinstance(text, str) or not text.strip():
        raise QAError("empty expression")
    return _Parser(text).parse()


def symbols(node) -> set[str]:
    """Free symbols, excluding named constants."""
    if isinstance(node, Sym):
        return set() if node.name in CONSTS else {node.name}
    if isinstance(node, (Call, Neg)):
        return symbols(node.arg)
    if isinstance(node, Bin):
        return symbols(node.left) | symbols(node.right)
    return set()


def evaluate(node, values: dict) -> float:
    if isinstance(node, str):
        node = parse(node)
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Sym):
        if node.name in values:
            return float(values[node.name])
        if node.name in CONSTS:
            return CONSTS[node.name]
        raise QAError(f"no value for symbol {node.name!r}")
    if isinstance(node, Neg):
        return -evaluate(node.arg, values)
    if isinstance(node, Call):
        return FUNCS[node.func](evaluate(node.arg, values))
    a, b = evaluate(node.left, values), evaluate(node.right, values)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a ** b


def _num(v: float) -> str:
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


def _prec(node) -> int:
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return 5


def to_text(node) -> str:
    """Canonical text with the fewest parentheses that keep the tree."""
    if isinstance(node, str):
        node = parse(node)
    if isinstance(node, Num):
        return _num(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        return f"-({inner})" if _prec(node.arg) < _PREC["neg"] else f"-{inner}"
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    # the parser is left-associative, so an equal-precedence right operand keeps its parentheses
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}" if p == 1 else f"{left}*{right}" if node.op == "*" else f"{left}/{right}"


def canonical(text: str) -> str:
    return to_text(parse(text))


def equivalent(a: str, b: str, draws: int = 8, seed: int = 0, rel: float = 1e-9) -> bool:
    """Numerical equivalence at random positive symbol values."""
    import numpy as np

    ta, tb = parse(a), parse(b)
    names = sorted(symbols(ta) | symbols(tb))
    rng = np.random.default_rng(seed)
    for _ in range(draws):
        vals = dict(zip(names, rng.uniform(0.5, 2.0, len(names))))
        try:
            x, y = evaluate(ta, vals), evaluate(tb, vals)
        except (ValueError, ZeroDivisionError, OverflowError):
            return False
        if not abs(x - y) <= rel * max(abs(x), abs(y), 1e-300):
            return False
    return True
