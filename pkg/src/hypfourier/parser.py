"""Operator expressions over the hyperbolic, spectral and generator alphabets.

Grammar::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("+" | "-") unary | power ;
    power   = atom [ "^" [ "-" ] integer ] ;
    atom    = number | symbol | "(" expr ")" ;
    number  = digits [ "." digits ] ;
    symbol  = "z" | "zb" | "x" | "tau" | "i" | "dz" | "dzb" | "dx" | "T+" | "T-"
            | generator name ;

``*`` is composition, so ``a / b`` means ``a o (1/b)`` and ``b`` must be a
coefficient. The Unicode minus sign is accepted wherever ``-`` is.
``T+`` and ``T-`` are single tokens only when the sign follows ``T`` directly.
"""

from __future__ import annotations

import re
from decimal import Decimal
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .exact import I, ONE, TAU, X, Z, ZB, RatFn
from .hyp_algebra import ALPHABET, GeneratorWord, HypOp
from .spec_algebra import SpecOp


class ParseError(ValueError):
    def __init__(self, message: str, position: int, hint: str = ""):
        self.message = message
        self.position = position
        self.hint = hint
        text = f"{message} at position {position}"
        super().__init__(f"{text} ({hint})" if hint else text)


SIDES = ("hyperbolic", "spectral", "generator")

_COEFF_SYMBOLS = {
    "hyperbolic": {"z", "zb", "i"},
    "spectral": {"tau", "i"},
    "generator": {"i"},
}
_OP_SYMBOLS = {
    "hyperbolic": {"dz", "dzb"},
    "spectral": {"x", "dx", "T+", "T-"},
    "generator": set(ALPHABET),
}
_ALL_SYMBOLS = {"z", "zb", "x", "tau", "i", "dz", "dzb", "dx", "T+", "T-"} | set(ALPHABET)


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: int


Node = Union[Num, Sym, Neg, BinOp, Pow]


# --- lexer -----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<shift>T[+\-−])
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[+\-−*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tok = m.group().replace("−", "-")
        if kind == "shift":
            out.append(Token("name", tok, pos))
        elif kind != "ws":
            out.append(Token(kind, tok, pos))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, side: str | None):
        if side is not None and side not in SIDES:
            raise ValueError(f"unknown side {side!r}")
        self.side = side  # None accepts every symbol
        self.toks = tokenize(text)
        self.k = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def take(self) -> Token:
        t = self.tok
        self.k += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind != "op":
            raise ParseError(f"expected {text!r}, found {self._describe()}", self.tok.pos)
        return self.take()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else repr(self.tok.text)

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise ParseError("empty expression", 0)
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self._describe()}", self.tok.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            pos = self.tok.pos
            right = self.unary()
            if op == "/" and self.side and _has_operator(right, _OP_SYMBOLS[self.side]):
                raise ParseError("division by an operator", pos,
                                 hint="only coefficients may stand right of '/'")
            node = BinOp(op, node, right)
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text in "+-":
            sign = self.take().text
            arg = self.unary()
            return Neg(arg) if sign == "-" else arg
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            neg = False
            if self.tok.kind == "op" and self.tok.text == "-":
                self.take()
                neg = True
            if self.tok.kind != "num" or "." in self.tok.text:
                raise ParseError(f"expected integer exponent, found {self._describe()}",
                                 self.tok.pos)
            n = int(self.take().text)
            return Pow(base, -n if neg else n)
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Num(Fraction(t.text))
        if t.kind == "name":
            self.take()
            self._check_symbol(t)
            return Sym(t.text)
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {self._describe()}", t.pos)

    def _check_symbol(self, t: Token) -> None:
        name = t.text
        if self.side is None:
            if name in _ALL_SYMBOLS:
                return
        elif name in _COEFF_SYMBOLS[self.side] or name in _OP_SYMBOLS[self.side]:
            return
        elif name in _ALL_SYMBOLS:
            owner = next(s for s in SIDES
                         if name in _COEFF_SYMBOLS[s] or name in _OP_SYMBOLS[s])
            raise ParseError(f"symbol {name!r} is not in the {self.side} alphabet", t.pos,
                             hint=f"it belongs to the {owner} side")
        raise ParseError(f"unknown symbol {name!r}", t.pos)


def _has_operator(node: Node, ops: set) -> bool:
    if isinstance(node, Sym):
        return node.name in ops
    if isinstance(node, Neg):
        return _has_operator(node.arg, ops)
    if isinstance(node, Pow):
        return _has_operator(node.base, ops)
    if isinstance(node, BinOp):
        return _has_operator(node.left, ops) or _has_operator(node.right, ops)
    return False


def parse_operator(text: str, side: str) -> Node:
    """Parse ``text`` over the alphabet of ``side``; raises :class:`ParseError`."""
    return _Parser(text, side).parse()


def compatible_sides(text: str) -> list[str]:
    """Sides whose alphabet contains every symbol of ``text``, in :data:`SIDES` order."""
    names = {t.text for t in tokenize(text) if t.kind == "name"}
    return [s for s in SIDES if names <= _COEFF_SYMBOLS[s] | _OP_SYMBOLS[s]]


def detect_side(text: str) -> str:
    """First compatible side; ``hyperbolic`` when none fits, so parsing reports the culprit."""
    sides = compatible_sides(text)
    return sides[0] if sides else "hyperbolic"


# --- rendering -------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def render_ast(node: Node) -> str:
    """Canonical text for ``node``; parses back to the same tree."""
    return _render(node, 0)


def _render(node: Node, ctx: int) -> str:
    if isinstance(node, Num):
        v = node.value
        if v.denominator == 1:
            return str(v.numerator)
        # literals are decimals, so the expansion terminates
        return str(Decimal(v.numerator) / Decimal(v.denominator))
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Neg):
        txt = "-" + _render(node.arg, 3)
        return f"({txt})" if ctx >= 2 else txt
    if isinstance(node, Pow):
        txt = f"{_render(node.base, 4)}^{node.exp}"
        return f"({txt})" if ctx >= 4 else txt
    p = _PREC[node.op]
    # left-associative: the right operand needs parentheses at equal precedence
    txt = f"{_render(node.left, p)} {node.op} {_render(node.right, p + 1)}" if p == 1 else \
        f"{_render(node.left, p)}{node.op}{_render(node.right, p + 1)}"
    return f"({txt})" if ctx > p else txt


_LATEX_SYMBOLS = {
    "z": "z", "zb": r"\bar z", "x": "x", "tau": r"\tau", "i": "i",
    "dz": r"\partial_z", "dzb": r"\partial_{\bar z}", "dx": r"\partial_x",
    "T+": "T_{+}", "T-": "T_{-}",
    "inv": r"\frac{1}{z-\bar z}", "z_dz": r"z\partial_z", "z2_dz": r"z^2\partial_z",
    "zb_dzb": r"\bar z\partial_{\bar z}", "zb2_dzb": r"\bar z^2\partial_{\bar z}",
}


def latex_ast(node: Node) -> str:
    return _latex(node, 0)


def _latex(node: Node, ctx: int) -> str:
    if isinstance(node, Num):
        v = node.value
        if v.denominator == 1:
            return str(v.numerator)
        return rf"\frac{{{v.numerator}}}{{{v.denominator}}}"
    if isinstance(node, Sym):
        return _LATEX_SYMBOLS[node.name]
    if isinstance(node, Neg):
        txt = "-" + _latex(node.arg, 3)
        return rf"\left({txt}\right)" if ctx >= 1 else txt
    if isinstance(node, Pow):
        base = _latex(node.base, 4)
        if isinstance(node.base, Sym) and node.base.name in ("T+", "T-", "dz", "dzb", "dx"):
            base = "{" + base + "}"
        return f"{base}^{{{node.exp}}}"
    if node.op == "/":
        num = _latex(node.left, 0)
        den = _latex(node.right, 0)
        txt = rf"\frac{{{num}}}{{{den}}}"
        return txt
    p = _PREC[node.op]
    if node.op == "*":
        txt = rf"{_latex(node.left, p)}\,{_latex(node.right, p + 1)}"
    else:
        txt = f"{_latex(node.left, p)} {node.op} {_latex(node.right, p + 1)}"
    return rf"\left({txt}\right)" if ctx > p else txt


def to_latex(text: str) -> str:
    """LaTeX for any canonical rendering produced by the algebra modules."""
    return latex_ast(_Parser(text, None).parse())


# --- evaluation ------------------------------------------------------------

_COEFFS = {"z": RatFn.var(Z), "zb": RatFn.var(ZB), "tau": RatFn.var(TAU), "x": RatFn.var(X),
           "i": I}


def _op_of(side: str, name: str):
    if side == "hyperbolic":
        return HypOp.derivative(1, 0) if name == "dz" else HypOp.derivative(0, 1)
    if side == "spectral":
        return {"x": SpecOp.monomial(p=1), "dx": SpecOp.monomial(q=1),
                "T+": SpecOp.monomial(r=1), "T-": SpecOp.monomial(r=-1)}[name]
    return GeneratorWord.letter(name)


def _lift(side: str, c: RatFn):
    if side == "hyperbolic":
        return HypOp.coeff(c)
    if side == "spectral":
        return SpecOp.coeff(c)
    if c.variables():
        raise ValueError(f"generator words take scalar coefficients, not {c}")
    return GeneratorWord({(): c.const_value()})


_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
}


def evaluate(node: Node, side: str):
    """Evaluate to a ``RatFn`` (pure coefficient) or the side's operator type."""
    if isinstance(node, Num):
        return RatFn.const(node.value)
    if isinstance(node, Sym):
        if node.name in _COEFF_SYMBOLS[side]:
            return _COEFFS[node.name]
        return _op_of(side, node.name)
    if isinstance(node, Neg):
        v = evaluate(node.arg, side)
        return -v if isinstance(v, RatFn) else v.scale(-1)
    if isinstance(node, Pow):
        v = evaluate(node.base, side)
        if isinstance(v, RatFn):
            return v ** node.exp
        if node.exp < 0:
            raise ValueError("negative power of an operator")
        out = _lift(side, ONE)
        for _ in range(node.exp):
            out = out * v
        return out
    a = evaluate(node.left, side)
    b = evaluate(node.right, side)
    if node.op == "/":
        if not isinstance(b, RatFn):
            raise ValueError("division by an operator")
        b = 1 / b
        return a * b if isinstance(a, RatFn) else a * _lift(side, b)
    if not (isinstance(a, RatFn) and isinstance(b, RatFn)):
        a = a if not isinstance(a, RatFn) else _lift(side, a)
        b = b if not isinstance(b, RatFn) else _lift(side, b)
    return _ARITH[node.op](a, b)


def as_operator(node: Node, side: str):
    v = evaluate(node, side)
    return _lift(side, v) if isinstance(v, RatFn) else v


def parse_hyp(text: str) -> HypOp:
    return as_operator(parse_operator(text, "hyperbolic"), "hyperbolic")


def parse_spec(text: str) -> SpecOp:
    return as_operator(parse_operator(text, "spectral"), "spectral")


def parse_word(text: str) -> GeneratorWord:
    return as_operator(parse_operator(text, "generator"), "generator")


def parse_ratfn(text: str) -> RatFn:
    """A coefficient in any of ``tau, z, zb, x, i``."""
    return _eval_free(_Parser(text, None).parse())


def _eval_free(node: Node) -> RatFn:
    if isinstance(node, Num):
        return RatFn.const(node.value)
    if isinstance(node, Sym):
        if node.name not in _COEFFS:
            raise ValueError(f"{node.name!r} is an operator, not a coefficient")
        return _COEFFS[node.name]
    if isinstance(node, Neg):
        return -_eval_free(node.arg)
    if isinstance(node, Pow):
        return _eval_free(node.base) ** node.exp
    a, b = _eval_free(node.left), _eval_free(node.right)
    return _ARITH[node.op](a, b)
