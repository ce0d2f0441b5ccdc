"""Differential-difference operators ``U(tau) x^p dx^q T^r`` acting on functions of ``(tau, x)``.

``T^r`` shifts ``tau -> tau + r``. Normal form puts the tau-coefficient
first, then ``x``, then ``dx``, then the shift; the rewrite rules are

* ``dx o x = x o dx + 1``
* ``T^r o U(tau) = U(tau + r) o T^r``
* ``T`` commutes with ``x`` and ``dx``.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, perm
from typing import Iterable, Mapping, NamedTuple, Sequence

from .exact import ONE, TAU, InvalidCoefficient, MultiPoly, RatFn, shift_tau


def _check_coeff(c: RatFn) -> RatFn:
    if c.variables() - {"tau"}:
        raise InvalidCoefficient(f"coefficient {c} must depend on tau only")
    return c


class SpecOp:
    """``terms`` maps ``(p, q, r)`` to the tau-coefficient of ``x^p dx^q T^r``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int, int], RatFn] | None = None, *,
                 _checked=False):
        if _checked:
            self.terms = terms
            return
        out: dict = {}
        for (p, q, r), c in (terms or {}).items():
            if p < 0 or q < 0:
                raise ValueError("negative power of x or dx")
            c = _check_coeff(RatFn.coerce(c))
            key = (int(p), int(q), int(r))
            out[key] = out[key] + c if key in out else c
        self.terms = {k: c for k, c in out.items() if not c.is_zero()}

    @classmethod
    def identity(cls) -> "SpecOp":
        return cls({(0, 0, 0): ONE}, _checked=True)

    @classmethod
    def zero(cls) -> "SpecOp":
        return cls({}, _checked=True)

    @classmethod
    def coeff(cls, c) -> "SpecOp":
        return cls({(0, 0, 0): RatFn.coerce(c)})

    @classmethod
    def monomial(cls, p: int = 0, q: int = 0, r: int = 0, c=1) -> "SpecOp":
        return cls({(p, q, r): RatFn.coerce(c)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, SpecOp):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __add__(self, other: "SpecOp") -> "SpecOp":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return SpecOp({k: c for k, c in out.items() if not c.is_zero()}, _checked=True)

    def __neg__(self) -> "SpecOp":
        return SpecOp({k: -c for k, c in self.terms.items()}, _checked=True)

    def __sub__(self, other: "SpecOp") -> "SpecOp":
        return self + (-other)

    def scale(self, c) -> "SpecOp":
        c = _check_coeff(RatFn.coerce(c))
        return SpecOp({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, SpecOp):
            return spec_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def shift_coefficients(self, k: int) -> "SpecOp":
        return SpecOp({key: shift_tau(c, k) for key, c in self.terms.items()}, _checked=True)

    def max_shift(self) -> int:
        return max((abs(r) for _, _, r in self.terms), default=0)

    def order(self) -> int:
        return max((q for _, q, _ in self.terms), default=0)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=lambda k: (k[1], k[0], k[2]), reverse=True):
            parts.append(_render_term(self.terms[key], *key))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"SpecOp({self.render()!r})"


def _render_term(c: RatFn, p: int, q: int, r: int) -> str:
    syms = []
    if p:
        syms.append("x" if p == 1 else f"x^{p}")
    if q:
        syms.append("dx" if q == 1 else f"dx^{q}")
    if r:
        name = "T+" if r > 0 else "T-"
        syms.append(name if abs(r) == 1 else f"{name}^{abs(r)}")
    txt = c.render()
    if not syms:
        return txt
    if c.is_const() and c.const_value() == 1:
        return "*".join(syms)
    if c.is_const() and c.const_value() == -1:
        return "-" + "*".join(syms)
    if not c.den and len(c.numer.terms) > 1:
        txt = f"({txt})"
    return "*".join([txt] + syms)


def spec_mul(M1: SpecOp, M2: SpecOp) -> SpecOp:
    """Composition ``M1 o M2`` in normal form."""
    out: dict = {}
    for (p1, q1, r1), u1 in M1.terms.items():
        for (p2, q2, r2), u2 in M2.terms.items():
            u = u1 * shift_tau(u2, r1)
            if u.is_zero():
                continue
            r = r1 + r2
            # dx^q1 x^p2 = sum_k C(q1, k) p2!/(p2-k)! x^(p2-k) dx^(q1-k)
            for k in range(min(q1, p2) + 1):
                key = (p1 + p2 - k, q1 - k + q2, r)
                term = u * (comb(q1, k) * perm(p2, k))
                out[key] = out[key] + term if key in out else term
    return SpecOp({k: c for k, c in out.items() if not c.is_zero()}, _checked=True)


def spec_commutator(M1: SpecOp, M2: SpecOp) -> SpecOp:
    return spec_mul(M1, M2) - spec_mul(M2, M1)


X_OP = SpecOp.monomial(p=1)
DX = SpecOp.monomial(q=1)
T_PLUS = SpecOp.monomial(r=1)
T_MINUS = SpecOp.monomial(r=-1)

_SYMBOLS = {"x": X_OP, "dx": DX, "T+": T_PLUS, "T-": T_MINUS}


def spec_normalize(raw: Iterable[Sequence]) -> SpecOp:
    """Normal form of a sum of products over ``x, dx, T+, T-`` and tau-coefficients."""
    total = SpecOp.zero()
    for product in raw:
        op = SpecOp.identity()
        for factor in product:
            op = spec_mul(op, _as_op(factor))
        total = total + op
    return total


def _as_op(factor) -> SpecOp:
    if isinstance(factor, SpecOp):
        return factor
    if isinstance(factor, str):
        try:
            return _SYMBOLS[factor.replace("−", "-")]
        except KeyError:
            raise ValueError(f"unknown spectral symbol {factor!r}") from None
    return SpecOp.coeff(factor)


class PoleCheck(NamedTuple):
    ok: bool
    roots: list[Fraction]
    witnesses: list[MultiPoly]


def pole_check(M: SpecOp) -> PoleCheck:
    """Check every tau-pole of every coefficient lies in ``Z/2``.

    Decided on the factored denominators: a factor passes only if it is
    ``tau - c`` with ``2c`` an integer. Anything else is a witness.
    """
    roots: set[Fraction] = set()
    witnesses: list[MultiPoly] = []
    for c in M.terms.values():
        for f in c.den:
            root = _half_integer_root(f)
            if root is None:
                if f not in witnesses:
                    witnesses.append(f)
            else:
                roots.add(root)
    return PoleCheck(not witnesses, sorted(roots), witnesses)


def _half_integer_root(f: MultiPoly) -> Fraction | None:
    if f.variables() != {"tau"} or f.degree(TAU) != 1:
        return None
    lead = f.terms.get((1, 0, 0, 0))
    const = f.const_value()
    if lead is None or lead != 1 or not const.is_real():
        return None
    root = -const.re
    if (2 * root).denominator != 1:
        return None
    return root
