"""Exact arithmetic over Q(i): scalars, sparse polynomials and rational functions.

Polynomials live in the fixed variables ``(tau, z, zb, x)``. Rational
functions keep their denominators as products of monic factors, which is
what lets the kernel calculus run without a multivariate gcd: sums take the
lcm of the factor lists, and cancellation is attempted by exact trial
division against each factor.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

VARS = ("tau", "z", "zb", "x")
NVARS = len(VARS)
TAU, Z, ZB, X = range(NVARS)

_ZERO_EXP = (0,) * NVARS


class ExactError(ArithmeticError):
    """Base class for errors raised by the exact layer."""


class DivisionByZero(ExactError, ZeroDivisionError):
    pass


class UnsupportedDenominator(ExactError):
    pass


class PoleProximity(ExactError):
    pass


class InvalidCoefficient(ExactError):
    pass


def _var_index(var: str | int) -> int:
    if isinstance(var, int):
        return var
    try:
        return VARS.index(var)
    except ValueError:
        raise KeyError(f"unknown variable {var!r}") from None


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    return Fraction(v)


class GaussScalar:
    """An element ``re + im*i`` of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def coerce(cls, v) -> "GaussScalar":
        if isinstance(v, GaussScalar):
            return v
        if isinstance(v, complex):
            return cls(v.real, v.imag)
        return cls(v)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        if isinstance(other, GaussScalar):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __add__(self, other):
        if isinstance(other, GaussScalar):
            return GaussScalar(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return GaussScalar(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GaussScalar(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, GaussScalar):
            return GaussScalar(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, Fraction)):
            return GaussScalar(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GaussScalar):
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b:
                if not d:
                    return GaussScalar(a * c, 0)
                return GaussScalar(a * c, a * d)
            if not d:
                return GaussScalar(a * c, b * c)
            return GaussScalar(a * c - b * d, a * d + b * c)
        if isinstance(other, (int, Fraction)):
            return GaussScalar(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self) -> "GaussScalar":
        return GaussScalar(self.re, -self.im)

    def inverse(self) -> "GaussScalar":
        n = self.re * self.re + self.im * self.im
        if not n:
            raise DivisionByZero("inverse of zero scalar")
        return GaussScalar(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * GaussScalar.coerce(other).inverse()

    def __rtruediv__(self, other):
        return GaussScalar.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE_S
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        return f"GaussScalar({self.re}, {self.im})"

    def render(self) -> str:
        """Text form; compound values are parenthesized so they can prefix ``*``."""
        re, im = self.re, self.im
        if not im:
            return _render_frac(re)
        if not re:
            if im == 1:
                return "i"
            if im == -1:
                return "-i"
            return f"{_render_frac(im)}*i"
        sign = "+" if im > 0 else "-"
        mag = abs(im)
        imag = "i" if mag == 1 else f"{_render_frac(mag)}*i"
        return f"({_render_frac(re)} {sign} {imag})"

    __str__ = render


def _render_frac(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


ZERO_S = GaussScalar(0)
ONE_S = GaussScalar(1)
I_S = GaussScalar(0, 1)


def _order_key(exp: tuple) -> tuple:
    # lex with x > z > zb > tau: keeps (x - z), (x - zb), (z - zb), (tau + c) monic as written
    return (exp[X], exp[Z], exp[ZB], exp[TAU])


class MultiPoly:
    """Sparse polynomial in ``(tau, z, zb, x)`` with Q(i) coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple, GaussScalar] | None = None, *, _trusted=False):
        if _trusted:
            self.terms = terms
        else:
            clean = {}
            for exp, c in (terms or {}).items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != NVARS or min(exp) < 0:
                    raise ValueError(f"bad exponent vector {exp}")
                c = GaussScalar.coerce(c)
                if c:
                    clean[exp] = clean.get(exp, ZERO_S) + c
            self.terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, c) -> "MultiPoly":
        c = GaussScalar.coerce(c)
        return cls({_ZERO_EXP: c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, name: str | int, power: int = 1) -> "MultiPoly":
        exp = [0] * NVARS
        exp[_var_index(name)] = power
        return cls({tuple(exp): ONE_S}, _trusted=True)

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ZERO_EXP in self.terms)

    def const_value(self) -> GaussScalar:
        return self.terms.get(_ZERO_EXP, ZERO_S)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if len(other.terms) > len(self.terms):
            self, other = other, self
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return MultiPoly(out, _trusted=True)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly({e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        if not self.terms or not other.terms:
            return ZERO_P
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3])
                s = out.get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return MultiPoly({e: c for e, c in out.items() if c}, _trusted=True)

    def scale(self, c) -> "MultiPoly":
        c = GaussScalar.coerce(c)
        if not c:
            return ZERO_P
        return MultiPoly({e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = ONE_P
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def degree(self, var) -> int:
        k = _var_index(var)
        return max((e[k] for e in self.terms), default=-1)

    def depends_on(self, var) -> bool:
        k = _var_index(var)
        return any(e[k] for e in self.terms)

    def variables(self) -> set[str]:
        return {VARS[k] for k in range(NVARS) if any(e[k] for e in self.terms)}

    def leading(self) -> tuple[tuple, GaussScalar]:
        exp = max(self.terms, key=_order_key)
        return exp, self.terms[exp]

    def monic(self) -> tuple[GaussScalar, "MultiPoly"]:
        """Return ``(lc, p/lc)``."""
        _, lc = self.leading()
        if lc == 1:
            return ONE_S, self
        return lc, self.scale(lc.inverse())

    def diff(self, var) -> "MultiPoly":
        k = _var_index(var)
        out = {}
        for e, c in self.terms.items():
            if e[k]:
                ne = list(e)
                ne[k] -= 1
                out[tuple(ne)] = c * e[k]
        return MultiPoly(out, _trusted=True)

    def subs(self, var, value: "MultiPoly") -> "MultiPoly":
        """Substitute a polynomial for one variable."""
        k = _var_index(var)
        if not self.depends_on(k):
            return self
        by_power: dict[int, dict] = {}
        for e, c in self.terms.items():
            ne = list(e)
            p = ne[k]
            ne[k] = 0
            by_power.setdefault(p, {})[tuple(ne)] = c
        result = ZERO_P
        cache = {0: ONE_P}
        for p in sorted(by_power):
            if p not in cache:
                cache[p] = value ** p
            result = result + MultiPoly(by_power[p], _trusted=True) * cache[p]
        return result

    def shift(self, var, k) -> "MultiPoly":
        """Substitute ``var -> var + k`` for a scalar ``k``."""
        k = GaussScalar.coerce(k)
        if not k or not self.depends_on(var):
            return self
        idx = _var_index(var)
        out: dict = {}
        for e, c in self.terms.items():
            n = e[idx]
            kp = ONE_S
            for j in range(n, -1, -1):
                # binomial term c * C(n, j) var^j k^(n-j)
                ne = e[:idx] + (j,) + e[idx + 1:]
                v = c * kp * comb(n, j)
                s = out.get(ne)
                out[ne] = v if s is None else s + v
                kp = kp * k
        return MultiPoly({e: c for e, c in out.items() if c}, _trusted=True)

    def divide_exact(self, g: "MultiPoly") -> "MultiPoly | None":
        """Quotient ``self / g`` if ``g`` divides exactly, else ``None``."""
        if g.is_zero():
            raise DivisionByZero("polynomial division by zero")
        if self.is_zero():
            return ZERO_P
        gexp, gc = g.leading()
        ginv = gc.inverse()
        rest = dict(self.terms)
        quot = {}
        gterms = list(g.terms.items())
        while rest:
            lexp = max(rest, key=_order_key)
            diff = tuple(a - b for a, b in zip(lexp, gexp))
            if min(diff) < 0:
                return None
            q = rest[lexp] * ginv
            quot[diff] = q
            for e, c in gterms:
                ne = (e[0] + diff[0], e[1] + diff[1], e[2] + diff[2], e[3] + diff[3])
                s = rest.get(ne)
                v = -(c * q)
                if s is None:
                    rest[ne] = v
                else:
                    s = s + v
                    if s:
                        rest[ne] = s
                    else:
                        del rest[ne]
        return MultiPoly(quot, _trusted=True)

    def evaluate(self, values: Mapping[int, complex]) -> complex:
        total = 0j
        for e, c in self.terms.items():
            v = complex(c)
            for k in range(NVARS):
                if e[k]:
                    v *= values[k] ** e[k]
            total += v
        return total

    def sorted_terms(self) -> list[tuple[tuple, GaussScalar]]:
        return sorted(self.terms.items(), key=lambda t: _order_key(t[0]), reverse=True)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = _render_monomial(e)
            if not mono:
                body = c.render()
            elif c == 1:
                body = mono
            elif c == -1:
                body = "-" + mono
            else:
                body = f"{c.render()}*{mono}"
            parts.append(body)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"MultiPoly({self.render()!r})"


def _render_monomial(exp: tuple) -> str:
    parts = []
    for k, name in enumerate(VARS):
        p = exp[k]
        if p == 1:
            parts.append(name)
        elif p > 1:
            parts.append(f"{name}^{p}")
    return "*".join(parts)


ZERO_P = MultiPoly({}, _trusted=True)
ONE_P = MultiPoly({_ZERO_EXP: ONE_S}, _trusted=True)


def _linear(a: str, b: str | None = None) -> MultiPoly:
    p = MultiPoly.var(a)
    return p - MultiPoly.var(b) if b else p


# Factors the kernel calculus produces; trial-divided out of any new denominator.
X_MINUS_Z = _linear("x", "z")
X_MINUS_ZB = _linear("x", "zb")
Z_MINUS_ZB = _linear("z", "zb")
_KNOWN_FACTORS = (X_MINUS_Z, X_MINUS_ZB, Z_MINUS_ZB)


def _integer_divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, int(n**0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _rational_tau_roots(p: MultiPoly) -> list[Fraction]:
    """Rational roots of a univariate-in-tau polynomial with rational coefficients."""
    coeffs = {e[TAU]: c.re for e, c in p.terms.items()}
    lcm = 1
    for c in coeffs.values():
        lcm = lcm * c.denominator // _gcd(lcm, c.denominator)
    ints = {k: int(c * lcm) for k, c in coeffs.items()}
    low = min(ints)
    lead, tail = ints[max(ints)], ints[low]
    if abs(lead) > 10**8 or abs(tail) > 10**8:
        return []
    roots = []
    for num in _integer_divisors(tail):
        for den in _integer_divisors(lead):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if cand not in roots and _eval_int_poly(ints, cand) == 0:
                    roots.append(cand)
    return roots


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def _eval_int_poly(coeffs: Mapping[int, int], t: Fraction) -> Fraction:
    return sum(c * t**k for k, c in coeffs.items())


def factorize(p: MultiPoly) -> tuple[GaussScalar, dict[MultiPoly, int]]:
    """Split ``p`` into a scalar and monic factors.

    Only the factors the calculus produces are recognized: variable powers,
    ``x - z``, ``x - zb``, ``z - zb`` and rational linear factors in tau.
    Whatever is left over is kept as a single monic cofactor.
    """
    if p.is_zero():
        raise DivisionByZero("cannot factor the zero polynomial")
    factors: dict[MultiPoly, int] = {}
    lows = [min(e[k] for e in p.terms) for k in range(NVARS)]
    if any(lows):
        shift = tuple(lows)
        p = MultiPoly({tuple(a - b for a, b in zip(e, shift)): c for e, c in p.terms.items()},
                      _trusted=True)
        for k in range(NVARS):
            if lows[k]:
                factors[MultiPoly.var(k)] = lows[k]
    for f in _KNOWN_FACTORS:
        while not p.is_const():
            q = p.divide_exact(f)
            if q is None:
                break
            factors[f] = factors.get(f, 0) + 1
            p = q
    scalar, p = p.monic()
    if not p.is_const() and p.variables() == {"tau"} and all(c.is_real() for c in p.terms.values()):
        for root in _rational_tau_roots(p):
            lin = MultiPoly.var(TAU) - MultiPoly.const(root)
            while p.degree(TAU) > 0:
                q = p.divide_exact(lin)
                if q is None:
                    break
                factors[lin] = factors.get(lin, 0) + 1
                p = q
    if not p.is_const():
        factors[p] = factors.get(p, 0) + 1
    else:
        scalar = scalar * p.const_value()
    return scalar, factors


def _factor_sort_key(item):
    f, e = item
    return (f.render(), e)


class RatFn:
    """A rational function ``numer / prod(f**e)`` with monic factors ``f``.

    Equality is decided by cross multiplication, so the representative is
    never required to be in lowest terms.
    """

    __slots__ = ("numer", "den")

    def __init__(self, numer: MultiPoly, den: Mapping[MultiPoly, int] | None = None, *,
                 _canonical=False):
        if _canonical:
            self.numer = numer
            self.den = den
            return
        merged: dict[MultiPoly, int] = {}
        scalar = ONE_S
        for f, e in (den or {}).items():
            if e == 0:
                continue
            if e < 0:
                raise ValueError("negative denominator exponent")
            if f.is_zero():
                raise DivisionByZero("zero denominator factor")
            if f.is_const():
                scalar = scalar * f.const_value() ** e
                continue
            lc, mf = f.monic()
            if lc != 1:
                scalar = scalar * lc**e
            merged[mf] = merged.get(mf, 0) + e
        if scalar != 1:
            numer = numer.scale(scalar.inverse())
        self.numer, self.den = _cancel(numer, merged)

    # constructors
    @classmethod
    def const(cls, c) -> "RatFn":
        return cls(MultiPoly.const(c), {}, _canonical=True)

    @classmethod
    def var(cls, name, power: int = 1) -> "RatFn":
        return cls(MultiPoly.var(name, power), {}, _canonical=True)

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "RatFn":
        return cls(p, {}, _canonical=True)

    @classmethod
    def fraction(cls, numer: MultiPoly, denom: MultiPoly) -> "RatFn":
        """Build ``numer/denom``, splitting ``denom`` into recognized factors."""
        scalar, factors = factorize(denom)
        return cls(numer.scale(scalar.inverse()), factors)

    @classmethod
    def coerce(cls, v) -> "RatFn":
        if isinstance(v, RatFn):
            return v
        if isinstance(v, MultiPoly):
            return cls.from_poly(v)
        return cls.const(v)

    @property
    def denom(self) -> MultiPoly:
        out = ONE_P
        for f, e in self.den.items():
            out = out * f**e
        return out

    def is_zero(self) -> bool:
        return self.numer.is_zero()

    def is_const(self) -> bool:
        return not self.den and self.numer.is_const()

    def const_value(self) -> GaussScalar:
        if not self.is_const():
            raise ValueError(f"{self} is not a constant")
        return self.numer.const_value()

    def variables(self) -> set[str]:
        out = set(self.numer.variables())
        for f in self.den:
            out |= f.variables()
        return out

    def depends_on(self, var) -> bool:
        return self.numer.depends_on(var) or any(f.depends_on(var) for f in self.den)

    def __add__(self, other) -> "RatFn":
        other = RatFn.coerce(other)
        if other.numer.is_zero():
            return self
        if self.numer.is_zero():
            return other
        if self.den == other.den:
            return RatFn(self.numer + other.numer, self.den)
        lcm = dict(self.den)
        for f, e in other.den.items():
            if lcm.get(f, 0) < e:
                lcm[f] = e
        n1 = self.numer * _cofactor(lcm, self.den)
        n2 = other.numer * _cofactor(lcm, other.den)
        return RatFn(n1 + n2, lcm)

    __radd__ = __add__

    def __neg__(self) -> "RatFn":
        return RatFn(-self.numer, self.den, _canonical=True)

    def __sub__(self, other) -> "RatFn":
        return self + (-RatFn.coerce(other))

    def __rsub__(self, other) -> "RatFn":
        return RatFn.coerce(other) - self

    def __mul__(self, other) -> "RatFn":
        if isinstance(other, (int, Fraction, GaussScalar, complex)):
            c = GaussScalar.coerce(other)
            return RatFn(self.numer.scale(c), self.den, _canonical=True) if c else ZERO
        other = RatFn.coerce(other)
        if self.numer.is_zero() or other.numer.is_zero():
            return ZERO
        den = dict(self.den)
        for f, e in other.den.items():
            den[f] = den.get(f, 0) + e
        return RatFn(self.numer * other.numer, den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFn":
        if self.numer.is_zero():
            raise DivisionByZero("rational function division by zero")
        scalar, factors = factorize(self.numer)
        numer = MultiPoly.const(scalar.inverse())
        for f, e in self.den.items():
            numer = numer * f**e
        return RatFn(numer, factors)

    def __truediv__(self, other) -> "RatFn":
        if isinstance(other, (int, Fraction, GaussScalar, complex)):
            c = GaussScalar.coerce(other)
            if not c:
                raise DivisionByZero("rational function division by zero")
            return RatFn(self.numer.scale(c.inverse()), self.den, _canonical=True)
        return self * RatFn.coerce(other).inverse()

    def __rtruediv__(self, other) -> "RatFn":
        return RatFn.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "RatFn":
        if n < 0:
            return self.inverse() ** (-n)
        return RatFn(self.numer**n, {f: e * n for f, e in self.den.items()})

    def equals(self, other) -> bool:
        return ratfn_equal(self, RatFn.coerce(other))

    def __eq__(self, other):
        if isinstance(other, (RatFn, MultiPoly, int, Fraction, GaussScalar)):
            return ratfn_equal(self, RatFn.coerce(other))
        return NotImplemented

    __hash__ = None

    def diff(self, var) -> "RatFn":
        k = _var_index(var)
        dep = [(f, e) for f, e in self.den.items() if f.depends_on(k)]
        if not dep:
            return RatFn(self.numer.diff(k), self.den)
        prod = ONE_P
        for f, _ in dep:
            prod = prod * f
        numer = self.numer.diff(k) * prod
        for f, e in dep:
            rest = prod.divide_exact(f)
            numer = numer - (self.numer * f.diff(k) * rest).scale(e)
        den = dict(self.den)
        for f, _ in dep:
            den[f] += 1
        return RatFn(numer, den)

    def subs(self, var, value: MultiPoly) -> "RatFn":
        numer = self.numer.subs(var, value)
        out = RatFn.from_poly(numer)
        for f, e in self.den.items():
            g = f.subs(var, value)
            if g.is_zero():
                raise DivisionByZero(f"substitution makes factor {f} vanish")
            out = out * RatFn.fraction(ONE_P, g) ** e
        return out

    def shift(self, var, k) -> "RatFn":
        if not k:
            return self
        return RatFn(self.numer.shift(var, k), {f.shift(var, k): e for f, e in self.den.items()})

    def evaluate(self, values: Mapping, eps: float = 1e-300) -> complex:
        return eval_numeric(self, values, eps)

    def render(self) -> str:
        num = self.numer.render()
        if not self.den:
            return num
        dens = []
        for f, e in sorted(self.den.items(), key=_factor_sort_key):
            txt = f.render()
            if len(f.terms) > 1:
                txt = f"({txt})"
            dens.append(txt if e == 1 else f"{txt}^{e}")
        if len(self.numer.terms) > 1 or "/" in num or num.startswith(("(", "-")):
            num = f"({num})"
        den = "*".join(dens)
        if len(dens) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"RatFn({self.render()!r})"


def _cofactor(lcm: Mapping[MultiPoly, int], den: Mapping[MultiPoly, int]) -> MultiPoly:
    out = ONE_P
    for f, e in lcm.items():
        k = e - den.get(f, 0)
        if k:
            out = out * f**k
    return out


def _cancel(numer: MultiPoly, den: dict[MultiPoly, int]) -> tuple[MultiPoly, dict]:
    if numer.is_zero():
        return ZERO_P, {}
    if not den:
        return numer, den
    out = {}
    for f, e in den.items():
        while e and not numer.is_const():
            q = numer.divide_exact(f)
            if q is None:
                break
            numer = q
            e -= 1
        if e:
            out[f] = e
    return numer, out


ZERO = RatFn(ZERO_P, {}, _canonical=True)
ONE = RatFn(ONE_P, {}, _canonical=True)
I = RatFn(MultiPoly.const(I_S), {}, _canonical=True)
tau, z, zb, x = (RatFn.var(v) for v in VARS)


def ratfn_arith(op: str, a: RatFn, b: RatFn | None = None) -> RatFn:
    """Dispatch one of ``add, sub, mul, div, neg``."""
    if op == "neg":
        return -a
    if b is None:
        raise TypeError(f"{op} needs two operands")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def ratfn_equal(a: RatFn, b: RatFn) -> bool:
    """Semantic equality: ``a.numer*b.denom - b.numer*a.denom == 0``."""
    if a.den == b.den:
        return a.numer == b.numer
    lcm = dict(a.den)
    for f, e in b.den.items():
        if lcm.get(f, 0) < e:
            lcm[f] = e
    lhs = a.numer * _cofactor(lcm, a.den)
    rhs = b.numer * _cofactor(lcm, b.den)
    return lhs == rhs


def shift_tau(r: RatFn, k: int) -> RatFn:
    return r.shift(TAU, k)


def _assignment(values: Mapping) -> dict[int, complex]:
    out = {}
    for k, v in values.items():
        out[_var_index(k)] = complex(v)
    return out


def eval_numeric(r: RatFn, assignment: Mapping, eps: float = 1e-300) -> complex:
    """Floating evaluation; raises :class:`PoleProximity` if ``|denom| <= eps``.

    Relative error is about 1e-12 when numerator and denominator are not
    themselves the result of heavy cancellation.
    """
    vals = _assignment(assignment)
    needed = {_var_index(v) for v in r.variables()}
    missing = needed - set(vals)
    if missing:
        raise KeyError(f"no value for {[VARS[k] for k in sorted(missing)]}")
    den = 1 + 0j
    for f, e in r.den.items():
        den *= f.evaluate(vals) ** e
    if abs(den) <= eps:
        raise PoleProximity(f"denominator {abs(den):.3e} at {assignment}")
    return r.numer.evaluate(vals) / den


POLE_FAMILIES = ("x-z", "x-zb", "z-zb", "poly")


def partial_fractions_x(r: RatFn) -> list[tuple[str, int, RatFn]]:
    """Prime-fraction decomposition in ``x``.

    Returns ``(pole, order, coeff)`` triples: ``coeff/(x-z)**order``,
    ``coeff/(x-zb)**order``, ``coeff/(z-zb)**order`` for the x-free
    Laurent part, and ``('poly', j, c)`` for ``c*x**j``. Coefficients of the
    ``x-z``/``x-zb`` terms are free of ``x``; those of the ``z-zb`` terms
    are also free of ``z``.
    """
    for f in r.den:
        if f.depends_on(X) and f not in (X_MINUS_Z, X_MINUS_ZB):
            raise UnsupportedDenominator(f"denominator factor {f} is not x - z or x - zb")
    out: list[tuple[str, int, RatFn]] = []
    rest = r
    for label, factor, root in (("x-z", X_MINUS_Z, MultiPoly.var(Z)),
                                ("x-zb", X_MINUS_ZB, MultiPoly.var(ZB))):
        rest, terms = _peel(rest, factor, X, root, label)
        out.extend(terms)
    for f in rest.den:
        if f.depends_on(X):
            raise UnsupportedDenominator(f"factor {f} survived peeling")
    by_power: dict[int, dict] = {}
    for e, c in rest.numer.terms.items():
        by_power.setdefault(e[X], {})[e[:X] + (0,)] = c
    poly_terms = []
    for p in sorted(by_power):
        coeff = RatFn(MultiPoly(by_power[p], _trusted=True), rest.den)
        if p == 0:
            coeff, laurent = _peel(coeff, Z_MINUS_ZB, Z, MultiPoly.var(ZB), "z-zb")
            out.extend(laurent)
        if not coeff.is_zero():
            poly_terms.append(("poly", p, coeff))
    return out + poly_terms


def _peel(r: RatFn, factor: MultiPoly, var: int, root: MultiPoly, label: str):
    terms = []
    while factor in r.den:
        order = r.den[factor]
        reduced = RatFn(r.numer, {f: e for f, e in r.den.items() if f != factor})
        coeff = reduced.subs(var, root)
        terms.append((label, order, coeff))
        r = r - coeff * RatFn(ONE_P, {factor: order})
        if r.den.get(factor, 0) >= order:
            raise ExactError(f"peeling {label} did not lower the pole order")
    terms.sort(key=lambda t: t[1])
    return r, terms


def sum_partial_fractions(terms: Iterable[tuple[str, int, RatFn]]) -> RatFn:
    """Inverse of :func:`partial_fractions_x`."""
    total = ZERO
    denominators = {"x-z": X_MINUS_Z, "x-zb": X_MINUS_ZB, "z-zb": Z_MINUS_ZB}
    for label, order, coeff in terms:
        if label == "poly":
            total = total + coeff * RatFn.var(X, order) if order else total + coeff
        else:
            total = total + coeff * RatFn(ONE_P, {denominators[label]: order})
    return total
