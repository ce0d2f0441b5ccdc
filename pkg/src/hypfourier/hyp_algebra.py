"""Differential operators on the upper half-plane with rational coefficients.

An operator is kept in normal form ``sum V_ab(z, zb) dz^a dzb^b`` with all
coefficients to the left. ``z`` and ``zb`` are independent symbols; on the
half-plane ``zb`` is the conjugate of ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping, Sequence

from .exact import (
    ONE,
    ONE_P,
    TAU,
    X,
    Z,
    ZB,
    Z_MINUS_ZB,
    ExactError,
    GaussScalar,
    InvalidCoefficient,
    MultiPoly,
    RatFn,
    ZERO_S,
)


class MembershipInconclusive(ExactError):
    """The lift search hit its cap before deciding membership in A."""


class Lemma1Failure(ExactError):
    def __init__(self, n: int, missing: list):
        self.n = n
        self.missing = missing
        super().__init__(f"generator words do not span A_{n}; unreached basis indices {missing}")


def _check_coeff(c: RatFn) -> RatFn:
    if c.depends_on(TAU) or c.depends_on(X):
        raise InvalidCoefficient(f"coefficient {c} involves tau or x")
    return c


class HypOp:
    """Normal-ordered operator; ``terms`` maps ``(a, b)`` to the coefficient of ``dz^a dzb^b``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], RatFn] | None = None, *, _checked=False):
        if _checked:
            self.terms = terms
            return
        out = {}
        for (a, b), c in (terms or {}).items():
            if a < 0 or b < 0:
                raise ValueError("negative derivative order")
            c = _check_coeff(RatFn.coerce(c))
            if (a, b) in out:
                c = out[(a, b)] + c
            out[(a, b)] = c
        self.terms = {k: c for k, c in out.items() if not c.is_zero()}

    @classmethod
    def coeff(cls, c) -> "HypOp":
        return cls({(0, 0): RatFn.coerce(c)})

    @classmethod
    def identity(cls) -> "HypOp":
        return cls({(0, 0): ONE}, _checked=True)

    @classmethod
    def zero(cls) -> "HypOp":
        return cls({}, _checked=True)

    @classmethod
    def derivative(cls, a: int = 0, b: int = 0) -> "HypOp":
        return cls({(a, b): ONE}, _checked=True)

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        return max((a + b for a, b in self.terms), default=0)

    def __eq__(self, other):
        if not isinstance(other, HypOp):
            return NotImplemented
        if self.terms.keys() != other.terms.keys():
            return (self - other).is_zero()
        return all(self.terms[k] == other.terms[k] for k in self.terms)

    __hash__ = None

    def __add__(self, other: "HypOp") -> "HypOp":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return HypOp({k: c for k, c in out.items() if not c.is_zero()}, _checked=True)

    def __neg__(self) -> "HypOp":
        return HypOp({k: -c for k, c in self.terms.items()}, _checked=True)

    def __sub__(self, other: "HypOp") -> "HypOp":
        return self + (-other)

    def scale(self, c) -> "HypOp":
        c = _check_coeff(RatFn.coerce(c))
        return HypOp({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, HypOp):
            return hyp_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def apply(self, f: RatFn) -> RatFn:
        """Act on a function of ``(z, zb)``."""
        cache = {(0, 0): RatFn.coerce(f)}
        total = RatFn.coerce(0)
        for (a, b), c in self.terms.items():
            total = total + c * _partial(cache, a, b)
        return total

    def swap_bar(self) -> "HypOp":
        """Exchange ``z <-> zb`` and ``dz <-> dzb``."""
        return HypOp({(b, a): swap_z_zb(c) for (a, b), c in self.terms.items()}, _checked=True)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b) in sorted(self.terms, reverse=True):
            parts.append(_render_term(self.terms[(a, b)], _dsym("dz", a) + _dsym("dzb", b)))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"HypOp({self.render()!r})"


def _dsym(name: str, k: int) -> list[str]:
    if k == 0:
        return []
    return [name if k == 1 else f"{name}^{k}"]


def _render_term(c: RatFn, symbols: list[str]) -> str:
    txt = c.render()
    if not symbols:
        return txt
    if c.is_const() and c.const_value() == 1:
        return "*".join(symbols)
    if c.is_const() and c.const_value() == -1:
        return "-" + "*".join(symbols)
    if not c.den and len(c.numer.terms) > 1:
        txt = f"({txt})"
    return "*".join([txt] + symbols)


def _partial(cache: dict, a: int, b: int) -> RatFn:
    key = (a, b)
    if key not in cache:
        if a:
            cache[key] = _partial(cache, a - 1, b).diff(Z)
        else:
            cache[key] = _partial(cache, a, b - 1).diff(ZB)
    return cache[key]


def swap_z_zb(r: RatFn) -> RatFn:
    """Exchange the symbols ``z`` and ``zb`` in a rational function."""
    def swap(p: MultiPoly) -> MultiPoly:
        return MultiPoly({(e[0], e[2], e[1], e[3]): c for e, c in p.terms.items()}, _trusted=True)

    return RatFn(swap(r.numer), {swap(f): e for f, e in r.den.items()})


def hyp_mul(L1: HypOp, L2: HypOp) -> HypOp:
    """Composition ``L1 o L2`` in normal form (Leibniz rule moves coefficients left)."""
    out: dict[tuple[int, int], RatFn] = {}
    for (a2, b2), d in L2.terms.items():
        cache = {(0, 0): d}
        for (a1, b1), c in L1.terms.items():
            for i in range(a1 + 1):
                for j in range(b1 + 1):
                    dd = _partial(cache, i, j)
                    if dd.is_zero():
                        continue
                    k = (a1 - i + a2, b1 - j + b2)
                    term = c * dd * (comb(a1, i) * comb(b1, j))
                    out[k] = out[k] + term if k in out else term
    return HypOp({k: c for k, c in out.items() if not c.is_zero()}, _checked=True)


def hyp_commutator(L1: HypOp, L2: HypOp) -> HypOp:
    return hyp_mul(L1, L2) - hyp_mul(L2, L1)


def hyp_normalize(raw: Iterable[Sequence]) -> HypOp:
    """Normal form of a sum of products.

    Each product is a sequence of factors; a factor is ``"dz"``, ``"dzb"``,
    a :class:`HypOp`, or anything coercible to a coefficient. Coefficients
    involving ``tau`` or ``x`` raise :class:`InvalidCoefficient`.
    """
    total = HypOp.zero()
    for product in raw:
        op = HypOp.identity()
        for factor in product:
            op = hyp_mul(op, _as_op(factor))
        total = total + op
    return total


def _as_op(factor) -> HypOp:
    if isinstance(factor, HypOp):
        return factor
    if factor == "dz":
        return DZ
    if factor == "dzb":
        return DZB
    return HypOp.coeff(factor)


# adjoint weight (z - zb)^-2; constant factors of the measure drop out
_WEIGHT = RatFn(ONE_P, {Z_MINUS_ZB: 2})
_WEIGHT_INV = RatFn(Z_MINUS_ZB * Z_MINUS_ZB)


def hyp_adjoint(L: HypOp) -> HypOp:
    """Formal adjoint for the measure ``dz dzb / (z - zb)^2``.

    ``L^+ = w^-1 o L^t o w`` with ``L^t`` the transpose (derivatives change
    sign and move right of their coefficient).
    """
    total = HypOp.zero()
    for (a, b), c in L.terms.items():
        sign = -1 if (a + b) % 2 else 1
        piece = hyp_mul(HypOp.derivative(a, b), HypOp.coeff(c * _WEIGHT))
        total = total + (piece if sign > 0 else -piece)
    return HypOp({k: _WEIGHT_INV * v for k, v in total.terms.items()})


z_, zb_ = RatFn.var(Z), RatFn.var(ZB)
INV = HypOp.coeff(1 / (z_ - zb_))
DZ = HypOp.derivative(1, 0)
DZB = HypOp.derivative(0, 1)

GENERATORS: dict[str, HypOp] = {
    "inv": INV,
    "dz": DZ,
    "z_dz": HypOp({(1, 0): z_}),
    "z2_dz": HypOp({(1, 0): z_ * z_}),
    "dzb": DZB,
    "zb_dzb": HypOp({(0, 1): zb_}),
    "zb2_dzb": HypOp({(0, 1): zb_ * zb_}),
}
ALPHABET = tuple(GENERATORS)
VECTOR_FIELDS = ALPHABET[1:]


class GeneratorWord:
    """Q(i)-linear combination of words over :data:`ALPHABET`.

    A word ``(g1, ..., gk)`` stands for the composition ``g1 o ... o gk``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[str, ...], object] | None = None):
        out: dict[tuple[str, ...], GaussScalar] = {}
        for word, c in (terms or {}).items():
            word = tuple(word)
            for letter in word:
                if letter not in GENERATORS:
                    raise ValueError(f"unknown generator {letter!r}")
            c = GaussScalar.coerce(c)
            out[word] = out.get(word, ZERO_S) + c
        self.terms = {w: c for w, c in out.items() if c}

    @classmethod
    def letter(cls, *letters: str) -> "GeneratorWord":
        return cls({tuple(letters): 1})

    def __add__(self, other: "GeneratorWord") -> "GeneratorWord":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, ZERO_S) + c
        return GeneratorWord(out)

    def __neg__(self) -> "GeneratorWord":
        return GeneratorWord({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "GeneratorWord") -> "GeneratorWord":
        return self + (-other)

    def scale(self, c) -> "GeneratorWord":
        c = GaussScalar.coerce(c)
        return GeneratorWord({w: v * c for w, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, GeneratorWord):
            out: dict = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    w = w1 + w2
                    out[w] = out.get(w, ZERO_S) + c1 * c2
            return GeneratorWord(out)
        return self.scale(other)

    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.terms

    def length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def to_hypop(self) -> HypOp:
        total = HypOp.zero()
        for word, c in self.terms.items():
            op = HypOp.identity()
            for letter in word:
                op = hyp_mul(op, GENERATORS[letter])
            total = total + op.scale(RatFn.const(c))
        return total

    def apply(self, f: RatFn) -> RatFn:
        total = RatFn.const(0)
        for word, c in self.terms.items():
            g = f
            for letter in reversed(word):
                g = GENERATORS[letter].apply(g)
            total = total + g * c
        return total

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items()):
            body = "*".join(w) if w else "1"
            if c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c.render()}*{body}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"GeneratorWord({self.render()!r})"


# --- the coefficient algebra A --------------------------------------------

@dataclass(frozen=True, order=True)
class OmegaIndex:
    n: int
    p: int
    q: int

    def __post_init__(self):
        n, p, q = self.n, self.p, self.q
        if not (0 <= p <= n and 0 <= q <= n) or (p, q) == (n, n):
            raise ValueError(f"({p}, {q}) is not in Omega_{n}")

    def basis_function(self) -> RatFn:
        return RatFn(MultiPoly.var(Z, self.p) * MultiPoly.var(ZB, self.q), {Z_MINUS_ZB: self.n})


def omega(n: int) -> list[OmegaIndex]:
    return [OmegaIndex(n, p, q) for p in range(n + 1) for q in range(n + 1) if (p, q) != (n, n)]


def a_membership(r: RatFn, cap: int = 12) -> list[tuple[OmegaIndex, GaussScalar]] | None:
    """Expansion of ``r`` over the basis ``z^p zb^q / (z - zb)^n`` of ``A_n``.

    ``n`` is the least admissible level. Returns ``None`` when ``r`` is not
    in ``A``; raises :class:`MembershipInconclusive` past ``cap``.
    """
    r = RatFn.coerce(r)
    if r.is_zero():
        return []
    if r.depends_on(TAU) or r.depends_on(X):
        return None
    if any(f != Z_MINUS_ZB for f in r.den):
        return None
    m = r.den.get(Z_MINUS_ZB, 0)
    numer = r.numer
    # lifting by (z - zb) raises both partial degrees and the level in step,
    # so a partial degree above the pole order is never repaired
    if numer.degree(Z) > m or numer.degree(ZB) > m:
        return None
    for n in range(m, cap + 1):
        expansion = _fits(numer, n)
        if expansion is not None:
            return expansion
        numer = numer * Z_MINUS_ZB
    raise MembershipInconclusive(f"{r} not resolved up to level {cap}")


def _fits(numer: MultiPoly, n: int):
    out = []
    for e, c in numer.terms.items():
        p, q = e[Z], e[ZB]
        if p > n or q > n or (p, q) == (n, n):
            return None
        out.append((OmegaIndex(n, p, q), c))
    return sorted(out, key=lambda t: (t[0].p, t[0].q))


@dataclass
class Lemma1Level:
    n: int
    dim: int
    words: dict[OmegaIndex, GeneratorWord]


@dataclass
class Lemma1Certificate:
    """For each level ``n``, a generator word per basis element of ``A_n``.

    Applying ``words[idx]`` to ``1/(z - zb)`` gives exactly
    ``idx.basis_function()``.
    """

    n_max: int
    levels: dict[int, Lemma1Level] = field(default_factory=dict)
    explored: int = 0

    def replay(self) -> bool:
        seed = 1 / (z_ - zb_)
        for level in self.levels.values():
            if level.dim != (level.n + 1) ** 2 - 1 or len(level.words) != level.dim:
                return False
            for idx, word in level.words.items():
                if not word.apply(seed) == idx.basis_function():
                    return False
        return True


class _Echelon:
    """Incremental row echelon form over Q(i) on sparse vectors, tracking combinations."""

    def __init__(self):
        self.rows: dict = {}  # pivot -> (vector, combo)
        self.order: list = []

    def reduce(self, vec: dict, combo: GeneratorWord):
        vec = dict(vec)
        for pivot in self.order:
            c = vec.get(pivot)
            if not c:
                continue
            rvec, rcombo = self.rows[pivot]
            for k, v in rvec.items():
                s = vec.get(k, ZERO_S) - c * v
                if s:
                    vec[k] = s
                else:
                    vec.pop(k, None)
            combo = combo - rcombo.scale(c)
        return vec, combo

    def add(self, vec: dict, combo: GeneratorWord):
        pivot = max(vec)
        inv = vec[pivot].inverse()
        vec = {k: v * inv for k, v in vec.items()}
        combo = combo.scale(inv)
        for p in self.order:
            rvec, rcombo = self.rows[p]
            c = rvec.get(pivot)
            if c:
                for k, v in vec.items():
                    s = rvec.get(k, ZERO_S) - c * v
                    if s:
                        rvec[k] = s
                    else:
                        rvec.pop(k, None)
                self.rows[p] = (rvec, rcombo - combo.scale(c))
        self.rows[pivot] = (vec, combo)
        self.order.append(pivot)


def _vector(f: RatFn, level: int) -> dict:
    expansion = a_membership(f, cap=level)
    if expansion is None:
        raise Lemma1Failure(level, [f"{f} left the algebra A"])
    out = {}
    for idx, c in expansion:
        lifted = MultiPoly.var(Z, idx.p) * MultiPoly.var(ZB, idx.q) * Z_MINUS_ZB ** (level - idx.n)
        for e, v in lifted.terms.items():
            key = (e[Z], e[ZB])
            s = out.get(key, ZERO_S) + c * v
            if s:
                out[key] = s
            else:
                out.pop(key, None)
    return out


def _function(vec: dict, level: int) -> RatFn:
    numer = MultiPoly({(0, p, q, 0): c for (p, q), c in vec.items()})
    return RatFn(numer, {Z_MINUS_ZB: level})


def lemma1_generate(n_max: int, max_length: int | None = None) -> Lemma1Certificate:
    """Certify that ``1/(z - zb)`` generates ``A_1, ..., A_{n_max}`` under the six vector fields.

    Words are explored breadth first; a new function is kept only if it is
    independent of those found so far, which loses nothing because the span
    of kept functions is closed under every field once all are expanded.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if max_length is None:
        max_length = 2 * n_max + 2
    level = max_length + 1  # words of length k land in A_{k+1}
    seed = 1 / (z_ - zb_)
    ech = _Echelon()
    frontier = [(GeneratorWord.letter(), seed)]
    vec, combo = ech.reduce(_vector(seed, level), GeneratorWord.letter())
    ech.add(vec, combo)
    cert = Lemma1Certificate(n_max)
    explored = 1
    for length in range(max_length + 1):
        _certify_levels(cert, ech, level)
        if len(cert.levels) == n_max:
            break
        if length == max_length:
            break
        nxt = []
        for word, f in frontier:
            for letter in VECTOR_FIELDS:
                g = GENERATORS[letter].apply(f)
                explored += 1
                if g.is_zero():
                    continue
                vec, combo = ech.reduce(_vector(g, level), GeneratorWord.letter(letter) * word)
                if vec:
                    ech.add(vec, combo)
                    nxt.append((combo, _function(vec, level)))
        frontier = nxt
    cert.explored = explored
    if len(cert.levels) < n_max:
        n = min(set(range(1, n_max + 1)) - set(cert.levels))
        missing = [idx for idx in omega(n) if _express(ech, idx, level) is None]
        raise Lemma1Failure(n, missing)
    return cert


def _express(ech: _Echelon, idx: OmegaIndex, level: int) -> GeneratorWord | None:
    target = _vector(idx.basis_function(), level)
    rest, combo = ech.reduce(target, GeneratorWord())
    if rest:
        return None
    return -combo


def _certify_levels(cert: Lemma1Certificate, ech: _Echelon, level: int) -> None:
    for n in range(1, cert.n_max + 1):
        if n in cert.levels:
            continue
        words = {}
        for idx in omega(n):
            w = _express(ech, idx, level)
            if w is None:
                return
            words[idx] = w
        cert.levels[n] = Lemma1Level(n, len(words), words)
