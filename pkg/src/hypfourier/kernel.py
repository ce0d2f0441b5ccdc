"""Action of both operator algebras on the Fourier kernel and the built-in correspondences.

The kernel is ``K = F**tau`` with ``F = 2i (x - z)(x - zb)/(z - zb)``. Every
operator in play maps ``R*K`` to ``R'*K`` with ``R, R'`` rational, so the
calculus only ever handles the ratio: derivatives pick up ``tau`` times the
logarithmic derivative of ``F``, and ``T^r`` multiplies by ``F**r`` after
shifting ``tau``. No branch of ``F**tau`` is ever chosen.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .exact import (
    I_S,
    ONE,
    ONE_P,
    TAU,
    X,
    X_MINUS_Z,
    X_MINUS_ZB,
    Z,
    ZB,
    Z_MINUS_ZB,
    MultiPoly,
    RatFn,
    shift_tau,
)
from .hyp_algebra import ALPHABET, GeneratorWord, HypOp, hyp_adjoint, hyp_commutator
from .spec_algebra import DX, SpecOp, spec_commutator, spec_mul

tau = RatFn.var(TAU)
_i = RatFn.const(I_S)

# logarithmic derivatives of F
DLOG_Z = -(RatFn(ONE_P, {X_MINUS_Z: 1}) + RatFn(ONE_P, {Z_MINUS_ZB: 1}))
DLOG_ZB = -RatFn(ONE_P, {X_MINUS_ZB: 1}) + RatFn(ONE_P, {Z_MINUS_ZB: 1})
DLOG_X = RatFn(ONE_P, {X_MINUS_Z: 1}) + RatFn(ONE_P, {X_MINUS_ZB: 1})

_DLOG = {Z: DLOG_Z, ZB: DLOG_ZB, X: DLOG_X}


def f_power(r: int) -> RatFn:
    """``F**r`` for integer ``r``; this is ``T^r K / K``."""
    n = abs(r)
    top = (MultiPoly.const(2 * I_S) * X_MINUS_Z * X_MINUS_ZB) ** n
    if r >= 0:
        return RatFn(top, {Z_MINUS_ZB: n})
    return RatFn(Z_MINUS_ZB**n, {}) / RatFn(top)


@dataclass(frozen=True)
class DressedKernel:
    """The function ``ratio * K(tau; z, x)``."""

    ratio: RatFn = ONE

    def d(self, var) -> "DressedKernel":
        return DressedKernel(self.ratio.diff(var) + self.ratio * tau * _DLOG[var])

    def times(self, c: RatFn) -> "DressedKernel":
        return DressedKernel(self.ratio * c)

    def shift(self, r: int) -> "DressedKernel":
        if not r:
            return self
        return DressedKernel(shift_tau(self.ratio, r) * f_power(r))


def _derivatives(var_a, a: int, var_b, b: int, cache: dict) -> DressedKernel:
    key = (a, b)
    if key not in cache:
        if a:
            cache[key] = _derivatives(var_a, a - 1, var_b, b, cache).d(var_a)
        else:
            cache[key] = _derivatives(var_a, a, var_b, b - 1, cache).d(var_b)
    return cache[key]


def apply_hyp_to_kernel(L: HypOp) -> RatFn:
    """``(L K) / K``."""
    cache = {(0, 0): DressedKernel()}
    total = RatFn.const(0)
    for (a, b), c in L.terms.items():
        total = total + c * _derivatives(Z, a, ZB, b, cache).ratio
    return total


def apply_spec_to_kernel(M: SpecOp) -> RatFn:
    """``(M K) / K``."""
    total = RatFn.const(0)
    by_shift: dict[int, dict] = {}
    for (p, q, r), u in M.terms.items():
        cache = by_shift.setdefault(r, {(0, 0): DressedKernel().shift(r)})
        ratio = _derivatives(X, q, X, 0, cache).ratio
        total = total + u * RatFn.var(X, p) * ratio
    return total


@dataclass
class CorrespondencePair:
    lhs: HypOp
    rhs: SpecOp
    certificate: RatFn
    label: str = ""

    @property
    def status(self) -> str:
        return "verified" if self.certificate.is_zero() else "falsified"

    @property
    def verified(self) -> bool:
        return self.status == "verified"


def verify_correspondence(L: HypOp, M: SpecOp, label: str = "") -> CorrespondencePair:
    """Check ``J(L f) = M(J f)``, i.e. ``(L^+ K) = M K`` with ``L^+`` the formal adjoint."""
    cert = apply_hyp_to_kernel(hyp_adjoint(L)) - apply_spec_to_kernel(M)
    return CorrespondencePair(L, M, cert, label)


# --- built-in pairs -----------------------------------------------------------

_z, _zb = RatFn.var(Z), RatFn.var(ZB)


_A = (2 + tau) / (2 * _i * (1 + tau) * (1 + 2 * tau))  # recurring dx^2 T+ coefficient
_B = 2 * _i * tau * (tau - 1) / (1 + 2 * tau)  # recurring T- coefficient

LHS = {
    "corr01": HypOp({(1, 0): 1, (0, 1): 1}),
    "corr02": HypOp({(1, 0): _z, (0, 1): _zb}),
    "corr03": HypOp({(1, 0): _z * _z, (0, 1): _zb * _zb}),
    "corr10": HypOp.coeff(1 / (_z - _zb)),
    "corr11": HypOp({(1, 0): 1, (0, 1): -1}),
    "corr12": HypOp({(1, 0): _z, (0, 1): -_zb}),
    "corr13": HypOp({(1, 0): _z * _z, (0, 1): -_zb * _zb}),
}

RHS = {
    "corr01": DX,
    "corr02": SpecOp({(1, 1, 0): 1, (0, 0, 0): -tau}),
    "corr03": SpecOp({(2, 1, 0): 1, (1, 0, 0): -2 * tau}),
    "corr10": SpecOp({
        (0, 2, 1): 1 / (4 * _i * (1 + tau) * (1 + 2 * tau)),
        (0, 0, -1): -(2 * _i * tau) / (2 * (1 + 2 * tau)),
    }),
    "corr11": SpecOp({(0, 2, 1): _A, (0, 0, -1): _B}),
    "corr12": SpecOp({
        (1, 2, 1): _A,
        (0, 1, 1): -(2 + tau) / (2 * _i * (1 + tau)),
        (1, 0, -1): _B,
    }),
    "corr13": SpecOp({
        (2, 2, 1): _A,
        (1, 1, 1): -2 * (2 + tau) / (2 * _i * (1 + tau)),
        (0, 0, 1): 2 * (2 + tau) / (2 * _i),
        (2, 0, -1): _B,
    }),
}

# (corr10) with both terms negated; fails verification
ID1_RHS = -RHS["corr10"]

LABELS = tuple(LHS)


def named_pair(label: str) -> tuple[HypOp, SpecOp]:
    """Built-in correspondence by label (``corr01``..``corr13``, ``id1``, ``id2``, ``second``)."""
    if label in LHS:
        return LHS[label], RHS[label]
    if label in ("id1", "id2"):
        return LHS["corr10"], ID1_RHS
    if label == "second":
        return LHS["corr11"], RHS["corr11"]
    raise KeyError(f"unknown correspondence label {label!r}")


def _half(a: SpecOp, b: SpecOp, sign: int) -> SpecOp:
    return (a + b if sign > 0 else a - b).scale(RatFn.const(1) / 2)


def generator_table() -> dict[str, SpecOp]:
    """Fourier images of the seven generators of B.

    Unbarred fields are half-sums of the symmetric/antisymmetric pairs,
    barred ones half-differences.
    """
    table = {"inv": RHS["corr10"]}
    for plain, barred, sym, anti in (("dz", "dzb", "corr01", "corr11"),
                                     ("z_dz", "zb_dzb", "corr02", "corr12"),
                                     ("z2_dz", "zb2_dzb", "corr03", "corr13")):
        table[plain] = _half(RHS[sym], RHS[anti], +1)
        table[barred] = _half(RHS[sym], RHS[anti], -1)
    return {k: table[k] for k in ALPHABET}


GENERATOR_TABLE = generator_table()


def fourier_image(w: GeneratorWord) -> SpecOp:
    """Image of a generator word: the homomorphism fixed by :data:`GENERATOR_TABLE`."""
    total = SpecOp.zero()
    for word, c in w.terms.items():
        op = SpecOp.identity()
        for letter in word:
            op = spec_mul(op, GENERATOR_TABLE[letter])
        total = total + op.scale(RatFn.const(c))
    return total


@dataclass
class CommutatorDerivation:
    label: str
    bracket: str
    derived: SpecOp
    stated: SpecOp
    hyp_check: bool

    @property
    def agrees(self) -> bool:
        return self.hyp_check and self.derived == self.stated


@dataclass
class Theorem1Report:
    pairs: list[CorrespondencePair] = field(default_factory=list)
    derivations: list[CommutatorDerivation] = field(default_factory=list)
    sign_variant: CorrespondencePair | None = None

    @property
    def ok(self) -> bool:
        return all(p.verified for p in self.pairs) and all(d.agrees for d in self.derivations)


class Theorem1Failure(AssertionError):
    pass


def commutator_derivations() -> list[CommutatorDerivation]:
    """Re-derive (corr12) and (corr13) by brackets with (corr03)."""
    l03, l11, l12, l13 = (LHS[k] for k in ("corr03", "corr11", "corr12", "corr13"))
    m03, m11, m12, m13 = (RHS[k] for k in ("corr03", "corr11", "corr12", "corr13"))
    # [z^2 dz + zb^2 dzb, dz - dzb] = -2 (z dz - zb dzb)
    hyp12 = hyp_commutator(l03, l11) == l12.scale(-2)
    d12 = spec_commutator(m03, m11).scale(RatFn.const(-1) / 2)
    # [z^2 dz + zb^2 dzb, z dz - zb dzb] = -(z^2 dz - zb^2 dzb)
    hyp13 = hyp_commutator(l03, l12) == -l13
    d13 = -spec_commutator(m03, m12)
    return [
        CommutatorDerivation("corr12", "-1/2 [corr03, corr11]", d12, m12, hyp12),
        CommutatorDerivation("corr13", "-[corr03, corr12]", d13, m13, hyp13),
    ]


def theorem1_suite(strict: bool = True) -> Theorem1Report:
    """Verify every built-in correspondence exactly plus the two bracket re-derivations.

    The (id1) sign variant of (corr10) is carried along as ``sign_variant``; it
    is expected to be falsified.
    """
    report = Theorem1Report()
    for label in LABELS:
        report.pairs.append(verify_correspondence(LHS[label], RHS[label], label))
    report.derivations = commutator_derivations()
    report.sign_variant = verify_correspondence(LHS["corr10"], ID1_RHS, "id1")
    if strict and not report.ok:
        bad = [f"{p.label}: {p.certificate}" for p in report.pairs if not p.verified]
        bad += [f"{d.label} via {d.bracket}" for d in report.derivations if not d.agrees]
        raise Theorem1Failure("; ".join(bad))
    return report


def random_word(rng: random.Random, max_length: int, max_terms: int = 1) -> GeneratorWord:
    """A seeded random combination of generator words of length 1..max_length."""
    total = GeneratorWord()
    for _ in range(rng.randint(1, max_terms)):
        length = rng.randint(1, max_length)
        letters = tuple(rng.choice(ALPHABET) for _ in range(length))
        total = total + GeneratorWord({letters: rng.choice([1, -1, 2, 3])})
    return total
