"""Seeded generators of random algebra elements for property tests."""

import random
from fractions import Fraction

from hypfourier.exact import GaussScalar, MultiPoly, RatFn, X_MINUS_Z, X_MINUS_ZB, Z_MINUS_ZB
from hypfourier.hyp_algebra import HypOp
from hypfourier.spec_algebra import SpecOp

VARS4 = (0, 1, 2, 3)


def scalar(rng: random.Random, allow_zero=True) -> GaussScalar:
    while True:
        s = GaussScalar(Fraction(rng.randint(-3, 3), rng.randint(1, 3)), rng.choice([0, 0, 1, -1]))
        if allow_zero or s:
            return s


def poly(rng: random.Random, variables=VARS4, terms=3, degree=2, nonzero=False) -> MultiPoly:
    while True:
        out = {}
        for _ in range(rng.randint(1, terms)):
            e = [0, 0, 0, 0]
            for v in variables:
                e[v] = rng.randint(0, degree)
            out[tuple(e)] = scalar(rng, allow_zero=False)
        p = MultiPoly(out)
        if not nonzero or not p.is_zero():
            return p


def ratfn(rng: random.Random, variables=VARS4) -> RatFn:
    """Small numerator over a denominator from the factor families the engine produces."""
    den = MultiPoly.const(1)
    families = [Z_MINUS_ZB]
    if 3 in variables:
        families += [X_MINUS_Z, X_MINUS_ZB]
    if 0 in variables:
        tau = MultiPoly.var(0)
        families += [tau + MultiPoly.const(1), tau * MultiPoly.const(2) + MultiPoly.const(1)]
    for _ in range(rng.randint(0, 2)):
        den = den * rng.choice(families)
    if rng.random() < 0.3:
        den = den * poly(rng, variables, terms=2, degree=1, nonzero=True)
    return RatFn.fraction(poly(rng, variables), den)


def nonzero_ratfn(rng, variables=VARS4) -> RatFn:
    while True:
        r = ratfn(rng, variables)
        if not r.is_zero():
            return r


def a_coeff(rng: random.Random) -> RatFn:
    """Coefficient in {z, zb} with denominator (z - zb)^k, k <= 3."""
    k = rng.randint(0, 3)
    return RatFn.fraction(poly(rng, (1, 2), terms=2, degree=2), Z_MINUS_ZB ** k)


def hypop(rng: random.Random, order=2, terms=3) -> HypOp:
    out = {}
    for _ in range(rng.randint(1, terms)):
        a = rng.randint(0, order)
        b = rng.randint(0, order - a)
        out[(a, b)] = a_coeff(rng)
    return HypOp(out)


def tau_coeff(rng: random.Random) -> RatFn:
    tau = MultiPoly.var(0)
    den = MultiPoly.const(1)
    for _ in range(rng.randint(0, 2)):
        den = den * (tau * MultiPoly.const(2) + MultiPoly.const(rng.randint(-3, 3)))
    return RatFn.fraction(poly(rng, (0,), terms=2, degree=2), den)


def specop(rng: random.Random, pmax=2, qmax=2, rmax=2, terms=3) -> SpecOp:
    out = {}
    for _ in range(rng.randint(1, terms)):
        out[(rng.randint(0, pmax), rng.randint(0, qmax), rng.randint(-rmax, rmax))] = tau_coeff(rng)
    return SpecOp(out)


def point(rng: random.Random) -> dict:
    """Random numeric assignment with z in the upper half-plane and zb its conjugate."""
    z = complex(rng.uniform(-1, 1), rng.uniform(0.5, 2))
    return {"tau": complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), "z": z,
            "zb": z.conjugate(), "x": rng.uniform(-2, 2)}


def a_member(rng: random.Random, nmax=3) -> RatFn:
    """Random element of the coefficient algebra A: a short sum of basis functions."""
    from hypfourier.hyp_algebra import omega
    n = rng.randint(1, nmax)
    total = RatFn.const(0)
    for idx in rng.sample(omega(n), rng.randint(1, 3)):
        total = total + idx.basis_function() * scalar(rng, allow_zero=False)
    return total


def a_hypop(rng: random.Random, order=2, terms=3) -> HypOp:
    out = {}
    for _ in range(rng.randint(1, terms)):
        a = rng.randint(0, order)
        out[(a, rng.randint(0, order - a))] = a_member(rng)
    return HypOp(out)
