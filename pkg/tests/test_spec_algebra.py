import random
from fractions import Fraction

import pytest

from gen import specop
from hypfourier.exact import InvalidCoefficient, MultiPoly, RatFn, shift_tau
from hypfourier.spec_algebra import (
    DX,
    T_MINUS,
    T_PLUS,
    X_OP,
    SpecOp,
    pole_check,
    spec_commutator,
    spec_mul,
    spec_normalize,
)

tau, x, z = (RatFn.var(v) for v in ("tau", "x", "z"))
SEEDS = range(5)
ONE = SpecOp.identity()


def act(M: SpecOp, phi: RatFn) -> RatFn:
    """Independent action oracle: U(tau) x^p dx^q applied to phi(tau + r, x)."""
    total = RatFn.const(0)
    for (p, q, r), u in M.terms.items():
        g = shift_tau(phi, r)
        for _ in range(q):
            g = g.diff("x")
        total = total + u * x ** p * g
    return total


TEST_FUNCTIONS = [tau ** a * x ** b for a in range(3) for b in range(4)] + [1 / (tau + 3)]

L0 = DX
L1 = SpecOp({(1, 1, 0): 1, (0, 0, 0): -tau})
L2 = SpecOp({(2, 1, 0): 1, (1, 0, 0): -2 * tau})


class TestNormalize:
    def test_shift_past_tau(self):
        assert spec_normalize([["T+", tau]]) == SpecOp({(0, 0, 1): tau + 1})

    def test_weyl(self):
        assert spec_normalize([["dx", "x"]]) == SpecOp({(1, 1, 0): 1, (0, 0, 0): 1})

    def test_shifts_cancel_around_x(self):
        left = spec_mul(SpecOp.monomial(q=2), T_PLUS)
        right = spec_mul(X_OP, T_MINUS)
        assert spec_mul(left, right) == SpecOp({(1, 2, 0): 1, (0, 1, 0): 2})

    def test_unicode_minus_and_unknown(self):
        assert spec_normalize([["T−"]]) == T_MINUS
        with pytest.raises(ValueError):
            spec_normalize([["dz"]])

    def test_rejects_x_in_coefficient(self):
        with pytest.raises(InvalidCoefficient):
            SpecOp.coeff(x)
        with pytest.raises(InvalidCoefficient):
            SpecOp.coeff(z)

    def test_agrees_with_action(self):
        words = [["dx", "x", "T+", tau], ["T-", "dx", "dx", "x", "x"], [tau, "T+", "T+", "x"]]
        for w in words:
            got = spec_normalize([w])
            for phi in TEST_FUNCTIONS:
                expected = phi
                for f in reversed(w):
                    expected = act(spec_normalize([[f]]), expected)
                assert act(got, phi) == expected


class TestMul:
    def test_identity(self):
        M = SpecOp({(1, 2, -1): 1 / (1 + 2 * tau)})
        assert spec_mul(ONE, M) == M

    def test_square_of_euler_operator(self):
        expected = SpecOp({(2, 2, 0): 1, (1, 1, 0): 1 - 2 * tau, (0, 0, 0): tau * tau})
        assert spec_mul(L1, L1) == expected

    def test_shift_group(self):
        assert spec_mul(T_PLUS, T_MINUS) == ONE

    def test_matches_action(self):
        rng = random.Random(20)
        for _ in range(30):
            a, b = specop(rng), specop(rng)
            for phi in TEST_FUNCTIONS[:6]:
                assert act(spec_mul(a, b), phi) == act(a, act(b, phi))


class TestCommutator:
    def test_weyl(self):
        assert spec_commutator(DX, X_OP) == ONE

    def test_shift_of_tau(self):
        assert spec_commutator(T_PLUS, SpecOp.coeff(tau)) == T_PLUS

    def test_quadratic_field_against_dx(self):
        assert spec_commutator(L2, DX) == SpecOp({(1, 1, 0): -2, (0, 0, 0): 2 * tau})

    def test_sl2_images(self):
        assert spec_commutator(L0, L1) == L0
        assert spec_commutator(L0, L2) == 2 * L1
        assert spec_commutator(L1, L2) == L2


class TestPoleCheck:
    def test_half_integer_roots(self):
        res = pole_check(SpecOp.coeff(1 / ((1 + tau) * (1 + 2 * tau))))
        assert res.ok
        assert res.roots == [Fraction(-1), Fraction(-1, 2)]

    def test_constant(self):
        assert pole_check(SpecOp.coeff(5)).ok
        assert pole_check(SpecOp.zero()).ok

    def test_complex_roots(self):
        res = pole_check(SpecOp.coeff(1 / (tau * tau + 1)))
        assert not res.ok
        assert res.witnesses == [MultiPoly.var("tau") ** 2 + MultiPoly.const(1)]

    def test_third_integer_root(self):
        assert not pole_check(SpecOp.coeff(1 / (3 * tau + 1))).ok


def test_zero_operator():
    assert spec_mul(SpecOp.zero(), T_PLUS).is_zero()
    assert spec_normalize([]).is_zero()
    assert str(SpecOp.zero()) == "0"


@pytest.mark.parametrize("seed", SEEDS)
def test_mul_associative(seed):
    rng = random.Random(seed)
    for _ in range(40):
        a, b, c = specop(rng), specop(rng), specop(rng)
        assert spec_mul(spec_mul(a, b), c) == spec_mul(a, spec_mul(b, c))


@pytest.mark.parametrize("seed", SEEDS)
def test_jacobi(seed):
    rng = random.Random(100 + seed)
    for _ in range(20):
        a, b, c = specop(rng), specop(rng), specop(rng)
        jac = (spec_commutator(a, spec_commutator(b, c)) + spec_commutator(b, spec_commutator(c, a))
               + spec_commutator(c, spec_commutator(a, b)))
        assert jac.is_zero()
        assert spec_commutator(a, b) == -spec_commutator(b, a)


@pytest.mark.parametrize("seed", SEEDS)
def test_shift_conjugation(seed):
    rng = random.Random(200 + seed)
    for _ in range(20):
        M = specop(rng)
        r = rng.randint(-2, 2)
        T = SpecOp.monomial(r=r)
        conj = spec_mul(spec_mul(T, M), SpecOp.monomial(r=-r))
        assert conj == M.shift_coefficients(r)


@pytest.mark.parametrize("seed", SEEDS)
def test_reassociation_gives_one_normal_form(seed):
    rng = random.Random(300 + seed)
    symbols = ["x", "dx", "T+", "T-", tau, 1 / (2 * tau + 1)]
    for _ in range(20):
        word = [rng.choice(symbols) for _ in range(rng.randint(1, 6))]
        flat = spec_normalize([word])
        k = rng.randint(0, len(word))
        split = spec_mul(spec_normalize([word[:k]]), spec_normalize([word[k:]]))
        assert split.terms.keys() == flat.terms.keys()
        assert all(split.terms[key] == flat.terms[key] for key in flat.terms)
