import random

import pytest

from gen import a_coeff, a_hypop, hypop
from hypfourier.exact import GaussScalar, InvalidCoefficient, RatFn
from hypfourier.hyp_algebra import (
    ALPHABET,
    DZ,
    DZB,
    GENERATORS,
    INV,
    GeneratorWord,
    HypOp,
    MembershipInconclusive,
    OmegaIndex,
    a_membership,
    hyp_adjoint,
    hyp_commutator,
    hyp_mul,
    hyp_normalize,
    lemma1_generate,
    omega,
    swap_z_zb,
)

z, zb, tau, x = (RatFn.var(v) for v in ("z", "zb", "tau", "x"))
inv = 1 / (z - zb)
Z_DZ, Z2_DZ = GENERATORS["z_dz"], GENERATORS["z2_dz"]
BARRED = [GENERATORS[k] for k in ("dzb", "zb_dzb", "zb2_dzb")]
SEEDS = range(5)


def op(**terms):
    """HypOp from keyword terms like d1_0=coeff."""
    return HypOp({tuple(int(c) for c in k[1:].split("_")): v for k, v in terms.items()})


def monomials(deg=4):
    return [z ** p * zb ** q for p in range(deg + 1) for q in range(deg + 1 - p)]


def same_action(a: HypOp, b: HypOp) -> bool:
    return all(a.apply(m) == b.apply(m) for m in monomials() + [inv, z / (z - zb) ** 2])


class TestNormalize:
    def test_leibniz_step(self):
        out = hyp_normalize([[DZ, inv]])
        assert out == op(d0_0=-(inv ** 2), d1_0=inv)
        assert same_action(out, hyp_mul(DZ, INV))

    def test_already_normal(self):
        assert hyp_normalize([[inv, DZ]]) == op(d1_0=inv)

    def test_two_derivatives_around_coordinate(self):
        out = hyp_normalize([[DZ, z, DZ]])
        assert out == op(d2_0=z, d1_0=1)
        assert out.apply(z ** 3) == 6 * z * z + 3 * z * z

    def test_rejects_foreign_variables(self):
        with pytest.raises(InvalidCoefficient):
            hyp_normalize([[tau, DZ]])
        with pytest.raises(InvalidCoefficient):
            HypOp.coeff(x)

    def test_zero_operator(self):
        assert hyp_normalize([]).is_zero()
        assert hyp_mul(HypOp.zero(), DZ).is_zero()
        assert hyp_adjoint(HypOp.zero()).is_zero()


class TestMul:
    def test_identity(self):
        L = op(d1_0=z * z, d0_1=inv)
        assert hyp_mul(HypOp.identity(), L) == L

    def test_dz_after_z_dz(self):
        assert hyp_mul(DZ, Z_DZ) == op(d2_0=z, d1_0=1)

    def test_multiplication_operator_passes(self):
        assert hyp_mul(INV, Z2_DZ) == op(d1_0=z * z * inv)

    def test_matches_action_on_monomials(self):
        rng = random.Random(10)
        for _ in range(20):
            a, b = hypop(rng), hypop(rng)
            for m in monomials(3):
                assert hyp_mul(a, b).apply(m) == a.apply(b.apply(m))


class TestCommutator:
    def test_sl2_constants(self):
        assert hyp_commutator(DZ, Z_DZ) == DZ
        assert hyp_commutator(DZ, Z2_DZ) == 2 * Z_DZ
        assert hyp_commutator(Z_DZ, Z2_DZ) == Z2_DZ

    def test_route_to_dilation(self):
        left = Z2_DZ + GENERATORS["zb2_dzb"]
        got = hyp_commutator(left, DZ - DZB)
        assert got == -2 * (Z_DZ - GENERATORS["zb_dzb"])

    def test_vector_field_against_function(self):
        assert hyp_commutator(Z_DZ, INV) == HypOp.coeff(-z * inv ** 2)

    def test_barred_generators_commute(self):
        for a in (DZ, Z_DZ, Z2_DZ):
            for b in BARRED:
                assert hyp_commutator(a, b).is_zero()

    def test_barred_sl2_copy(self):
        dzb, zb_dzb, zb2_dzb = BARRED
        assert hyp_commutator(dzb, zb_dzb) == dzb
        assert hyp_commutator(dzb, zb2_dzb) == 2 * zb_dzb
        assert hyp_commutator(zb_dzb, zb2_dzb) == zb2_dzb


class TestAdjoint:
    def test_difference_of_derivatives(self):
        assert hyp_adjoint(DZ - DZB) == -DZ + DZB + HypOp.coeff(4 * inv)

    def test_multiplication_operator(self):
        assert hyp_adjoint(INV) == INV

    def test_involution_example(self):
        assert hyp_adjoint(hyp_adjoint(Z2_DZ)) == Z2_DZ

    def test_weighted_integration_by_parts(self):
        # L* f = w^-1 * sum (-d)^(a+b) (c * w * f) for first-order L
        w = inv ** 2
        rng = random.Random(11)
        for _ in range(10):
            L = hypop(rng, order=1)
            Ls = hyp_adjoint(L)
            for f in monomials(2):
                expected = RatFn.const(0)
                for (a, b), c in L.terms.items():
                    g = c * w * f
                    if a:
                        g = -g.diff("z")
                    if b:
                        g = -g.diff("zb")
                    expected = expected + g
                assert Ls.apply(f) == expected / w


class TestMembership:
    def test_basis_element(self):
        assert a_membership(inv) == [(OmegaIndex(1, 0, 0), GaussScalar(1))]

    def test_symmetric_quotient(self):
        got = dict(a_membership((z + zb) / (z - zb)))
        assert got == {OmegaIndex(1, 1, 0): 1, OmegaIndex(1, 0, 1): 1}

    def test_corner_forces_lift(self):
        got = dict(a_membership(z * z * zb * zb / (z - zb) ** 2))
        assert got == {OmegaIndex(3, 3, 2): 1, OmegaIndex(3, 2, 3): -1}

    def test_non_members(self):
        assert a_membership(1 / (z - 2 * zb)) is None
        assert a_membership(z) is None
        assert a_membership(tau * inv) is None

    def test_cap(self):
        r = (z ** 6 * zb ** 6) / (z - zb) ** 6
        with pytest.raises(MembershipInconclusive):
            a_membership(r, cap=6)
        assert a_membership(r, cap=12) is not None

    def test_expansion_reconstructs(self):
        rng = random.Random(12)
        for _ in range(50):
            r = a_coeff(rng)
            exp = a_membership(r)
            if exp is None:
                continue
            total = RatFn.const(0)
            for idx, c in exp:
                total = total + idx.basis_function() * c
            assert total == r

    def test_omega_size(self):
        for n in range(1, 6):
            assert len(omega(n)) == (n + 1) ** 2 - 1
        with pytest.raises(ValueError):
            OmegaIndex(2, 2, 2)


class TestSpanningCertificate:
    def test_first_level(self):
        cert = lemma1_generate(1)
        assert set(cert.levels[1].words) == {OmegaIndex(1, 0, 0), OmegaIndex(1, 1, 0),
                                            OmegaIndex(1, 0, 1)}
        assert cert.levels[1].dim == 3
        assert cert.replay()

    def test_second_level(self):
        cert = lemma1_generate(2)
        assert cert.levels[2].dim == 8
        assert cert.replay()

    def test_words_use_vector_fields(self):
        cert = lemma1_generate(2)
        for level in cert.levels.values():
            for w in level.words.values():
                for word in w.terms:
                    assert set(word) <= set(ALPHABET[1:])

    def test_bad_input(self):
        with pytest.raises(ValueError):
            lemma1_generate(0)


class TestGeneratorWord:
    def test_alphabet(self):
        assert ALPHABET == ("inv", "dz", "z_dz", "z2_dz", "dzb", "zb_dzb", "zb2_dzb")
        with pytest.raises(ValueError):
            GeneratorWord.letter("dx")

    def test_composition_order(self):
        w = GeneratorWord.letter("dz", "inv")
        assert w.to_hypop() == hyp_mul(DZ, INV)
        assert w.apply(z) == hyp_mul(DZ, INV).apply(z)


# ---- property suites, seeded 0..4 ----

@pytest.mark.parametrize("seed", SEEDS)
def test_mul_associative(seed):
    rng = random.Random(seed)
    for _ in range(40):
        a, b, c = hypop(rng), hypop(rng), hypop(rng)
        assert hyp_mul(hyp_mul(a, b), c) == hyp_mul(a, hyp_mul(b, c))


@pytest.mark.parametrize("seed", SEEDS)
def test_commutator_lie_axioms(seed):
    rng = random.Random(100 + seed)
    for _ in range(20):
        a, b, c = hypop(rng), hypop(rng), hypop(rng)
        ab = hyp_commutator(a, b)
        assert ab == -hyp_commutator(b, a)
        assert hyp_commutator(a + c, b) == ab + hyp_commutator(c, b)
        jac = (hyp_commutator(a, hyp_commutator(b, c)) + hyp_commutator(b, hyp_commutator(c, a))
               + hyp_commutator(c, hyp_commutator(a, b)))
        assert jac.is_zero()


@pytest.mark.parametrize("seed", SEEDS)
def test_adjoint_anti_homomorphism(seed):
    rng = random.Random(200 + seed)
    for _ in range(20):
        a, b = hypop(rng), hypop(rng)
        assert hyp_adjoint(hyp_mul(a, b)) == hyp_mul(hyp_adjoint(b), hyp_adjoint(a))
        assert hyp_adjoint(hyp_adjoint(a)) == a


@pytest.mark.parametrize("seed", SEEDS)
def test_bar_symmetry(seed):
    rng = random.Random(300 + seed)
    for _ in range(20):
        a, b = hypop(rng), hypop(rng)
        assert hyp_mul(a, b).swap_bar() == hyp_mul(a.swap_bar(), b.swap_bar())
        assert hyp_commutator(a, b).swap_bar() == hyp_commutator(a.swap_bar(), b.swap_bar())
        # the weight (z - zb)^-2 is bar invariant
        assert hyp_adjoint(a).swap_bar() == hyp_adjoint(a.swap_bar())
        f = a_coeff(rng)
        assert swap_z_zb(a.apply(f)) == a.swap_bar().apply(swap_z_zb(f))


@pytest.mark.parametrize("seed", SEEDS)
def test_closure_of_coefficient_algebra(seed):
    rng = random.Random(400 + seed)
    for _ in range(20):
        a, b = a_hypop(rng), a_hypop(rng)
        for c in hyp_mul(a, b).terms.values():
            assert a_membership(c) is not None
