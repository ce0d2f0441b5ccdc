"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line. Run standalone with
``python3 tests/test_acceptance.py`` for just the summary lines.
"""

import math
import random
import sys
import time

import pytest

from gen import hypop, specop
from hypfourier.exact import RatFn
from hypfourier.hyp_algebra import (
    DZ,
    DZB,
    GENERATORS,
    HypOp,
    hyp_adjoint,
    hyp_commutator,
    hyp_mul,
    lemma1_generate,
)
from hypfourier.kernel import (
    ID1_RHS,
    LABELS,
    LHS,
    RHS,
    commutator_derivations,
    fourier_image,
    random_word,
    verify_correspondence,
)
from hypfourier.numeric import (
    DEFAULT_SPEC,
    STANDARD_BUMP,
    MoebiusMat,
    correspondence_numeric_check,
    equivariance_check,
    plancherel_check,
    pw_symmetry_check,
)
from hypfourier.spec_algebra import SpecOp, pole_check, spec_commutator, spec_mul

z, zb = RatFn.var("z"), RatFn.var("zb")


def _line(n: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}", flush=True)


def check_1():
    start = time.perf_counter()
    pairs = [verify_correspondence(LHS[k], RHS[k], k) for k in LABELS]
    flipped = verify_correspondence(LHS["corr10"], ID1_RHS, "id1")
    elapsed = time.perf_counter() - start
    ok = (all(p.verified for p in pairs) and not flipped.verified
          and flipped.certificate == 2 / (z - zb) and elapsed <= 10)
    return ok, (f"{sum(p.verified for p in pairs)}/7 verified, flipped-sign certificate "
                f"{flipped.certificate}, {elapsed:.2f}s")


def check_2():
    got = hyp_adjoint(DZ - DZB)
    ok = got == -DZ + DZB + HypOp.coeff(4 / (z - zb))
    return ok, f"adjoint(dz - dzb) = {got}"


def check_3():
    d12, d13 = commutator_derivations()
    direct = spec_commutator(RHS["corr03"], RHS["corr11"]).scale(RatFn.const(-1) / 2)
    ok = d12.agrees and d13.agrees and direct == RHS["corr12"]
    return ok, f"corr12 via {d12.bracket}: {d12.agrees}; corr13 via {d13.bracket}: {d13.agrees}"


def _normal_form(M: SpecOp) -> bool:
    return all(p >= 0 and q >= 0 and c.variables() <= {"tau"} and not c.is_zero()
               for (p, q, _), c in M.terms.items())


def check_4():
    rng = random.Random(0)
    start = time.perf_counter()
    bad = 0
    for _ in range(50):
        M = fourier_image(random_word(rng, 4))
        if not (_normal_form(M) and pole_check(M).ok):
            bad += 1
    elapsed = time.perf_counter() - start
    return bad == 0 and elapsed <= 60, f"50 words, {bad} failures, {elapsed:.1f}s"


def check_5():
    rng = random.Random(1)
    failures = []
    for _ in range(25):
        w = random_word(rng, 3)
        if not verify_correspondence(w.to_hypop(), fourier_image(w)).verified:
            failures.append(str(w))
    return not failures, f"25 words, failures: {failures or 'none'}"


def check_6():
    start = time.perf_counter()
    cert = lemma1_generate(5)
    elapsed = time.perf_counter() - start
    dims = [cert.levels[n].dim for n in range(1, 6)]
    ok = dims == [(n + 1) ** 2 - 1 for n in range(1, 6)] and cert.replay() and elapsed <= 120
    return ok, f"dims {dims}, replayed, {elapsed:.1f}s"


def check_7():
    coarse = plancherel_check(STANDARD_BUMP, DEFAULT_SPEC)
    fine = plancherel_check(STANDARD_BUMP, DEFAULT_SPEC.doubled())
    factor = coarse.abs_err / fine.abs_err if fine.abs_err else math.inf
    raw = fine.details["raw_ratio"]
    ok = (coarse.rel_err <= 1e-2 and factor >= 4
          and abs(raw / (math.pi ** 2 / 2) - 1) <= 1e-4)
    return ok, (f"rel_err {coarse.rel_err:.2e} -> {fine.rel_err:.2e} (x{factor:.0f}), "
                f"converged unnormalized ratio {raw:.6f} vs pi^2/2 = {math.pi ** 2 / 2:.6f}")


def check_8():
    q = DEFAULT_SPEC.doubled()
    tau = -0.5 + 0.9j
    worst, flipped = 0.0, math.inf
    for x in (0.0, 0.3, 1.1):
        for label in ("corr10", "corr11"):
            r = correspondence_numeric_check(STANDARD_BUMP, (LHS[label], RHS[label]), tau, x, q)
            worst = max(worst, r.rel_err)
        r = correspondence_numeric_check(STANDARD_BUMP, (LHS["corr10"], ID1_RHS), tau, x, q)
        flipped = min(flipped, r.rel_err)
    return worst <= 1e-4 and flipped >= 1e-1, (f"max rel_err {worst:.2e}, "
                                               f"flipped-sign min rel_err {flipped:.2e}")


def check_9():
    worst = 0.0
    for g in (MoebiusMat.identity(), MoebiusMat.diag(1.3), MoebiusMat.inversion()):
        for tau, x in ((-0.5 + 0.7j, 0.4), (-0.2 + 1.3j, 1.1)):
            worst = max(worst, equivariance_check(STANDARD_BUMP, g, tau, x).rel_err)
    return worst <= 1e-6, f"max rel_err {worst:.2e} over 3 elements x 2 points"


def check_10():
    worst = 0.0
    for lam in (0.4, 0.4j):
        for zz in (1j, 0.2 + 1.5j):
            worst = max(worst, pw_symmetry_check(STANDARD_BUMP, lam, zz).rel_err)
    return worst <= 1e-4, f"max rel_err {worst:.2e} over 4 cases"


def _properties(seed: int) -> list[str]:
    rng = random.Random(seed)
    failed = []
    for _ in range(10):
        a, b, c = hypop(rng), hypop(rng), hypop(rng)
        if hyp_mul(hyp_mul(a, b), c) != hyp_mul(a, hyp_mul(b, c)):
            failed.append("hyp associativity")
        jac = (hyp_commutator(a, hyp_commutator(b, c)) + hyp_commutator(b, hyp_commutator(c, a))
               + hyp_commutator(c, hyp_commutator(a, b)))
        if not jac.is_zero():
            failed.append("hyp Jacobi")
        if hyp_adjoint(hyp_mul(a, b)) != hyp_mul(hyp_adjoint(b), hyp_adjoint(a)):
            failed.append("adjoint anti-homomorphism")
        m1, m2, m3 = specop(rng), specop(rng), specop(rng)
        if spec_mul(spec_mul(m1, m2), m3) != spec_mul(m1, spec_mul(m2, m3)):
            failed.append("spec associativity")
        jac = (spec_commutator(m1, spec_commutator(m2, m3))
               + spec_commutator(m2, spec_commutator(m3, m1))
               + spec_commutator(m3, spec_commutator(m1, m2)))
        if not jac.is_zero():
            failed.append("spec Jacobi")
        r = rng.randint(-2, 2)
        conj = spec_mul(spec_mul(SpecOp.monomial(r=r), m1), SpecOp.monomial(r=-r))
        if conj != m1.shift_coefficients(r):
            failed.append("shift conjugation")
    e, h, f = GENERATORS["dz"], GENERATORS["z_dz"], GENERATORS["z2_dz"]
    if not (hyp_commutator(e, h) == e and hyp_commutator(e, f) == 2 * h
            and hyp_commutator(h, f) == f):
        failed.append("sl(2) constants")
    m0, m1_, m2_ = RHS["corr01"], RHS["corr02"], RHS["corr03"]
    if not (spec_commutator(m0, m1_) == m0 and spec_commutator(m0, m2_) == 2 * m1_
            and spec_commutator(m1_, m2_) == m2_):
        failed.append("sl(2) images")
    return sorted(set(failed))


def check_11():
    failed = {s: _properties(s) for s in range(5)}
    bad = {s: f for s, f in failed.items() if f}
    return not bad, f"seeds 0-4, failures: {bad or 'none'}"


CRITERIA = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9,
            check_10, check_11]


@pytest.mark.parametrize("n", range(1, 12), ids=[f"criterion_{n}" for n in range(1, 12)])
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print()
        _line(n, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, check in enumerate(CRITERIA, 1):
        ok, detail = check()
        _line(n, ok, detail)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
