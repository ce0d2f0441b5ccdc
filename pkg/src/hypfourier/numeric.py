"""Quadrature checks of the analytic statements about the transform.

Spatial integrals use a tensor Gauss-Legendre rule in ``(X, u = log Y)``,
where ``dmu = dX dY / (4 Y^2) = exp(-u)/4 dX du``. Integrals against the
kernel use the same box but, along each line ``u = const``, nodes in
``v`` with ``X = x + Y sinh v`` (see :func:`kernel_grid`). Integrals over the real
line ``x`` use the substitution ``x = tan(theta/2)``: every line integrand
in play decays like ``1/x^2`` with a smooth expansion in ``1/x``, so it
becomes a smooth periodic function of ``theta`` and the midpoint rule on
the circle converges geometrically with no truncation.

The kernel is evaluated in its real form ``F = ((x - X)^2 + Y^2) / Y`` and
``K = exp(tau * log F)``; no complex power of a complex base occurs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .exact import VARS, RatFn
from .hyp_algebra import HypOp
from .kernel import CorrespondencePair
from .spec_algebra import SpecOp


class NumericError(ArithmeticError):
    pass


class SingularSample(NumericError):
    pass


class UnsupportedOperator(NumericError):
    pass


@dataclass(frozen=True)
class MoebiusMat:
    """Real unimodular matrix acting by ``z -> (b + z d) / (a + z c)``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c - 1) > 1e-12:
            raise ValueError(f"determinant {self.a * self.d - self.b * self.c} is not 1")

    @classmethod
    def identity(cls) -> "MoebiusMat":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def diag(cls, a: float) -> "MoebiusMat":
        return cls(a, 0.0, 0.0, 1.0 / a)

    @classmethod
    def translation(cls, t: float) -> "MoebiusMat":
        return cls(1.0, t, 0.0, 1.0)

    @classmethod
    def inversion(cls) -> "MoebiusMat":
        return cls(0.0, 1.0, -1.0, 0.0)

    def act(self, z):
        return (self.b + z * self.d) / (self.a + z * self.c)

    def inverse(self) -> "MoebiusMat":
        return MoebiusMat(self.d, -self.b, -self.c, self.a)


@dataclass(frozen=True)
class TestFunction:
    """Gaussian bump in ``(X, log Y)`` centred at ``x0 + i*y0``.

    Values and all partial derivatives up to total order 2 are analytic.
    """

    __test__ = False  # not a pytest class

    center: complex = 1j
    widths: tuple[float, float] = (0.5, 0.5)
    amplitude: complex = 1.0
    kind: str = "gaussian_bump"

    def __post_init__(self):
        if self.kind != "gaussian_bump":
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if self.center.imag <= 0:
            raise ValueError("centre must lie in the upper half-plane")
        if min(self.widths) <= 0:
            raise ValueError("widths must be positive")

    @classmethod
    def unit_mass(cls, center: complex = 1j, widths=(0.5, 0.5)) -> "TestFunction":
        return cls(center, tuple(widths), 1.0 / cls(center, tuple(widths)).mass())

    def scaled(self, c: complex) -> "TestFunction":
        return replace(self, amplitude=self.amplitude * c)

    def mass(self) -> complex:
        """Exact ``mu``-integral over the half-plane."""
        sx, su = self.widths
        u0 = math.log(self.center.imag)
        return self.amplitude * 2 * math.pi * sx * su * math.exp(-u0 + su * su / 2) / 4

    def box(self, support: float) -> tuple[tuple[float, float], tuple[float, float]]:
        sx, su = self.widths
        x0, u0 = self.center.real, math.log(self.center.imag)
        return (x0 - support * sx, x0 + support * sx), (u0 - support * su, u0 + support * su)

    def _log_parts(self, X, Y):
        sx, su = self.widths
        x0, u0 = self.center.real, math.log(self.center.imag)
        dx = X - x0
        du = np.log(Y) - u0
        return dx, du, sx, su

    def __call__(self, X, Y):
        dx, du, sx, su = self._log_parts(X, Y)
        return self.amplitude * np.exp(-dx * dx / (2 * sx * sx) - du * du / (2 * su * su))

    def partials(self, X, Y) -> dict[str, np.ndarray]:
        """``f, f_X, f_Y, f_XX, f_XY, f_YY``."""
        dx, du, sx, su = self._log_parts(X, Y)
        f = self(X, Y)
        gx = -dx / sx**2
        gy = -du / (su**2 * Y)
        gxx = -1.0 / sx**2
        gyy = -(1.0 - du) / (su**2 * Y * Y)
        return {
            "f": f,
            "X": f * gx,
            "Y": f * gy,
            "XX": f * (gx * gx + gxx),
            "XY": f * gx * gy,
            "YY": f * (gy * gy + gyy),
        }

    def complex_partial(self, a: int, b: int, X, Y):
        """``dz^a dzb^b f`` with ``dz = (dX - i dY)/2``, ``dzb = (dX + i dY)/2``."""
        if a + b > 2:
            raise UnsupportedOperator("test functions carry derivatives up to order 2")
        p = self.partials(X, Y)
        if (a, b) == (0, 0):
            return p["f"]
        if (a, b) == (1, 0):
            return (p["X"] - 1j * p["Y"]) / 2
        if (a, b) == (0, 1):
            return (p["X"] + 1j * p["Y"]) / 2
        if (a, b) == (2, 0):
            return (p["XX"] - 2j * p["XY"] - p["YY"]) / 4
        if (a, b) == (0, 2):
            return (p["XX"] + 2j * p["XY"] - p["YY"]) / 4
        return (p["XX"] + p["YY"]) / 4


STANDARD_BUMP = TestFunction()


@dataclass(frozen=True)
class SpectralPoint:
    """A spectral parameter, tagged by how it was given.

    ``unitary``: ``tau = -1/2 + i s`` with ``s >= 0``; ``pw``: ``tau = -1/2 + sign * lam``.
    """

    kind: str
    s: float = 0.0
    lam: complex = 0j
    sign: int = 1

    def __post_init__(self):
        if self.kind == "unitary" and self.s < 0:
            raise ValueError("s must be non-negative")
        if self.kind not in ("unitary", "pw") or self.sign not in (1, -1):
            raise ValueError(f"bad spectral point {self}")

    @property
    def tau(self) -> complex:
        if self.kind == "unitary":
            return complex(-0.5, self.s)
        return -0.5 + self.sign * complex(self.lam)

    def reflected(self) -> "SpectralPoint":
        """``tau -> -1 - tau``."""
        if self.kind == "unitary":
            return SpectralPoint("pw", lam=1j * self.s, sign=-1)
        return replace(self, sign=-self.sign)


@dataclass(frozen=True)
class QuadratureSpec:
    """Grid parameters.

    ``x_range``/``logy_range`` default to ``support`` widths around the
    test function's centre. ``line_nodes`` is the node count of the
    compactified rule on the real line.
    """

    nodes: int = 36
    support: float = 8.0
    line_nodes: int = 48
    cutoff: float = 12.0
    spectral_nodes: int = 64
    x_range: tuple[float, float] | None = None
    logy_range: tuple[float, float] | None = None
    scheme: str = "gauss_legendre_tensor"

    def __post_init__(self):
        if self.scheme != "gauss_legendre_tensor":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if min(self.nodes, self.line_nodes, self.spectral_nodes) < 8:
            raise ValueError("node counts must be at least 8")
        for rng in (self.x_range, self.logy_range):
            if rng is not None and not (math.isfinite(rng[0]) and math.isfinite(rng[1])
                                        and rng[0] < rng[1]):
                raise ValueError(f"bad range {rng}")
        if not (self.cutoff > 0 and math.isfinite(self.cutoff)):
            raise ValueError("cutoff must be positive and finite")

    def doubled(self) -> "QuadratureSpec":
        return replace(self, nodes=2 * self.nodes, line_nodes=2 * self.line_nodes,
                       spectral_nodes=2 * self.spectral_nodes)

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_SPEC = QuadratureSpec()


@dataclass
class NumericReport:
    lhs: complex
    rhs: complex
    spec: QuadratureSpec
    label: str = ""
    warnings: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def abs_err(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_err(self) -> float:
        return self.abs_err / max(abs(self.lhs), abs(self.rhs), 1e-300)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "lhs": _complex_json(self.lhs),
            "rhs": _complex_json(self.rhs),
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "warnings": list(self.warnings),
            "details": dict(self.details),
            "spec": self.spec.to_dict(),
        }


def _complex_json(v: complex) -> dict:
    v = complex(v)
    return {"re": v.real, "im": v.imag}


# --- grids -----------------------------------------------------------------

@dataclass(frozen=True)
class _Grid:
    X: np.ndarray
    Y: np.ndarray
    weights: np.ndarray  # includes the measure density


def _spatial_grid(xr, ur, n: int) -> _Grid:
    t, w = np.polynomial.legendre.leggauss(n)
    xs = 0.5 * (xr[1] - xr[0]) * t + 0.5 * (xr[1] + xr[0])
    wx = 0.5 * (xr[1] - xr[0]) * w
    us = 0.5 * (ur[1] - ur[0]) * t + 0.5 * (ur[1] + ur[0])
    wu = 0.5 * (ur[1] - ur[0]) * w
    X, U = np.meshgrid(xs, us, indexing="ij")
    W = np.outer(wx, wu * np.exp(-us) / 4)
    return _Grid(X.ravel(), np.exp(U).ravel(), W.ravel())


def grid_for(f: TestFunction, q: QuadratureSpec) -> _Grid:
    return _spatial_grid(*_box(f, q), q.nodes)


def _pulled_back_box(f: TestFunction, g: MoebiusMat, q: QuadratureSpec):
    """Box covering the support of ``f(z^[g])``: the bounding box, in
    ``(X, log Y)``, of the preimage of the support ellipse of ``f``.

    The ellipse rather than the box: the box corners carry nothing but can
    land far away (inversion sends a corner near 0 out towards infinity).
    """
    (x0, x1), (u0, u1) = _box(f, q)
    theta = np.linspace(0.0, 2 * math.pi, 2049)
    edges = (0.5 * (x0 + x1) + 0.5 * (x1 - x0) * np.cos(theta)
             + 1j * np.exp(0.5 * (u0 + u1) + 0.5 * (u1 - u0) * np.sin(theta)))
    pre = g.inverse().act(edges)
    xr = (float(pre.real.min()), float(pre.real.max()))
    ur = (float(np.log(pre.imag).min()), float(np.log(pre.imag).max()))
    return xr, ur


@dataclass(frozen=True)
class _KernelGrid:
    X: np.ndarray
    Y: np.ndarray
    weights: np.ndarray
    logF: np.ndarray


def kernel_grid(box, x: float, n: int) -> _KernelGrid:
    """Nodes adapted to ``K(.; ., x)`` on a box in ``(X, log Y)``.

    Along each line ``u = log Y`` the substitution ``X = x + Y sinh v``
    turns ``log F`` into ``u + 2 log cosh v`` and ``dmu`` into
    ``cosh v dv du / 4``, so the kernel stays smooth however small ``Y`` is.
    """
    (x0, x1), (u0, u1) = box
    t, w = np.polynomial.legendre.leggauss(n)
    us = 0.5 * (u1 - u0) * t + 0.5 * (u1 + u0)
    wu = 0.5 * (u1 - u0) * w
    Y = np.exp(us)[:, None]
    va = np.arcsinh((x0 - x) / Y)
    vb = np.arcsinh((x1 - x) / Y)
    v = 0.5 * (vb - va) * t + 0.5 * (vb + va)
    wv = 0.5 * (vb - va) * w
    ch = np.cosh(v)
    X = x + Y * np.sinh(v)
    logF = us[:, None] + 2 * np.log(ch)
    if not np.all(np.isfinite(logF)):
        raise NumericError("kernel base F is not positive and finite on the grid")
    W = wu[:, None] * wv * ch / 4
    Yb = np.broadcast_to(Y, X.shape)
    return _KernelGrid(X.ravel(), Yb.ravel(), W.ravel(), logF.ravel())


def _integrate(fun, box, taus, xs, n: int) -> np.ndarray:
    """``int fun(z) K(tau; z, x) dmu`` on the ``taus x xs`` product.

    ``fun(X, Y)`` evaluates the integrand's function part at arrays of nodes.
    Sums are numpy reductions, which use pairwise summation.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=complex))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.empty((taus.size, xs.size), dtype=complex)
    chunk = max(1, 4_000_000 // (n * n))
    for j, x in enumerate(xs):
        kg = kernel_grid(box, float(x), n)
        v = fun(kg.X, kg.Y) * kg.weights
        for i0 in range(0, taus.size, chunk):
            t = taus[i0:i0 + chunk, None]
            out[i0:i0 + chunk, j] = (np.exp(t * kg.logF) * v).sum(axis=-1)
    return out


def _box(f: TestFunction, q: QuadratureSpec):
    xr, ur = f.box(q.support)
    return (q.x_range or xr, q.logy_range or ur)


def transform(f: TestFunction, tau, x, q: QuadratureSpec = DEFAULT_SPEC):
    """``Jf(tau; x) = int K(tau; z, x) f(z) dmu(z)``.

    Scalars in, scalar out; array-likes return a ``(len(tau), len(x))`` array.
    """
    out = _integrate(f, _box(f, q), tau, x, q.nodes)
    if np.ndim(tau) == 0 and np.ndim(x) == 0:
        return complex(out[0, 0])
    return out


def line_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``int_R h(x) dx`` via ``x = tan(theta/2)``, midpoint rule in theta."""
    theta = -math.pi + (np.arange(n) + 0.5) * (2 * math.pi / n)
    x = np.tan(theta / 2)
    w = (2 * math.pi / n) * (1 + x * x) / 2
    return x, w


def _spectral_nodes(q: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(q.spectral_nodes)
    s = 0.5 * q.cutoff * (t + 1)
    return s, 0.5 * q.cutoff * w


def plancherel_density(s):
    return s * np.tanh(np.pi * s)


# Spectral density s tanh(pi s) integrates |Jf|^2 to (pi^2/2) |f|^2 under dmu = dX dY/(4Y^2).
PLANCHEREL_NORMALIZATION = 2 / math.pi**2


def _spectral_energy(f: TestFunction, q: QuadratureSpec, s) -> np.ndarray:
    """``int |Jf(-1/2+is; x)|^2 dx`` at each ``s``."""
    xs, wx = line_nodes(q.line_nodes)
    phi = _integrate(f, _box(f, q), -0.5 + 1j * np.asarray(s), xs, q.nodes)
    return (np.abs(phi) ** 2 * wx).sum(axis=1)


def plancherel_check(f: TestFunction, q: QuadratureSpec = DEFAULT_SPEC, tol: float = 1e-2,
                     normalization: float = PLANCHEREL_NORMALIZATION) -> NumericReport:
    """``int |f|^2 dmu`` against
    ``normalization * int_0^S int |Jf(-1/2+is; x)|^2 s tanh(pi s) dx ds``.

    ``details["raw_ratio"]`` is the unnormalized spectral side over ``lhs``.
    """
    grid = grid_for(f, q)
    lhs = float(np.sum(np.abs(f(grid.X, grid.Y)) ** 2 * grid.weights))
    s, ws = _spectral_nodes(q)
    raw = float(np.sum(_spectral_energy(f, q, s) * plancherel_density(s) * ws))
    report = NumericReport(lhs, normalization * raw, q, "plancherel")
    report.details["raw_ratio"] = raw / lhs if lhs else float("nan")
    report.details["normalization"] = normalization
    # exponential fit through the integrand at S-1 and S
    edge = _spectral_energy(f, q, [q.cutoff - 1, q.cutoff]) * plancherel_density(
        np.array([q.cutoff - 1, q.cutoff]))
    rate = math.log(edge[0] / edge[1]) if edge[0] > 0 and edge[1] > 0 else 0.0
    tail = float(edge[1] / rate) if rate > 0 else math.inf
    report.details["tail_estimate"] = tail
    if rate <= 0:
        report.warnings.append(f"spectral integrand not decaying at cutoff {q.cutoff}: spatial "
                               "grid too coarse for large s, or cutoff too small")
    elif raw and tail > tol * raw:
        report.warnings.append(f"spectral cutoff {q.cutoff}: tail estimate {tail / raw:.2e}"
                               " of the spectral side")
    return report


def equivariance_check(f: TestFunction, g: MoebiusMat, tau: complex, x: float,
                       q: QuadratureSpec = DEFAULT_SPEC, eps: float = 1e-12) -> NumericReport:
    """``J(R(g) f)(tau; x)`` against ``Jf(tau; x^[g]) |a + c x|^(2 tau)``.

    The left side is integrated in the variable ``w = z^[g]``, with the
    kernel evaluated at ``z = w^[g^-1]`` and the Jacobian written out rather
    than taken from invariance of ``mu``.
    """
    m = abs(g.a + g.c * x)
    if m < eps:
        raise SingularSample(f"|a + c x| = {m:.2e} at x = {x}")
    # substitute z = w^[g^-1]: dmu(z) = |h'(w)|^2 dA(w) / (4 Im(z)^2), h' = 1/(a' + c' w)^2
    # the kernel in w peaks where w -> x^[g], so adapt the nodes there
    h = g.inverse()
    kg = kernel_grid(_box(f, q), float(g.act(x)), q.nodes)
    w = kg.X + 1j * kg.Y
    z = h.act(w)
    jac = np.abs(h.a + h.c * w) ** -4 * kg.Y**2 / z.imag**2
    F = ((x - z.real) ** 2 + z.imag**2) / z.imag
    lhs = complex(np.sum(np.exp(tau * np.log(F)) * f(kg.X, kg.Y) * jac * kg.weights))
    rhs = transform(f, tau, g.act(x), q) * cmath.exp(2 * tau * math.log(m))
    return NumericReport(lhs, rhs, q, "equivariance")


def measure_invariance_check(f: TestFunction, g: MoebiusMat, q: QuadratureSpec = DEFAULT_SPEC
                             ) -> NumericReport:
    """``int f(z^[g]) dmu`` against ``int f dmu``, each on its own grid."""
    pulled = _spatial_grid(*_pulled_back_box(f, g, q), q.nodes)
    w = g.act(pulled.X + 1j * pulled.Y)
    lhs = complex(np.sum(f(w.real, w.imag) * pulled.weights))
    grid = grid_for(f, q)
    rhs = complex(np.sum(f(grid.X, grid.Y) * grid.weights))
    return NumericReport(lhs, rhs, q, "measure-invariance")


def _eval_array(r: RatFn, values: dict) -> np.ndarray:
    idx = {VARS.index(k): v for k, v in values.items()}
    num = r.numer.evaluate(idx)
    den = 1.0
    for fac, e in r.den.items():
        den = den * fac.evaluate(idx) ** e
    if np.min(np.abs(den)) == 0:
        raise SingularSample(f"coefficient {r} has a pole on the grid")
    return num / den


def apply_hyp_numeric(L: HypOp, f: TestFunction, X, Y) -> np.ndarray:
    """``(L f)`` at points ``X + iY``, using analytic partials of ``f``."""
    if L.order() > 2:
        raise UnsupportedOperator("operators of order above 2 are not supported")
    z = X + 1j * Y
    out = np.zeros(np.shape(X), dtype=complex)
    for (a, b), c in L.terms.items():
        coeff = _eval_array(c, {"z": z, "zb": z.conjugate()})
        out = out + coeff * f.complex_partial(a, b, X, Y)
    return out


_STENCIL = {
    0: ((0, 1.0),),
    1: ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)),
    2: ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12)),
}


def apply_spec_numeric(M: SpecOp, phi, tau: complex, x: float, h: float = 1e-4) -> complex:
    """``(M Phi)(tau; x)`` with ``dx`` by five-point central differences.

    ``phi(taus, xs)`` must return the ``(len(taus), len(xs))`` array of values.
    """
    if M.order() > 2:
        raise UnsupportedOperator("dx order above 2 is not supported")
    shifts = sorted({r for _, _, r in M.terms})
    offsets = np.arange(-2, 3) * h + x
    table = phi(np.array([tau + r for r in shifts]), offsets)
    total = 0j
    for (p, q, r), u in M.terms.items():
        row = table[shifts.index(r)]
        d = sum(c * row[k + 2] for k, c in _STENCIL[q]) / h**q
        total += complex(_eval_array(u, {"tau": tau})) * x**p * d
    return total


def correspondence_numeric_check(f: TestFunction, pair, tau: complex, x: float,
                                 q: QuadratureSpec = DEFAULT_SPEC, h: float = 1e-4
                                 ) -> NumericReport:
    """``J(L f)(tau; x)`` by quadrature against ``M`` applied to ``Jf``."""
    if isinstance(pair, CorrespondencePair):
        L, M, label = pair.lhs, pair.rhs, pair.label
    else:
        L, M = pair
        label = ""
    if L.order() > 2:
        raise UnsupportedOperator("left side must have order at most 2")
    if M.max_shift() > 1 or M.order() > 2:
        raise UnsupportedOperator("right side must have |shift| <= 1 and dx order <= 2")
    box = _box(f, q)
    lhs = complex(_integrate(lambda X, Y: apply_hyp_numeric(L, f, X, Y), box, tau, x,
                             q.nodes)[0, 0])
    rhs = apply_spec_numeric(M, lambda ts, xs: _integrate(f, box, ts, xs, q.nodes), tau, x, h)
    return NumericReport(lhs, rhs, q, f"correspondence {label}".strip())


def kernel_value(tau: complex, z: complex, x):
    """``K(tau; z, x)`` for ``z`` in the upper half-plane and real ``x``."""
    F = ((x - z.real) ** 2 + z.imag**2) / z.imag
    return np.exp(tau * np.log(F))


def _pw_sides(f: TestFunction, lam: complex, z: complex, q: QuadratureSpec, n: int):
    xs, wx = line_nodes(n)
    phi = transform(f, np.array([-0.5 + lam, -0.5 - lam]), xs, q)
    lhs = complex((phi[0] * kernel_value(-0.5 - lam, z, xs) * wx).sum())
    rhs = complex((phi[1] * kernel_value(-0.5 + lam, z, xs) * wx).sum())
    return lhs, rhs


def pw_symmetry_check(f: TestFunction, lam: complex, z: complex,
                      q: QuadratureSpec = DEFAULT_SPEC, tol: float = 1e-4) -> NumericReport:
    """Evenness relation between ``Jf(-1/2 + lam)`` and ``Jf(-1/2 - lam)``.

    Warns when the line rule at half resolution moves either side by more
    than ``tol``; the compactified rule has no truncation tail of its own.
    """
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half-plane")
    lhs, rhs = _pw_sides(f, lam, z, q, q.line_nodes)
    report = NumericReport(lhs, rhs, q, "paley-wiener")
    coarse = _pw_sides(f, lam, z, q, max(8, q.line_nodes // 2))
    drift = max(abs(coarse[0] - lhs), abs(coarse[1] - rhs)) / max(abs(lhs), abs(rhs), 1e-300)
    report.details["line_drift"] = drift
    if drift > tol:
        report.warnings.append(f"line rule drift {drift:.2e} at half resolution")
    return report


def convergence(check, *args, q: QuadratureSpec = DEFAULT_SPEC, levels: int = 2,
                **kwargs) -> list[NumericReport]:
    """Run ``check`` at ``q`` and successively doubled grids."""
    out = []
    for _ in range(levels):
        out.append(check(*args, q=q, **kwargs))
        q = q.doubled()
    return out
