"""Command-line front end.

Exit codes: 0 ok, 1 falsified, 2 error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from . import numeric
from .exact import ExactError
from .hyp_algebra import HypOp, hyp_adjoint, hyp_commutator, lemma1_generate
from .kernel import (LABELS, fourier_image, named_pair, random_word, theorem1_suite,
                     verify_correspondence)
from .parser import (ParseError, as_operator, compatible_sides, detect_side, parse_hyp,
                     parse_operator, parse_spec, parse_word, to_latex)
from .spec_algebra import SpecOp, pole_check, spec_commutator

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = Path(__file__).with_name("report.schema.json")

EXIT = {"ok": 0, "falsified": 1, "error": 2}


class CommandError(Exception):
    pass


@dataclass
class Report:
    verb: str
    args: list
    options: dict
    seed: int
    status: str = "ok"
    result: dict = field(default_factory=dict)
    error: dict | None = None
    timing_s: float = 0.0
    latex: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT[self.status]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": {"verb": self.verb, "args": list(self.args), "options": self.options},
            "status": self.status,
            "seed": self.seed,
            "timing_s": self.timing_s,
            "result": self.result,
            "error": self.error,
        }

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if fmt == "latex":
            return self._latex()
        return self._text()

    def _text(self) -> str:
        lines = [f"{self.verb}: {self.status}"]
        if self.error:
            lines.append(f"error: {self.error['message']}")
        for key, value in self.result.items():
            lines.extend(_text_lines(key, value, ""))
        lines.append(f"seed: {self.seed}  time: {self.timing_s:.3f}s")
        return "\n".join(lines)

    def _latex(self) -> str:
        lines = [f"% {self.verb}: {self.status}"]
        if self.error:
            lines.append(f"% error: {self.error['message']}")
        body = self.latex or [_latex_table(self.result)]
        return "\n".join(lines + body)


def _text_lines(key, value, indent):
    if isinstance(value, dict) and set(value) != {"re", "im"}:
        out = [f"{indent}{key}:"]
        for k, v in value.items():
            out.extend(_text_lines(k, v, indent + "  "))
        return out
    if isinstance(value, list) and value and isinstance(value[0], dict):
        out = [f"{indent}{key}:"]
        for item in value:
            out.append(f"{indent}  - " + ", ".join(f"{k}={_short(v)}" for k, v in item.items()))
        return out
    return [f"{indent}{key}: {_short(value)}"]


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        return f"{v['re']:.12g}{v['im']:+.12g}i"
    return str(v)


def _latex_table(result: dict) -> str:
    rows = []
    for k, v in result.items():
        if isinstance(v, (dict, list)):
            continue
        rows.append(f"\\texttt{{{k.replace('_', chr(92) + '_')}}} & {_short(v)} \\\\")
    return "\\begin{tabular}{ll}\n" + "\n".join(rows) + "\n\\end{tabular}"


def _eq(lhs: str, rhs: str) -> str:
    return f"\\[ {to_latex(lhs)} = {to_latex(rhs)} \\]"


# --- operands --------------------------------------------------------------

def _operator(text: str, side: str | None):
    side = side or detect_side(text)
    return side, as_operator(parse_operator(text, side), side)


def _same_side(a: str, b: str, side: str | None):
    if side is None:
        common = [s for s in compatible_sides(a) if s in compatible_sides(b)]
        if not common:
            raise CommandError(f"operands use different alphabets: {detect_side(a)} "
                               f"and {detect_side(b)}")
        side = common[0]
    return _operator(a, side), _operator(b, side)


def parse_complex(text: str) -> complex:
    t = text.replace("−", "-").replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise CommandError(f"not a complex number: {text!r}") from None


def _moebius(text: str) -> numeric.MoebiusMat:
    named = {"identity": numeric.MoebiusMat.identity(), "inversion": numeric.MoebiusMat.inversion()}
    if text in named:
        return named[text]
    try:
        a, b, c, d = (float(v) for v in text.split(","))
    except ValueError:
        raise CommandError(f"group element must be 'a,b,c,d', got {text!r}") from None
    return numeric.MoebiusMat(a, b, c, d)


def _test_function(opts) -> numeric.TestFunction:
    return numeric.TestFunction(parse_complex(opts.center), (opts.width_x, opts.width_logy))


def _pair(opts):
    if opts.label:
        if opts.rhs is None and opts.lhs is None:
            L, M = named_pair(opts.label)
            return opts.label, L, M
        raise CommandError("give a label or both sides, not both")
    if opts.lhs is None or opts.rhs is None:
        raise CommandError("verify needs a label or --lhs and --rhs")
    return "custom", parse_hyp(opts.lhs), parse_spec(opts.rhs)


# --- verbs -----------------------------------------------------------------

def cmd_normalize(opts, rep: Report):
    side, op = _operator(opts.expr, opts.side)
    rep.result = {"side": side, "input": opts.expr, "normal_form": str(op)}
    rep.latex = [_eq(opts.expr, str(op))]


def cmd_mul(opts, rep: Report):
    (side, a), (_, b) = _same_side(opts.a, opts.b, opts.side)
    out = a * b
    rep.result = {"side": side, "product": str(out)}
    rep.latex = [_eq(f"({opts.a})*({opts.b})", str(out))]


def cmd_commutator(opts, rep: Report):
    (side, a), (_, b) = _same_side(opts.a, opts.b, opts.side)
    if isinstance(a, HypOp):
        out = hyp_commutator(a, b)
    elif isinstance(a, SpecOp):
        out = spec_commutator(a, b)
    else:
        raise CommandError("commutators act on hyperbolic or spectral operators")
    rep.result = {"side": side, "commutator": str(out)}
    rep.latex = [f"\\[ [{to_latex(opts.a)}, {to_latex(opts.b)}] = {to_latex(str(out))} \\]"]


def cmd_adjoint(opts, rep: Report):
    L = parse_hyp(opts.expr)
    out = hyp_adjoint(L)
    rep.result = {"operator": str(L), "adjoint": str(out)}
    rep.latex = [f"\\[ \\left({to_latex(str(L))}\\right)^{{\\dagger}} = {to_latex(str(out))} \\]"]


def cmd_image(opts, rep: Report):
    w = parse_word(opts.word)
    img = fourier_image(w)
    pc = pole_check(img)
    rep.result = {
        "word": str(w),
        "operator": str(w.to_hypop()),
        "image": str(img),
        "pole_check": {"ok": pc.ok, "roots": [str(r) for r in pc.roots],
                       "witnesses": [str(p) for p in pc.witnesses]},
    }
    rep.status = "ok" if pc.ok else "falsified"
    rep.latex = [_eq(str(w), str(img))]


def cmd_verify(opts, rep: Report):
    label, L, M = _pair(opts)
    pair = verify_correspondence(L, M, label)
    rep.result = {"label": label, "lhs": str(L), "rhs": str(M),
                  "certificate": str(pair.certificate), "verified": pair.verified}
    rep.status = "ok" if pair.verified else "falsified"
    rep.latex = [f"% J({to_latex(str(L))} f) = {to_latex(str(M))} Jf",
                 f"\\[ \\text{{certificate}} = {to_latex(str(pair.certificate))} \\]"]


def cmd_suite_theorem1(opts, rep: Report):
    report = theorem1_suite(strict=False)
    rng = random.Random(opts.seed)
    words = []
    for _ in range(opts.words):
        w = random_word(rng, opts.length)
        img = fourier_image(w)
        pair = verify_correspondence(w.to_hypop(), img)
        words.append({"word": str(w), "verified": pair.verified, "poles_ok": pole_check(img).ok})
    rep.result = {
        "pairs": [{"label": p.label, "certificate": str(p.certificate), "verified": p.verified}
                  for p in report.pairs],
        "derivations": [{"label": d.label, "bracket": d.bracket, "agrees": d.agrees}
                        for d in report.derivations],
        "sign_variant": {"label": report.sign_variant.label,
                         "certificate": str(report.sign_variant.certificate),
                         "verified": report.sign_variant.verified},
        "random_words": words,
    }
    ok = report.ok and all(w["verified"] and w["poles_ok"] for w in words)
    rep.status = "ok" if ok else "falsified"
    rep.latex = [f"% {p.label}: certificate {p.certificate}" for p in report.pairs]


def cmd_suite_lemma1(opts, rep: Report):
    try:
        cert = lemma1_generate(opts.n)
    except ExactError as e:
        rep.status = "falsified"
        rep.result = {"n": opts.n, "failure": str(e)}
        return
    replay = cert.replay()
    rep.result = {
        "n": opts.n,
        "levels": [{"n": lv.n, "dim": lv.dim, "expected": (lv.n + 1) ** 2 - 1,
                    "max_word_length": max(w.length() for w in lv.words.values())}
                   for lv in cert.levels.values()],
        "explored": cert.explored,
        "replay": replay,
    }
    if opts.words:
        rep.result["words"] = {str(idx): str(w) for lv in cert.levels.values()
                               for idx, w in lv.words.items()}
    rep.status = "ok" if replay else "falsified"


def _numeric(rep: Report, r: numeric.NumericReport, tol: float):
    rep.result = r.to_dict()
    rep.result["tolerance"] = tol
    rep.status = "ok" if r.rel_err <= tol else "falsified"


def cmd_numeric_plancherel(opts, rep: Report):
    _numeric(rep, numeric.plancherel_check(_test_function(opts), opts.quadrature, opts.tol),
             opts.tol)


def cmd_numeric_equivariance(opts, rep: Report):
    r = numeric.equivariance_check(_test_function(opts), _moebius(opts.g),
                                   parse_complex(opts.tau), opts.x, opts.quadrature)
    _numeric(rep, r, opts.tol)


def cmd_numeric_correspondence(opts, rep: Report):
    label, L, M = _pair(opts)
    r = numeric.correspondence_numeric_check(_test_function(opts), (L, M),
                                             parse_complex(opts.tau), opts.x, opts.quadrature)
    r.label = f"correspondence {label}"
    _numeric(rep, r, opts.tol)


def cmd_numeric_pw(opts, rep: Report):
    r = numeric.pw_symmetry_check(_test_function(opts), parse_complex(opts.lam),
                                  parse_complex(opts.z), opts.quadrature, opts.tol)
    _numeric(rep, r, opts.tol)


# --- argument handling -----------------------------------------------------

QUAD_KEYS = {"grid": ("nodes", int), "line_nodes": ("line_nodes", int),
             "spectral_nodes": ("spectral_nodes", int), "cutoff": ("cutoff", float),
             "support": ("support", float)}


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CommandError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common")
    g.add_argument("--format", choices=("text", "json", "latex"), default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--config", default=None, help="key = value file")
    g.add_argument("--grid", type=int, default=None, help="spatial nodes per axis")
    g.add_argument("--line-nodes", type=int, default=None)
    g.add_argument("--spectral-nodes", type=int, default=None)
    g.add_argument("--cutoff", type=float, default=None, help="spectral cutoff S")
    g.add_argument("--support", type=float, default=None, help="support half-width in bump widths")
    return p


def _bump_args(p):
    p.add_argument("--center", default="i")
    p.add_argument("--width-x", type=float, default=0.5)
    p.add_argument("--width-logy", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="hypfourier",
                                     description="Operator calculus for the hyperbolic Fourier transform.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(name, func: Callable, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("normalize", cmd_normalize, "normal form of an operator expression")
    p.add_argument("expr")
    p.add_argument("--side", choices=("hyperbolic", "spectral", "generator"))
    for name, func in (("mul", cmd_mul), ("commutator", cmd_commutator)):
        p = add(name, func, f"{name} of two operators")
        p.add_argument("a")
        p.add_argument("b")
        p.add_argument("--side", choices=("hyperbolic", "spectral", "generator"))
    p = add("adjoint", cmd_adjoint, "formal adjoint of a hyperbolic operator")
    p.add_argument("expr")
    p = add("image", cmd_image, "Fourier image of a generator word")
    p.add_argument("word")
    p = add("verify", cmd_verify, "exact check of a correspondence")
    p.add_argument("label", nargs="?", choices=LABELS + ("id1", "id2", "second"))
    p.add_argument("--lhs")
    p.add_argument("--rhs")
    p = add("suite-theorem1", cmd_suite_theorem1, "all correspondences, brackets, random words")
    p.add_argument("--words", type=int, default=5, help="random homomorphism checks")
    p.add_argument("--length", type=int, default=2, help="maximum random word length")
    p = add("suite-lemma1", cmd_suite_lemma1, "generation certificate for A_1..A_n")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--words", action="store_true", help="include the generator words")

    p = add("numeric-plancherel", cmd_numeric_plancherel, "Plancherel identity by quadrature")
    _bump_args(p)
    p.add_argument("--tol", type=float, default=1e-2)
    p = add("numeric-equivariance", cmd_numeric_equivariance, "group equivariance of J")
    _bump_args(p)
    p.add_argument("--g", default="identity", help="'a,b,c,d', 'identity' or 'inversion'")
    p.add_argument("--tau", default="-0.5+0.7i")
    p.add_argument("--x", type=float, default=0.4)
    p.add_argument("--tol", type=float, default=1e-6)
    p = add("numeric-correspondence", cmd_numeric_correspondence, "J(Lf) against M(Jf)")
    _bump_args(p)
    p.add_argument("label", nargs="?", choices=LABELS + ("id1", "id2", "second"))
    p.add_argument("--lhs")
    p.add_argument("--rhs")
    p.add_argument("--tau", default="-0.5+0.9i")
    p.add_argument("--x", type=float, default=0.3)
    p.add_argument("--tol", type=float, default=1e-4)
    p = add("numeric-pw", cmd_numeric_pw, "evenness relation between tau and -1-tau")
    _bump_args(p)
    p.add_argument("--lam", default="0.4")
    p.add_argument("--z", default="i")
    p.add_argument("--tol", type=float, default=1e-4)
    return parser


def _resolve(opts) -> None:
    """Merge config file, flags and defaults; flags win."""
    cfg = read_config(opts.config) if opts.config else {}
    unknown = set(cfg) - set(QUAD_KEYS) - {"format", "seed"}
    if unknown:
        raise CommandError(f"unknown config keys: {', '.join(sorted(unknown))}")
    opts.format = opts.format or cfg.get("format", "text")
    if opts.format not in ("text", "json", "latex"):
        raise CommandError(f"unknown format {opts.format!r}")
    opts.seed = opts.seed if opts.seed is not None else int(cfg.get("seed", 0))
    overrides = {}
    for key, (field_, conv) in QUAD_KEYS.items():
        value = getattr(opts, key)
        if value is None and key in cfg:
            value = conv(cfg[key])
        if value is not None:
            overrides[field_] = value
    opts.quadrature = replace(numeric.DEFAULT_SPEC, **overrides)


_HIDDEN = {"func", "verb", "quadrature", "config"}


def run(argv: list[str] | None = None) -> Report:
    """Parse ``argv`` and execute; never raises for command failures."""
    opts = build_parser().parse_args(argv)
    rep = Report(opts.verb, list(argv or []), {}, 0)
    start = time.perf_counter()
    try:
        _resolve(opts)
        rep.seed = opts.seed
        rep.options = {k: v for k, v in vars(opts).items() if k not in _HIDDEN}
        rep.options["quadrature"] = opts.quadrature.to_dict()
        opts.func(opts, rep)
    except ParseError as e:
        rep.status = "error"
        rep.error = {"type": "ParseError", "message": str(e), "position": e.position}
    except (CommandError, ExactError, numeric.NumericError, ValueError, KeyError, OSError) as e:
        rep.status = "error"
        rep.error = {"type": type(e).__name__, "message": str(e)}
    rep.timing_s = time.perf_counter() - start
    if getattr(opts, "format", None) is None:
        opts.format = "text"
    rep.options.setdefault("format", opts.format)
    return rep


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    rep = run(argv)
    print(rep.render(rep.options.get("format") or "text"))
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
