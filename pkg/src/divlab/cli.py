"""divlab command line.

Exit codes: 0 ok, 1 FAIL verdict, 2 validation or usage error, 3 budget
exceeded, 4 uncertified analysis under --strict.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import mpmath

from . import __version__, config
from .census import BudgetExceeded, census_grid, moment_divisor_sieve, moment_power_sieve, restricted_moment
from .intervals import NumericInterval
from .lattice import InadmissibleWeight, enumerate_slice
from .model import (DivlabError, ParseError, ProblemSpec, ValidationError, WeightTuple,
                    format_fraction, parse_problem, to_fraction)

EXIT_OK, EXIT_FAIL, EXIT_VALIDATION, EXIT_BUDGET, EXIT_UNCERTIFIED = 0, 1, 2, 3, 4


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    fingerprint: str | None
    parameters: dict
    version: str = __version__
    precision: dict = field(default_factory=dict)
    wall_time: float = 0.0
    result: dict = field(default_factory=dict)
    exit_code: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


class _Outcome:
    def __init__(self, code=EXIT_OK, result=None, text="", fingerprint=None):
        self.code = code
        self.result = result or {}
        self.text = text
        self.fingerprint = fingerprint


# ------------------------------------------------------------------ helpers

def load_spec(path: str) -> ProblemSpec:
    """Read a problem file; bare names fall back to the bundled problems."""
    p = Path(path)
    if not p.exists():
        name = p.name if p.suffix == ".json" else p.name + ".json"
        bundled = resources.files("divlab") / "data" / name
        if not bundled.is_file():
            raise ParseError(f"no such problem file: {path}", "$")
        text = bundled.read_text()
    else:
        text = p.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", "$") from exc
    spec = parse_problem(doc)
    return spec


def parse_weights(text: str, spec: ProblemSpec) -> WeightTuple:
    vals = [to_fraction(x.strip(), f"--a[{i}]") for i, x in enumerate(text.split(","))]
    return WeightTuple(spec.shape, tuple(vals))


def parse_grid(text: str) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        v = int(float(tok)) if "e" in tok.lower() else int(tok)
        if v < 1:
            raise ValidationError(f"grid height {tok} must be >= 1")
        out.append(v)
    if not out:
        raise ValidationError("empty grid")
    return out


def _normalized(doc):
    return json.loads(json.dumps(doc, sort_keys=True, default=str))


def _iv(x: NumericInterval | None):
    return None if x is None else x.to_document()


def _iv_text(x: NumericInterval | None) -> str:
    if x is None:
        return "-"
    return f"{mpmath.nstr(x.mid, 12)} +- {mpmath.nstr(x.width / 2, 3)}"


def _table(rows: list[tuple[str, str]]) -> str:
    w = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(w)}  {v}" for k, v in rows)


# ------------------------------------------------------------------ commands

def cmd_analyze(args) -> _Outcome:
    from .predict import predict
    spec = load_spec(args.spec)
    a = parse_weights(args.a, spec) if args.a else None
    pred = predict(spec, a, prime_cutoff=args.prime_cutoff, precision_bits=args.precision_bits,
                   with_volume=not args.no_volume)
    doc = pred.to_document()
    doc["slice"] = [list(v) for v in enumerate_slice(spec.system, pred.a, 1).vectors]
    doc["verdict"] = "certified" if pred.degree_exact else "downgraded"
    rows = [("lambda", doc["lambda"]), ("kappa", str(pred.kappa)),
            ("degree", f"{pred.kappa} ({'exact' if pred.degree_exact else 'upper bound'})"),
            ("a", str(pred.a)), ("slice size", str(pred.slice_size)),
            ("generation", doc["generation"]), ("euler constant", _iv_text(pred.euler)),
            ("volume", _iv_text(pred.volume)), ("fiber volume", doc["fiber_volume"] or "-"),
            ("leading coefficient", _iv_text(pred.leading)), ("verdict", doc["verdict"])]
    rows += [("flag", f) for f in pred.flags]
    code = EXIT_UNCERTIFIED if args.strict and not pred.degree_exact else EXIT_OK
    return _Outcome(code, doc, _table(rows), spec.fingerprint())


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit_csv(args, text: str):
    if args.csv:
        Path(args.csv).write_text(text)


def cmd_count(args) -> _Outcome:
    from .predict import sandwich_ok
    spec = load_spec(args.spec)
    grid = parse_grid(args.grid)
    res = census_grid(spec, grid, budget=args.budget, threads=args.threads, method=args.method)
    rows = [(H, c, m, f"{s:.3f}") for (H, c), m, s in zip(res.grid, res.methods, res.seconds)]
    text = _csv_text(["H", "count", "method", "seconds"], rows)
    _emit_csv(args, text)
    sandwich = None
    if spec.balanced and spec.shape.size <= 16:
        sandwich = all(sandwich_ok(spec, H, c) for H, c in res.grid)
    doc = {"rows": [{"H": H, "count": str(c), "method": m} for (H, c), m in zip(res.grid, res.methods)],
           "fingerprint": res.fingerprint, "trivial_bound_sandwich": sandwich}
    return _Outcome(EXIT_OK, doc, text.rstrip("\n"), spec.fingerprint())


def cmd_moments(args) -> _Outcome:
    grid = parse_grid(args.grid)
    rows = []
    for X in grid:
        t0 = time.perf_counter()
        if args.coprime:
            if (args.m, args.k, args.ell) != (2, 2, 1):
                raise ValidationError("--coprime is only available for M_{2,2}")
            val, method = restricted_moment(args.coprime, X, args.threads, args.budget), "restricted"
        elif args.ell == 1:
            val, method = moment_divisor_sieve(args.m, args.k, [X] * args.m, args.threads, args.budget), "divisor"
        else:
            val, method = moment_power_sieve(args.m, args.k, args.ell, [X] * args.m, args.threads, args.budget), "power"
        rows.append((X, val, method, f"{time.perf_counter() - t0:.3f}"))
    text = _csv_text(["H", "count", "method", "seconds"], rows)
    _emit_csv(args, text)
    doc = {"m": args.m, "k": args.k, "ell": args.ell, "coprime": args.coprime,
           "rows": [{"H": r[0], "count": str(r[1]), "method": r[2]} for r in rows]}
    return _Outcome(EXIT_OK, doc, text.rstrip("\n"))


def cmd_volume(args) -> _Outcome:
    from .lattice import find_a
    from .volume import (DEFAULT_S_GRID, DownSetPolytope, SlicePolytope, fiber_volume,
                         operational_volume_report, volume_monte_carlo)
    spec = load_spec(args.spec)
    a = parse_weights(args.a, spec) if args.a else find_a(spec.system, spec.box)
    s_grid = [int(x) for x in args.s_grid.split(",")] if args.s_grid else DEFAULT_S_GRID
    rep = operational_volume_report(spec.system, a, spec.box, s_grid,
                                    prec=max(150, config.precision_bits(args.precision_bits)))
    fib = fiber_volume(spec.system, a, spec.box)
    doc = {"a": [format_fraction(x) for x in a.a], "operational": _iv(rep.interval),
           "operational_exact": None if rep.exact is None else format_fraction(rep.exact),
           "estimates": list(rep.estimates), "lambda": format_fraction(rep.lam), "kappa": rep.kappa,
           "fiber": str(fib), "fiber_dimension": fib.dimension,
           "fiber_certificate": None if fib.certificate is None else [format_fraction(Fraction(y)) for y in fib.certificate]}
    rows = [("operational volume", _iv_text(rep.interval)),
            ("exact leading coefficient", doc["operational_exact"] or "-"),
            ("fiber volume", doc["fiber"])]
    if args.monte_carlo:
        vecs = enumerate_slice(spec.system, a, 1).vectors
        mc_t = volume_monte_carlo(DownSetPolytope(vecs, spec.box.b), args.monte_carlo, args.seed)
        doc["monte_carlo_downset"] = {"estimate": mc_t.estimate, "stderr": mc_t.stderr}
        rows.append(("down-set volume (MC)", f"{mc_t.estimate:.6g} +- {mc_t.stderr:.2g}"))
        sp = SlicePolytope(vecs, spec.box.b)
        mc_s = volume_monte_carlo(sp, args.monte_carlo, args.seed)
        doc["monte_carlo_fiber"] = {"estimate": mc_s.estimate, "stderr": mc_s.stderr}
        rows.append(("fiber volume (MC)", f"{mc_s.estimate:.6g} +- {mc_s.stderr:.2g}"))
    return _Outcome(EXIT_OK, doc, _table(rows), spec.fingerprint())


def cmd_constants(args) -> _Outcome:
    from . import constants as C
    prec = config.precision_bits(args.precision_bits)
    values = {"zeta2": C.zeta2(prec), "zeta_prime2": C.zeta_prime2(prec),
              "euler_gamma": C.euler_gamma(prec), "A": C.constant_A(prec),
              "inverse_zeta2": C.inverse_zeta2(prec)}
    if args.spec:
        from .lattice import find_a
        spec = load_spec(args.spec)
        a = parse_weights(args.a, spec) if args.a else find_a(spec.system, spec.box)
        values["euler_product"] = C.euler_product(spec.system, spec.restriction, a,
                                                  config.prime_cutoff(args.prime_cutoff), precision_bits=prec)
    doc = {k: v.to_document() for k, v in values.items()}
    rows = [(k, f"[{v.to_strings()[0]}, {v.to_strings()[1]}]") for k, v in values.items()]
    return _Outcome(EXIT_OK, doc, _table(rows))


def cmd_verify_known(args) -> _Outcome:
    from .known import CHECKS
    kwargs = {"threads": args.threads}
    if args.name == "ma":
        kwargs["prime_cutoff"] = args.prime_cutoff
    check = CHECKS[args.name](**kwargs)
    doc = {"name": check.name, "passed": check.passed,
           "details": json.loads(json.dumps(check.details, default=str))}
    return _Outcome(EXIT_OK if check.passed else EXIT_FAIL, doc, "\n".join(check.lines()))


def cmd_replay(args) -> _Outcome:
    manifest = RunManifest.from_json(Path(args.manifest_file).read_text())
    sub = build_parser().parse_args(manifest.argv)
    out = _dispatch(sub)
    same = _normalized(out.result) == manifest.result and out.code == manifest.exit_code
    doc = {"command": manifest.command, "identical": same, "exit_code": out.code}
    text = f"replay of {manifest.command}: {'identical' if same else 'DIFFERENT'}"
    return _Outcome(EXIT_OK if same else EXIT_FAIL, doc, text)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON document")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--precision-bits", type=int, default=None)
    common.add_argument("--prime-cutoff", type=int, default=None)
    common.add_argument("--budget", type=lambda s: int(float(s)), default=None)
    common.add_argument("--strict", action="store_true", help="exit 4 when the analysis is not certified")
    common.add_argument("--manifest", default=None, help="write a run manifest to this path")

    parser = argparse.ArgumentParser(prog="divlab", description="Exact counts and main-term predictions "
                                     "for multiplicative Diophantine systems.")
    parser.add_argument("--version", action="version", version=f"divlab {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("analyze", parents=[common], help="predict lambda, kappa and the leading constant")
    p.add_argument("spec")
    p.add_argument("--a", default=None, help="weight tuple, e.g. 1,1/2,1/2,1/2")
    p.add_argument("--no-volume", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = subs.add_parser("count", parents=[common], help="exact census over a grid of heights")
    p.add_argument("spec")
    p.add_argument("--grid", required=True)
    p.add_argument("--csv", default=None)
    p.add_argument("--method", default="auto", choices=["auto", "dense", "segmented", "counter", "tuple"])
    p.set_defaults(func=cmd_count)

    p = subs.add_parser("moments", parents=[common], help="divisor moments M_{m,k,ell}(X, ..., X)")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--coprime", type=int, default=None, help="restrict to n coprime to this q (M_{2,2} only)")
    p.add_argument("--grid", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_moments)

    p = subs.add_parser("volume", parents=[common], help="operational and fiber volumes")
    p.add_argument("spec")
    p.add_argument("--a", default=None)
    p.add_argument("--s-grid", default=None)
    p.add_argument("--monte-carlo", type=int, default=0, metavar="SAMPLES")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_volume)

    p = subs.add_parser("constants", parents=[common], help="certified constants")
    p.add_argument("spec", nargs="?", default=None, help="also evaluate this problem's Euler product")
    p.add_argument("--a", default=None)
    p.set_defaults(func=cmd_constants)

    p = subs.add_parser("verify-known", parents=[common], help="closed-form reproduction checks")
    p.add_argument("name", choices=["ma", "coprime", "singular", "egyptian"])
    p.set_defaults(func=cmd_verify_known)

    p = subs.add_parser("replay", parents=[common], help="re-run a manifest and compare results")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_replay)
    return parser


def _dispatch(args) -> _Outcome:
    try:
        return args.func(args)
    except ParseError as exc:
        return _Outcome(EXIT_VALIDATION, {"error": str(exc), "location": exc.location}, f"error: {exc}")
    except (ValidationError, InadmissibleWeight) as exc:
        return _Outcome(EXIT_VALIDATION, {"error": str(exc)}, f"error: {exc}")
    except BudgetExceeded as exc:
        return _Outcome(EXIT_BUDGET, {"error": str(exc)}, f"budget exceeded: {exc}")
    except (DivlabError, ValueError) as exc:
        return _Outcome(EXIT_VALIDATION, {"error": str(exc)}, f"error: {exc}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    out = _dispatch(args)
    wall = time.perf_counter() - t0
    if args.json:
        print(json.dumps(out.result, indent=2, sort_keys=True, default=str))
    elif out.text:
        print(out.text, file=sys.stderr if out.code in (EXIT_VALIDATION, EXIT_BUDGET) else sys.stdout)
    if args.manifest and args.command != "replay":
        manifest_argv = [x for i, x in enumerate(argv)
                         if x != "--manifest" and (i == 0 or argv[i - 1] != "--manifest")
                         and not x.startswith("--manifest=")]
        params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
        man = RunManifest(args.command, manifest_argv, out.fingerprint, params,
                          precision={"precision_bits": config.precision_bits(args.precision_bits),
                                     "prime_cutoff": config.prime_cutoff(args.prime_cutoff)},
                          wall_time=round(wall, 3), result=_normalized(out.result), exit_code=out.code)
        Path(args.manifest).write_text(man.to_json())
    return out.code


if __name__ == "__main__":
    sys.exit(main())
