"""Command-line interface: ``malmquist <command> [options]``.

Exit codes: 0 ok, 1 check failure, 2 bad parameters, 3 iteration failure,
4 fit failure, 5 blow-up.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import acceptance
from . import catalog as cat
from .continuum import (BlowUpError, LimitStudy, degenerate_limit_study, qrt_limit_study,
                        riccati_limit_eq10, riccati_limit_study)
from .numkit import ConvergenceError, is_inf
from .orbit import (BranchPolicy, IterationError, Orbit, h_substitution_chain, iterate,
                    orbit_residual)
from .qrt import NonUniqueFitError, fit_biquadratic

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_CHECK, EXIT_PARAMS, EXIT_ITER, EXIT_FIT, EXIT_BLOWUP = range(6)
DEFAULT_TOL = 1e-8


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def parse_complex(text: str) -> complex:
    """``re``, ``re,im`` or ``exp:num/den`` (= exp(2 pi i num/den))."""
    text = text.strip()
    if text.startswith("exp:"):
        frac = Fraction(text[4:])
        return cmath.exp(2j * math.pi * float(frac))
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"cannot parse complex value {text!r}")


def parse_eps(text: str) -> list[float]:
    """Comma list of numbers, or ``2^-a..2^-b`` for a geometric ladder."""
    m = re.fullmatch(r"\s*(\d+(?:\.\d*)?)\^(-?\d+)\.\.(?:\d+(?:\.\d*)?\^)?(-?\d+)\s*", text)
    if m:
        base = float(m.group(1))
        lo, hi = int(m.group(2)), int(m.group(3))
        step = -1 if lo > hi else 1
        return [base**j for j in range(lo, hi + step, step)]
    return [float(x) for x in text.split(",") if x.strip()]


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise CliError(EXIT_PARAMS, f"parameter {item!r} is not name=value")
        name, value = item.split("=", 1)
        try:
            out[name.strip()] = parse_complex(value)
        except ValueError as exc:
            raise CliError(EXIT_PARAMS, str(exc)) from exc
    return out


def _c(text):
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _cpair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in r])
    return buf.getvalue()


# catalog

EXAMPLE_PARAMS = {
    cat.EquationId.LINEAR: {"a1": 2, "a2": 1},
    cat.EquationId.RICCATI: {"b1": 2, "b2": 1, "b3": 1},
    cat.EquationId.E10: {"delta": 0.3},
    cat.EquationId.E12: {"kappa": 2},
    cat.EquationId.E14: {"eta": cmath.exp(2j * math.pi / 3)},
}


def _example(eid):
    if eid in EXAMPLE_PARAMS:
        return EXAMPLE_PARAMS[eid]
    if eid in (cat.EquationId.E17, cat.EquationId.E19):
        return cat.solve_constraints(eid)[0].params
    return {}


def cmd_catalog(args) -> int:
    ids = [cat.EquationId.parse(args.id)] if args.id else cat.catalog_ids()
    override = _params(args.param)
    entries = []
    for eid in ids:
        params = override if (args.id and override) else _example(eid)
        eq = cat.catalog_get(eid, params)
        spec = cat.equation_spec(eid)
        doc = eq.to_json()
        doc.update({"tag": eq.tag, "formula": spec.formula, "param_names": list(spec.params),
                    "hints": spec.hints, "metadata": eq.metadata})
        entries.append(doc)
    if args.format == "json":
        _emit(args, json.dumps({"schema_version": SCHEMA_VERSION, "entries": entries}, indent=2))
    else:
        rows = [["id", "tag", "n", "formula", "constraints", "hints"]]
        for e in entries:
            rows.append([e["id"], e["tag"], e["n"], e["formula"], "; ".join(e["constraints"]), e["hints"]])
        _emit(args, _csv(rows))
    return EXIT_OK


# orbit / invariant

def _run_orbit(eq, f0, args) -> Orbit:
    try:
        policy = BranchPolicy.parse(args.policy)
    except ValueError as exc:
        raise CliError(EXIT_PARAMS, str(exc)) from exc
    try:
        return iterate(eq, f0, args.steps, policy)
    except IterationError as exc:
        raise CliError(EXIT_ITER, str(exc)) from exc


def _equation(args):
    if not args.id:
        raise CliError(EXIT_PARAMS, "--id is required")
    try:
        return cat.catalog_get(args.id, _params(args.param))
    except (cat.ConstraintError, KeyError) as exc:
        raise CliError(EXIT_PARAMS, str(exc)) from exc


def cmd_orbit(args) -> int:
    eq = _equation(args)
    orb = _run_orbit(eq, args.f0, args)
    res = orbit_residual(eq, orb)
    text = json.dumps(orb.to_json(), indent=2) if args.format == "json" else orb.to_csv()
    _emit(args, text)
    _note(f"max residual {res:.3e} over {len(orb) - 1} steps; singular at "
          f"{[m for m, s in enumerate(orb.singular) if s]}")
    if orb.terminated:
        _note("iteration stopped at a pole with no finite continuation")
        return EXIT_ITER
    return EXIT_OK if res < args.tol else EXIT_CHECK


def _load_orbit(path: str, eq_id=None, params=None) -> Orbit:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return Orbit.from_json(json.loads(text))
    return Orbit.from_csv(text, eq_id, params)


def cmd_invariant(args) -> int:
    if args.orbit_file:
        orbits = [_load_orbit(p, args.id, _params(args.param)) for p in args.orbit_file]
        eid = args.id or orbits[0].eq_id
        if eid is None:
            raise CliError(EXIT_PARAMS, "--id is required for CSV orbit files")
        try:
            eq = cat.catalog_get(eid, _params(args.param) or orbits[0].params)
        except cat.ConstraintError as exc:
            raise CliError(EXIT_PARAMS, str(exc)) from exc
    else:
        eq = _equation(args)
        orbits = [_run_orbit(eq, f0, args) for f0 in (args.f0s or [complex(args.f0)])]
    report = {"schema_version": SCHEMA_VERSION, "id": eq.id.value, "orbits": len(orbits)}
    status = EXIT_OK
    try:
        curve, kind = cat.associated_curve(eq.id, eq.params)
    except LookupError:
        curve, kind = None, None
    if curve is not None:
        if kind is cat.CurveKind.SELF:
            drift = max((curve.relative_residual(a, b) for o in orbits for a, b in o.pairs()), default=0.0)
        else:
            drift = max(h_substitution_chain(o, eq.params["eta"]).curve_residual for o in orbits)
        report.update({"curve_kind": kind.value, "drift": drift})
        _note(f"invariant drift {drift:.3e} ({kind.value} curve)")
        if drift >= args.tol:
            status = EXIT_CHECK
    else:
        report["orbit_residual"] = max(orbit_residual(eq, o) for o in orbits)
        _note(f"no biquadratic registered for {eq.id.value}; orbit residual {report['orbit_residual']:.3e}")
    if args.fit:
        pairs = [p for o in orbits for p in o.pairs()]
        try:
            fit = fit_biquadratic(pairs)
        except (NonUniqueFitError, ValueError) as exc:
            _note(f"fit failed: {exc}")
            raise CliError(EXIT_FIT, str(exc)) from exc
        report["fit"] = {"curve": [[_cpair(c) for c in row] for row in fit.curve.C],
                         "gap": fit.gap, "residual": fit.residual}
        msg = f"fitted curve gap {fit.gap:.3e}, residual {fit.residual:.3e}"
        if curve is not None and kind is cat.CurveKind.SELF:
            report["fit"]["distance_to_registered"] = fit.curve.distance(curve)
            msg += f", cosine distance to registered curve {fit.curve.distance(curve):.3e}"
        _note(msg)
    if args.format != "csv":
        _emit(args, json.dumps(report, indent=2))
    else:
        rows = [["key", "value"]] + [[k, v] for k, v in report.items() if not isinstance(v, dict)]
        _emit(args, _csv(rows))
    return status


# limit

def cmd_limit(args) -> int:
    eps = parse_eps(args.eps) if args.eps else None
    try:
        if args.kind == "riccati":
            study = riccati_limit_study(args.Atilde, args.w0, args.T, eps or parse_eps("2^-4..2^-10"))
        elif args.kind == "qrt":
            study = qrt_limit_study(args.k, eps or [0.3, 0.2, 0.1], args.T, args.C0)
        elif args.kind == "degenerate":
            study = degenerate_limit_study(args.a_tau, eps or parse_eps("2^-4..2^-9"), f0=args.f0,
                                           T=args.T, tau2=args.tau2)
        else:
            study = riccati_limit_eq10(args.delta, args.gamma0, args.T, eps or parse_eps("2^-4..2^-10"))
    except BlowUpError as exc:
        _note(str(exc))
        return EXIT_BLOWUP
    except (ValueError, ConvergenceError) as exc:
        raise CliError(EXIT_PARAMS, str(exc)) from exc
    text = json.dumps(study.to_json(), indent=2) if args.format == "json" else study.to_csv()
    _emit(args, text)
    return _limit_status(args, study)


def _limit_status(args, study: LimitStudy) -> int:
    if study.blowup or (any(study.flagged) and args.kind in ("riccati", "eq10")):
        _note("singularity inside the window")
        return EXIT_BLOWUP
    _note(f"fitted order {study.fitted_order:.4f}; errors "
          + ", ".join(f"{e:.2e}" for e in study.errors))
    status = EXIT_OK
    if args.kind == "qrt":
        rel = max(study.extra["relation_residual"])
        _note(f"relation residual {rel:.3e}")
        if rel >= args.tol:
            status = EXIT_CHECK
    if args.band:
        lo, hi = (float(x) for x in args.band.split(","))
        if all(e <= 1e-13 for e in study.errors):
            _note("all errors at the noise floor; order band not applicable")
        elif not lo <= study.fitted_order <= hi:
            _note(f"order {study.fitted_order:.4f} outside [{lo}, {hi}]")
            status = EXIT_CHECK
    return status


# constants

def cmd_constants(args) -> int:
    try:
        sols = cat.solve_constraints(args.eq_id, theta=args.theta, include_excluded=True)
    except (LookupError, KeyError) as exc:
        raise CliError(EXIT_PARAMS, str(exc)) from exc
    eid = cat.EquationId.parse(args.eq_id)
    docs = []
    for s in sols:
        docs.append({"params": {k: _cpair(v) for k, v in s.params.items()},
                     "residual": s.residual, "excluded": s.excluded, "note": s.note})
    if args.format == "json":
        _emit(args, json.dumps({"schema_version": SCHEMA_VERSION, "id": eid.value,
                                "solutions": docs}, indent=2))
    else:
        names = list(sols[0].params) if sols else []
        rows = [[f"{n}_{p}" for n in names for p in ("re", "im")] + ["residual", "excluded", "note"]]
        for s in sols:
            row = []
            for n in names:
                z = complex(s.params[n])
                row += [float(z.real), float(z.imag)]
            rows.append(row + [float(s.residual), int(s.excluded), s.note])
        _emit(args, _csv(rows))
    return EXIT_OK


# verify

def cmd_verify(args) -> int:
    results = acceptance.run_all()
    if args.json or args.format == "json":
        _emit(args, json.dumps(acceptance.report(results), indent=2))
    else:
        _emit(args, "\n".join(r.line() for r in results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out")
    common.add_argument("--tol", type=float)

    p = argparse.ArgumentParser(prog="malmquist", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=("json", "csv"), default=None,
                   help="output format (default: csv for tables, json for reports)")
    p.add_argument("--out", default=None, help="write data to PATH instead of stdout")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="residual tolerance")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("catalog", parents=[common], help="list the equation registry")
    s.add_argument("--id")
    s.add_argument("--param", action="append", metavar="NAME=VALUE")
    s.set_defaults(func=cmd_catalog)

    def orbit_opts(s):
        s.add_argument("--id")
        s.add_argument("--param", action="append", metavar="NAME=VALUE")
        s.add_argument("--steps", type=int, default=50)
        s.add_argument("--policy", default="nearest", help="principal | nearest | fixed:i0,i1,...")

    s = sub.add_parser("orbit", parents=[common], help="iterate an equation")
    orbit_opts(s)
    s.add_argument("--f0", type=_c, default=complex(0.3, 0.2))
    s.set_defaults(func=cmd_orbit)

    s = sub.add_parser("invariant", parents=[common], help="curve drift and invariant fitting")
    orbit_opts(s)
    s.add_argument("--f0", dest="f0s", type=_c, action="append",
                   help="starting value; repeat to pool several orbits")
    s.add_argument("--orbit-file", action="append", help="orbit CSV/JSON file; repeatable")
    s.add_argument("--fit", action="store_true")
    s.set_defaults(func=cmd_invariant, f0=complex(0.3, 0.2))

    s = sub.add_parser("limit", parents=[common], help="continuum-limit studies")
    s.add_argument("kind", choices=("riccati", "qrt", "degenerate", "eq10"))
    s.add_argument("--eps", help="comma list or 2^-a..2^-b")
    s.add_argument("--T", type=float, default=0.8)
    s.add_argument("--Atilde", type=_c, default=1 + 0j)
    s.add_argument("--w0", type=_c, default=0j)
    s.add_argument("--k", type=_c, default=0.5 + 0j)
    s.add_argument("--C0", type=_c, default=0.1 + 0j)
    s.add_argument("--a-tau", dest="a_tau", type=_c, default=-1 + 0j)
    s.add_argument("--tau2", type=_c, default=1 + 0j)
    s.add_argument("--f0", type=_c, default=0j)
    s.add_argument("--delta", type=_c, default=0.3 + 0j)
    s.add_argument("--gamma0", type=_c, default=0.4 + 0j)
    s.add_argument("--band", help="LO,HI: exit 1 unless the fitted order lies inside")
    s.set_defaults(func=cmd_limit)

    s = sub.add_parser("constants", parents=[common], help="solve parameter constraints (E17, E19)")
    s.add_argument("eq_id")
    s.add_argument("--theta", type=float)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _note(f"error: {exc}")
        return exc.code
    except cat.ConstraintError as exc:
        _note(f"error: {exc}")
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
