"""``higgsteich`` command line: bundle, dims, solve, verify."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import shlex
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, checks, higgs
from . import metricsolve as ms
from .parabolic import build_E, build_W, sub_par_degree
from .picard import SurfaceData
from .repdim import dimension_report

EXACT = "exact"
ORACLE = "derived-oracle"


def _numeric(tol: float) -> str:
    return f"numeric({tol:g})"


def _seed() -> int:
    return int(os.environ.get("HIGGSTEICH_SEED", "0"))


def _header(args: argparse.Namespace, parser_defaults: dict) -> dict:
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "verbose")}
    overrides = {k: v for k, v in inputs.items() if k in parser_defaults and parser_defaults[k] != v}
    head = {
        "tool": "higgsteich",
        "version": __version__,
        "command": args.command,
        "inputs": inputs,
        "overrides": overrides,
        "seed": _seed(),
    }
    if not args.no_timestamp:
        head["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return head


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _dump(obj: dict) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, default=_json_default) + "\n"


# --- bundle ------------------------------------------------------------------


def cmd_bundle(args: argparse.Namespace, defaults: dict) -> int:
    s = SurfaceData(args.g, args.n)
    k = args.k
    pb = build_E(s) if k == 2 else build_W(s, k)
    if args.coeffs == "zero":
        coeffs = [higgs.ZERO] * (k - 1)
    else:
        rng = np.random.default_rng(_seed())
        coeffs = [
            higgs.coefficient_section(s, j, samples=[complex(rng.normal(), rng.normal())])
            for j in range(2, k + 1)
        ]
    h = higgs.companion_higgs(k, coeffs, surface=s)
    verdict = higgs.is_parabolic_stable(pb, h)
    subs = higgs.invariant_subbundles(h, pb)
    notes = []
    if k % 2 == 0 and k >= 6:
        top = pb.summands[1]
        notes.append(
            f"largest proper invariant sum starts at {top} = L^{k - 3} xi^{(k - 4) // 2} (filtration); "
            f"a list ending at L^{k // 2 - 1} xi^{(k - 4) // 2} agrees with it only for k = 4"
        )
    report = {
        "header": _header(args, defaults),
        "surface": {"g": s.genus, "n": s.punctures, "hyperbolic": s.hyperbolic, "provenance": EXACT},
        "bundle": {**pb.to_json(), "provenance": EXACT},
        "field": {**h.to_json(), "provenance": EXACT},
        "residue": {"matrix": higgs.residue_at(h).tolist(), "provenance": EXACT},
        "invariant_subbundles": {
            "sets": [
                {"indices": sorted(S), "summands": [str(pb.summands[i]) for i in sorted(S)],
                 "par_degree": str(sub_par_degree(pb, S))}
                for S in subs
            ],
            "notes": notes,
            "provenance": EXACT,
        },
        "stability": {**verdict.to_json(), "provenance": EXACT if verdict.method == "direct" else ORACLE},
    }
    if args.coeffs != "zero":
        rec = higgs.char_poly_coefficients(h.numeric_matrix())
        report["hitchin_map"] = {
            "values": [[complex(v).real, complex(v).imag] for v in rec],
            "provenance": _numeric(1e-12),
        }
    if args.json:
        _emit(_dump(report), args.out)
    else:
        lines = [
            f"surface g={s.genus} n={s.punctures} (hyperbolic: {s.hyperbolic})",
            f"bundle: {' + '.join(str(b) for b in pb.summands)}, weight {pb.weight}, "
            f"par_degree {pb.par_degree}",
            "residue:",
            *("  " + " ".join(str(x) for x in row) for row in higgs.residue_at(h)),
            "invariant subbundles:",
            *(f"  {sorted(S)} par_degree {sub_par_degree(pb, S)}" for S in subs),
            *(f"  note: {msg}" for msg in notes),
            f"verdict: {verdict.label} ({verdict.method})",
        ]
        _emit("\n".join(lines) + "\n", args.out)
    if args.expect and args.expect != verdict.label:
        print(f"higgsteich: expected {args.expect}, got {verdict.label}", file=sys.stderr)
        return 1
    return 0


# --- dims ---------------------------------------------------------------------


def cmd_dims(args: argparse.Namespace, defaults: dict) -> int:
    reports = [dimension_report(args.g, args.n, k) for k in range(2, args.k_max + 1)]
    if args.format == "json":
        payload = {
            "header": _header(args, defaults),
            "rows": [{**r.to_json(), "provenance": EXACT} for r in reports],
        }
        _emit(_dump(payload), args.out)
    else:
        buf = io.StringIO()
        if not args.no_timestamp:
            buf.write(f"# higgsteich {__version__} {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "hitchin_base_real_dim", "closed_form_dim", "rep_variety_dim", "agree", "provenance"])
        for r in reports:
            w.writerow([r.k, r.hitchin_base_real_dim, r.closed_form_dim, r.rep_variety_dim,
                        "agree" if r.agree else "disagree", EXACT])
        _emit(buf.getvalue(), args.out)
    bad = [r.k for r in reports if not r.agree]
    if bad:
        print(f"higgsteich: dimension counts disagree for k={bad}", file=sys.stderr)
        return 1
    return 0


# --- solve --------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace, defaults: dict) -> int:
    grid = ms.RadialGrid.from_radii(args.r_min, args.r_max, args.nodes)
    model = ms.CoefficientModel.parse(args.q_model)
    try:
        sol = ms.solve_selfduality(grid, model, tol=args.tol, max_iter=args.max_iter)
    except ms.SolverError as exc:
        print(f"higgsteich: solve failed: {exc}", file=sys.stderr)
        return 1
    payload = {
        "header": _header(args, defaults),
        **sol.to_json(),
        "higgs_norm_max": float(np.max(ms.higgs_norm_field(sol))),
        "provenance": {
            "grid": EXACT,
            "u": _numeric(args.tol),
            "residual": _numeric(args.tol),
            "iterations": EXACT,
            "higgs_norm_max": _numeric(args.tol),
        },
    }
    _emit(_dump(payload), args.out)
    return 0


# --- verify -------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace, defaults: dict) -> int:
    tol = checks.Tolerances(solver_residual=args.tol, curvature=args.curvature_tol)
    results = checks.run_suite(args.suite, tol, seed=_seed())
    payload = {
        "header": {**_header(args, defaults), "tolerances": tol.to_json()},
        "checks": [r.to_json() for r in results],
        "passed": all(r.passed for r in results),
    }
    if args.json or args.out:
        _emit(_dump(payload), args.out)
    else:
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  [{r.provenance}]")
    failing = [r.name for r in results if not r.passed]
    if failing:
        print(f"higgsteich: verification failed: {failing[0]}", file=sys.stderr)
        return 1
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="higgsteich", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="flat 'key = value' file; must set 'command'")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header")

    b = sub.add_parser("bundle", help="bundle, Higgs field, residue and stability verdict")
    b.add_argument("--g", type=int, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--coeffs", choices=("zero", "random"), default="zero")
    b.add_argument("--json", action="store_true")
    b.add_argument("--expect", choices=("stable", "unstable"))
    common(b)
    b.set_defaults(func=cmd_bundle)

    d = sub.add_parser("dims", help="three dimension counts per k")
    d.add_argument("--g", type=int, required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--k-max", type=int, default=3)
    d.add_argument("--format", choices=("csv", "json"), default="csv")
    common(d)
    d.set_defaults(func=cmd_dims)

    s = sub.add_parser("solve", help="radial self-duality solve on the punctured disk")
    s.add_argument("--q-model", default="zero", help="zero | const:C | pole:C")
    s.add_argument("--r-min", type=float, default=1e-3)
    s.add_argument("--r-max", type=float, default=0.5)
    s.add_argument("--nodes", type=int, default=2001)
    s.add_argument("--tol", type=float, default=ms.DEFAULT_TOL)
    s.add_argument("--max-iter", type=int, default=ms.DEFAULT_MAX_ITER)
    common(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run the invariant battery")
    v.add_argument("--suite", choices=sorted(checks.SUITES), default="all")
    v.add_argument("--tol", type=float, default=ms.DEFAULT_TOL)
    v.add_argument("--curvature-tol", type=float, default=checks.Tolerances().curvature)
    v.add_argument("--json", action="store_true")
    common(v)
    v.set_defaults(func=cmd_verify)
    return p


def _config_argv(path: str) -> list[str]:
    argv: list[str] = []
    command = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = key.strip().replace("_", "-"), value.strip()
        if key == "command":
            command = value
        elif value.lower() in ("true", "yes"):
            argv.append(f"--{key}")
        elif value.lower() in ("false", "no"):
            continue
        else:
            argv += [f"--{key}", *shlex.split(value)]
    if command is None:
        raise ValueError(f"{path}: no 'command' key")
    return [command, *argv]


def _defaults(parser: argparse.ArgumentParser, command: str) -> dict:
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        sp = action.choices.get(command)
        if sp is not None:
            return {a.dest: a.default for a in sp._actions if a.dest != "help"}  # noqa: SLF001
    return {}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = _config_argv(args.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        if args.command is not None:
            parser.error("give either a subcommand or --config, not both")
        args = parser.parse_args(cfg)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args, _defaults(parser, args.command))
    except ValueError as exc:
        print(f"higgsteich: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
