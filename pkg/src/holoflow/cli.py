"""Command-line front end.

    holoflow field-validate --field F.json
    holoflow field-classify --field F.json [--cap 8]
    holoflow kernel --field F.json --degree 6 [--oracle]
    holoflow flow --field F.json [--direction backward] [--eta 0.4,0.1 --zeta 0.5+0.5j]
    holoflow region --spec R.json --bbox -2,6,-3,3 --res 0.02 [--ell-max 5] [--candidates 3]
    holoflow verify --case finite-smooth|negative-ratio|nonreal-ratio [--k 1 --t 1 --alpha 1+0.5j --b 2]
    holoflow --paper-suite [--seed N]

Exit status: 0 success, 1 domain error (invalid field, ray not found, failed
criterion), 2 usage error.  Reports go to ``--out`` (atomically) or stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .acceptance import DEFAULT_SEED, run_suite
from .errors import HoloflowError, InvalidNormalFormError
from .fields import NormalFormField, classify, hard_violations, validate_normal_form
from .flow import Direction, numeric_flow_to, residual_is_zero, symbolic_flow
from .gallery import Kind, parse_case, verify_case
from .kernel import kernel_matches_oracle, solve_kernel
from .region import RegionSpec, admissible_candidates, boundary_bound_report, find_star_component


class UsageError(Exception):
    pass


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(report) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent or Path(".")))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"cannot read {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _load_field(path: str) -> NormalFormField:
    data = _read_json(path)
    try:
        return NormalFormField.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: malformed field description ({exc})") from exc


def _complex(text: str) -> complex:
    return complex(text.strip().replace(" ", "").replace("i", "j"))


def _complex_list(text: str) -> list[complex]:
    try:
        return [_complex(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse complex list {text!r}") from exc


def _floats(text: str, count: int) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse {text!r}") from exc
    if len(vals) != count:
        raise UsageError(f"expected {count} comma-separated numbers, got {text!r}")
    return vals


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_field_validate(args) -> tuple[dict, int]:
    field = _load_field(args.field)
    violations = validate_normal_form(field)
    hard = [v for v in violations if not v.soft]
    report = {
        "command": "field-validate",
        "field": field.to_json(),
        "valid": not hard,
        "violations": [v.to_json() for v in violations],
    }
    return report, 0 if not hard else 1


def cmd_field_classify(args) -> tuple[dict, int]:
    field = _load_field(args.field)
    return {"command": "field-classify", "field": field.to_json(), **classify(field, args.cap).to_json()}, 0


def cmd_kernel(args) -> tuple[dict, int]:
    field = _load_field(args.field)
    kb = solve_kernel(field, args.degree)
    report = {"command": "kernel", "field": field.to_json(), **kb.to_json()}
    if args.oracle:
        ok, d1, d2 = kernel_matches_oracle(field, args.degree, kb)
        report["oracle"] = {"matches": ok, "dim_solver": d1, "dim_oracle": d2}
    return report, 0


def cmd_flow(args) -> tuple[dict, int]:
    field = _load_field(args.field)
    direction = Direction.parse(args.direction)
    curve = symbolic_flow(field, direction)
    report = {
        "command": "flow",
        "field": field.to_json(),
        "closed_form": curve.closed_form(),
        "residual_is_zero": residual_is_zero(curve),
        **curve.to_json(),
    }
    if args.eta is not None or args.zeta is not None:
        if args.eta is None or args.zeta is None:
            raise UsageError("--eta and --zeta go together")
        eta = _complex_list(args.eta)
        if len(eta) != field.n:
            raise UsageError(f"--eta needs {field.n} coordinates")
        zeta = _complex(args.zeta)
        exact = curve.evaluate(eta, zeta)
        numeric = numeric_flow_to(field, eta, zeta, direction, args.step)
        report["point"] = {
            "eta": eta,
            "zeta": zeta,
            "symbolic": list(exact),
            "rk4": list(numeric),
            "max_abs_difference": float(np.max(np.abs(exact - numeric))),
        }
    return report, 0


def cmd_region(args) -> tuple[dict, int, str]:
    if args.res <= 0:
        raise UsageError("--res must be positive")
    try:
        spec = RegionSpec.from_json(_read_json(args.spec))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{args.spec}: malformed region description ({exc})") from exc
    bbox = _floats(args.bbox, 4)
    cm = find_star_component(spec, bbox, args.res)
    report = {"command": "region", "spec": spec.to_json(), **cm.to_json()}
    if args.candidates:
        report["candidates"] = [c.to_json() for c in admissible_candidates(spec, args.candidates)]
    if args.ell_max is not None:
        diag = boundary_bound_report(spec, lambda p: np.ones_like(p), args.ell_max, args.res)
        report["diagnostics"] = {"f": "1", **diag.to_json()}
    return report, 0, cm.to_pgm()


def cmd_verify(args) -> tuple[dict, int]:
    alpha = _complex(args.alpha) if args.alpha is not None else None
    spec = parse_case(args.case, k=args.k, t=args.t, alpha=alpha, b=args.b)
    rep = verify_case(spec, h=args.h)
    return {"command": "verify", **rep.to_json()}, 0


def cmd_acceptance_suite(args) -> tuple[dict, int]:
    results = run_suite(args.seed)
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.passed and r.within_budget for r in results)
    summary = f"{sum(r.passed and r.within_budget for r in results)}/{len(results)} criteria passed"
    print(("PASS: " if ok else "FAIL: ") + summary, file=sys.stderr)
    report = {"command": "paper-suite", "seed": args.seed, "passed": ok, "summary": summary,
              "criteria": [r.to_json() for r in results]}
    # timings vary between runs; keep them out of the file so reports stay byte-identical
    for c in report["criteria"]:
        c.pop("seconds")
    return report, 0 if ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holoflow", description="Normal-form vector fields, "
                                     "formal kernels, flows, plane regions and leafwise holomorphy checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--paper-suite", action="store_true", help="run the acceptance battery and exit")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized sweeps")
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--out", default=argparse.SUPPRESS, help="write the JSON report here")
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("field-validate", help="check normal-form conditions")
    p.add_argument("--field", required=True)
    common(p)
    p = sub.add_parser("field-classify", help="contracting/aligned/resonances/A(lambda)")
    p.add_argument("--field", required=True)
    p.add_argument("--cap", type=int, default=8, help="degree cap for enumerations")
    common(p)
    p = sub.add_parser("kernel", help="kernel of the conjugate operator up to a degree")
    p.add_argument("--field", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="also compare with the dense nullspace")
    common(p)
    p = sub.add_parser("flow", help="closed-form complex flow")
    p.add_argument("--field", required=True)
    p.add_argument("--direction", default="forward", choices=["forward", "backward"])
    p.add_argument("--eta")
    p.add_argument("--zeta")
    p.add_argument("--step", type=float, default=0.01)
    common(p)
    p = sub.add_parser("region", help="components of D(P, lambda) and boundary diagnostics")
    p.add_argument("--spec", required=True)
    p.add_argument("--bbox", required=True, help="x0,x1,y0,y1")
    p.add_argument("--res", type=float, required=True)
    p.add_argument("--ell-max", type=int, default=None)
    p.add_argument("--candidates", type=int, default=0)
    common(p)
    p = sub.add_parser("verify", help="leafwise vs global holomorphy of a counterexample")
    p.add_argument("--case", required=True, choices=[k.value for k in Kind])
    p.add_argument("--k", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--alpha")
    p.add_argument("--b", type=float)
    p.add_argument("--h", type=float, default=1e-4)
    common(p)
    return parser


COMMANDS = {
    "field-validate": cmd_field_validate,
    "field-classify": cmd_field_classify,
    "kernel": cmd_kernel,
    "flow": cmd_flow,
    "region": cmd_region,
    "verify": cmd_verify,
}


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """``--bbox -2,6,-3,3`` -> ``--bbox=-2,6,-3,3`` so argparse does not read an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--bbox", "--eta", "--zeta", "--alpha"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and (nxt[1:2].isdigit() or nxt[1:2] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.paper_suite == bool(args.command):
        parser.print_usage(sys.stderr)
        print("holoflow: give exactly one subcommand or --paper-suite", file=sys.stderr)
        return 2
    try:
        if args.command == "kernel" and not 1 <= args.degree <= 12:
            raise UsageError("--degree must be in [1, 12]")
        if args.out is not None:
            out_dir = Path(args.out).resolve().parent
            if not out_dir.is_dir():
                raise UsageError(f"output directory {out_dir} does not exist")
        pgm = None
        if args.paper_suite:
            report, code = cmd_acceptance_suite(args)
        elif args.command == "region":
            report, code, pgm = cmd_region(args)
        else:
            report, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"holoflow: usage error: {exc}", file=sys.stderr)
        return 2
    except InvalidNormalFormError as exc:
        print(f"holoflow: invalid normal form: {exc}", file=sys.stderr)
        return 1
    except HoloflowError as exc:
        print(f"holoflow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = dumps(report)
    if args.out is None:
        sys.stdout.write(text)
    else:
        out = Path(args.out)
        write_atomic(out, text)
        if pgm is not None:
            write_atomic(out.with_suffix(".pgm"), pgm)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
