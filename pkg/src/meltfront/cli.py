"""Command-line front end: solve, field export, verification, sweeps.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .fronts import (FrontSolverError, assemble_solution, front_system,
                     solve_fronts)
from .material import (MaterialModel, UnsupportedDiffusivity,
                       build_transformed_problem, kirchhoff_maps)
from .oracle import compare, run as run_oracle
from .profiles import ProfileDomainError, _reconstruct

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4

_N_PROFILE_SAMPLES = 101
_SOLID_RANGE_FACTOR = 5.0


def _fmt(x: float) -> str:
    """Round-trip-safe text for a float (17 significant digits)."""
    return f"{x:.17g}"


def _meta(cfg: RunConfig, case_tag: str) -> dict:
    return {"version": __version__, "config_hash": cfg.config_hash,
            "case": case_tag}


def _write_rows(path: Path, columns: list[str], rows: list[list],
                meta: dict, fmt: str):
    """Emit a table as CSV (with comment header) or JSON lines."""
    lines = []
    if fmt == "csv":
        for key, val in meta.items():
            lines.append(f"# {key}: {val}")
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(
                _fmt(v) if isinstance(v, float) else str(v) for v in row))
    else:
        lines.append(json.dumps({"meta": meta}))
        for row in rows:
            lines.append(json.dumps(dict(zip(columns, row))))
    path.write_text("\n".join(lines) + "\n")


def _solve_pipeline(cfg: RunConfig):
    sys_ = front_system(cfg.problem)
    result = solve_fronts(sys_, tol=cfg.tol, max_iter=cfg.max_iter)
    solution = assemble_solution(sys_, result)
    return sys_, result, solution


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    try:
        sys_, result, solution = _solve_pipeline(cfg)
    except FrontSolverError as exc:
        diag = {"meta": _meta(cfg, "unsolved"),
                "error": type(exc).__name__, "message": str(exc)}
        (out / "diagnostics.json").write_text(json.dumps(diag, indent=2)
                                              + "\n")
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    payload = {
        "meta": _meta(cfg, result.case_tag),
        "omega1": result.omega1,
        "omega2": result.omega2,
        "unknowns": dict(zip(sys_.unknown_names, result.solved_unknowns)),
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "jacobian_condition": result.jacobian_condition,
    }
    (out / "fronts.json").write_text(json.dumps(payload, indent=2) + "\n")

    w1, w2 = solution.omega1, solution.omega2
    rows = []
    for om in np.linspace(w1, w2, _N_PROFILE_SAMPLES):
        rows.append([float(om), float(solution.U(float(om))), ""])
    for om in np.linspace(w2, _SOLID_RANGE_FACTOR * w2,
                          _N_PROFILE_SAMPLES):
        rows.append([float(om), "", float(solution.V(float(om)))])
    _write_rows(out / ("profiles.csv" if cfg.out_format == "csv"
                       else "profiles.jsonl"),
                ["omega", "U", "V"], rows, _meta(cfg, result.case_tag),
                cfg.out_format)
    print(f"omega1 = {_fmt(result.omega1)}")
    print(f"omega2 = {_fmt(result.omega2)}")
    return EXIT_OK


def cmd_field(cfg: RunConfig, out: Path, times: list[float],
              xs: list[float] | None, nx: int) -> int:
    if cfg.material is None:
        print("field export needs a [material] config (physical "
              "temperatures are undefined for a bare [transformed] "
              "problem)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _, result, solution = _solve_pipeline(cfg)
    except FrontSolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    maps1, maps2 = kirchhoff_maps(cfg.material)
    rows = []
    for t in times:
        if t <= 0:
            print(f"time {t} must be positive", file=sys.stderr)
            return EXIT_CONFIG
        rt = math.sqrt(t)
        s1, s2 = solution.omega1 * rt, solution.omega2 * rt
        x_list = xs if xs is not None else \
            np.linspace(s1, _SOLID_RANGE_FACTOR * s2, nx).tolist()
        for x in x_list:
            omega = x / rt
            if omega < solution.omega1 * (1.0 - 1e-12):
                rows.append([float(t), float(x), "", "removed"])
                continue
            temp = _reconstruct(solution, maps1, maps2, t, float(x))
            phase = "liquid" if omega <= solution.omega2 else "solid"
            rows.append([float(t), float(x), float(temp), phase])
    _write_rows(out / ("field.csv" if cfg.out_format == "csv"
                       else "field.jsonl"),
                ["t", "x", "T", "phase"], rows,
                _meta(cfg, result.case_tag), cfg.out_format)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    try:
        _, result, solution = _solve_pipeline(cfg)
    except FrontSolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    trajectory = run_oracle(solution, cfg.oracle)
    report = compare(trajectory, solution)
    drift = max(report["front1_drift_max"], report["front2_drift_max"])
    passed = (drift <= cfg.max_front_drift
              and report["field_error_max"] <= cfg.max_field_error)
    payload = {
        "meta": _meta(cfg, result.case_tag),
        "passed": passed,
        "max_front_drift_allowed": cfg.max_front_drift,
        "max_field_error_allowed": cfg.max_field_error,
        **report,
    }
    (out / "verify.json").write_text(json.dumps(payload, indent=2) + "\n")
    status = "passed" if passed else "FAILED"
    print(f"verification {status}: front drift {drift:.3e}, "
          f"field error {report['field_error_max']:.3e}")
    return EXIT_OK if passed else EXIT_VERIFY


def _swept_problem(cfg: RunConfig, param: str, value: float):
    if cfg.material is not None:
        material = dataclasses.replace(cfg.material, **{param: value})
        return build_transformed_problem(material)
    if param == "T0":
        raise ConfigError("sweep",
                          "T0 sweeps need a [material] config")
    return dataclasses.replace(cfg.problem, **{param: value})


def cmd_sweep(cfg: RunConfig, out: Path, param: str, lo: float, hi: float,
              n: int) -> int:
    if n < 1:
        print(f"sweep needs n >= 1, got {n}", file=sys.stderr)
        return EXIT_CONFIG
    if hi < lo:
        print(f"warning: sweep endpoints reversed, using [{hi}, {lo}]",
              file=sys.stderr)
        lo, hi = hi, lo
    values = [lo] if n == 1 else np.linspace(lo, hi, n).tolist()
    rows = []
    case_tag = "unsolved"
    for value in values:
        try:
            problem = _swept_problem(cfg, param, float(value))
            sys_ = front_system(problem)
            result = solve_fronts(sys_, tol=cfg.tol, max_iter=cfg.max_iter)
            assemble_solution(sys_, result)
            case_tag = result.case_tag
            rows.append([float(value), result.omega1, result.omega2,
                         result.residual_norm, result.iterations, "ok"])
        except ConfigError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_CONFIG
        except (FrontSolverError, UnsupportedDiffusivity, ProfileDomainError,
                ValueError) as exc:
            rows.append([float(value), "", "", "", "",
                         f"failed: {type(exc).__name__}"])
    _write_rows(out / ("sweep.csv" if cfg.out_format == "csv"
                       else "sweep.jsonl"),
                ["param", "omega1", "omega2", "residual", "iterations",
                 "status"],
                rows, _meta(cfg, case_tag), cfg.out_format)
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meltfront",
        description="Similarity solutions of the two-phase "
                    "melting/evaporation moving-boundary problem.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML config path")
        p.add_argument("--out", default=None,
                       help="output directory (default from config)")
        p.add_argument("--tol", type=float, default=None,
                       help="override solver tolerance")
        p.add_argument("--format", choices=("csv", "jsonl"), default=None,
                       help="override output format")

    p_solve = sub.add_parser("solve", help="solve the front system")
    common(p_solve)

    p_field = sub.add_parser("field", help="export temperature field")
    common(p_field)
    p_field.add_argument("--times", type=_float_list, required=True,
                         help="comma-separated times in seconds")
    p_field.add_argument("--xs", type=_float_list, default=None,
                         help="comma-separated positions in metres "
                              "(default: auto range per time)")
    p_field.add_argument("--nx", type=int, default=200,
                         help="points per time for the auto range")

    p_verify = sub.add_parser("verify",
                              help="cross-check with the FD simulation")
    common(p_verify)

    p_sweep = sub.add_parser("sweep", help="solve across a parameter range")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         choices=("q0", "Hv", "Hm", "T0"))
    p_sweep.add_argument("--lo", type=float, required=True)
    p_sweep.add_argument("--hi", type=float, required=True)
    p_sweep.add_argument("--n", type=int, required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    if args.tol is not None:
        if args.tol <= 0:
            print(f"--tol must be positive, got {args.tol}", file=sys.stderr)
            return EXIT_CONFIG
        cfg = dataclasses.replace(cfg, tol=args.tol)
    if args.format is not None:
        cfg = dataclasses.replace(cfg, out_format=args.format)
    out = Path(args.out) if args.out is not None else cfg.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory {out}: {exc}",
              file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "solve":
        return cmd_solve(cfg, out)
    if args.command == "field":
        return cmd_field(cfg, out, args.times, args.xs, args.nx)
    if args.command == "verify":
        return cmd_verify(cfg, out)
    return cmd_sweep(cfg, out, args.param, args.lo, args.hi, args.n)


if __name__ == "__main__":
    sys.exit(main())
