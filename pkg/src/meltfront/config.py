"""TOML run-configuration loading and validation.

A config file provides either a ``[material]`` block (physical coefficients,
reduced automatically) or a ``[transformed]`` block (the reduced problem
directly, for synthetic cases), plus optional ``[solver]``, ``[oracle]`` and
``[output]`` sections.  See the README for the full grammar.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .material import (CoefficientFn, MaterialModel, TransformedProblem,
                       UnsupportedDiffusivity, build_transformed_problem)
from .oracle import OracleConfig

__all__ = ["ConfigError", "RunConfig", "load_config"]

_COEFF_KINDS = ("constant", "powerlaw", "exponential")
_CASE1_KINDS = ("const", "inv_square")
_CASE2_KINDS = ("const", "inv_square", "exp")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        super().__init__(f"config field '{field_name}': {message}")


@dataclass(frozen=True)
class RunConfig:
    material: MaterialModel | None
    problem: TransformedProblem
    tol: float
    max_iter: int
    oracle: OracleConfig
    max_front_drift: float
    max_field_error: float
    out_dir: Path
    out_format: str
    config_hash: str


def _number(section: dict, key: str, where: str, default=None,
            required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{where}.{key}", "missing required value")
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {val!r}")
    return float(val)


def _integer(section: dict, key: str, where: str, default):
    if key not in section:
        return default
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{where}.{key}",
                          f"expected an integer, got {val!r}")
    return val


def _string(section: dict, key: str, where: str, default=None,
            choices=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{where}.{key}", "missing required value")
        return default
    val = section[key]
    if not isinstance(val, str):
        raise ConfigError(f"{where}.{key}", f"expected a string, got {val!r}")
    if choices is not None and val not in choices:
        raise ConfigError(f"{where}.{key}",
                          f"must be one of {choices}, got {val!r}")
    return val


def _table(section: dict, key: str, where: str) -> dict:
    val = section.get(key)
    if not isinstance(val, dict):
        raise ConfigError(f"{where}.{key}", "missing required table")
    return val


def _coefficient(table: dict, where: str) -> CoefficientFn:
    kind = _string(table, "kind", where, choices=_COEFF_KINDS, required=True)
    scale = _number(table, "scale", where, required=True)
    exponent = _number(table, "exponent", where, default=0.0)
    if kind != "constant" and "exponent" not in table:
        raise ConfigError(f"{where}.exponent",
                          f"required for kind {kind!r}")
    extra = set(table) - {"kind", "scale", "exponent"}
    if extra:
        raise ConfigError(f"{where}.{sorted(extra)[0]}", "unknown key")
    try:
        return CoefficientFn(kind=kind, scale=scale, exponent=exponent)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from exc


def _material(section: dict) -> MaterialModel:
    liquid = _table(section, "liquid", "material")
    solid = _table(section, "solid", "material")
    kwargs = {
        "lambda1": _coefficient(_table(liquid, "lambda", "material.liquid"),
                                "material.liquid.lambda"),
        "C1": _coefficient(_table(liquid, "C", "material.liquid"),
                           "material.liquid.C"),
        "lambda2": _coefficient(_table(solid, "lambda", "material.solid"),
                                "material.solid.lambda"),
        "C2": _coefficient(_table(solid, "C", "material.solid"),
                           "material.solid.C"),
    }
    for key in ("Hv", "Hm", "Tv", "Tm", "T0", "q0"):
        kwargs[key] = _number(section, key, "material", required=True)
    try:
        return MaterialModel(**kwargs)
    except ValueError as exc:
        raise ConfigError("material", str(exc)) from exc


def _transformed(section: dict) -> TransformedProblem:
    kwargs = {
        "case1_kind": _string(section, "case1", "transformed",
                              choices=_CASE1_KINDS, required=True),
        "case2_kind": _string(section, "case2", "transformed",
                              choices=_CASE2_KINDS, required=True),
    }
    for key in ("a", "b", "U1", "U2", "V2", "V0", "Hv", "Hm", "q0"):
        kwargs[key] = _number(section, key, "transformed", required=True)
    for key in ("ref_u", "ref_v"):
        kwargs[key] = _number(section, key, "transformed", default=0.0)
    try:
        return TransformedProblem(**kwargs)
    except ValueError as exc:
        raise ConfigError("transformed", str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from exc

    has_material = "material" in data
    has_transformed = "transformed" in data
    if has_material == has_transformed:
        raise ConfigError(
            "material",
            "exactly one of [material] or [transformed] must be present",
        )
    material = None
    if has_material:
        material = _material(data["material"])
        try:
            problem = build_transformed_problem(material)
        except UnsupportedDiffusivity as exc:
            raise ConfigError("material", str(exc)) from exc
    else:
        problem = _transformed(data["transformed"])

    solver = data.get("solver", {})
    tol = _number(solver, "tol", "solver", default=1e-10)
    if tol <= 0:
        raise ConfigError("solver.tol", f"must be positive, got {tol}")
    max_iter = _integer(solver, "max_iter", "solver", default=100)
    if max_iter < 1:
        raise ConfigError("solver.max_iter", f"must be >= 1, got {max_iter}")

    osec = data.get("oracle", {})
    try:
        oracle = OracleConfig(
            t_start=_number(osec, "t_start", "oracle", default=1.0),
            t_end=_number(osec, "t_end", "oracle", default=100.0),
            n_liquid=_integer(osec, "n_liquid", "oracle", default=256),
            n_solid=_integer(osec, "n_solid", "oracle", default=256),
            far_field_factor=_number(osec, "far_field_factor", "oracle",
                                     default=10.0),
            cfl=_number(osec, "cfl", "oracle", default=0.4),
            theta=_number(osec, "theta", "oracle", default=0.5),
            n_samples=_integer(osec, "n_samples", "oracle", default=33),
        )
    except ValueError as exc:
        raise ConfigError("oracle", str(exc)) from exc
    max_front_drift = _number(osec, "max_front_drift", "oracle", default=1e-2)
    max_field_error = _number(osec, "max_field_error", "oracle", default=1e-2)
    for name, val in (("max_front_drift", max_front_drift),
                      ("max_field_error", max_field_error)):
        if val <= 0:
            raise ConfigError(f"oracle.{name}", f"must be positive, got {val}")

    outsec = data.get("output", {})
    out_dir = Path(_string(outsec, "dir", "output", default="."))
    out_format = _string(outsec, "format", "output", default="csv",
                         choices=("csv", "jsonl"))

    return RunConfig(
        material=material,
        problem=problem,
        tol=tol,
        max_iter=max_iter,
        oracle=oracle,
        max_front_drift=max_front_drift,
        max_field_error=max_field_error,
        out_dir=out_dir,
        out_format=out_format,
        config_hash=hashlib.sha256(raw).hexdigest(),
    )
