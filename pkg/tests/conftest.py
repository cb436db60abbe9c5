"""Shared fixtures: reference parameter sets and independent root oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from meltfront.material import (CONST, EXP, INV_SQUARE, CoefficientFn,
                                MaterialModel, TransformedProblem)
from meltfront.fronts import (assemble_solution, front_system, solve_fronts)

# Base synthetic reduced problems, one per supported diffusivity pairing.
BASE_PROBLEMS = {
    "ex1": dict(case1_kind=CONST, case2_kind=CONST,
                a=106.066, b=106.849, U1=670320.0, U2=223920.0,
                V2=223920.0, V0=72000.0, Hv=2.69e10, Hm=1.7e9, q0=2.5e8),
    "ex2": dict(case1_kind=INV_SQUARE, case2_kind=INV_SQUARE,
                a=1.0, b=1.2, U1=2.0, U2=1.0, V2=1.0, V0=0.3,
                Hv=5.0, Hm=1.0, q0=3.0),
    "ex3": dict(case1_kind=CONST, case2_kind=EXP,
                a=1.0, b=1.0, U1=1.0, U2=2.0, V2=0.5, V0=1.5,
                Hv=4.0, Hm=2.0, q0=0.5),
}

_PERTURB_KEYS = ("a", "b", "U1", "U2", "V2", "V0", "Hv", "Hm", "q0")


def aluminium_material() -> MaterialModel:
    """Constant-coefficient aluminium-like data set (SI units)."""
    return MaterialModel(
        lambda1=CoefficientFn("constant", 240.0),
        C1=CoefficientFn("constant", 2.7e6),
        lambda2=CoefficientFn("constant", 240.0),
        C2=CoefficientFn("constant", 2.74e6),
        Hv=2.69e10, Hm=0.17e10, Tv=2793.0, Tm=933.0, T0=300.0, q0=2.5e8,
    )


def synthetic_problems(case: str, n: int = 5) -> list[TransformedProblem]:
    """n deterministic solvable perturbations of the base problem."""
    rng = np.random.default_rng(20260824)
    base = BASE_PROBLEMS[case]
    out = []
    tried = 0
    while len(out) < n and tried < 200:
        tried += 1
        factors = rng.uniform(0.8, 1.25, size=len(_PERTURB_KEYS))
        kwargs = dict(base)
        for key, f in zip(_PERTURB_KEYS, factors):
            kwargs[key] = base[key] * f
        try:
            problem = TransformedProblem(**kwargs)
            system = front_system(problem)
            result = solve_fronts(system)
            assemble_solution(system, result)
        except Exception:
            continue
        out.append(problem)
    assert len(out) == n, f"only {len(out)} solvable perturbations for {case}"
    return out


def refine_scan(fn, lo, hi, iters: int = 24, m: int = 17):
    """Independent root locator: repeated grid scan with box shrinkage.

    Minimizes the max-abs of fn over a shrinking box -- no derivatives, no
    Newton steps -- and converges geometrically like a multidimensional
    bisection.  Points where fn raises are treated as infeasible.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    best = None
    for _ in range(iters):
        grids = [np.linspace(a, b, m) for a, b in zip(lo, hi)]
        best_norm = np.inf
        for point in itertools.product(*grids):
            try:
                norm = float(np.max(np.abs(fn(np.asarray(point)))))
            except Exception:
                continue
            if norm < best_norm:
                best_norm = norm
                best = np.asarray(point)
        assert best is not None, "no feasible point in scan box"
        span = (hi - lo) / (m - 1) * 2.5
        lo = np.maximum(lo, best - span)
        hi = np.minimum(hi, best + span)
    return best


@pytest.fixture(scope="session")
def aluminium():
    return aluminium_material()


@pytest.fixture(scope="session")
def base_problem_ex1():
    return TransformedProblem(**BASE_PROBLEMS["ex1"])


@pytest.fixture(scope="session")
def base_problem_ex2():
    return TransformedProblem(**BASE_PROBLEMS["ex2"])


@pytest.fixture(scope="session")
def base_problem_ex3():
    return TransformedProblem(**BASE_PROBLEMS["ex3"])


def solve_problem(problem: TransformedProblem):
    """(system, result, solution) convenience pipeline."""
    system = front_system(problem)
    result = solve_fronts(system)
    return system, result, assemble_solution(system, result)


@pytest.fixture(scope="session")
def solved_cases(base_problem_ex1, base_problem_ex2, base_problem_ex3):
    """Solved base problems keyed by case name."""
    return {
        "ex1": solve_problem(base_problem_ex1),
        "ex2": solve_problem(base_problem_ex2),
        "ex3": solve_problem(base_problem_ex3),
    }
