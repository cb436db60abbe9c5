"""Acceptance suite: six top-level criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines live.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from meltfront.fronts import front_system, solve_fronts, boundary_residuals
from meltfront.material import (CONST, EXP, INV_SQUARE, TransformedProblem,
                                build_transformed_problem)
from meltfront.oracle import OracleConfig, compare, run
from meltfront.profiles import (ErfProfile, ParametricExpProfile,
                                ParametricPowerProfile, invert_omega,
                                ode_residual, solve_implicit_g)

from conftest import (BASE_PROBLEMS, aluminium_material, solve_problem,
                      synthetic_problems)
import root_oracles


def _finish(name: str, ok: bool, elapsed: float, limit: float, detail: str):
    in_time = elapsed < limit
    status = "PASS" if (ok and in_time) else "FAIL"
    print(f"[acceptance] {name}: {status} "
          f"({elapsed:.2f}s / limit {limit:g}s) {detail}")
    assert ok, f"{name}: {detail}"
    assert in_time, f"{name}: took {elapsed:.2f}s, limit {limit:g}s"


def test_aluminium_regression():
    t0 = time.perf_counter()
    problem = build_transformed_problem(aluminium_material())
    _, result, _ = solve_problem(problem)
    elapsed = time.perf_counter() - t0
    ok = (abs(result.omega1 - 0.0127) < 5e-4
          and abs(result.omega2 - 0.0202) < 5e-4)
    _finish("aluminium regression", ok, elapsed, 1.0,
            f"omega1={result.omega1:.6f} omega2={result.omega2:.6f}")


def _interior_residuals(solution, kinds, n_each):
    """Max scaled ODE residual over n_each interior points per phase."""
    worst = 0.0
    w1, w2 = solution.omega1, solution.omega2
    pad = 1e-3 * (w2 - w1)
    liquid, solid = solution.liquid, solution.solid

    if isinstance(liquid, ErfProfile):
        for om in np.linspace(w1 + pad, w2 - pad, n_each):
            worst = max(worst, abs(ode_residual(liquid, float(om), kinds[0])))
    else:
        t_lo = invert_omega(liquid, w1 + pad)
        t_hi = invert_omega(liquid, w2 - pad)
        for tau in np.linspace(t_lo, t_hi, n_each):
            om = liquid.omega_of_tau(float(tau))
            worst = max(worst, abs(ode_residual(liquid, om, kinds[0],
                                                param=float(tau))))

    w_hi = 3.0 * w2
    if isinstance(solid, ErfProfile):
        for om in np.linspace(w2 + pad, w_hi, n_each):
            worst = max(worst, abs(ode_residual(solid, float(om), kinds[1])))
    else:
        s_lo = invert_omega(solid, w2 + pad)
        s_hi = invert_omega(solid, w_hi)
        for par in np.linspace(s_lo, s_hi, n_each):
            om = solid.omega_of_nu(float(par)) \
                if isinstance(solid, ParametricExpProfile) \
                else solid.omega_of_tau(float(par))
            worst = max(worst, abs(ode_residual(solid, om, kinds[1],
                                                param=float(par))))
    return worst


def test_exact_solution_residuals():
    t0 = time.perf_counter()
    kinds = {"ex1": (CONST, CONST), "ex2": (INV_SQUARE, INV_SQUARE),
             "ex3": (CONST, EXP)}
    worst_ode = 0.0
    worst_bc = 0.0
    for case, kind_pair in kinds.items():
        problem = TransformedProblem(**BASE_PROBLEMS[case])
        _, _, solution = solve_problem(problem)
        worst_ode = max(worst_ode,
                        _interior_residuals(solution, kind_pair, 500))
        worst_bc = max(worst_bc, max(abs(v) for v in
                                     boundary_residuals(solution).values()))
    elapsed = time.perf_counter() - t0
    ok = worst_ode < 1e-8 and worst_bc < 1e-8
    _finish("exact-solution residuals", ok, elapsed, 5.0,
            f"max ODE residual {worst_ode:.2e}, max BC {worst_bc:.2e} "
            f"(1000 interior points per case)")


def test_oracle_agreement():
    t0 = time.perf_counter()
    problem = build_transformed_problem(aluminium_material())
    _, _, solution = solve_problem(problem)

    cfg = OracleConfig(t_start=1.0, t_end=100.0, n_liquid=256, n_solid=256)
    report = compare(run(solution, cfg), solution)
    drift_ok = all(max(s["drift1"], s["drift2"]) < 1e-2
                   for s in report["samples"])
    field_ok = report["field_error_max"] < 1e-2

    errors = []
    for n in (32, 64, 128):
        c = OracleConfig(t_start=1.0, t_end=4.0, n_liquid=n, n_solid=n,
                         n_samples=3)
        errors.append(compare(run(solution, c), solution)["field_error_max"])
    ratios = [errors[i] / errors[i + 1] for i in range(2)]
    order_ok = all(2.5 < r < 6.5 for r in ratios)

    elapsed = time.perf_counter() - t0
    _finish("oracle agreement", drift_ok and field_ok and order_ok,
            elapsed, 60.0,
            f"drift {max(report['front1_drift_max'], report['front2_drift_max']):.2e}, "
            f"field {report['field_error_max']:.2e}, "
            f"refinement ratios {ratios[0]:.2f}/{ratios[1]:.2f}")


def _integrate_ode(d_of_w, omega_grid, w0, wp0):
    """High-order direct integration of W'' + (omega/2) D(W) W' = 0."""
    def rhs(om, y):
        return [y[1], -0.5 * om * d_of_w(y[0]) * y[1]]

    out = solve_ivp(rhs, (omega_grid[0], omega_grid[-1]), [w0, wp0],
                    method="DOP853", t_eval=omega_grid,
                    rtol=1e-11, atol=1e-13)
    assert out.success, out.message
    return out.y[0]


def test_closed_form_family_certification():
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    worst = 0.0

    for _ in range(5):  # erf family, D = coeff^2
        c1 = rng.uniform(-2.0, 2.0) or 1.0
        c2 = rng.uniform(-1.0, 1.0)
        a = rng.uniform(0.5, 2.0)
        profile = ErfProfile(c1=c1, c2=c2, coeff=a)
        grid = np.linspace(0.1, 2.5 / a, 60)
        exact = profile.value(grid)
        scale = max(np.max(np.abs(exact)), 1.0)
        numeric = _integrate_ode(lambda w: a * a, grid,
                                 float(profile.value(grid[0])),
                                 float(profile.slope(grid[0])))
        worst = max(worst, float(np.max(np.abs(numeric - exact))) / scale)

    for _ in range(5):  # power family, D = coeff^2 / W^2
        c1 = rng.uniform(0.5, 2.0)
        c2 = rng.uniform(1.0, 3.0)
        a = rng.uniform(0.5, 2.0)
        profile = ParametricPowerProfile(c1=c1, c2=c2, coeff=a,
                                         tau_lo=0.1, tau_hi=1.5)
        taus = np.linspace(0.1, 1.5, 60)
        pairs = [profile.eval(float(t)) for t in taus]
        grid = np.array([p[0] for p in pairs])
        exact = np.array([p[1] for p in pairs])
        scale = max(np.max(np.abs(exact)), 1.0)
        numeric = _integrate_ode(lambda w: a * a / (w * w), grid,
                                 float(exact[0]),
                                 float(profile.slope_at_tau(float(taus[0]))))
        worst = max(worst, float(np.max(np.abs(numeric - exact))) / scale)

    for _ in range(5):  # implicit exponential family, D = coeff^2 e^W
        c3 = rng.uniform(-1.0, 1.0)
        b = rng.uniform(0.5, 1.5)
        nu0 = rng.uniform(0.5, 1.5)
        w0 = rng.uniform(0.3, 1.0)
        profile = ParametricExpProfile(c3=c3, coeff=b, anchor_nu=nu0,
                                       anchor_w=w0, nu_lo=nu0,
                                       nu_hi=nu0 + 2.0)
        nus = np.linspace(nu0, nu0 + 2.0, 60)
        exact = profile.w_many(nus)
        grid = nus * np.exp(-0.5 * exact)
        assert np.all(np.diff(grid) > 0)
        scale = max(np.max(np.abs(exact)), 1.0)
        numeric = _integrate_ode(
            lambda w: b * b * math.exp(w), grid, float(exact[0]),
            float(profile.slope_at_nu(float(nus[0]), w=float(exact[0]))))
        worst = max(worst, float(np.max(np.abs(numeric - exact))) / scale)

    elapsed = time.perf_counter() - t0
    _finish("closed-form family certification", worst < 1e-6, elapsed, 10.0,
            f"max relative deviation {worst:.2e} "
            f"(3 families x 5 random constants)")


def test_inversion_and_implicit_relation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)

    worst_rt = 0.0
    power = ParametricPowerProfile(c1=1.3, c2=2.0, coeff=0.8,
                                   tau_lo=0.1, tau_hi=2.0)
    exp_prof = ParametricExpProfile(c3=0.3, coeff=1.0, anchor_nu=1.0,
                                    anchor_w=0.5, nu_lo=0.2, nu_hi=4.0)
    for _ in range(25):
        tau = rng.uniform(0.1, 2.0)
        om = power.omega_of_tau(tau)
        worst_rt = max(worst_rt, abs(invert_omega(power, om) - tau))
        nu = rng.uniform(0.2, 4.0)
        om = exp_prof.omega_of_nu(nu)
        worst_rt = max(worst_rt, abs(invert_omega(exp_prof, om) - nu))

    worst_g = 0.0
    for _ in range(50):
        c3 = rng.uniform(-2.0, 2.0)
        b = rng.uniform(0.3, 2.0)
        nu = rng.uniform(0.0, 5.0)
        g = solve_implicit_g(c3, b, nu)
        resid = math.log(2.0 * g - nu) - nu / (2.0 * g - nu) \
            - 0.25 * b * b * nu * nu - c3
        worst_g = max(worst_g, abs(resid))
    # closed form at nu = 0
    for c3 in (-1.5, 0.0, 0.7):
        worst_g = max(worst_g,
                      abs(solve_implicit_g(c3, 1.0, 0.0)
                          - 0.5 * math.exp(c3)))

    elapsed = time.perf_counter() - t0
    ok = worst_rt < 1e-10 and worst_g < 1e-12
    _finish("inversion and implicit relation", ok, elapsed, 2.0,
            f"round trip {worst_rt:.2e}, implicit residual {worst_g:.2e}")


def test_root_certification():
    t0 = time.perf_counter()
    oracles = {"ex1": root_oracles.certified_roots_ex1,
               "ex2": root_oracles.certified_roots_ex2,
               "ex3": root_oracles.certified_roots_ex3}
    worst = 0.0
    checked = 0
    for case, oracle in oracles.items():
        for problem in synthetic_problems(case, n=5):
            newton = solve_fronts(front_system(problem)).solved_unknowns
            candidates = oracle(problem)
            assert candidates, f"{case}: oracle found no roots"
            diff = min(
                max(abs(c - n) for c, n in zip(cand, newton))
                for cand in candidates
            )
            worst = max(worst, diff)
            checked += 1
    elapsed = time.perf_counter() - t0
    _finish("root certification", worst < 1e-6 and checked == 15,
            elapsed, 30.0,
            f"max per-unknown deviation {worst:.2e} over {checked} sets")
