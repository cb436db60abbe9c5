"""Transcendental systems for the moving-front constants.

Three coefficient-case combinations are supported:

  EX1  D1 = a^2,      D2 = b^2        -> unknowns (omega1, omega2)
  EX2  D1 = a^2/U^2,  D2 = b^2/V^2    -> unknowns (tau1, tau2, nu2)
  EX3  D1 = a^2,      D2 = b^2 e^V    -> unknowns (omega1, nu2)

Each system is solved by damped Newton on residuals scaled per equation by
the largest constituent term (the raw equations mix magnitudes ~1e8 for
metallic parameter sets, so absolute tolerances on raw residuals would be
meaningless).  Initial guesses come from a deterministic grid scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

from .material import CONST, EXP, INV_SQUARE, TransformedProblem
from .profiles import (ParametricExpProfile, ProfileDomainError,
                       _quad_quiet,
                       SimilaritySolution, _erf_diff, _inv_g,
                       fit_erf_liquid, fit_erf_solid, fit_power_liquid,
                       fit_power_solid)

__all__ = [
    "EX1",
    "EX2",
    "EX3",
    "FrontSystem",
    "FrontSolveResult",
    "FrontSolverError",
    "NoBracketError",
    "MaxIterationsError",
    "SingularJacobianError",
    "SingularSystemError",
    "InternalConsistencyError",
    "UnsupportedCombination",
    "front_system",
    "residual_ex1",
    "residual_ex2",
    "residual_ex3",
    "bracket_scan",
    "solve_fronts",
    "assemble_solution",
    "boundary_residuals",
    "derived_fronts",
]

EX1 = "ex1_const_const"
EX2 = "ex2_invsq_invsq"
EX3 = "ex3_const_exp"

_SQRT_PI = math.sqrt(math.pi)
_TINY = 1e-300
# erf differences below this are pure cancellation noise; points there are
# treated as infeasible rather than allowed to fake a root
_DEGENERATE_ERF = 1e-8


class FrontSolverError(RuntimeError):
    pass


class NoBracketError(FrontSolverError):
    pass


class MaxIterationsError(FrontSolverError):
    pass


class SingularJacobianError(FrontSolverError):
    pass


class SingularSystemError(FrontSolverError):
    pass


class InternalConsistencyError(FrontSolverError):
    pass


class UnsupportedCombination(ValueError):
    pass


@dataclass(frozen=True)
class FrontSystem:
    case_tag: str
    problem: TransformedProblem

    @property
    def unknown_names(self) -> tuple[str, ...]:
        return {
            EX1: ("omega1", "omega2"),
            EX2: ("tau1", "tau2", "nu2"),
            EX3: ("omega1", "nu2"),
        }[self.case_tag]


def front_system(p: TransformedProblem) -> FrontSystem:
    """Pick the case tag from the phase diffusivity kinds."""
    pair = (p.case1_kind, p.case2_kind)
    if pair == (CONST, CONST):
        return FrontSystem(EX1, p)
    if pair == (INV_SQUARE, INV_SQUARE):
        return FrontSystem(EX2, p)
    if pair == (CONST, EXP):
        return FrontSystem(EX3, p)
    raise UnsupportedCombination(
        f"no closed-form front system for diffusivity pair {pair}"
    )


@dataclass(frozen=True)
class FrontSolveResult:
    case_tag: str
    solved_unknowns: tuple[float, ...]
    omega1: float
    omega2: float
    residual_norm: float
    iterations: int
    jacobian_condition: float


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def _scaled(raw_terms):
    """(raw residual, scaled residual) from a list of signed terms."""
    raw = math.fsum(raw_terms)
    scale = max(max(abs(t) for t in raw_terms), _TINY)
    return raw, raw / scale


def residual_ex1(p: TransformedProblem, omega1: float, omega2: float):
    """(raw, scaled) residual pair of the constant/constant system."""
    if not (omega2 > omega1 > 0):
        raise ProfileDomainError(f"need omega2 > omega1 > 0, "
                                 f"got {omega1}, {omega2}")
    a, b = p.a, p.b
    de = _erf_diff(0.5 * a * omega2, 0.5 * a * omega1)
    if p.U1 == p.U2:
        slope1 = 0.0
    else:
        if de < _DEGENERATE_ERF:
            raise SingularSystemError("erf difference underflows in phase 1")
        slope1 = a / _SQRT_PI * (p.U2 - p.U1) / de
    ec2 = erfc(0.5 * b * omega2)
    if p.V2 == p.V0:
        slope2 = 0.0
    else:
        if ec2 == 0.0:
            raise SingularSystemError("erfc underflows in phase 2")
        slope2 = -b / _SQRT_PI * (p.V2 - p.V0) / ec2
    f1 = slope1 * math.exp(-0.25 * a * a * omega1 * omega1)
    r1, s1 = _scaled([f1, -0.5 * omega1 * p.Hv, p.q0])
    f2l = slope2 * math.exp(-0.25 * b * b * omega2 * omega2)
    f2r = slope1 * math.exp(-0.25 * a * a * omega2 * omega2)
    r2, s2 = _scaled([f2l, -f2r, -0.5 * omega2 * p.Hm])
    return np.array([r1, r2]), np.array([s1, s2])


def residual_ex2(p: TransformedProblem, tau1: float, tau2: float, nu2: float):
    """(raw, scaled) residual triple of the inverse-square system."""
    if not tau2 > tau1:
        raise ProfileDomainError(f"need tau2 > tau1, got {tau1}, {tau2}")
    a, b = p.a, p.b
    de = _erf_diff(tau2, tau1)
    ec = erfc(nu2)
    if de < _DEGENERATE_ERF or ec == 0.0:
        raise SingularSystemError("degenerate erf terms in the system")
    if min(p.U1, p.U2, p.V2) <= 0:
        raise ProfileDomainError("U1, U2, V2 must be positive for this case")
    du = (p.U2 - p.U1) / _SQRT_PI
    r1, s1 = _scaled([
        du * (a * a / p.U1 - p.Hv) * math.exp(-tau1 * tau1) / de,
        -p.U1 * p.Hv * tau1,
        a * p.q0,
    ])
    lhs2 = -a * b / _SQRT_PI * (p.V2 - p.V0) / p.V2 * \
        math.exp(-nu2 * nu2) / ec
    r2, s2 = _scaled([
        lhs2,
        -du * (a * a / p.U2 + p.Hm) * math.exp(-tau2 * tau2) / de,
        -p.U2 * p.Hm * tau2,
    ])
    w_tau1, w_tau2, w_nu2 = _ex2_fronts(p, tau1, tau2, nu2)
    if not (w_tau1 > 0 and min(w_tau2, w_nu2) > w_tau1):
        raise ProfileDomainError(
            f"induced fronts violate 0 < omega1 < omega2: "
            f"{w_tau1}, {w_tau2}, {w_nu2}"
        )
    r3, s3 = _scaled([w_tau2, -w_nu2])
    return np.array([r1, r2, r3]), np.array([s1, s2, s3])


def _ex2_fronts(p: TransformedProblem, tau1, tau2, nu2):
    """(omega1, omega2 via liquid, omega2 via solid) from the parametric
    front formulas."""
    a, b = p.a, p.b
    de = _erf_diff(tau2, tau1)
    c1 = 2.0 / _SQRT_PI * (p.U2 - p.U1) / de
    c3 = -2.0 / _SQRT_PI * (p.V2 - p.V0) / erfc(nu2)
    w1 = (2.0 * tau1 * p.U1 + c1 * math.exp(-tau1 * tau1)) / a
    w2l = (2.0 * tau2 * p.U2 + c1 * math.exp(-tau2 * tau2)) / a
    w2s = (2.0 * nu2 * p.V2 + c3 * math.exp(-nu2 * nu2)) / b
    return w1, w2l, w2s


def _ex3_inner(p: TransformedProblem, omega1: float, nu2: float):
    """(omega2, g2, c3) of the mixed constant/exponential case."""
    if not (omega1 > 0 and nu2 > 0):
        raise ProfileDomainError(f"need omega1 > 0 and nu2 > 0, "
                                 f"got {omega1}, {nu2}")
    a, b = p.a, p.b
    omega2 = nu2 * math.exp(-0.5 * p.V2)
    if omega2 <= omega1:
        raise ProfileDomainError(
            f"induced omega2={omega2} must exceed omega1={omega1}"
        )
    flux = (0.5 * omega1 * p.Hv - p.q0) * \
        math.exp(0.25 * a * a * (omega1**2 - omega2**2)) + 0.5 * omega2 * p.Hm
    if flux <= 0.0:
        raise ProfileDomainError(
            "total flux at the melting front must be positive for the "
            "2g > nu branch of the implicit relation"
        )
    g2 = 0.5 * nu2 + math.exp(0.5 * p.V2) / flux
    c3 = math.log(2.0 * g2 - nu2) - nu2 / (2.0 * g2 - nu2) \
        - 0.25 * b * b * nu2 * nu2
    if not (math.isfinite(g2) and math.isfinite(c3)):
        raise ProfileDomainError(
            f"degenerate inner constants g2={g2}, c3={c3}"
        )
    return omega2, g2, c3


def residual_ex3(p: TransformedProblem, omega1: float, nu2: float):
    """(raw, scaled) residual pair of the constant/exponential system."""
    a, b = p.a, p.b
    omega2, _, c3 = _ex3_inner(p, omega1, nu2)
    de = _erf_diff(0.5 * a * omega2, 0.5 * a * omega1)
    if de < _DEGENERATE_ERF:
        raise SingularSystemError("erf difference underflows in phase 1")
    f1 = a / _SQRT_PI * (p.U2 - p.U1) / de * \
        math.exp(-0.25 * a * a * omega1 * omega1)
    r1, s1 = _scaled([f1, -0.5 * omega1 * p.Hv, p.q0])
    nu_max = math.sqrt(nu2 * nu2 + 260.0 / (b * b))
    tail, _ = _quad_quiet(lambda s: _inv_g(c3, b, s), nu2, nu_max,
                   epsabs=1e-12, epsrel=1e-10, limit=200)
    r2, s2 = _scaled([p.V2, tail, -p.V0])
    return np.array([r1, r2]), np.array([s1, s2])


def _scaled_residual_fn(sys: FrontSystem):
    p = sys.problem
    if sys.case_tag == EX1:
        return lambda x: residual_ex1(p, x[0], x[1])[1]
    if sys.case_tag == EX2:
        return lambda x: residual_ex2(p, x[0], x[1], x[2])[1]
    return lambda x: residual_ex3(p, x[0], x[1])[1]


def derived_fronts(sys: FrontSystem, x) -> tuple[float, float]:
    """(omega1, omega2) from a solved unknown vector."""
    p = sys.problem
    if sys.case_tag == EX1:
        return float(x[0]), float(x[1])
    if sys.case_tag == EX2:
        w1, w2l, w2s = _ex2_fronts(p, x[0], x[1], x[2])
        return float(w1), float(0.5 * (w2l + w2s))
    return float(x[0]), float(x[1] * math.exp(-0.5 * p.V2))


# ---------------------------------------------------------------------------
# grid scan for initial guesses
# ---------------------------------------------------------------------------

def _log_lin_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Half log-spaced, half linearly spaced points in (lo, hi)."""
    n_log = n // 2
    pts = np.concatenate([
        np.geomspace(lo, hi, n_log),
        np.linspace(lo, hi, n - n_log),
    ])
    return np.unique(pts)


def _scan_norm(fn, points):
    best = None
    best_norm = math.inf
    for x in points:
        try:
            norm = float(np.max(np.abs(fn(x))))
        except (ProfileDomainError, SingularSystemError, ValueError,
                FloatingPointError):
            continue
        if math.isfinite(norm) and norm < best_norm:
            best_norm = norm
            best = np.asarray(x, dtype=float)
    return best, best_norm


def _omega1_range(p: TransformedProblem):
    """Feasible omega1 interval from the sign of the liquid flux equation."""
    if p.Hv <= 0:
        raise NoBracketError("Hv must be positive")
    base = 2.0 * p.q0 / p.Hv
    if p.U2 < p.U1:
        # liquid slope term negative: omega1*Hv/2 - q0 < 0
        if base <= 0.0:
            raise NoBracketError(
                "q0 = 0 leaves no feasible omega1 (upper bound is 0)"
            )
        return 1e-3 * base, base * (1.0 - 1e-9)
    if p.U2 > p.U1:
        lo = base * (1.0 + 1e-9) if base > 0 else 1e-6
        return lo, max(50.0 * base, lo * 1e3)
    # U1 == U2: the first equation pins omega1 = 2 q0 / Hv exactly
    if base <= 0.0:
        raise NoBracketError("q0 = 0 with U1 = U2 has no positive omega1")
    return 0.5 * base, 2.0 * base


def bracket_scan(sys: FrontSystem, n: int = 64) -> np.ndarray:
    """Deterministic grid scan minimizing the scaled residual norm."""
    p = sys.problem
    fn = _scaled_residual_fn(sys)
    if sys.case_tag == EX1:
        lo1, hi1 = _omega1_range(p)
        w1_grid = _log_lin_grid(lo1, hi1, n)
        span = 10.0
        for _ in range(4):
            pts = [(w1, w1 * (1.0 + f))
                   for w1 in w1_grid
                   for f in _log_lin_grid(1e-3, span, n)]
            best, _ = _scan_norm(fn, pts)
            if best is not None:
                return best
            span *= 10.0
        raise NoBracketError("no feasible (omega1, omega2) grid point")
    if sys.case_tag == EX2:
        m = max(12, n // 3)
        grid = _log_lin_grid(1e-2, 4.0, m)
        pts = [(t1, t2, nv)
               for t1 in grid for t2 in grid if t2 > t1
               for nv in grid]
        best, _ = _scan_norm(fn, pts)
        if best is None:
            raise NoBracketError("no feasible (tau1, tau2, nu2) grid point")
        return best
    # EX3
    lo1, hi1 = _omega1_range(p)
    m = max(16, n // 2)
    w1_grid = _log_lin_grid(lo1, hi1, m)
    span = 10.0
    for _ in range(4):
        pts = []
        for w1 in w1_grid:
            nu_lo = w1 * math.exp(0.5 * p.V2)
            for f in _log_lin_grid(1e-3, span, m):
                pts.append((w1, nu_lo * (1.0 + f)))
        best, _ = _scan_norm(fn, pts)
        if best is not None:
            return best
        span *= 10.0
    raise NoBracketError("no feasible (omega1, nu2) grid point")


# ---------------------------------------------------------------------------
# damped Newton
# ---------------------------------------------------------------------------

def solve_fronts(sys: FrontSystem, guess=None, tol: float = 1e-10,
                 max_iter: int = 100) -> FrontSolveResult:
    """Damped Newton with forward-difference Jacobian on scaled residuals."""
    fn = _scaled_residual_fn(sys)
    if guess is None:
        x = bracket_scan(sys)
    else:
        x = np.asarray(guess, dtype=float)
        if x.shape != (len(sys.unknown_names),):
            raise ValueError(
                f"guess must have {len(sys.unknown_names)} entries"
            )

    def safe(xv):
        try:
            return np.asarray(fn(xv), dtype=float)
        except (ProfileDomainError, SingularSystemError, ValueError,
                FloatingPointError):
            return None

    r = safe(x)
    if r is None:
        raise FrontSolverError(f"infeasible starting point {x}")
    norm = float(np.max(np.abs(r)))
    cond = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if norm < tol:
            break
        m = len(x)
        jac = np.empty((len(r), m))
        for j in range(m):
            h = 1e-6 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += h
            rp = safe(xp)
            if rp is None:
                xp[j] = x[j] - h
                rp = safe(xp)
                if rp is None:
                    raise FrontSolverError(
                        f"cannot difference residual at component {j}"
                    )
                jac[:, j] = (r - rp) / h
            else:
                jac[:, j] = (rp - r) / h
        cond = float(np.linalg.cond(jac))
        if not math.isfinite(cond) or cond > 1e14:
            raise SingularJacobianError(
                f"Jacobian condition estimate {cond:.3e} exceeds 1e14"
            )
        step = np.linalg.solve(jac, -r)
        alpha = 1.0
        accepted = False
        for _ in range(31):
            x_new = x + alpha * step
            r_new = safe(x_new)
            if r_new is not None:
                norm_new = float(np.max(np.abs(r_new)))
                if norm_new < norm or norm_new < tol:
                    x, r, norm = x_new, r_new, norm_new
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            step_rel = float(np.max(np.abs(step)) /
                             max(1.0, float(np.max(np.abs(x)))))
            if step_rel < 1e-13:
                break  # converged by step size
            raise MaxIterationsError(
                f"line search failed at iteration {iterations}, "
                f"residual norm {norm:.3e}"
            )
        if float(np.max(np.abs(alpha * step))) < \
                1e-13 * max(1.0, float(np.max(np.abs(x)))):
            break
    else:
        raise MaxIterationsError(
            f"no convergence in {max_iter} iterations, "
            f"residual norm {norm:.3e}"
        )
    if norm >= tol and norm > 1e-8:
        raise MaxIterationsError(
            f"stalled with residual norm {norm:.3e} above tolerance {tol}"
        )
    omega1, omega2 = derived_fronts(sys, x)
    if not (omega2 > omega1 > 0):
        raise InternalConsistencyError(
            f"solved fronts violate ordering: omega1={omega1}, "
            f"omega2={omega2}"
        )
    return FrontSolveResult(
        case_tag=sys.case_tag,
        solved_unknowns=tuple(float(v) for v in x),
        omega1=omega1,
        omega2=omega2,
        residual_norm=norm,
        iterations=iterations,
        jacobian_condition=cond,
    )


# ---------------------------------------------------------------------------
# solution assembly
# ---------------------------------------------------------------------------

def assemble_solution(sys: FrontSystem, res: FrontSolveResult,
                      bc_tol: float = 1e-8) -> SimilaritySolution:
    """Fit the profiles for a converged result and validate every boundary
    condition of the reduced problem by direct evaluation."""
    p = sys.problem
    x = res.solved_unknowns
    tau1 = tau2 = nu2 = None
    if sys.case_tag == EX1:
        liquid = fit_erf_liquid(p, res.omega1, res.omega2)
        solid = fit_erf_solid(p, res.omega2)
    elif sys.case_tag == EX2:
        tau1, tau2, nu2 = x
        liquid = fit_power_liquid(p, tau1, tau2)
        solid = fit_power_solid(p, nu2)
    else:
        nu2 = x[1]
        liquid = fit_erf_liquid(p, res.omega1, res.omega2)
        _, _, c3 = _ex3_inner(p, res.omega1, nu2)
        solid = ParametricExpProfile(c3=c3, coeff=p.b, anchor_nu=nu2,
                                     anchor_w=p.V2, nu_lo=nu2,
                                     nu_hi=math.inf)
    sol = SimilaritySolution(problem=p, liquid=liquid, solid=solid,
                             omega1=res.omega1, omega2=res.omega2,
                             tau1=tau1, tau2=tau2, nu2=nu2)
    _validate_boundary_conditions(sol, bc_tol)
    return sol


def boundary_residuals(sol: SimilaritySolution) -> dict[str, float]:
    """Scaled residuals of the seven boundary conditions."""
    p = sol.problem
    w1, w2 = sol.omega1, sol.omega2
    uw1 = float(sol.U_slope(w1))
    uw2 = float(sol.U_slope(w2))
    vw2 = float(sol.V_slope(w2))
    if isinstance(sol.solid, ParametricExpProfile):
        v_inf = sol.solid.far_field()[0]
    elif hasattr(sol.solid, "limit"):
        v_inf = float(sol.solid.limit())
    else:
        v_inf = float(sol.solid.w_of_tau(8.5))
    out = {}
    out["liquid_flux"] = _scaled([uw1, -0.5 * w1 * p.Hv, p.q0])[1]
    out["liquid_hot"] = (float(sol.U(w1)) - p.U1) / max(abs(p.U1), 1.0)
    out["stefan_flux"] = _scaled([vw2, -uw2, -0.5 * w2 * p.Hm])[1]
    out["liquid_melt"] = (float(sol.U(w2)) - p.U2) / max(abs(p.U2), 1.0)
    out["solid_melt"] = (float(sol.V(w2)) - p.V2) / max(abs(p.V2), 1.0)
    out["far_field"] = (v_inf - p.V0) / max(abs(p.V0), 1.0)
    return out


def _validate_boundary_conditions(sol: SimilaritySolution, tol: float):
    res = boundary_residuals(sol)
    bad = {k: v for k, v in res.items() if abs(v) > tol}
    if bad:
        raise InternalConsistencyError(
            f"boundary-condition residuals exceed {tol}: {bad}"
        )
