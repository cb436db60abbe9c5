"""Independent finite-difference verifier for the moving-boundary problem.

The two moving phase domains are mapped onto fixed unit intervals
(front-fixing): xi = (x - S1)/(S2 - S1) for the inner phase and
eta = (x - S2)/(L - S2) for the outer phase, with the truncation radius
L(t) = far_field_factor * S2(t).  In the fixed coordinates each phase obeys

    W_t = d(W)/h^2 * W_xixi + (xdot(xi)/h) * W_xi,

where h is the domain width, d the transformed diffusivity and xdot the
mesh velocity of the node.  Time stepping is a theta-weighted tridiagonal
solve per phase; front positions advance with a Heun predictor-corrector,
so theta = 1/2 gives a second-order scheme overall.  Front velocities come
from the flux-jump conditions with one-sided second-order derivatives:

    dS1/dt = (U_x(S1) + q0/sqrt(t)) / Hv
    dS2/dt = (V_x(S2) - U_x(S2)) / Hm
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .material import TransformedProblem
from .profiles import ErfProfile, SimilaritySolution

__all__ = [
    "FrontCollisionError",
    "OracleConfig",
    "OracleState",
    "OracleSample",
    "OracleTrajectory",
    "init_from_similarity",
    "step",
    "run",
    "compare",
]


class FrontCollisionError(RuntimeError):
    """The two fronts met or crossed during time stepping."""


@dataclass(frozen=True)
class OracleConfig:
    """Simulation parameters of the finite-difference verifier."""

    t_start: float
    t_end: float
    n_liquid: int = 256
    n_solid: int = 256
    far_field_factor: float = 10.0
    cfl: float = 0.4
    theta: float = 0.5
    n_samples: int = 33

    def __post_init__(self):
        if not (self.t_end >= self.t_start > 0):
            raise ValueError(
                f"need t_end >= t_start > 0, got {self.t_start}, {self.t_end}"
            )
        if self.n_liquid < 16 or self.n_solid < 16:
            raise ValueError("grid counts must be at least 16 cells")
        if self.far_field_factor < 10.0:
            raise ValueError("far_field_factor must be at least 10")
        if not (0.0 < self.cfl < 1.0):
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if not (0.5 <= self.theta <= 1.0):
            raise ValueError(f"theta must lie in [0.5, 1], got {self.theta}")
        if self.n_samples < 2:
            raise ValueError("need at least 2 sample times")


@dataclass(frozen=True)
class OracleState:
    """Fields on the two fixed unit grids plus the front positions."""

    problem: TransformedProblem
    t: float
    s1: float
    s2: float
    u: np.ndarray  # liquid values on xi = linspace(0, 1, n_liquid + 1)
    v: np.ndarray  # solid values on eta = linspace(0, 1, n_solid + 1)
    far_field_factor: float

    def __post_init__(self):
        if not self.s2 > self.s1 > 0:
            raise FrontCollisionError(
                f"front ordering violated: s1={self.s1}, s2={self.s2}"
            )

    @property
    def far_radius(self) -> float:
        return self.far_field_factor * self.s2

    def liquid_x(self) -> np.ndarray:
        xi = np.linspace(0.0, 1.0, self.u.size)
        return self.s1 + xi * (self.s2 - self.s1)

    def solid_x(self) -> np.ndarray:
        eta = np.linspace(0.0, 1.0, self.v.size)
        return self.s2 + eta * (self.far_radius - self.s2)


@dataclass(frozen=True)
class OracleSample:
    t: float
    s1: float
    s2: float
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class OracleTrajectory:
    problem: TransformedProblem
    config: OracleConfig
    samples: tuple[OracleSample, ...]

    def __post_init__(self):
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be strictly increasing")

    def omega_hats(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(t, s1/sqrt(t), s2/sqrt(t)) arrays over the samples."""
        t = np.array([s.t for s in self.samples])
        s1 = np.array([s.s1 for s in self.samples])
        s2 = np.array([s.s2 for s in self.samples])
        rt = np.sqrt(t)
        return t, s1 / rt, s2 / rt


def init_from_similarity(sol: SimilaritySolution,
                         cfg: OracleConfig) -> OracleState:
    """Sample the similarity profiles onto the fixed grids at t_start."""
    rt = math.sqrt(cfg.t_start)
    s1 = sol.omega1 * rt
    s2 = sol.omega2 * rt
    xi = np.linspace(0.0, 1.0, cfg.n_liquid + 1)
    eta = np.linspace(0.0, 1.0, cfg.n_solid + 1)
    far = cfg.far_field_factor * s2
    omega_liq = (s1 + xi * (s2 - s1)) / rt
    omega_sol = (s2 + eta * (far - s2)) / rt
    u = _eval_profile(sol.liquid, omega_liq)
    v = _eval_profile(sol.solid, omega_sol)
    # Pin the interface nodes exactly.  The outer node keeps the sampled
    # profile value: the truncation radius sits at a fixed similarity
    # coordinate (L proportional to sqrt(t)), so that value is the correct
    # time-independent Dirichlet datum even for slowly decaying profiles.
    p = sol.problem
    u[0], u[-1] = p.U1, p.U2
    v[0] = p.V2
    return OracleState(problem=p, t=cfg.t_start, s1=s1, s2=s2, u=u, v=v,
                       far_field_factor=cfg.far_field_factor)


def _eval_profile(profile, omegas):
    """Profile values on an omega array (parametric families point by
    point; the erf family vectorizes directly)."""
    if isinstance(profile, ErfProfile):
        return np.asarray(profile.value(omegas), dtype=float).copy()
    out = np.empty(len(omegas))
    for i, om in enumerate(omegas):
        out[i] = float(profile.value(float(om)))
    return out


def _front_velocities(state: OracleState):
    """(ds1/dt, ds2/dt) from the flux-jump conditions."""
    p = state.problem
    u, v = state.u, state.v
    h1 = state.s2 - state.s1
    h2 = state.far_radius - state.s2
    n1 = u.size - 1
    n2 = v.size - 1
    # one-sided second-order derivatives in the unit coordinate
    ux_lo = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * 0.5 * n1 / h1
    ux_hi = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) * 0.5 * n1 / h1
    vx_lo = (-3.0 * v[0] + 4.0 * v[1] - v[2]) * 0.5 * n2 / h2
    q = p.q0 / math.sqrt(state.t)
    v1 = (ux_lo + q) / p.Hv
    v2 = (vx_lo - ux_hi) / p.Hm
    return v1, v2


def _theta_solve(w_old, h_old, h_new, vel, d_old, d_new, dt, theta):
    """One theta-weighted step of W_t = d/h^2 W_xixi + vel/h W_xi with
    Dirichlet endpoints (carried over unchanged from w_old)."""
    n = w_old.size - 1
    dxi = 1.0 / n
    interior = slice(1, n)

    def lap(w):
        return w[2:] - 2.0 * w[1:-1] + w[:-2]

    def grad(w):
        return 0.5 * (w[2:] - w[:-2])

    diff_old = d_old[interior] / (h_old * h_old * dxi * dxi)
    adv_old = vel[interior] / (h_old * dxi)
    rhs = w_old[interior] + (1.0 - theta) * dt * (
        diff_old * lap(w_old) + adv_old * grad(w_old)
    )

    diff_new = theta * dt * d_new[interior] / (h_new * h_new * dxi * dxi)
    adv_new = theta * dt * vel[interior] / (h_new * dxi)
    lower = -(diff_new - 0.5 * adv_new)   # multiplies W_{i-1}
    diag = 1.0 + 2.0 * diff_new
    upper = -(diff_new + 0.5 * adv_new)   # multiplies W_{i+1}
    rhs[0] -= lower[0] * w_old[0]
    rhs[-1] -= upper[-1] * w_old[-1]

    ab = np.zeros((3, n - 1))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    w_new = w_old.copy()
    w_new[interior] = solve_banded((1, 1), ab, rhs)
    return w_new


def _phase_step(w_old, lo_old, hi_old, lo_new, hi_new, d_old, d_new,
                dt, theta):
    """Advance one phase given old/new domain endpoints."""
    n = w_old.size - 1
    xi = np.linspace(0.0, 1.0, n + 1)
    x_old = lo_old + xi * (hi_old - lo_old)
    x_new = lo_new + xi * (hi_new - lo_new)
    vel = (x_new - x_old) / dt
    return _theta_solve(w_old, hi_old - lo_old, hi_new - lo_new,
                        vel, d_old, d_new, dt, theta)


def _choose_dt(state: OracleState, cfg: OracleConfig, v1, v2):
    """Front-velocity CFL: no mesh node moves more than cfl cells."""
    n1 = state.u.size - 1
    n2 = state.v.size - 1
    dx1 = (state.s2 - state.s1) / n1
    dx2 = (state.far_radius - state.s2) / n2
    vmax1 = max(abs(v1), abs(v2), 1e-300)
    vmax2 = max(abs(v2) * state.far_field_factor, 1e-300)
    return cfg.cfl * min(dx1 / vmax1, dx2 / vmax2)


def step(state: OracleState, cfg: OracleConfig,
         dt: float | None = None) -> OracleState:
    """One Heun/theta time step; dt defaults to the front-velocity CFL."""
    p = state.problem
    v1, v2 = _front_velocities(state)
    if dt is None:
        dt = _choose_dt(state, cfg, v1, v2)
    ff = state.far_field_factor

    def advance(s1_new, s2_new, d1_new, d2_new):
        u_new = _phase_step(state.u, state.s1, state.s2, s1_new, s2_new,
                            p.d1_of_U(state.u), d1_new, dt, cfg.theta)
        v_new = _phase_step(state.v, state.s2, ff * state.s2,
                            s2_new, ff * s2_new,
                            p.d2_of_V(state.v), d2_new, dt, cfg.theta)
        return u_new, v_new

    # predictor: Euler fronts, implicit coefficients frozen at the old state
    s1_p = state.s1 + dt * v1
    s2_p = state.s2 + dt * v2
    if s2_p <= s1_p:
        raise FrontCollisionError(
            f"fronts collided during predictor at t={state.t + dt}"
        )
    u_p, v_p = advance(s1_p, s2_p, p.d1_of_U(state.u), p.d2_of_V(state.v))
    pred = OracleState(problem=p, t=state.t + dt, s1=s1_p, s2=s2_p,
                       u=u_p, v=v_p, far_field_factor=ff)
    v1_p, v2_p = _front_velocities(pred)

    # corrector: trapezoidal fronts, implicit coefficients at the predictor
    s1_n = state.s1 + 0.5 * dt * (v1 + v1_p)
    s2_n = state.s2 + 0.5 * dt * (v2 + v2_p)
    if s2_n <= s1_n:
        raise FrontCollisionError(
            f"fronts collided during corrector at t={state.t + dt}"
        )
    u_n, v_n = advance(s1_n, s2_n, p.d1_of_U(u_p), p.d2_of_V(v_p))
    return OracleState(problem=p, t=state.t + dt, s1=s1_n, s2=s2_n,
                       u=u_n, v=v_n, far_field_factor=ff)


def run(sol: SimilaritySolution, cfg: OracleConfig) -> OracleTrajectory:
    """Integrate t_start -> t_end, sampling at geometric time intervals."""
    state = init_from_similarity(sol, cfg)
    samples = [OracleSample(state.t, state.s1, state.s2,
                            state.u.copy(), state.v.copy())]
    if cfg.t_end == cfg.t_start:
        return OracleTrajectory(problem=sol.problem, config=cfg,
                                samples=tuple(samples))
    targets = np.geomspace(cfg.t_start, cfg.t_end, cfg.n_samples)[1:]
    for target in targets:
        while state.t < target * (1.0 - 1e-13):
            v1, v2 = _front_velocities(state)
            dt = min(_choose_dt(state, cfg, v1, v2), target - state.t)
            state = step(state, cfg, dt)
        samples.append(OracleSample(state.t, state.s1, state.s2,
                                    state.u.copy(), state.v.copy()))
    return OracleTrajectory(problem=sol.problem, config=cfg,
                            samples=tuple(samples))


def compare(traj: OracleTrajectory, sol: SimilaritySolution) -> dict:
    """Error report: front-constant drift over time plus the transformed-field
    mismatch at the final sample, all relative."""
    t, w1_hat, w2_hat = traj.omega_hats()
    d1 = np.abs(w1_hat - sol.omega1) / sol.omega1
    d2 = np.abs(w2_hat - sol.omega2) / sol.omega2

    last = traj.samples[-1]
    rt = math.sqrt(last.t)
    p = traj.problem
    xi = np.linspace(0.0, 1.0, last.u.size)
    eta = np.linspace(0.0, 1.0, last.v.size)
    far = traj.config.far_field_factor * last.s2
    omega_liq = (last.s1 + xi * (last.s2 - last.s1)) / rt
    omega_sol = (last.s2 + eta * (far - last.s2)) / rt
    u_exact = _eval_profile(sol.liquid, omega_liq)
    v_exact = _eval_profile(sol.solid, omega_sol)
    scale_u = max(abs(p.U1 - p.U2), 1e-300)
    scale_v = max(abs(p.V2 - p.V0), 1e-300)
    err_u = float(np.max(np.abs(last.u - u_exact))) / scale_u
    err_v = float(np.max(np.abs(last.v - v_exact))) / scale_v

    return {
        "t_final": float(last.t),
        "front1_drift_max": float(np.max(d1)),
        "front2_drift_max": float(np.max(d2)),
        "front1_drift_rms": float(np.sqrt(np.mean(d1 * d1))),
        "front2_drift_rms": float(np.sqrt(np.mean(d2 * d2))),
        "field_error_liquid": err_u,
        "field_error_solid": err_v,
        "field_error_max": max(err_u, err_v),
        "samples": [
            {"t": float(ti), "omega1_hat": float(a), "omega2_hat": float(b),
             "drift1": float(da), "drift2": float(db)}
            for ti, a, b, da, db in zip(t, w1_hat, w2_hat, d1, d2)
        ],
    }
