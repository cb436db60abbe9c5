"""Closed-form profile families of the reduced similarity ODEs.

The reduced problem is W'' + (omega/2) D(W) W' = 0 with D one of
coeff^2, coeff^2/W^2 or coeff^2 * exp(W).  The three families:

  * ErfProfile            -- D const; W(omega) explicit through erf.
  * ParametricPowerProfile-- D = coeff^2/W^2; (omega, W) parametrized by tau.
  * ParametricExpProfile  -- D = coeff^2 e^W; W from an implicit relation
                             g(nu) plus a quadrature, omega = nu e^{-W/2}.

All profiles are immutable; evaluation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import warnings

from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq
from scipy.special import erf, erfc

from .material import (CONST, EXP, INV_SQUARE, MaterialModel, PhaseMaps,
                       TransformedProblem, kirchhoff_maps)

__all__ = [
    "SingularFitError",
    "ProfileDomainError",
    "NoRootError",
    "ErfProfile",
    "ParametricPowerProfile",
    "ParametricExpProfile",
    "SimilaritySolution",
    "fit_erf_liquid",
    "fit_erf_solid",
    "eval_erf",
    "fit_power_liquid",
    "fit_power_solid",
    "eval_param_power",
    "invert_omega",
    "solve_implicit_g",
    "eval_param_exp",
    "ode_residual",
    "reconstruct_field",
]

_SQRT_PI = math.sqrt(math.pi)
_INVERT_TOL = 1e-12


def _quad_quiet(fn, lo, hi, **kw):
    """quad with roundoff chatter suppressed (tails reach float noise)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(fn, lo, hi, **kw)


class SingularFitError(ValueError):
    """Profile fit with a degenerate interpolation system."""


class ProfileDomainError(ValueError):
    """Evaluation outside a profile's admissible domain."""


class NoRootError(RuntimeError):
    """Root search exhausted its bracket."""


# ---------------------------------------------------------------------------
# erf family (constant diffusivity)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErfProfile:
    """W(omega) = c2 + c1 * (sqrt(pi)/coeff) * erf(coeff*omega/2)."""

    c1: float
    c2: float
    coeff: float

    def value(self, omega):
        z = 0.5 * self.coeff * np.asarray(omega, dtype=float)
        return self.c2 + self.c1 * _SQRT_PI / self.coeff * erf(z)

    def slope(self, omega):
        z = 0.5 * self.coeff * np.asarray(omega, dtype=float)
        return self.c1 * np.exp(-z * z)

    def curvature(self, omega):
        om = np.asarray(omega, dtype=float)
        z = 0.5 * self.coeff * om
        return -0.5 * self.coeff**2 * om * self.c1 * np.exp(-z * z)

    def limit(self):
        """Value as omega -> +inf."""
        return self.c2 + self.c1 * _SQRT_PI / self.coeff


def _erf_diff(z_hi, z_lo):
    # erf(z_hi) - erf(z_lo) without cancellation for large arguments
    return erfc(z_lo) - erfc(z_hi)


def fit_erf_liquid(p: TransformedProblem, omega1: float,
                   omega2: float) -> ErfProfile:
    """Interpolate (omega1, U1), (omega2, U2) within the erf family."""
    if not (omega2 > omega1 > 0):
        raise ProfileDomainError(f"need omega2 > omega1 > 0, "
                                 f"got {omega1}, {omega2}")
    a = p.a
    de = _erf_diff(0.5 * a * omega2, 0.5 * a * omega1)
    if p.U1 == p.U2:
        return ErfProfile(c1=0.0, c2=p.U1, coeff=a)
    if de == 0.0:
        raise SingularFitError(
            f"erf({a * omega2 / 2}) - erf({a * omega1 / 2}) underflows"
        )
    c1 = a / _SQRT_PI * (p.U2 - p.U1) / de
    c2 = (p.U1 * erf(0.5 * a * omega2) - p.U2 * erf(0.5 * a * omega1)) / de
    return ErfProfile(c1=c1, c2=c2, coeff=a)


def fit_erf_solid(p: TransformedProblem, omega2: float) -> ErfProfile:
    """Interpolate (omega2, V2) with far-field limit V0."""
    if not omega2 > 0:
        raise ProfileDomainError(f"need omega2 > 0, got {omega2}")
    b = p.b
    ec = erfc(0.5 * b * omega2)
    if p.V2 == p.V0:
        return ErfProfile(c1=0.0, c2=p.V2, coeff=b)
    if ec == 0.0:
        raise SingularFitError(
            f"erfc({b * omega2 / 2}) underflows; omega2 too large for "
            f"coefficient b={b}"
        )
    c3 = -b / _SQRT_PI * (p.V2 - p.V0) / ec
    c4 = p.V0 + (p.V2 - p.V0) / ec
    return ErfProfile(c1=c3, c2=c4, coeff=b)


def eval_erf(profile: ErfProfile, omega):
    return profile.value(omega)


# ---------------------------------------------------------------------------
# parametric power family (inverse-square diffusivity)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParametricPowerProfile:
    """W(tau) = c1*(sqrt(pi)/2 * erf(tau) + c2),
    omega(tau) = (2*tau*W + c1*exp(-tau^2)) / coeff.

    omega(tau) is strictly increasing wherever W > 0
    (d omega/d tau = 2 W / coeff).
    """

    c1: float
    c2: float
    coeff: float
    tau_lo: float
    tau_hi: float  # may be +inf for a half-open working range

    def _check(self, tau):
        if not (self.tau_lo <= tau <= self.tau_hi):
            raise ProfileDomainError(
                f"tau={tau} outside working range "
                f"[{self.tau_lo}, {self.tau_hi}]"
            )

    def w_of_tau(self, tau):
        return self.c1 * (0.5 * _SQRT_PI * erf(tau) + self.c2)

    def omega_of_tau(self, tau):
        w = self.w_of_tau(tau)
        return (2.0 * tau * w + self.c1 * math.exp(-tau * tau)) / self.coeff

    def eval(self, tau):
        """(omega, W) at parameter tau; W must stay positive."""
        self._check(tau)
        w = self.w_of_tau(tau)
        if w <= 0.0:
            raise ProfileDomainError(
                f"W(tau={tau}) = {w} <= 0; outside the monotone branch"
            )
        return (2.0 * tau * w + self.c1 * math.exp(-tau * tau)) / self.coeff, w

    def slope_at_tau(self, tau):
        """dW/domega via the chain rule dW/dtau / (domega/dtau)."""
        w = self.w_of_tau(tau)
        return self.coeff * self.c1 * math.exp(-tau * tau) / (2.0 * w)

    def value(self, omega):
        return self.eval(invert_omega(self, omega))[1]

    def slope(self, omega):
        return self.slope_at_tau(invert_omega(self, omega))


def fit_power_liquid(p: TransformedProblem, tau1: float,
                     tau2: float) -> ParametricPowerProfile:
    """Constants from W(tau1)=U1, W(tau2)=U2."""
    if not tau2 > tau1:
        raise ProfileDomainError(f"need tau2 > tau1, got {tau1}, {tau2}")
    de = _erf_diff(tau2, tau1)
    if de == 0.0 or p.U1 == p.U2:
        raise SingularFitError("degenerate liquid data for the power family")
    c1 = 2.0 / _SQRT_PI * (p.U2 - p.U1) / de
    c2 = 0.5 * _SQRT_PI * (p.U1 * erf(tau2) - p.U2 * erf(tau1)) / (p.U2 - p.U1)
    margin = 0.1 * (tau2 - tau1)
    return ParametricPowerProfile(c1=c1, c2=c2, coeff=p.a,
                                  tau_lo=tau1 - margin, tau_hi=tau2 + margin)


def fit_power_solid(p: TransformedProblem, nu2: float) -> ParametricPowerProfile:
    """Constants from W(nu2)=V2 and W(+inf)=V0."""
    ec = erfc(nu2)
    if ec == 0.0 or p.V2 == p.V0:
        raise SingularFitError("degenerate solid data for the power family")
    c3 = -2.0 / _SQRT_PI * (p.V2 - p.V0) / ec
    c4 = 0.5 * _SQRT_PI * (p.V0 * erf(nu2) - p.V2) / (p.V2 - p.V0)
    return ParametricPowerProfile(c1=c3, c2=c4, coeff=p.b,
                                  tau_lo=nu2, tau_hi=math.inf)


def eval_param_power(profile: ParametricPowerProfile, tau: float):
    """(omega, W) at tau; errors if W(tau) <= 0 or tau out of range."""
    return profile.eval(tau)


def invert_omega(profile, omega: float) -> float:
    """Parameter (tau or nu) with omega(parameter) = omega.

    Works for both parametric families; safeguarded root finding on the
    strictly monotone parameter -> omega map.
    """
    if isinstance(profile, ParametricPowerProfile):
        fn = profile.omega_of_tau
    elif isinstance(profile, ParametricExpProfile):
        fn = profile.omega_of_nu
    else:
        raise TypeError(f"cannot invert {type(profile).__name__}")
    lo = profile.tau_lo if isinstance(profile, ParametricPowerProfile) \
        else profile.nu_lo
    hi = profile.tau_hi if isinstance(profile, ParametricPowerProfile) \
        else profile.nu_hi
    w_lo = fn(lo)
    if omega < w_lo - _INVERT_TOL * max(1.0, abs(omega)):
        raise ProfileDomainError(
            f"omega={omega} below image lower end {w_lo}"
        )
    if math.isfinite(hi):
        w_hi = fn(hi)
        if omega > w_hi + _INVERT_TOL * max(1.0, abs(omega)):
            raise ProfileDomainError(
                f"omega={omega} above image [{w_lo}, {w_hi}]"
            )
        if omega >= w_hi:
            return hi
    else:
        # expand a finite bracket for the half-open range
        hi = max(lo + 1.0, 2.0 * abs(lo) + 1.0)
        for _ in range(200):
            if fn(hi) >= omega:
                break
            hi = lo + 2.0 * (hi - lo)
        else:
            raise NoRootError(f"could not bracket omega={omega}")
    if omega <= w_lo:
        return lo
    root = brentq(lambda s: fn(s) - omega, lo, hi,
                  xtol=1e-15, rtol=8.9e-16, maxiter=200)
    if abs(fn(root) - omega) > _INVERT_TOL * max(1.0, abs(omega)):
        raise NoRootError(f"inversion stalled at omega={omega}")
    return root


# ---------------------------------------------------------------------------
# implicit exponential family
# ---------------------------------------------------------------------------

def _log_gap(c3: float, b: float, nu: float) -> float:
    """w = log(2 g - nu) solving  w - nu*exp(-w) = c3 + (b^2/4) nu^2.

    The left side is strictly increasing and concave in w, so Newton from
    an upper starting point converges monotonically; bisection backs it up.
    """
    rhs = c3 + 0.25 * b * b * nu * nu

    def f(w):
        e = -w
        if e > 700.0:  # nu*exp(-w) overflows: f -> -inf
            return -math.inf
        return w - nu * math.exp(e) - rhs

    # upper bound: w* = rhs + nu*exp(-w*) <= rhs + nu*exp(-rhs)
    try:
        hi = rhs + nu * math.exp(-rhs)
    except OverflowError:
        hi = math.inf
    if not math.isfinite(hi):
        hi = max(rhs, math.log(nu) + 1.0)
        while f(hi) < 0.0:
            hi += 1.0
    w = hi
    for _ in range(100):
        fw = f(w)
        if fw == -math.inf:
            break
        fp = 1.0 + nu * math.exp(-w)
        step = fw / fp
        w_new = w - step
        if abs(step) < 1e-15 * max(1.0, abs(w)):
            return w_new
        w = w_new
    # fall back to bisection on a sign-changing bracket
    lo = min(w, rhs) - 1.0
    while f(lo) > 0.0:
        lo -= max(1.0, abs(lo))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def solve_implicit_g(c3: float, b: float, nu: float) -> float:
    """g with log(2g - nu) - nu/(2g - nu) - (b^2/4) nu^2 = c3, 2g > nu."""
    if nu < 0:
        raise ProfileDomainError(f"nu must be >= 0, got {nu}")
    if nu == 0.0:
        return 0.5 * math.exp(c3)
    w = _log_gap(c3, b, nu)
    if w > 700.0:
        return math.inf
    g = 0.5 * (nu + math.exp(w))
    resid = math.log(2.0 * g - nu) - nu / (2.0 * g - nu) \
        - 0.25 * b * b * nu * nu - c3
    if abs(resid) > 1e-10:
        raise NoRootError(
            f"implicit g relation not satisfied at nu={nu}: residual {resid}"
        )
    return g


def _inv_g(c3: float, b: float, nu: float) -> float:
    """1/g evaluated overflow-safely (g grows like exp(b^2 nu^2/4))."""
    if nu == 0.0:
        return 2.0 * math.exp(-c3)
    w = _log_gap(c3, b, nu)
    if w > 700.0:
        ew = 0.0
    else:
        ew = math.exp(-w)
    return 2.0 * ew / (nu * ew + 1.0)


@dataclass(frozen=True)
class ParametricExpProfile:
    """W(nu) = anchor_W + int_{anchor_nu}^{nu} ds/g(s), omega = nu e^{-W/2},
    with g defined implicitly by c3 (log-gap relation)."""

    c3: float
    coeff: float  # b
    anchor_nu: float  # nu_2
    anchor_w: float  # V_2
    nu_lo: float
    nu_hi: float  # may be +inf

    def g(self, nu):
        return solve_implicit_g(self.c3, self.coeff, nu)

    def _check(self, nu):
        if not (self.nu_lo <= nu <= self.nu_hi):
            raise ProfileDomainError(
                f"nu={nu} outside working range [{self.nu_lo}, {self.nu_hi}]"
            )

    def w_of_nu(self, nu, cache: dict | None = None):
        self._check(nu)
        if nu == self.anchor_nu:
            return self.anchor_w
        memo = {} if cache is None else cache

        def integrand(s):
            val = memo.get(s)
            if val is None:
                val = _inv_g(self.c3, self.coeff, s)
                memo[s] = val
            return val

        val, _ = _quad_quiet(integrand, self.anchor_nu, nu,
                      epsabs=1e-12, epsrel=1e-10, limit=200)
        return self.anchor_w + val

    def omega_of_nu(self, nu):
        return nu * math.exp(-0.5 * self.w_of_nu(nu))

    def eval(self, nu):
        """(omega, W) at parameter nu."""
        w = self.w_of_nu(nu)
        return nu * math.exp(-0.5 * w), w

    def w_many(self, nus):
        """W on an ascending array of nu values (cumulative quadrature)."""
        nus = np.asarray(nus, dtype=float)
        if np.any(np.diff(nus) < 0):
            raise ValueError("nu samples must be ascending")
        out = np.empty_like(nus)
        cache: dict = {}
        prev_nu = self.anchor_nu
        prev_w = self.anchor_w
        base = _quad_quiet(lambda s: _inv_g(self.c3, self.coeff, s),
                    self.anchor_nu, nus[0],
                    epsabs=1e-12, epsrel=1e-10, limit=200)[0] \
            if nus[0] != self.anchor_nu else 0.0
        prev_w = self.anchor_w + base
        prev_nu = nus[0]
        out[0] = prev_w
        for i, nu in enumerate(nus[1:], start=1):
            self._check(nu)
            inc, _ = _quad_quiet(lambda s: _inv_g(self.c3, self.coeff, s),
                          prev_nu, nu, epsabs=1e-13, epsrel=1e-11, limit=200)
            prev_w += inc
            prev_nu = nu
            out[i] = prev_w
        return out

    def slope_at_nu(self, nu, w=None):
        """dW/domega = 2 e^{W/2} / (2g - nu)."""
        if w is None:
            w = self.w_of_nu(nu)
        g = self.g(nu)
        return 2.0 * math.exp(0.5 * w) / (2.0 * g - nu)

    def far_field(self):
        """(limit of W as nu -> inf, truncation bound of the tail)."""
        b = self.coeff
        nu_max = math.sqrt(self.anchor_nu**2 + 260.0 / (b * b))
        cache: dict = {}
        w = self.w_of_nu(min(nu_max, self.nu_hi), cache)
        # Gaussian-tail bound on the discarded remainder
        bound = _inv_g(self.c3, b, nu_max) * 2.0 / (b * b * nu_max)
        return w, bound

    def value(self, omega):
        return self.eval(invert_omega(self, omega))[1]

    def slope(self, omega):
        nu = invert_omega(self, omega)
        return self.slope_at_nu(nu)


def eval_param_exp(profile: ParametricExpProfile, nu: float):
    """(omega, W) at nu; quadrature of 1/g from the anchor."""
    return profile.eval(nu)


# ---------------------------------------------------------------------------
# residual and solution assembly helpers
# ---------------------------------------------------------------------------

def ode_residual(profile, omega: float, kind: str,
                 param: float | None = None) -> float:
    """Scaled residual of W'' + (omega/2) D(W) W' = 0 at omega.

    Derivatives via closed forms / the parametric chain rule; the residual
    is scaled by the magnitude of the advective term.  For the parametric
    families a known parameter value (tau or nu) matching omega may be
    passed to skip the numerical inversion.
    """
    if isinstance(profile, ErfProfile):
        if kind != CONST:
            raise ValueError("erf profile solves the constant-D equation")
        second = profile.curvature(omega)
        first = profile.slope(omega)
        drive = 0.5 * omega * profile.coeff**2 * first
    elif isinstance(profile, ParametricPowerProfile):
        if kind != INV_SQUARE:
            raise ValueError("power profile solves the inverse-square equation")
        tau = invert_omega(profile, omega) if param is None else param
        om, w = profile.eval(tau)
        first = profile.slope_at_tau(tau)
        a = profile.coeff
        c1 = profile.c1
        # d(W_omega)/dtau = -a^2 c1 e^{-tau^2} omega / (2 W^2)
        dslope = -a * a * c1 * math.exp(-tau * tau) * om / (2.0 * w * w)
        second = dslope / (2.0 * w / a)
        drive = 0.5 * om * (a * a / (w * w)) * first
    elif isinstance(profile, ParametricExpProfile):
        if kind != EXP:
            raise ValueError("implicit profile solves the exponential equation")
        nu = invert_omega(profile, omega) if param is None else param
        om, w = profile.eval(nu)
        b = profile.coeff
        g = profile.g(nu)
        s = 2.0 * g - nu
        first = 2.0 * math.exp(0.5 * w) / s
        # 2g' - 1 from differentiating the implicit relation
        m = (s + 0.5 * b * b * nu * s * s) / (s + nu)
        dslope = first * (0.5 / g - m / s)
        domega = math.exp(-0.5 * w) * s / (nu + s)
        second = dslope / domega
        drive = 0.5 * om * b * b * math.exp(w) * first
    else:
        raise TypeError(f"unknown profile type {type(profile).__name__}")
    scale = max(abs(second), abs(drive), 1e-300)
    return (second + drive) / scale


@dataclass(frozen=True)
class SimilaritySolution:
    """Complete similarity solution: both profiles plus front constants."""

    problem: TransformedProblem
    liquid: object
    solid: object
    omega1: float
    omega2: float
    tau1: float | None = None
    tau2: float | None = None
    nu2: float | None = None

    def __post_init__(self):
        if not (0 < self.omega1 < self.omega2):
            raise ValueError(
                f"need 0 < omega1 < omega2, got {self.omega1}, {self.omega2}"
            )

    def U(self, omega):
        return self.liquid.value(omega)

    def V(self, omega):
        return self.solid.value(omega)

    def U_slope(self, omega):
        return self.liquid.slope(omega)

    def V_slope(self, omega):
        return self.solid.slope(omega)

    def front_positions(self, t):
        rt = np.sqrt(t)
        return self.omega1 * rt, self.omega2 * rt


def reconstruct_field(sol: SimilaritySolution, m: MaterialModel,
                      t: float, x: float) -> float:
    """Physical temperature at (t, x); x must lie on or beyond the
    evaporation front."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    maps1, maps2 = kirchhoff_maps(m)
    return _reconstruct(sol, maps1, maps2, t, x)


def _reconstruct(sol: SimilaritySolution, maps1: PhaseMaps, maps2: PhaseMaps,
                 t: float, x: float) -> float:
    omega = x / math.sqrt(t)
    tol = 1e-12 * max(1.0, sol.omega1)
    if omega < sol.omega1 - tol:
        raise ProfileDomainError(
            f"x={x} lies inside the evaporated region at t={t}"
        )
    omega = max(omega, sol.omega1)
    if omega <= sol.omega2:
        U = float(sol.U(omega))
        return maps1.T_of_U(U)
    V = float(sol.V(omega))
    return maps2.T_of_U(V)
