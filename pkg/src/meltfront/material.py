"""Material coefficient models and the two-stage Kirchhoff transformation.

A phase is described by a thermal conductivity lambda(T) [W/(K m)] and a
volumetric heat capacity C(T) [J/(K m^3)].  The first Kirchhoff substitution
u = int_0^T C(s) ds turns the heat equation into u_t = (d(u) u_x)_x with
d = lambda/C; the second substitution U = int d(u) du turns it into
U_t = d * U_xx, i.e. an ODE-reducible form with diffusivity kind D(U) = 1/d.

Only coefficient pairs whose induced D(U) is one of the three integrable
kinds (constant, inverse-square, exponential) are accepted; everything else
raises UnsupportedDiffusivity rather than being silently approximated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "CONST",
    "INV_SQUARE",
    "EXP",
    "CoefficientFn",
    "MaterialModel",
    "TransformedProblem",
    "PhaseMaps",
    "UnsupportedDiffusivity",
    "kirchhoff_small",
    "kirchhoff_big",
    "inverse_kirchhoff",
    "kirchhoff_maps",
    "build_transformed_problem",
]

# Diffusivity kind tags: D(U) = a^2, a^2 / U^2, b^2 * exp(V).
CONST = "const"
INV_SQUARE = "inv_square"
EXP = "exp"

_REL_TOL = 1e-12


class UnsupportedDiffusivity(ValueError):
    """Raised when a coefficient pair does not induce an integrable D(U)."""


@dataclass(frozen=True)
class CoefficientFn:
    """One coefficient curve: constant, power law, or exponential.

    kind      -- "constant" | "powerlaw" | "exponential"
    scale     -- multiplicative constant (positive)
    exponent  -- power-law exponent, or exponential rate [1/K]; ignored
                 for "constant"
    """

    kind: str
    scale: float
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "powerlaw", "exponential"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError("coefficient scale must be positive and finite")
        if not math.isfinite(self.exponent):
            raise ValueError("coefficient exponent/rate must be finite")

    def __call__(self, T):
        if self.kind == "constant":
            return self.scale
        if self.kind == "powerlaw":
            return self.scale * T ** self.exponent
        return self.scale * math.exp(self.exponent * T)

    def integral(self, T: float) -> float:
        """int_0^T of the coefficient; requires integrability at 0."""
        if not math.isfinite(T) or T < 0:
            raise ValueError(f"temperature must be finite and >= 0, got {T}")
        if self.kind == "constant":
            return self.scale * T
        if self.kind == "powerlaw":
            p = self.exponent
            if p <= -1:
                raise ValueError(
                    f"power-law exponent {p} not integrable on [0, T]"
                )
            return self.scale * T ** (p + 1) / (p + 1)
        r = self.exponent
        if r == 0.0:
            return self.scale * T
        return self.scale / r * math.expm1(r * T)

    def integral_between(self, lo: float, hi: float) -> float:
        """int_lo^hi of the coefficient (closed form, lo may exclude 0)."""
        if hi < lo:
            raise ValueError(f"upper limit {hi} below reference {lo}")
        if self.kind == "constant":
            return self.scale * (hi - lo)
        if self.kind == "powerlaw":
            p = self.exponent
            if p == -1:
                if lo <= 0:
                    raise ValueError("log-kind integral needs reference > 0")
                return self.scale * math.log(hi / lo)
            if p < -1 and lo <= 0:
                raise ValueError(f"exponent {p} integral divergent at 0")
            return self.scale * (hi ** (p + 1) - lo ** (p + 1)) / (p + 1)
        r = self.exponent
        if r == 0.0:
            return self.scale * (hi - lo)
        return self.scale / r * (math.exp(r * hi) - math.exp(r * lo))


def kirchhoff_small(phase_C: CoefficientFn, T: float) -> float:
    """First Kirchhoff map u(T) = int_0^T C(s) ds."""
    return phase_C.integral(T)


def kirchhoff_big(phase_d: CoefficientFn, u: float, ref: float) -> float:
    """Second Kirchhoff map U(u) = int_ref^u d(s) ds, d = lambda/C as a
    function of u (same three closed-form kinds, argument u instead of T)."""
    if u < ref:
        raise ValueError(f"u={u} below reference {ref}")
    return phase_d.integral_between(ref, u)


@dataclass(frozen=True)
class MaterialModel:
    """Two-phase material data; index 1 = liquid, 2 = solid.  SI units."""

    lambda1: CoefficientFn
    C1: CoefficientFn
    lambda2: CoefficientFn
    C2: CoefficientFn
    Hv: float  # volumetric latent heat of evaporation [J/m^3]
    Hm: float  # volumetric latent heat of melting [J/m^3]
    Tv: float  # evaporation temperature [K]
    Tm: float  # melting temperature [K]
    T0: float  # far-field solid temperature [K]
    q0: float  # flux amplitude of q(t) = q0/sqrt(t) [W s^(1/2)/m^2]

    def __post_init__(self):
        if not (self.Tv > self.Tm > self.T0 > 0):
            raise ValueError(
                f"need Tv > Tm > T0 > 0, got {self.Tv}, {self.Tm}, {self.T0}"
            )
        for name in ("Hv", "Hm", "q0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        for cname in ("C1", "C2"):
            c = getattr(self, cname)
            if c.kind == "powerlaw" and c.exponent <= -1:
                raise ValueError(
                    f"{cname}: power-law exponent {c.exponent} has a "
                    "divergent integral at T=0"
                )


@dataclass(frozen=True)
class TransformedProblem:
    """Data of the reduced two-ODE boundary value problem.

    Diffusivity kinds: case1_kind in {CONST, INV_SQUARE} with D1(U) = a^2 or
    a^2/U^2; case2_kind additionally allows EXP with D2(V) = b^2 exp(V).
    ref_u / ref_v record the lower reference of the second Kirchhoff
    integral (for INV_SQUARE they hold the pole location of d(u) instead,
    since the exact-form map is U = -a^2/(u - pole)).
    """

    case1_kind: str
    case2_kind: str
    a: float
    b: float
    U1: float
    U2: float
    V2: float
    V0: float
    Hv: float
    Hm: float
    q0: float
    ref_u: float = 0.0
    ref_v: float = 0.0

    def __post_init__(self):
        if self.case1_kind not in (CONST, INV_SQUARE):
            raise ValueError(f"bad liquid diffusivity kind {self.case1_kind!r}")
        if self.case2_kind not in (CONST, INV_SQUARE, EXP):
            raise ValueError(f"bad solid diffusivity kind {self.case2_kind!r}")
        if not (self.a > 0 and self.b > 0):
            raise ValueError("a and b must be positive")
        if not (self.Hv > 0 and self.Hm > 0 and self.q0 >= 0):
            raise ValueError("Hv, Hm must be positive and q0 >= 0")

    def d1_of_U(self, U):
        """Physical diffusivity 1/D1 as a function of U (liquid)."""
        return _d_of_big(self.case1_kind, self.a, U)

    def d2_of_V(self, V):
        """Physical diffusivity 1/D2 as a function of V (solid)."""
        return _d_of_big(self.case2_kind, self.b, V)


def _d_of_big(kind, coeff, W):
    import numpy as np

    if kind == CONST:
        return np.full_like(np.asarray(W, dtype=float), 1.0 / coeff**2)
    if kind == INV_SQUARE:
        return np.asarray(W, dtype=float) ** 2 / coeff**2
    return np.exp(-np.asarray(W, dtype=float)) / coeff**2


@dataclass(frozen=True)
class PhaseMaps:
    """Closed-form forward/inverse Kirchhoff maps for one phase.

    T -> u -> U with u = int_0^T C and U per the phase's diffusivity kind:
      CONST:       U = d0 * u
      INV_SQUARE:  U = -kappa / (u - pole)   (exact D = a^2/U^2 reference)
      EXP:         V = log(v / v_star)       (exact D = b^2 exp(V))
    """

    kind: str
    coeff: float  # a (or b): D = coeff^2, coeff^2/U^2, coeff^2 e^V
    C: CoefficientFn
    d0: float = 0.0  # CONST: constant d = lambda/C
    pole: float = 0.0  # INV_SQUARE: pole of d(u) = kappa/(u-pole)^2
    v_star: float = 0.0  # EXP: reference v at T0

    def u_of_T(self, T: float) -> float:
        return self.C.integral(T)

    def T_of_u(self, u: float) -> float:
        c = self.C
        if c.kind == "constant":
            return u / c.scale
        if c.kind == "powerlaw":
            p = c.exponent
            return ((p + 1) * u / c.scale) ** (1.0 / (p + 1))
        r = c.exponent
        if r == 0.0:
            return u / c.scale
        return math.log1p(r * u / c.scale) / r

    def U_of_u(self, u: float) -> float:
        if self.kind == CONST:
            return self.d0 * u
        if self.kind == INV_SQUARE:
            kappa = self.coeff**2
            return -kappa / (u - self.pole)
        return math.log(u / self.v_star)

    def u_of_U(self, U: float) -> float:
        if self.kind == CONST:
            return U / self.d0
        if self.kind == INV_SQUARE:
            kappa = self.coeff**2
            if U == 0:
                raise ValueError("U=0 outside range of inverse-square map")
            return self.pole - kappa / U
        return self.v_star * math.exp(U)

    def U_of_T(self, T: float) -> float:
        return self.U_of_u(self.u_of_T(T))

    def T_of_U(self, U: float) -> float:
        return self.T_of_u(self.u_of_U(U))


def inverse_kirchhoff(maps: PhaseMaps, U: float) -> float:
    """Physical temperature from a transformed value (closed-form chain)."""
    u = maps.u_of_U(U)
    if u < 0:
        raise ValueError(f"U={U} outside the range of the forward map")
    return maps.T_of_u(u)


def _classify_phase(lam: CoefficientFn, C: CoefficientFn, T0: float,
                    phase: int) -> PhaseMaps:
    """Match d(u) = lambda/C (expressed in u) to an integrable kind."""

    def close(x, y):
        return abs(x - y) <= _REL_TOL * max(1.0, abs(x), abs(y))

    # Treat "constant" as a power law / exponential with exponent 0 where
    # that simplifies case analysis.
    lk, ck = lam.kind, C.kind
    le, ce = lam.exponent, C.exponent
    if lk == "constant":
        le = 0.0
    if ck == "constant":
        ce = 0.0

    same_family = (
        (lk == ck)
        or {lk, ck} <= {"constant", "powerlaw"}
        or {lk, ck} <= {"constant", "exponential"}
    )
    # Proportional lambda and C: d = lambda/C constant.
    if same_family and close(le, ce):
        d0 = lam.scale / C.scale
        return PhaseMaps(kind=CONST, coeff=math.sqrt(1.0 / d0), C=C, d0=d0)

    pl_like = lk in ("constant", "powerlaw") and ck in ("constant", "powerlaw")
    exp_like = lk == "exponential" and ck == "exponential"

    if exp_like and close(le, -ce) and ce != 0.0:
        # d(u) = kappa / (u - pole)^2 exactly; the canonical reference
        # U = -kappa/(u - pole) gives D(U) = kappa / U^2.
        kappa = lam.scale * C.scale / ce**2
        pole = -C.scale / ce
        return PhaseMaps(kind=INV_SQUARE, coeff=math.sqrt(kappa), C=C,
                         pole=pole)

    if pl_like:
        # d(u) = const * u^p with p = (alpha-beta)/(beta+1).
        p = (le - ce) / (ce + 1.0)
        if close(p, -2.0):
            kappa = lam.scale * C.scale / (ce + 1.0) ** 2
            return PhaseMaps(kind=INV_SQUARE, coeff=math.sqrt(kappa), C=C,
                             pole=0.0)
        if close(p, -1.0):
            # d(u) = k/u; D(V) = (v*/k) exp(V/k), exponential kind only
            # for k = 1 (solid phase only).
            k = lam.scale / (ce + 1.0)
            if phase == 2 and close(k, 1.0):
                v_star = C.integral(T0)
                return PhaseMaps(kind=EXP, coeff=math.sqrt(v_star), C=C,
                                 v_star=v_star)
            raise UnsupportedDiffusivity(
                f"phase {phase}: induced D(V) = (v*/{k:g}) * exp(V/{k:g}) "
                "is exponential only for unit d(v)*v; rescale lambda so "
                "lambda.scale = C.exponent + 1"
                if phase == 2
                else f"phase 1: induced d(u) = const/u is only supported "
                "for the solid phase"
            )
        raise UnsupportedDiffusivity(
            f"phase {phase}: induced d(u) ~ u^{p:g} does not reduce to a "
            "constant, inverse-square, or exponential diffusivity"
        )

    raise UnsupportedDiffusivity(
        f"phase {phase}: lambda kind {lam.kind!r} with C kind {C.kind!r} "
        "does not induce an integrable diffusivity"
    )


def kirchhoff_maps(m: MaterialModel) -> tuple[PhaseMaps, PhaseMaps]:
    """Closed-form transform maps for both phases (validates the model)."""
    maps1 = _classify_phase(m.lambda1, m.C1, m.T0, phase=1)
    maps2 = _classify_phase(m.lambda2, m.C2, m.T0, phase=2)
    return maps1, maps2


def build_transformed_problem(m: MaterialModel) -> TransformedProblem:
    """Classify both phases and push the boundary data through the maps."""
    maps1, maps2 = kirchhoff_maps(m)
    U1 = maps1.U_of_T(m.Tv)
    U2 = maps1.U_of_T(m.Tm)
    V2 = maps2.U_of_T(m.Tm)
    V0 = maps2.U_of_T(m.T0)
    ref_u = maps1.pole if maps1.kind == INV_SQUARE else 0.0
    if maps2.kind == INV_SQUARE:
        ref_v = maps2.pole
    elif maps2.kind == EXP:
        ref_v = maps2.v_star
    else:
        ref_v = 0.0
    return TransformedProblem(
        case1_kind=maps1.kind,
        case2_kind=maps2.kind,
        a=maps1.coeff,
        b=maps2.coeff,
        U1=U1,
        U2=U2,
        V2=V2,
        V0=V0,
        Hv=m.Hv,
        Hm=m.Hm,
        q0=m.q0,
        ref_u=ref_u,
        ref_v=ref_v,
    )
