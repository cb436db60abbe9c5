"""Coefficient curves, phase classification, and the transform maps."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from meltfront.material import (CONST, EXP, INV_SQUARE, CoefficientFn,
                                MaterialModel, UnsupportedDiffusivity,
                                build_transformed_problem, kirchhoff_maps)

from conftest import aluminium_material


# ---------------------------------------------------------------------------
# coefficient curves
# ---------------------------------------------------------------------------

class TestCoefficientFn:
    def test_constant_evaluation_and_integral(self):
        c = CoefficientFn("constant", 240.0)
        assert c(700.0) == 240.0
        assert c.integral(700.0) == pytest.approx(240.0 * 700.0, rel=1e-15)

    @pytest.mark.parametrize("kind,scale,exponent", [
        ("powerlaw", 3.0, 0.7),
        ("powerlaw", 1.5, -0.5),
        ("exponential", 2.0, 1e-3),
        ("exponential", 5.0, -2e-3),
    ])
    def test_integral_against_quadrature(self, kind, scale, exponent):
        c = CoefficientFn(kind, scale, exponent)
        ref, _ = quad(c, 0.0, 800.0)
        assert c.integral(800.0) == pytest.approx(ref, rel=1e-10)

    def test_integral_between_against_quadrature(self):
        c = CoefficientFn("powerlaw", 2.0, -1.0)
        ref, _ = quad(c, 10.0, 500.0)
        assert c.integral_between(10.0, 500.0) == pytest.approx(ref,
                                                                rel=1e-12)

    def test_exponential_integral_small_rate_is_stable(self):
        # expm1 keeps accuracy where exp(rT) - 1 would cancel
        c = CoefficientFn("exponential", 1.0, 1e-12)
        assert c.integral(10.0) == pytest.approx(10.0, rel=1e-10)

    def test_divergent_powerlaw_integral_rejected(self):
        c = CoefficientFn("powerlaw", 1.0, -1.5)
        with pytest.raises(ValueError, match="not integrable"):
            c.integral(1.0)

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            CoefficientFn("constant", 0.0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            CoefficientFn("cubic", 1.0)

    @given(st.floats(min_value=1e-3, max_value=1e4),
           st.floats(min_value=1e-3, max_value=2e3))
    @settings(max_examples=50, deadline=None)
    def test_integral_is_monotone_in_upper_limit(self, scale, T):
        c = CoefficientFn("exponential", scale, -1e-3)
        assert c.integral(T + 1.0) > c.integral(T)


# ---------------------------------------------------------------------------
# model validation
# ---------------------------------------------------------------------------

class TestMaterialModel:
    def test_aluminium_accepts(self):
        aluminium_material()

    def test_temperature_ordering_enforced(self):
        with pytest.raises(ValueError, match="Tv > Tm > T0"):
            MaterialModel(
                lambda1=CoefficientFn("constant", 1.0),
                C1=CoefficientFn("constant", 1.0),
                lambda2=CoefficientFn("constant", 1.0),
                C2=CoefficientFn("constant", 1.0),
                Hv=1.0, Hm=1.0, Tv=500.0, Tm=900.0, T0=300.0, q0=1.0,
            )

    def test_nonpositive_latent_heat_rejected(self):
        with pytest.raises(ValueError, match="Hm"):
            MaterialModel(
                lambda1=CoefficientFn("constant", 1.0),
                C1=CoefficientFn("constant", 1.0),
                lambda2=CoefficientFn("constant", 1.0),
                C2=CoefficientFn("constant", 1.0),
                Hv=1.0, Hm=-2.0, Tv=900.0, Tm=500.0, T0=300.0, q0=1.0,
            )


# ---------------------------------------------------------------------------
# classification into integrable diffusivity kinds
# ---------------------------------------------------------------------------

class TestClassification:
    def test_constant_pair_gives_const_kind(self, aluminium):
        maps1, maps2 = kirchhoff_maps(aluminium)
        assert maps1.kind == CONST
        assert maps2.kind == CONST
        assert maps1.coeff == pytest.approx(math.sqrt(2.7e6 / 240.0))

    def test_proportional_powerlaws_give_const_kind(self):
        m = MaterialModel(
            lambda1=CoefficientFn("powerlaw", 6.0, 0.5),
            C1=CoefficientFn("powerlaw", 2.0, 0.5),
            lambda2=CoefficientFn("constant", 1.0),
            C2=CoefficientFn("constant", 1.0),
            Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0, q0=1.0,
        )
        maps1, _ = kirchhoff_maps(m)
        assert maps1.kind == CONST
        assert maps1.d0 == pytest.approx(3.0)

    def test_opposite_rate_exponentials_give_inverse_square(self):
        lam = CoefficientFn("exponential", 2.0, 1e-3)
        C = CoefficientFn("exponential", 3.0, -1e-3)
        m = MaterialModel(lambda1=lam, C1=C,
                          lambda2=CoefficientFn("constant", 1.0),
                          C2=CoefficientFn("constant", 1.0),
                          Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0,
                          q0=1.0)
        maps1, _ = kirchhoff_maps(m)
        assert maps1.kind == INV_SQUARE
        # d(u) = kappa/(u - pole)^2 must reproduce lambda/C pointwise
        for T in (350.0, 500.0, 800.0):
            u = maps1.u_of_T(T)
            kappa = maps1.coeff**2
            d_from_map = kappa / (u - maps1.pole) ** 2
            assert d_from_map == pytest.approx(lam(T) / C(T), rel=1e-9)

    def test_powerlaw_ratio_gives_inverse_square(self):
        # alpha = -beta - 2 makes (alpha-beta)/(beta+1) = -2
        lam = CoefficientFn("powerlaw", 4.0, -2.5)
        C = CoefficientFn("powerlaw", 2.0, 0.5)
        m = MaterialModel(lambda1=lam, C1=C,
                          lambda2=CoefficientFn("constant", 1.0),
                          C2=CoefficientFn("constant", 1.0),
                          Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0,
                          q0=1.0)
        maps1, _ = kirchhoff_maps(m)
        assert maps1.kind == INV_SQUARE
        for T in (350.0, 600.0):
            u = maps1.u_of_T(T)
            d_from_map = maps1.coeff**2 / (u - maps1.pole) ** 2
            assert d_from_map == pytest.approx(lam(T) / C(T), rel=1e-9)

    def test_exponential_solid_kind(self):
        # d(v) = 1/v: lambda = (beta+1) T^(-1) ... with C ~ T^beta
        C = CoefficientFn("powerlaw", 2.0, 1.0)
        lam = CoefficientFn("powerlaw", 2.0, -1.0)
        m = MaterialModel(lambda1=CoefficientFn("constant", 1.0),
                          C1=CoefficientFn("constant", 1.0),
                          lambda2=lam, C2=C,
                          Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0,
                          q0=1.0)
        _, maps2 = kirchhoff_maps(m)
        assert maps2.kind == EXP
        assert maps2.v_star == pytest.approx(C.integral(300.0))
        # V = log(v/v*) must reproduce d = lambda/C via D(V) = v* e^V
        for T in (320.0, 450.0):
            v = maps2.u_of_T(T)
            V = maps2.U_of_u(v)
            assert 1.0 / (maps2.coeff**2 * math.exp(V)) == \
                pytest.approx(lam(T) / C(T), rel=1e-9)

    def test_exp_kind_rejected_for_liquid_phase(self):
        with pytest.raises(UnsupportedDiffusivity, match="phase 1"):
            kirchhoff_maps(MaterialModel(
                lambda1=CoefficientFn("powerlaw", 2.0, -1.0),
                C1=CoefficientFn("powerlaw", 2.0, 1.0),
                lambda2=CoefficientFn("constant", 1.0),
                C2=CoefficientFn("constant", 1.0),
                Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0, q0=1.0,
            ))

    def test_generic_pair_rejected_with_exponent_in_message(self):
        with pytest.raises(UnsupportedDiffusivity, match="u\\^"):
            kirchhoff_maps(MaterialModel(
                lambda1=CoefficientFn("powerlaw", 2.0, 2.0),
                C1=CoefficientFn("powerlaw", 2.0, 0.5),
                lambda2=CoefficientFn("constant", 1.0),
                C2=CoefficientFn("constant", 1.0),
                Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0, q0=1.0,
            ))

    def test_mixed_family_rejected(self):
        with pytest.raises(UnsupportedDiffusivity, match="kind"):
            kirchhoff_maps(MaterialModel(
                lambda1=CoefficientFn("exponential", 2.0, 1e-3),
                C1=CoefficientFn("powerlaw", 2.0, 0.5),
                lambda2=CoefficientFn("constant", 1.0),
                C2=CoefficientFn("constant", 1.0),
                Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0, q0=1.0,
            ))


# ---------------------------------------------------------------------------
# transform maps and round trips
# ---------------------------------------------------------------------------

class TestPhaseMaps:
    def test_aluminium_transformed_values(self, aluminium):
        p = build_transformed_problem(aluminium)
        # U = (lambda/C) * C * T = lambda * T for constant coefficients
        assert p.U1 == pytest.approx(240.0 * 2793.0, rel=1e-12)
        assert p.U2 == pytest.approx(240.0 * 933.0, rel=1e-12)
        assert p.V2 == pytest.approx(240.0 * 933.0, rel=1e-12)
        assert p.V0 == pytest.approx(240.0 * 300.0, rel=1e-12)
        assert p.a == pytest.approx(math.sqrt(2.7e6 / 240.0), rel=1e-12)
        assert p.b == pytest.approx(math.sqrt(2.74e6 / 240.0), rel=1e-12)

    @pytest.mark.parametrize("lam,C", [
        (CoefficientFn("constant", 240.0), CoefficientFn("constant", 2.7e6)),
        (CoefficientFn("exponential", 2.0, 1e-3),
         CoefficientFn("exponential", 3.0, -1e-3)),
        (CoefficientFn("powerlaw", 4.0, -2.5),
         CoefficientFn("powerlaw", 2.0, 0.5)),
    ])
    def test_round_trip_T_to_U_to_T(self, lam, C):
        m = MaterialModel(lambda1=lam, C1=C,
                          lambda2=CoefficientFn("constant", 1.0),
                          C2=CoefficientFn("constant", 1.0),
                          Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0,
                          q0=1.0)
        maps1, _ = kirchhoff_maps(m)
        for T in np.linspace(310.0, 890.0, 13):
            back = maps1.T_of_U(maps1.U_of_T(float(T)))
            assert back == pytest.approx(T, rel=1e-11)

    def test_U_monotone_in_T(self):
        lam = CoefficientFn("exponential", 2.0, 1e-3)
        C = CoefficientFn("exponential", 3.0, -1e-3)
        m = MaterialModel(lambda1=lam, C1=C,
                          lambda2=CoefficientFn("constant", 1.0),
                          C2=CoefficientFn("constant", 1.0),
                          Hv=1.0, Hm=1.0, Tv=900.0, Tm=500.0, T0=300.0,
                          q0=1.0)
        maps1, _ = kirchhoff_maps(m)
        Ts = np.linspace(305.0, 895.0, 40)
        Us = [maps1.U_of_T(float(T)) for T in Ts]
        assert np.all(np.diff(Us) > 0)

    def test_first_map_against_mpmath(self):
        c = CoefficientFn("exponential", 2.5, 7e-4)
        ref = float(mpmath.quad(lambda s: 2.5 * mpmath.e**(7e-4 * s),
                                [0, 650]))
        assert c.integral(650.0) == pytest.approx(ref, rel=1e-12)
