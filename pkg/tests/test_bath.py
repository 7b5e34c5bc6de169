import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from qotto import (
    BathSpec,
    InvalidParameterError,
    QuadratureSettings,
    SpectralDensity,
    bose_occupation,
    lindblad_rates,
    spectral_density,
    tcl2_coefficients,
    weighted_emission,
)

HOT = BathSpec(temperature=2.0, spectral=SpectralDensity(gamma=0.1, lam=20.8))
W_H = 5.2
A_INF_HOT = 3.5618206041251415  # 2 pi J(5.2) (2 n(2.6) + 1), frozen closed form


class TestSpectralDensity:
    def test_zero_at_origin(self):
        assert spectral_density(0.0, HOT.spectral) == 0.0

    def test_reference_value(self):
        got = spectral_density(5.2, HOT.spectral)
        assert_allclose(got, 0.52 * math.exp(-0.0625), rtol=1e-14)
        assert_allclose(got, 0.4884947, atol=5e-7)

    def test_at_cutoff(self):
        sd = SpectralDensity(gamma=0.15, lam=2.0)
        assert_allclose(spectral_density(2.0, sd), 0.15 * 2.0 / math.e, rtol=1e-14)

    def test_negative_frequency_rejected(self):
        with pytest.raises(InvalidParameterError):
            spectral_density(-1.0, HOT.spectral)

    def test_weak_coupling_advisory(self):
        assert not HOT.spectral.weak_coupling_advisory
        with pytest.warns(UserWarning, match="weak-coupling"):
            strong = SpectralDensity(gamma=0.25, lam=10.0)
        assert strong.weak_coupling_advisory

    @pytest.mark.parametrize("gamma, lam", [(0.0, 1.0), (-0.1, 1.0), (0.1, 0.0)])
    def test_invalid_parameters(self, gamma, lam):
        with pytest.raises(InvalidParameterError):
            SpectralDensity(gamma=gamma, lam=lam)


class TestBoseOccupation:
    def test_reference_ratio(self):
        got = bose_occupation(2.6 * 7.0, 7.0)
        assert_allclose(got, 1.0 / (math.exp(2.6) - 1.0), rtol=1e-13)
        assert_allclose(got, 0.0802328, atol=5e-8)

    def test_large_ratio_matches_boltzmann_tail(self):
        for x in (40.0, 120.0, 600.0):
            assert_allclose(bose_occupation(x, 1.0), math.exp(-x), rtol=1e-12)

    def test_underflow_is_silent_zero(self):
        assert bose_occupation(1e6, 1.0) == 0.0

    def test_log_two_gives_unity(self):
        assert_allclose(bose_occupation(3.0 * math.log(2.0), 3.0), 1.0, rtol=1e-13)

    def test_zero_frequency_redirects(self):
        with pytest.raises(InvalidParameterError, match="weighted_emission"):
            bose_occupation(0.0, 1.0)


class TestWeightedEmission:
    def test_removable_limit(self):
        assert weighted_emission(0.0, HOT) == 0.1 * 2.0

    def test_continuity_at_origin(self):
        lim = weighted_emission(0.0, HOT)
        near = weighted_emission(1e-8, HOT)
        assert abs(near - lim) < 1e-9

    def test_reference_product(self):
        # Product of the two closed forms checked above.
        want = spectral_density(5.2, HOT.spectral) * bose_occupation(5.2, 2.0)
        got = weighted_emission(5.2, HOT)
        assert_allclose(got, want, rtol=1e-14)
        assert_allclose(got, 0.039193281445034894, rtol=1e-12)

    def test_cold_limit_vanishes(self):
        frozen = BathSpec(temperature=1e-6, spectral=HOT.spectral)
        assert weighted_emission(5.2, frozen) == 0.0


class TestLindbladRates:
    def test_reference_decay(self):
        decay, drift = lindblad_rates(W_H, HOT)
        assert_allclose(decay, A_INF_HOT, rtol=1e-12)
        assert_allclose(decay, 3.5618, atol=5e-5)

    def test_fixed_point_is_detailed_balance(self):
        decay, drift = lindblad_rates(W_H, HOT)
        assert_allclose(-drift / decay, -math.tanh(W_H / (2.0 * 2.0)), rtol=1e-13)

    def test_zero_temperature_limit(self):
        cold = BathSpec(temperature=1e-4, spectral=HOT.spectral)
        decay, drift = lindblad_rates(W_H, cold)
        assert_allclose(decay, 2.0 * math.pi * spectral_density(W_H, HOT.spectral), rtol=1e-10)
        assert_allclose(decay, drift, rtol=1e-10)


class TestTcl2Coefficients:
    def test_zero_time_is_zero(self):
        c = tcl2_coefficients(0.0, W_H, HOT)
        assert c.gamma1 == 0 and c.gamma2 == 0
        assert c.decay_a == 0.0 and c.drift_b == 0.0

    def test_combinations_consistent(self):
        c = tcl2_coefficients(1.3, W_H, HOT)
        assert abs(c.decay_a - 2.0 * (c.gamma1.real + c.gamma2.real)) <= 1e-14
        assert abs(c.drift_b - 2.0 * (c.gamma1.real - c.gamma2.real)) <= 1e-14

    @pytest.mark.parametrize("t", [0.3, 1.7])
    def test_against_direct_real_quadratures(self, t):
        # Independent route: scipy quad on the real/imag integrands.
        sd = HOT.spectral

        def f1(w):
            n = math.exp(-w / 2.0) / (-math.expm1(-w / 2.0))
            return (n + 1.0) * sd.gamma * w * math.exp(-((w / sd.lam) ** 2))

        def f2(w):
            n = math.exp(-w / 2.0) / (-math.expm1(-w / 2.0))
            return n * sd.gamma * w * math.exp(-((w / sd.lam) ** 2))

        def kernel_re(w):
            d = W_H - w
            return t if abs(d * t) < 1e-9 else math.sin(d * t) / d

        def kernel_im(w):
            d = W_H - w
            return 0.0 if abs(d * t) < 1e-9 else 2.0 * math.sin(0.5 * d * t) ** 2 / d

        opts = dict(limit=800, epsabs=1e-13, epsrel=1e-12, points=[W_H])
        g1 = (
            quad(lambda w: f1(w) * kernel_re(w), 0, 8 * sd.lam, **opts)[0]
            + 1j * quad(lambda w: f1(w) * kernel_im(w), 0, 8 * sd.lam, **opts)[0]
        )
        g2 = (
            quad(lambda w: f2(w) * kernel_re(w), 0, 8 * sd.lam, **opts)[0]
            - 1j * quad(lambda w: f2(w) * kernel_im(w), 0, 8 * sd.lam, **opts)[0]
        )
        c = tcl2_coefficients(t, W_H, HOT)
        assert abs(c.decay_a - 2.0 * (g1.real + g2.real)) < 1e-10
        assert abs(c.drift_b - 2.0 * (g1.real - g2.real)) < 1e-10
        assert abs(c.gamma1 - g1) < 1e-10
        assert abs(c.gamma2 - g2) < 1e-10

    def test_long_time_reaches_asymptotic_rate(self):
        c = tcl2_coefficients(50.0 / W_H, W_H, HOT)
        assert abs(c.decay_a - A_INF_HOT) / A_INF_HOT < 0.01

    def test_long_time_fixed_point_detailed_balance(self):
        c = tcl2_coefficients(50.0 / W_H, W_H, HOT)
        assert_allclose(-c.drift_b / c.decay_a, -math.tanh(1.3), atol=5e-3)
        assert_allclose(-c.drift_b / c.decay_a, -0.8617, atol=5e-3)

    def test_equilibrium_ratio_stays_physical(self):
        # -b/a in (-1, 0) wherever relaxation is underway
        for t in np.linspace(0.2, 9.0, 23):
            c = tcl2_coefficients(float(t), W_H, HOT)
            if c.decay_a > 0.0:
                assert -1.0 < -c.drift_b / c.decay_a < 0.0

    def test_halving_tolerance_moves_less_than_estimate(self):
        base = QuadratureSettings(abs_tol=1e-8, rel_tol=1e-6)
        tight = QuadratureSettings(abs_tol=5e-9, rel_tol=5e-7)
        c0 = tcl2_coefficients(2.1, W_H, HOT, base)
        c1 = tcl2_coefficients(2.1, W_H, HOT, tight)
        shift = max(abs(c0.gamma1 - c1.gamma1), abs(c0.gamma2 - c1.gamma2))
        assert shift <= max(c0.quad_error, 1e-15)

    def test_negative_time_rejected(self):
        with pytest.raises(InvalidParameterError):
            tcl2_coefficients(-0.1, W_H, HOT)
