"""Grid propagators: plane-wave oracles, conservation laws, residual contract."""

import numpy as np
import pytest

from elaswave.grid import (
    SpectralVectorField,
    TorusGrid,
    forward_transform,
    inverse_transform,
    plane_wave,
    random_band_limited,
    translate,
)
from elaswave.propagate import (
    PropagationRequest,
    TimeStepPrecisionWarning,
    apply_symbol_spectrally,
    cosine_solution,
    half_wave,
    pde_residual,
)
from elaswave.reference import scalar_half_wave
from elaswave.symbol import LameParams, half_wave_multiplier

P11 = LameParams(1.0, 1.0)
CLASSICAL = LameParams(-1.0, 1.0)


def smooth_field(grid, seed, band=None):
    band = band if band is not None else grid.nyquist / 2
    return random_band_limited(grid, band, np.random.default_rng(seed))


def run(params, f, t, flavor="half_wave_plus", v=0.0, theta=None):
    return half_wave(
        PropagationRequest(params=params, f=f, t=t, v=v, theta=theta, flavor=flavor)
    )


class TestRequestValidation:
    def test_unknown_flavor(self):
        grid = TorusGrid(2, 16, np.pi)
        with pytest.raises(ValueError, match="flavor"):
            PropagationRequest(params=P11, f=smooth_field(grid, 1), t=0.5, flavor="nope")

    def test_negative_speed(self):
        grid = TorusGrid(2, 16, np.pi)
        with pytest.raises(ValueError, match="nonnegative"):
            PropagationRequest(params=P11, f=smooth_field(grid, 1), t=0.5, v=-1.0)

    def test_non_unit_theta(self):
        grid = TorusGrid(2, 16, np.pi)
        with pytest.raises(ValueError, match="unit"):
            PropagationRequest(
                params=P11, f=smooth_field(grid, 1), t=0.5, v=1.0, theta=np.array([1.0, 1.0])
            )

    def test_band_limit_violation_at_construction(self):
        grid = TorusGrid(2, 16, np.pi)
        coeff = np.zeros((2, 16, 16), dtype=complex)
        coeff[0, 8, 3] = 1.0  # unpaired Nyquist row
        coeff[0, 1, 1] = 1.0
        bad = inverse_transform(SpectralVectorField(grid, coeff))
        with pytest.raises(ValueError, match="band-limited"):
            PropagationRequest(params=P11, f=bad, t=0.5)


class TestIdentityAtTimeZero:
    def test_bitwise_copy(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 5)
        out = run(P11, f, 0.0)
        assert out is not f
        assert np.array_equal(out.values, f.values)

    def test_cosine_at_zero(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 6)
        assert np.array_equal(cosine_solution(P11, f, 0.0).values, f.values)


class TestPlaneWaveOracle:
    @pytest.mark.parametrize("flavor", ["half_wave_plus", "half_wave_minus", "cosine"])
    def test_longitudinal(self, flavor):
        grid = TorusGrid(2, 16, np.pi)
        k = np.array([3, 4])
        xi = (np.pi / grid.L) * k
        omega = (xi / np.linalg.norm(xi)).astype(complex)
        f = plane_wave(grid, k, omega)
        t = 0.83
        g = P11.c_p * float(np.linalg.norm(xi))
        factor = {"half_wave_plus": np.exp(1j * t * g),
                  "half_wave_minus": np.exp(-1j * t * g),
                  "cosine": np.cos(t * g)}[flavor]
        out = run(P11, f, t, flavor=flavor)
        assert np.max(np.abs(out.values - factor * f.values)) <= 1e-12

    @pytest.mark.parametrize("flavor", ["half_wave_plus", "half_wave_minus", "cosine"])
    def test_transverse(self, flavor):
        grid = TorusGrid(2, 16, np.pi)
        k = np.array([3, 4])
        xi = (np.pi / grid.L) * k
        perp = np.array([-4.0, 3.0]) / 5.0
        f = plane_wave(grid, k, perp.astype(complex))
        t = -0.61
        g = P11.c_s * float(np.linalg.norm(xi))
        factor = {"half_wave_plus": np.exp(1j * t * g),
                  "half_wave_minus": np.exp(-1j * t * g),
                  "cosine": np.cos(t * g)}[flavor]
        out = run(P11, f, t, flavor=flavor)
        assert np.max(np.abs(out.values - factor * f.values)) <= 1e-12

    def test_matches_single_frequency_multiplier(self):
        # ties the vectorized grid path to the per-frequency symbol module
        rng = np.random.default_rng(8)
        grid = TorusGrid(2, 16, np.pi)
        for _ in range(5):
            k = rng.integers(-7, 8, size=2)
            if not np.any(k):
                continue
            amp = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            amp /= np.linalg.norm(amp)
            theta = rng.standard_normal(2)
            theta /= np.linalg.norm(theta)
            t, v = rng.uniform(-1.5, 1.5), rng.uniform(0.0, 3.0)
            f = plane_wave(grid, k, amp)
            out = run(P11, f, t, v=v, theta=theta)
            xi = (np.pi / grid.L) * k
            sample = half_wave_multiplier(P11, xi.astype(float), t, v=v, theta=theta)
            expect = plane_wave(grid, k, np.ones(2)).values  # carries e^{i xi.x}
            phase = expect[0]  # scalar wave factor
            target = (sample.matrix @ amp).reshape(2, 1, 1) * phase
            assert np.max(np.abs(out.values - target)) <= 1e-12


class TestConservation:
    def test_energy(self):
        for n, m in ((2, 32), (3, 16)):
            grid = TorusGrid(n, m, np.pi)
            rng = np.random.default_rng(n)
            for _ in range(5):
                f = random_band_limited(grid, grid.nyquist / 2, rng)
                t = rng.uniform(-2.0, 2.0)
                assert abs(run(P11, f, t).l2_norm() / f.l2_norm() - 1.0) <= 1e-12

    def test_group_law(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 9)
        one = run(P11, run(P11, f, 0.7), 0.4)
        both = run(P11, f, 1.1)
        assert np.max(np.abs(one.values - both.values)) <= 1e-11

    def test_time_reversal(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 10)
        back = run(P11, run(P11, f, 0.9), 0.9, flavor="half_wave_minus")
        assert np.max(np.abs(back.values - f.values)) <= 1e-11


class TestClassicalReduction:
    def test_componentwise_scalar_half_wave(self):
        grid = TorusGrid(2, 32, np.pi)
        f = smooth_field(grid, 11)
        t = 0.77
        out = run(CLASSICAL, f, t)
        for comp in range(2):
            expect = scalar_half_wave(grid, f.values[comp], CLASSICAL.c_s, t)
            assert np.max(np.abs(out.values[comp] - expect)) <= 1e-12

    def test_cosine_classical(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 12)
        t = 1.21
        out = cosine_solution(CLASSICAL, f, t)
        for comp in range(2):
            plus = scalar_half_wave(grid, f.values[comp], CLASSICAL.c_s, t)
            minus = scalar_half_wave(grid, f.values[comp], CLASSICAL.c_s, -t)
            assert np.max(np.abs(out.values[comp] - 0.5 * (plus + minus))) <= 1e-12


class TestLineShift:
    def test_shift_equals_spectral_translation(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 13)
        t, v = 0.6, 2.5
        theta = np.array([0.8, -0.6])
        shifted = run(P11, f, t, v=v, theta=theta)
        unshifted = run(P11, f, t)
        assert np.max(np.abs(shifted.values - translate(unshifted, v * t * theta).values)) <= 1e-12

    def test_norm_preserved_with_shift(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 14)
        out = run(P11, f, 0.5, v=3.0, theta=np.array([0.0, 1.0]))
        assert abs(out.l2_norm() / f.l2_norm() - 1.0) <= 1e-12


class TestCosine:
    def test_even_in_time(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 15)
        a = cosine_solution(P11, f, 0.9)
        b = cosine_solution(P11, f, -0.9)
        assert np.max(np.abs(a.values - b.values)) <= 1e-14

    def test_real_data_real_output(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 16)  # real by construction
        out = cosine_solution(P11, f, 0.8)
        assert np.max(np.abs(out.values.imag)) == 0.0
        # the residue that was discarded is itself tiny: check via the
        # one-sided average computed independently
        avg = 0.5 * (run(P11, f, 0.8).values + run(P11, f, 0.8, flavor="half_wave_minus").values)
        assert np.max(np.abs(avg.imag)) <= 1e-12
        assert np.max(np.abs(avg.real - out.values.real)) <= 1e-12


class TestResidual:
    def test_classical_plane_wave_closed_form(self):
        grid = TorusGrid(2, 16, np.pi)
        k = np.array([2, 1])
        f = plane_wave(grid, k, np.array([1.0, 0.0]))
        g = CLASSICAL.c_s * float(np.linalg.norm((np.pi / grid.L) * k))
        t, dt = 0.4, 0.05
        expect = abs(np.cos(t * g)) * abs((2.0 * np.cos(g * dt) - 2.0) / dt**2 + g**2)
        got = pde_residual(CLASSICAL, f, t, dt)
        assert got == pytest.approx(expect, rel=1e-8)

    def test_t_zero_even_extension(self):
        grid = TorusGrid(2, 16, np.pi)
        k = np.array([2, 1])
        f = plane_wave(grid, k, np.array([1.0, 0.0]))
        g = CLASSICAL.c_s * float(np.linalg.norm((np.pi / grid.L) * k))
        dt = 0.05
        expect = abs((2.0 * np.cos(g * dt) - 2.0) / dt**2 + g**2)
        assert pde_residual(CLASSICAL, f, 0.0, dt) == pytest.approx(expect, rel=1e-8)

    def test_richardson_ratio(self):
        grid = TorusGrid(2, 32, np.pi)
        f = smooth_field(grid, 17, band=6.0)
        t, dt = 0.5, 0.02
        coarse = pde_residual(P11, f, t, dt)
        fine = pde_residual(P11, f, t, dt / 2)
        assert 3.5 <= coarse / fine <= 4.5

    def test_tiny_dt_warns(self):
        grid = TorusGrid(2, 16, np.pi)
        f = smooth_field(grid, 18)
        with pytest.warns(TimeStepPrecisionWarning):
            pde_residual(P11, f, 0.3, 1e-8)

    def test_dt_must_be_positive(self):
        grid = TorusGrid(2, 16, np.pi)
        with pytest.raises(ValueError):
            pde_residual(P11, smooth_field(grid, 19), 0.3, 0.0)


class TestSymbolApplication:
    def test_matches_symbol_matrix_on_plane_wave(self):
        grid = TorusGrid(2, 16, np.pi)
        k = np.array([3, -1])
        xi = (np.pi / grid.L) * k
        amp = np.array([0.3, 1.0 - 0.2j])
        f = plane_wave(grid, k, amp)
        out = apply_symbol_spectrally(P11, f)
        from elaswave.symbol import lame_symbol_matrix

        target = (-(lame_symbol_matrix(P11, xi) @ amp)).reshape(2, 1, 1) * plane_wave(
            grid, k, np.ones(2)
        ).values[0]
        assert np.max(np.abs(out.values - target)) <= 1e-11
