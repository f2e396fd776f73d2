"""Reference paths: plane waves, dense eigendecomposition, time stepping."""

import numpy as np
import pytest

from elaswave.grid import TorusGrid, plane_wave, random_band_limited
from elaswave.propagate import PropagationRequest, cosine_solution, half_wave
from elaswave.reference import (
    PlaneWaveSpec,
    leapfrog_reference,
    multiplier_via_eigendecomposition,
    plane_wave_exact,
    scalar_half_wave,
    taylor_kickoff,
)
from elaswave.symbol import LameParams, half_wave_multiplier

P11 = LameParams(1.0, 1.0)
GRID = TorusGrid(2, 16, np.pi)


def spec_for(k, pol):
    xi0 = (np.pi / GRID.L) * np.asarray(k, dtype=float)
    return PlaneWaveSpec(GRID, xi0, np.asarray(pol, dtype=complex))


class TestPlaneWaveSpec:
    def test_kind_classification(self):
        assert spec_for([3, 4], [0.6, 0.8]).kind == "longitudinal"
        assert spec_for([3, 4], [-0.8, 0.6]).kind == "transverse"
        assert spec_for([3, 4], [1.0, 0.0]).kind == "mixed"

    def test_off_lattice_rejected(self):
        with pytest.raises(ValueError, match="lattice"):
            PlaneWaveSpec(GRID, np.array([1.5, 0.0]), np.array([1.0, 0.0], dtype=complex))

    def test_out_of_band_rejected(self):
        with pytest.raises(ValueError, match="band"):
            spec_for([8, 0], [1.0, 0.0])

    def test_polarization_must_be_unit(self):
        with pytest.raises(ValueError, match="unit"):
            spec_for([1, 0], [2.0, 0.0])


class TestPlaneWaveExact:
    def test_time_zero_is_initial_wave(self):
        spec = spec_for([2, -3], [0.6, 0.8])
        field = plane_wave_exact(spec, P11, 0.0, "half_wave_plus")
        direct = plane_wave(GRID, [2, -3], spec.polarization)
        assert np.max(np.abs(field.values - direct.values)) <= 1e-14

    def test_longitudinal_half_period_flips_sign(self):
        spec = spec_for([3, 4], [0.6, 0.8])
        r = float(np.linalg.norm(spec.xi0))
        t_half = np.pi / (P11.c_p * r)
        field = plane_wave_exact(spec, P11, t_half, "cosine")
        initial = plane_wave_exact(spec, P11, 0.0, "cosine")
        assert np.max(np.abs(field.values + initial.values)) <= 1e-12

    def test_mixed_polarization_energy_split(self):
        pol = np.array([1.0, 0.0], dtype=complex)
        spec = spec_for([3, 4], pol)
        omega = spec.xi0 / np.linalg.norm(spec.xi0)
        weight_long = abs(complex(omega @ pol)) ** 2
        # the mixed wave is the sum of its projected pure waves at every time
        long_spec = PlaneWaveSpec(GRID, spec.xi0, omega.astype(complex))
        trans = pol - complex(omega @ pol) * omega
        trans_unit = trans / np.linalg.norm(trans)
        trans_spec = PlaneWaveSpec(GRID, spec.xi0, trans_unit)
        for t in (0.0, 0.37, 1.9):
            whole = plane_wave_exact(spec, P11, t, "half_wave_plus")
            part_l = plane_wave_exact(long_spec, P11, t, "half_wave_plus")
            part_t = plane_wave_exact(trans_spec, P11, t, "half_wave_plus")
            combo = (
                complex(omega @ pol) * part_l.values
                + np.linalg.norm(trans) * part_t.values
            )
            assert np.max(np.abs(whole.values - combo)) <= 1e-12
            # energy fractions are time independent
            frac = (np.abs(complex(omega @ pol)) * part_l.l2_norm() / whole.l2_norm()) ** 2
            assert frac == pytest.approx(weight_long, rel=1e-12)

    def test_rejects_unknown_flavor(self):
        with pytest.raises(ValueError, match="flavor"):
            plane_wave_exact(spec_for([1, 0], [1.0, 0.0]), P11, 0.1, "sideways")


class TestEigendecompositionMultiplier:
    def test_zero_frequency_identity(self):
        assert np.array_equal(
            multiplier_via_eigendecomposition(P11, np.zeros(3), 1.7), np.eye(3)
        )

    def test_frozen_eigenphases(self):
        u = multiplier_via_eigendecomposition(P11, np.array([3.0, 4.0]), 1.0)
        omega = np.array([0.6, 0.8])
        proj = np.outer(omega, omega)
        expect = np.exp(1j * np.sqrt(75.0)) * proj + np.exp(5.0j) * (np.eye(2) - proj)
        assert np.max(np.abs(u - expect)) <= 1e-12

    def test_agreement_with_symbol_path(self):
        rng = np.random.default_rng(77)
        for n in (2, 3):
            worst = 0.0
            for _ in range(300):
                xi = rng.standard_normal(n) * rng.uniform(0.1, 10.0)
                t = rng.uniform(-2.0, 2.0)
                ours = half_wave_multiplier(P11, xi, t).matrix
                ref = multiplier_via_eigendecomposition(P11, xi, t)
                worst = max(worst, float(np.linalg.norm(ours - ref)))
            assert worst <= 1e-10, (n, worst)


class TestScalarHalfWave:
    def test_time_zero_identity(self):
        rng = np.random.default_rng(5)
        comp = rng.standard_normal(GRID.shape) + 1j * rng.standard_normal(GRID.shape)
        out = scalar_half_wave(GRID, comp, 1.3, 0.0)
        assert np.max(np.abs(out - comp)) <= 1e-13

    def test_plane_wave_phase(self):
        f = plane_wave(GRID, [2, 1], np.array([1.0, 0.0]))
        r = float(np.linalg.norm((np.pi / GRID.L) * np.array([2.0, 1.0])))
        out = scalar_half_wave(GRID, f.values[0], 2.0, 0.7)
        assert np.max(np.abs(out - np.exp(1j * 0.7 * 2.0 * r) * f.values[0])) <= 1e-12

    def test_shape_validation(self):
        with pytest.raises(ValueError, match="shape"):
            scalar_half_wave(GRID, np.zeros((4, 4)), 1.0, 0.1)


class TestLeapfrog:
    def test_single_step_is_taylor_kickoff(self):
        grid = TorusGrid(2, 32, np.pi)
        f = random_band_limited(grid, 6.0, np.random.default_rng(9))
        dt = 1e-3
        stepped = leapfrog_reference(P11, f, dt, dt)
        kicked = taylor_kickoff(P11, f, dt)
        assert np.max(np.abs(stepped.values - kicked.values)) <= 1e-13

    def test_plane_wave_discrete_dispersion(self):
        # the recurrence solves exactly to cos(n * theta) with
        # cos(theta) = 1 - (dt*g)^2/2
        grid = TorusGrid(2, 16, np.pi)
        k = np.array([3, 4])
        f = plane_wave(grid, k, np.array([0.6, 0.8]))  # longitudinal
        g = P11.c_p * float(np.linalg.norm((np.pi / grid.L) * k))
        t, dt = 0.5, 0.01
        steps = round(t / dt)
        theta = np.arccos(1.0 - (t / steps * g) ** 2 / 2.0)
        expect = np.cos(steps * theta)
        out = leapfrog_reference(P11, f, t, dt)
        assert np.max(np.abs(out.values - expect * f.values)) <= 1e-10

    def test_matches_cosine_solution(self):
        grid = TorusGrid(2, 32, np.pi)
        f = random_band_limited(grid, 6.0, np.random.default_rng(10))
        dt = 0.5 / (P11.c_p * grid.xi_max)
        approx = leapfrog_reference(P11, f, 1.0, dt)
        exact = cosine_solution(P11, f, 1.0)
        rel = (approx - exact).l2_norm() / exact.l2_norm()
        assert rel <= 1e-2

    def test_convergence_order(self):
        grid = TorusGrid(2, 32, np.pi)
        f = random_band_limited(grid, 5.0, np.random.default_rng(11))
        t = 0.8
        exact = cosine_solution(P11, f, t)

        def err(dt):
            return (leapfrog_reference(P11, f, t, dt) - exact).l2_norm()

        ratio = err(0.01) / err(0.005)
        assert 3.5 <= ratio <= 4.5

    def test_unstable_step_rejected(self):
        grid = TorusGrid(2, 64, np.pi)
        f = random_band_limited(grid, 8.0, np.random.default_rng(12))
        with pytest.raises(ValueError, match="unstable"):
            leapfrog_reference(P11, f, 1.0, 0.05)

    def test_time_zero(self):
        grid = TorusGrid(2, 16, np.pi)
        f = random_band_limited(grid, 4.0, np.random.default_rng(13))
        assert np.array_equal(leapfrog_reference(P11, f, 0.0, 0.01).values, f.values)


class TestCrossModule:
    def test_plane_wave_exact_vs_propagator(self):
        grid = TorusGrid(2, 16, np.pi)
        pols = {
            "longitudinal": np.array([0.6, 0.8], dtype=complex),
            "transverse": np.array([-0.8, 0.6], dtype=complex),
            "mixed": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0),
        }
        for kind, pol in pols.items():
            spec = spec_for([3, 4], pol)
            assert spec.kind == kind
            f = plane_wave(grid, [3, 4], pol)
            for flavor in ("half_wave_plus", "half_wave_minus", "cosine"):
                for t in (0.45, -1.3):
                    via_grid = half_wave(
                        PropagationRequest(params=P11, f=f, t=t, flavor=flavor)
                    )
                    exact = plane_wave_exact(spec, P11, t, flavor)
                    gap = np.max(np.abs(via_grid.values - exact.values))
                    assert gap <= 1e-11, (kind, flavor, t, gap)

    def test_classical_reduction_through_reference(self):
        params = LameParams(-1.0, 1.0)
        grid = TorusGrid(2, 16, np.pi)
        f = random_band_limited(grid, 4.0, np.random.default_rng(14))
        t = 0.9
        out = half_wave(PropagationRequest(params=params, f=f, t=t))
        for comp in range(2):
            ref = scalar_half_wave(grid, f.values[comp], params.c_s, t)
            assert np.max(np.abs(out.values[comp] - ref)) <= 1e-12
