"""Independent reference computations used to validate the other modules.

Nothing here reuses the geodesic-rotation construction or the sphere
partition: the multiplier reference goes through a dense symmetric
eigendecomposition, plane waves are written down in closed form from the
radial/transverse split, and the time-stepping reference discretizes time
with a centered second-order scheme.  Agreement between these paths and the
production ones is what the test suite leans on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    SpectralVectorField,
    TorusGrid,
    VectorField,
    forward_transform,
    inverse_transform,
)
from .propagate import FLAVORS, apply_symbol_spectrally
from .symbol import LameParams, lame_symbol_matrix

__all__ = [
    "PlaneWaveSpec",
    "plane_wave_exact",
    "multiplier_via_eigendecomposition",
    "scalar_half_wave",
    "leapfrog_reference",
    "taylor_kickoff",
    "radial_energy_histogram",
    "front_radius",
]

_CLASSIFY_TOL = 1e-12
_ON_LATTICE_TOL = 1e-9

# Centered second-order stepping is stable while dt * c_p * |xi|_max < 2;
# reject requests above this margin.
_STABILITY_MARGIN = 1.9


@dataclass(frozen=True)
class PlaneWaveSpec:
    """An on-lattice plane wave e^{i xi0 . x} * polarization on a given grid.

    ``kind`` classifies the polarization against the radial direction of
    xi0 with tolerance 1e-12 on the inner product: ``longitudinal`` when
    parallel, ``transverse`` when orthogonal, ``mixed`` otherwise.
    """

    grid: TorusGrid
    xi0: np.ndarray
    polarization: np.ndarray

    def __post_init__(self):
        xi0 = np.array(self.xi0, dtype=float, copy=True)
        if xi0.shape != (self.grid.n,):
            raise ValueError(f"xi0 must have shape ({self.grid.n},), got {xi0.shape}")
        k = xi0 * self.grid.L / np.pi
        k_int = np.rint(k)
        if np.max(np.abs(k - k_int)) > _ON_LATTICE_TOL:
            raise ValueError(f"xi0 = {xi0.tolist()} is not on the frequency lattice")
        if np.any(np.abs(k_int) > self.grid.M // 2 - 1):
            raise ValueError(f"xi0 = {xi0.tolist()} exceeds the grid band")
        pol = np.array(self.polarization, dtype=complex, copy=True)
        if pol.shape != (self.grid.n,):
            raise ValueError(
                f"polarization must have shape ({self.grid.n},), got {pol.shape}"
            )
        nrm = float(np.linalg.norm(pol))
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"polarization must be a unit vector (got norm {nrm!r})")
        xi0.setflags(write=False)
        pol.setflags(write=False)
        object.__setattr__(self, "xi0", xi0)
        object.__setattr__(self, "polarization", pol)

    @property
    def kind(self) -> str:
        r = float(np.linalg.norm(self.xi0))
        if r == 0.0:
            return "longitudinal"  # degenerate constant wave; both speeds act as 1
        inner = abs(complex(np.vdot(self.xi0 / r, self.polarization)))
        if inner >= 1.0 - _CLASSIFY_TOL:
            return "longitudinal"
        if inner <= _CLASSIFY_TOL:
            return "transverse"
        return "mixed"


def _time_factor(speed_times_r: float, t: float, flavor: str) -> complex:
    if flavor == "half_wave_plus":
        return complex(np.exp(1j * t * speed_times_r))
    if flavor == "half_wave_minus":
        return complex(np.exp(-1j * t * speed_times_r))
    if flavor == "cosine":
        return complex(np.cos(t * speed_times_r))
    raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")


def plane_wave_exact(spec: PlaneWaveSpec, params: LameParams, t: float, flavor: str) -> VectorField:
    """Closed-form evolution of a plane wave, sampled on the spec's grid.

    The radial projection of the polarization rides the pressure speed, the
    rest rides the shear speed; a mixed polarization is the sum of the two.
    """
    grid = spec.grid
    r = float(np.linalg.norm(spec.xi0))
    if r == 0.0:
        amp = spec.polarization * _time_factor(0.0, t, flavor)
    else:
        omega = spec.xi0 / r
        radial = complex(omega @ spec.polarization) * omega
        trans = spec.polarization - radial
        amp = radial * _time_factor(params.c_p * r, t, flavor)
        amp = amp + trans * _time_factor(params.c_s * r, t, flavor)
    phase = np.exp(1j * np.tensordot(spec.xi0, grid.x_lattice, axes=(0, 0)))
    values = amp.reshape((grid.n,) + (1,) * grid.n) * phase
    return VectorField(grid, values)


def multiplier_via_eigendecomposition(params: LameParams, xi, t: float) -> np.ndarray:
    """e^{i t sqrt(L(xi))} from a dense symmetric eigendecomposition.

    Deliberately ignores the known eigenstructure of the symbol; a generic
    solver diagonalizes the matrix, so this path is independent of the
    rotation/partition construction it is used to check.
    """
    mat = lame_symbol_matrix(params, xi)
    eigvals, eigvecs = np.linalg.eigh(mat)
    phases = np.exp(1j * t * np.sqrt(np.maximum(eigvals, 0.0)))
    return (eigvecs * phases) @ eigvecs.T


def scalar_half_wave(grid: TorusGrid, component: np.ndarray, c: float, t: float) -> np.ndarray:
    """One-component half-wave multiplier e^{i t c |xi|} on grid samples."""
    arr = np.asarray(component, dtype=complex)
    if arr.shape != grid.shape:
        raise ValueError(f"component must have shape {grid.shape}, got {arr.shape}")
    spectrum = np.fft.fftn(arr)
    spectrum *= np.exp(1j * t * c * grid.xi_magnitude)
    return np.fft.ifftn(spectrum)


def leapfrog_reference(params: LameParams, f: VectorField, t: float, dt: float) -> VectorField:
    """Centered second-order time stepping of the elastic evolution from rest.

    The spatial operator is applied spectrally (exactly), so the only
    discretization being tested is the time axis.  The number of steps is
    round(t/dt), at least one, with dt adjusted to land on t exactly; the
    first step uses the Taylor kickoff u1 = f + (dt^2/2) A f implied by the
    zero initial velocity.  Requests violating the stability bound
    dt * c_p * |xi|_max <= 1.9 are rejected.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t == 0.0:
        return f.copy()
    steps = max(1, round(abs(t) / dt))
    dt_eff = t / steps
    grid = f.grid
    if abs(dt_eff) * params.c_p * grid.xi_max > _STABILITY_MARGIN:
        raise ValueError(
            f"unstable step: dt*c_p*|xi|_max = {abs(dt_eff) * params.c_p * grid.xi_max:.3f} "
            f"exceeds {_STABILITY_MARGIN}"
        )
    # iterate on coefficients; the spatial operator is diagonal there
    xi = grid.xi_lattice
    r2 = grid.xi_magnitude**2
    F = forward_transform(f)

    def operator(coeff: np.ndarray) -> np.ndarray:
        dot = np.einsum("i...,i...->...", xi, coeff)
        return -(params.mu * r2 * coeff + (params.lam + params.mu) * xi * dot)

    u_prev = F.coefficients
    u_curr = u_prev + 0.5 * dt_eff**2 * operator(u_prev)
    for _ in range(steps - 1):
        u_next = 2.0 * u_curr - u_prev + dt_eff**2 * operator(u_curr)
        u_prev, u_curr = u_curr, u_next
    return inverse_transform(SpectralVectorField(grid, u_curr))


def taylor_kickoff(params: LameParams, f: VectorField, dt: float) -> VectorField:
    """The exact first step from rest, f + (dt^2/2) A f; exposed for tests."""
    kicked = f.values + 0.5 * dt**2 * apply_symbol_spectrally(params, f).values
    return VectorField(f.grid, kicked)


def radial_energy_histogram(field: VectorField, bins: int | None = None):
    """Angle-integrated energy |u|^2, binned by radius over [0, L).

    Returns (bin_centers, energy_per_bin).  Locates expanding wavefronts of
    pulses launched from the origin: for the one-sided flavors the binned
    modulus is the pulse envelope and peaks at (speed * time).
    """
    grid = field.grid
    if bins is None:
        bins = grid.M // 2
    radius = np.sqrt(np.sum(grid.x_lattice**2, axis=0))
    density = np.sum(np.abs(field.values) ** 2, axis=0) * grid.cell_volume
    energy, edges = np.histogram(
        radius.ravel(), bins=bins, range=(0.0, grid.L), weights=density.ravel()
    )
    return 0.5 * (edges[:-1] + edges[1:]), energy


def front_radius(centers: np.ndarray, energy: np.ndarray, near: float, half_window: float) -> float:
    """Sub-bin wavefront location: parabolic refinement of the local peak.

    Searches the bins within ``half_window`` of ``near`` for the energy
    maximum and refines it with a three-point parabola.
    """
    mask = np.abs(centers - near) <= half_window
    if not np.any(mask):
        raise ValueError(f"no histogram bins within {half_window} of {near}")
    idx = np.flatnonzero(mask)
    k = int(idx[np.argmax(energy[idx])])
    k = min(max(k, 1), energy.size - 2)
    left, mid, right = energy[k - 1], energy[k], energy[k + 1]
    denom = left - 2.0 * mid + right
    shift = 0.0 if denom == 0.0 else 0.5 * (left - right) / denom
    return float(centers[k] + shift * (centers[1] - centers[0]))
