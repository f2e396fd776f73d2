"""Pointwise construction and diagonalization of the elastic-medium symbol.

The symbol of the (negated) elastic operator at frequency xi is the real
symmetric matrix

    L(xi) = mu*|xi|^2 * I + (lam + mu) * xi xi^t,

whose eigenvalues are (lam + 2*mu)*|xi|^2 on the radial direction (pressure
branch) and mu*|xi|^2 on its orthogonal complement (shear branch).  This module
builds L(xi), the geodesic rotations that align the radial direction with a
coordinate pole, the smooth two-cap partition of unity on the sphere, and the
resulting unitary propagator multiplier at a single frequency.

Everything here is a pure function of its arguments; all values are plain
numpy arrays or small frozen dataclasses and can be shared freely between
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LameParams",
    "FrequencyPoint",
    "MultiplierSample",
    "BlockDecomposition",
    "smooth_step",
    "smooth_step_prime",
    "TRANSITION_HALF_WIDTH",
    "lame_symbol_matrix",
    "eigenvalue_diagonal",
    "geodesic_rotation",
    "partition_of_unity",
    "branch_exponential",
    "half_wave_multiplier",
    "symbol_square_root",
    "block_decomposition",
]

# Half-width of the partition transition zone on the sphere, measured in the
# cosine of the polar angle.  Must stay strictly below 1/sqrt(2) so that each
# weight is supported inside the admissible cap of its sign.
TRANSITION_HALF_WIDTH = 0.5

# Cosine threshold for cap admissibility: directions with omega . (sign*e1)
# below -1/sqrt(2) are outside the cap and rejected.
_CAP_COS_MIN = -1.0 / math.sqrt(2.0)
_CAP_SLACK = 1e-12

# Below this angle (radians) to the pole the aligning rotation is the
# identity; avoids 0/0 when normalizing the transverse component.
_POLE_ANGLE_TOL = 1e-8

_UNIT_TOL = 1e-12


def _bump(u: np.ndarray) -> np.ndarray:
    """exp(-1/u) for u > 0, continued by 0 elsewhere (smooth on the line)."""
    out = np.zeros_like(u)
    pos = u > 0.0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """C-infinity transition: 0 for u <= 0, 1 for u >= 1, increasing between.

    This is the single smooth-step primitive of the package; the sphere
    partition and the compactly supported time cutoff are both built from it.
    """
    arr = np.asarray(u, dtype=float)
    a = _bump(arr)
    b = _bump(1.0 - arr)
    out = a / (a + b)
    if np.ndim(u) == 0:
        return float(out)
    return out


def smooth_step_prime(u):
    """Derivative of :func:`smooth_step`; vanishes outside (0, 1)."""
    arr = np.asarray(u, dtype=float)
    out = np.zeros_like(arr)
    inside = (arr > 0.0) & (arr < 1.0)
    ui = arr[inside]
    a = np.exp(-1.0 / ui)
    b = np.exp(-1.0 / (1.0 - ui))
    out[inside] = a * b * (ui**-2 + (1.0 - ui) ** -2) / (a + b) ** 2
    if np.ndim(u) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class LameParams:
    """Material constants of the elastic medium (dimensionless).

    Ellipticity requires mu > 0 and lam + 2*mu > 0; violating inputs are
    rejected.  The derived wave speeds are c_p = sqrt(lam + 2*mu) for the
    pressure branch and c_s = sqrt(mu) for the shear branch.  They coincide
    exactly when lam + mu = 0, in which case the medium degenerates to a
    classical scalar wave in each component.
    """

    lam: float
    mu: float

    def __post_init__(self):
        if not (self.mu > 0.0 and self.lam + 2.0 * self.mu > 0.0):
            raise ValueError(
                "ellipticity violated: require mu > 0 and lambda + 2*mu > 0 "
                f"(got lambda={self.lam}, mu={self.mu})"
            )

    @property
    def c_p(self) -> float:
        return math.sqrt(self.lam + 2.0 * self.mu)

    @property
    def c_s(self) -> float:
        return math.sqrt(self.mu)

    @property
    def is_classical(self) -> bool:
        """True when lam + mu = 0 and both branches share one speed."""
        return self.lam + self.mu == 0.0


def _as_xi_array(xi) -> np.ndarray:
    if isinstance(xi, FrequencyPoint):
        return xi.xi
    arr = np.asarray(xi, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError(f"frequency must be a vector of dimension >= 2, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class FrequencyPoint:
    """A frequency vector with cached magnitude and unit direction."""

    xi: np.ndarray

    def __post_init__(self):
        arr = np.array(self.xi, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError(f"frequency must be a vector of dimension >= 2, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "xi", arr)

    @property
    def n(self) -> int:
        return self.xi.size

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.xi))

    @property
    def direction(self) -> np.ndarray:
        """Unit direction xi/|xi|; undefined (raises) at the origin."""
        r = self.magnitude
        if r == 0.0:
            raise ValueError("direction is undefined at the zero frequency")
        return self.xi / r

    @classmethod
    def of(cls, xi) -> "FrequencyPoint":
        return xi if isinstance(xi, FrequencyPoint) else cls(np.asarray(xi, dtype=float))


@dataclass(frozen=True)
class MultiplierSample:
    """The propagator multiplier at one frequency.

    ``matrix`` is the full n x n complex action on a Fourier coefficient,
    including the line-shift modulation; ``shift_phase`` records that unit
    scalar separately so the pure propagator part is ``matrix / shift_phase``.
    The matrix is unitary with |det| = 1.
    """

    matrix: np.ndarray
    t: float
    shift_phase: complex


@dataclass(frozen=True)
class BlockDecomposition:
    """First-row/first-column block split of an n x n matrix.

    ``corner`` is the (0, 0) entry, ``row`` the remainder of the first row,
    ``col`` the remainder of the first column and ``minor`` the trailing
    (n-1) x (n-1) block.  :meth:`assemble` reproduces the source exactly.
    """

    corner: complex
    row: np.ndarray
    col: np.ndarray
    minor: np.ndarray

    def assemble(self) -> np.ndarray:
        n = self.row.size + 1
        out = np.empty((n, n), dtype=self.minor.dtype)
        out[0, 0] = self.corner
        out[0, 1:] = self.row
        out[1:, 0] = self.col
        out[1:, 1:] = self.minor
        return out


def block_decomposition(matrix: np.ndarray) -> BlockDecomposition:
    """Split ``matrix`` into corner / first row / first column / trailing minor."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise ValueError(f"need a square matrix of size >= 2, got shape {m.shape}")
    return BlockDecomposition(
        corner=m[0, 0],
        row=m[0, 1:].copy(),
        col=m[1:, 0].copy(),
        minor=m[1:, 1:].copy(),
    )


def lame_symbol_matrix(params: LameParams, xi) -> np.ndarray:
    """Symbol matrix mu*|xi|^2*I + (lam+mu)*xi xi^t at one frequency.

    Symmetric for all xi; the zero frequency gives the zero matrix.
    Eigenvalues are (lam+2*mu)*|xi|^2 on the radial direction and mu*|xi|^2
    with multiplicity n-1 on its orthogonal complement.
    """
    v = _as_xi_array(xi)
    r2 = float(v @ v)
    return params.mu * r2 * np.eye(v.size) + (params.lam + params.mu) * np.outer(v, v)


def eigenvalue_diagonal(params: LameParams, xi) -> np.ndarray:
    """Eigenvalues [(lam+2mu)|xi|^2, mu|xi|^2, ..., mu|xi|^2] of the symbol."""
    v = _as_xi_array(xi)
    r2 = float(v @ v)
    out = np.full(v.size, params.mu * r2)
    out[0] = (params.lam + 2.0 * params.mu) * r2
    return out


def _check_sign(sign: int) -> int:
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return sign


def geodesic_rotation(sign: int, omega: np.ndarray) -> np.ndarray:
    """Rotation rho_sign(omega) whose transpose carries omega to sign*e1.

    The transport happens along the great-circle arc joining omega to the
    pole sign*e1, fixing the orthogonal complement of span{e1, omega}
    pointwise.  ``omega`` must be a unit vector in the admissible cap of the
    requested sign, i.e. omega . (sign*e1) >= -1/sqrt(2); directions within
    1e-8 radians of the pole map to the identity by convention.
    """
    sign = _check_sign(sign)
    w = np.asarray(omega, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError(f"direction must be a vector of dimension >= 2, got shape {w.shape}")
    n = w.size
    nrm = float(np.linalg.norm(w))
    if abs(nrm - 1.0) > _UNIT_TOL:
        raise ValueError(f"direction must be a unit vector (|omega| = {nrm!r})")

    cos_t = sign * w[0]  # omega . (sign*e1)
    if cos_t < _CAP_COS_MIN - _CAP_SLACK:
        raise ValueError(
            f"direction outside the admissible cap for sign {sign:+d}: "
            f"omega . ({sign:+d}*e1) = {cos_t!r} < -1/sqrt(2)"
        )

    pole = np.zeros(n)
    pole[0] = float(sign)
    resid = w - cos_t * pole  # transverse component, same for either pole
    sin_t = float(np.linalg.norm(resid))
    # atan2 form: well conditioned near the pole where cos_t ~ 1
    angle = math.atan2(sin_t, cos_t)
    if angle < _POLE_ANGLE_TOL:
        return np.eye(n)

    trans = resid / sin_t
    rot = np.eye(n)
    rot += (cos_t - 1.0) * (np.outer(pole, pole) + np.outer(trans, trans))
    rot += sin_t * (np.outer(trans, pole) - np.outer(pole, trans))
    return rot


def partition_of_unity(omega: np.ndarray) -> tuple[float, float]:
    """Smooth weights (w_plus, w_minus) of the two-cap partition at ``omega``.

    The weights sum to one, each lies in [0, 1], and w_plus is 1 where
    omega . e1 >= 1/2, 0 where omega . e1 <= -1/2, with the smooth-step
    transition between.  Each weight vanishes before the boundary of the
    opposite cap, so the aligning rotation of a sign is only ever requested
    where it is defined.
    """
    w = np.asarray(omega, dtype=float)
    nrm = float(np.linalg.norm(w))
    if abs(nrm - 1.0) > _UNIT_TOL:
        raise ValueError(f"direction must be a unit vector (|omega| = {nrm!r})")
    w_plus = smooth_step(float(w[0]) + TRANSITION_HALF_WIDTH)
    return w_plus, 1.0 - w_plus


def branch_exponential(params: LameParams, xi, t: float, sign: int) -> np.ndarray:
    """One-cap conjugated exponential R diag(e^{i t c_p r}, e^{i t c_s r}, ...) R^t.

    Defined for frequencies whose direction lies in the cap of ``sign``.
    Wherever both caps apply, the two signs agree (both equal the functional
    calculus of the symbol), which is what makes the partition-weighted sum
    independent of the partition.
    """
    vec = _as_xi_array(xi)
    r = float(np.linalg.norm(vec))
    omega = vec / r
    rot = geodesic_rotation(sign, omega)
    phases = np.full(vec.size, np.exp(1j * t * params.c_s * r))
    phases[0] = np.exp(1j * t * params.c_p * r)
    return (rot * phases) @ rot.T


def half_wave_multiplier(
    params: LameParams,
    xi,
    t: float,
    v: float = 0.0,
    theta: np.ndarray | None = None,
) -> MultiplierSample:
    """Unitary propagator multiplier at one frequency, with line-shift phase.

    Returns e^{i v t theta.xi} times the partition-weighted sum over both caps
    of the conjugated phase exponentials.  Both cap contributions agree with
    the functional calculus e^{i t sqrt(L(xi))}, so the total is unitary and
    independent of the partition.  The zero frequency yields the identity.

    Parameters
    ----------
    params : LameParams
        Material constants.
    xi : array or FrequencyPoint
        Frequency vector, dimension >= 2.
    t : float
        Time.
    v : float, optional
        Line speed, >= 0.  Contributes only the scalar modulation.
    theta : array, optional
        Unit line direction; defaults to e1.  Required shape (n,).
    """
    vec = _as_xi_array(xi)
    n = vec.size
    if v < 0.0:
        raise ValueError(f"line speed must be nonnegative, got {v}")
    if theta is None:
        theta_v = np.zeros(n)
        theta_v[0] = 1.0
    else:
        theta_v = np.asarray(theta, dtype=float)
        if theta_v.shape != (n,):
            raise ValueError(f"theta must have shape ({n},), got {theta_v.shape}")
        if abs(float(np.linalg.norm(theta_v)) - 1.0) > _UNIT_TOL:
            raise ValueError("theta must be a unit vector")

    shift = complex(np.exp(1j * v * t * float(theta_v @ vec)))
    r = float(np.linalg.norm(vec))
    if r == 0.0:
        return MultiplierSample(matrix=np.eye(n, dtype=complex), t=t, shift_phase=shift)

    w_plus, w_minus = partition_of_unity(vec / r)
    total = np.zeros((n, n), dtype=complex)
    if w_plus > 0.0:
        total += w_plus * branch_exponential(params, vec, t, +1)
    if w_minus > 0.0:
        total += w_minus * branch_exponential(params, vec, t, -1)
    return MultiplierSample(matrix=shift * total, t=t, shift_phase=shift)


def symbol_square_root(params: LameParams, xi) -> np.ndarray:
    """Positive square root of the symbol via the cap-weighted diagonalization.

    Built as the partition-weighted sum of R diag(c_p r, c_s r, ...) R^t over
    both caps; its square reproduces lame_symbol_matrix(params, xi).
    """
    vec = _as_xi_array(xi)
    n = vec.size
    r = float(np.linalg.norm(vec))
    if r == 0.0:
        return np.zeros((n, n))
    w_plus, w_minus = partition_of_unity(vec / r)
    roots = np.full(n, params.c_s * r)
    roots[0] = params.c_p * r
    total = np.zeros((n, n))
    for sign, weight in ((+1, w_plus), (-1, w_minus)):
        if weight > 0.0:
            rot = geodesic_rotation(sign, vec / r)
            total += weight * ((rot * roots) @ rot.T)
    return total
