"""Molecular parameters and their factorisation into Gaussian operations.

A vibronic transition within the harmonic approximation is a Bogoliubov
transformation between the normal modes of the two electronic states,
fixed by the initial/final vibrational frequencies, the Duschinsky mode
rotation and the equilibrium displacement.  The Doktorov factorisation
expresses it as squeeze -> rotate -> inverse squeeze -> displace, which is
the order produced by :func:`build_sequence` (first list entry acts first).

Squeeze parameters are ln(sqrt(omega)/scale); the rescaling constant cancels
between the forward and inverse squeeze stages, so physical results do not
depend on it, while the intermediate squeezing magnitude (and hence both the
device pulse duration and the Fock truncation error) does.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .errors import (
    ConfigurationError,
    DimensionError,
    ParameterError,
    ReflectionError,
    RotationMatrixError,
)
from .fock import Displace, GaussianOp, Rotate, Squeeze

#: rescaling constant used throughout the reference data set
DEFAULT_SCALE = 25.0

#: tolerance on orthogonality / determinant / entry consistency of the mode
#: rotation matrix; loose enough to accept matrices quoted to three decimals
ROTATION_ATOL = 1e-3

#: squeeze magnitude beyond which the trapped-ion drive cannot follow
DEVICE_SQUEEZE_LIMIT = 4.0


@dataclass(frozen=True, eq=False)
class MolecularParams:
    """Vibrational frequencies, mode rotation and displacement of a transition.

    Frequencies are in cm^-1.  Exactly one of ``delta`` (dimensionless
    displacement) or ``d`` (mass-weighted displacement, units declared by
    ``unit_system``) must be given.  ``omega_00`` is the electronic origin
    offset added to every transition frequency.
    """

    omega_initial: tuple
    omega_final: tuple
    duschinsky: np.ndarray
    delta: tuple | None = None
    d: tuple | None = None
    unit_system: str | None = None
    omega_00: float = 0.0
    name: str = ""

    def __post_init__(self):
        w_i = tuple(float(w) for w in self.omega_initial)
        w_f = tuple(float(w) for w in self.omega_final)
        if len(w_i) != len(w_f) or not w_i:
            raise ParameterError(
                f"omega_initial/omega_final lengths differ: {len(w_i)} vs {len(w_f)}"
            )
        if any(w <= 0 or not math.isfinite(w) for w in w_i + w_f):
            raise ParameterError("all vibrational frequencies must be positive and finite")
        n = len(w_i)
        u = np.array(self.duschinsky, dtype=float)
        if u.shape != (n, n):
            raise ParameterError(f"duschinsky must be {n}x{n}, got {u.shape}")
        resid = np.max(np.abs(u.T @ u - np.eye(n)))
        if resid > ROTATION_ATOL:
            raise RotationMatrixError(
                f"duschinsky is not orthogonal (max |U^T U - I| = {resid:.2e})"
            )
        u.setflags(write=False)
        if (self.delta is None) == (self.d is None):
            raise ParameterError("exactly one of delta or d must be provided")
        if self.d is not None and self.unit_system is None:
            raise ConfigurationError("d requires a declared unit_system")
        object.__setattr__(self, "omega_initial", w_i)
        object.__setattr__(self, "omega_final", w_f)
        object.__setattr__(self, "duschinsky", u)
        if self.delta is not None:
            object.__setattr__(self, "delta", tuple(float(x) for x in self.delta))
        if self.d is not None:
            object.__setattr__(self, "d", tuple(float(x) for x in self.d))
        object.__setattr__(self, "omega_00", float(self.omega_00))

    @property
    def nmodes(self) -> int:
        return len(self.omega_initial)

    def displacement(self) -> tuple:
        """Dimensionless displacement, converting from d if necessary."""
        if self.delta is not None:
            return self.delta
        return tuple(delta_from_d(self.d, self.omega_final, self.unit_system))


@dataclass(frozen=True)
class DoktorovSequence:
    """Ordered Gaussian operations realising one vibronic transition.

    ``ops`` applies squeeze (zeta_initial), rotate (theta), inverse squeeze
    (zeta_final entries negated), then displace.  The named parameter fields
    mirror what the ops encode, for reporting.
    """

    ops: tuple
    scale: float
    zeta_initial: tuple
    zeta_final: tuple
    theta: float
    delta: tuple
    omega_final: tuple
    omega_00: float = 0.0
    name: str = ""

    @property
    def nmodes(self) -> int:
        return len(self.zeta_initial)


def squeezing_params(freqs, scale: float) -> np.ndarray:
    """Per-mode squeeze parameters ln(sqrt(freq)/scale)."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if np.any(freqs <= 0) or not np.all(np.isfinite(freqs)):
        raise ParameterError(f"frequencies must be positive, got {freqs.tolist()}")
    scale = float(scale)
    if scale <= 0 or not math.isfinite(scale):
        raise ParameterError(f"scale must be positive, got {scale}")
    return np.log(np.sqrt(freqs) / scale)


def rotation_angle_from_U(u, *, atol: float = ROTATION_ATOL) -> float:
    """Mixing angle of a 2x2 rotation [[cos, sin], [-sin, cos]].

    Accepts matrices quoted to limited precision: orthogonality, determinant
    and cross-entry consistency are checked against ``atol``.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 matrix, got shape {u.shape}")
    det = float(np.linalg.det(u))
    if abs(det + 1.0) <= atol:
        raise ReflectionError(f"matrix is a reflection (det = {det:.6f}), not a rotation")
    if abs(det - 1.0) > atol:
        raise RotationMatrixError(f"determinant {det:.6f} is not +1 within {atol}")
    if np.max(np.abs(u.T @ u - np.eye(2))) > atol:
        raise RotationMatrixError("matrix is not orthogonal within tolerance")
    theta = math.atan2(u[0, 1], u[0, 0])
    expected = np.array(
        [[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]]
    )
    mismatch = np.max(np.abs(u - expected))
    if mismatch > atol:
        raise RotationMatrixError(
            f"entries deviate from a rotation by {mismatch:.2e} (> {atol})"
        )
    return theta


# conversion factor from d (in the declared units) to the dimensionless
# displacement: delta_k = d_k * sqrt(omega'_k / (2*hbar)) with consistent units
_CM1_TO_RAD_PER_S = 2.0 * math.pi * constants.c * 100.0
_HARTREE = constants.physical_constants["Hartree energy"][0]
_CM1_TO_HARTREE = constants.h * constants.c * 100.0 / _HARTREE
_SQRT_AMU_ANGSTROM = math.sqrt(constants.atomic_mass) * 1e-10  # to sqrt(kg)*m


def _d_conversion(omega_final, unit_system: str) -> np.ndarray:
    omega = np.atleast_1d(np.asarray(omega_final, dtype=float))
    if np.any(omega <= 0):
        raise ParameterError("final-state frequencies must be positive")
    if unit_system == "si":
        return np.sqrt(omega * _CM1_TO_RAD_PER_S / (2.0 * constants.hbar))
    if unit_system == "amu_angstrom":
        return _SQRT_AMU_ANGSTROM * np.sqrt(
            omega * _CM1_TO_RAD_PER_S / (2.0 * constants.hbar)
        )
    if unit_system == "atomic":
        # hbar = 1, d in sqrt(m_e)*bohr, omega converted to hartree
        return np.sqrt(omega * _CM1_TO_HARTREE / 2.0)
    raise ConfigurationError(
        f"unknown unit system {unit_system!r}; known: si, amu_angstrom, atomic"
    )


def delta_from_d(d, omega_final, unit_system: str) -> np.ndarray:
    """Dimensionless displacement from a mass-weighted displacement vector."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    return d * _d_conversion(omega_final, unit_system)


def d_from_delta(delta, omega_final, unit_system: str) -> np.ndarray:
    """Inverse of :func:`delta_from_d` in the same unit convention."""
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    return delta / _d_conversion(omega_final, unit_system)


def build_sequence(params: MolecularParams, scale: float = DEFAULT_SCALE) -> DoktorovSequence:
    """Factorise a two-mode transition into its Gaussian operation sequence."""
    if params.nmodes != 2:
        raise DimensionError(
            f"only two-mode transitions are supported, got {params.nmodes} modes"
        )
    zeta_in = squeezing_params(params.omega_initial, scale)
    zeta_out = squeezing_params(params.omega_final, scale)
    theta = rotation_angle_from_U(params.duschinsky)
    delta = params.displacement()
    if any(not math.isfinite(x) for x in delta):
        raise ParameterError(f"displacement must be finite, got {delta}")
    worst = max(np.max(np.abs(zeta_in)), np.max(np.abs(zeta_out)))
    if worst > DEVICE_SQUEEZE_LIMIT:
        warnings.warn(
            f"squeeze parameter {worst:.3f} exceeds the device range "
            f"({DEVICE_SQUEEZE_LIMIT}); consider a different scale",
            stacklevel=2,
        )
    ops: list[GaussianOp] = []
    ops += [Squeeze(k, float(z)) for k, z in enumerate(zeta_in)]
    ops.append(Rotate(0, 1, theta))
    ops += [Squeeze(k, -float(z)) for k, z in enumerate(zeta_out)]
    ops += [Displace(k, complex(x)) for k, x in enumerate(delta)]
    return DoktorovSequence(
        ops=tuple(ops),
        scale=float(scale),
        zeta_initial=tuple(float(z) for z in zeta_in),
        zeta_final=tuple(float(z) for z in zeta_out),
        theta=theta,
        delta=tuple(float(x) for x in delta),
        omega_final=params.omega_final,
        omega_00=params.omega_00,
        name=params.name,
    )
