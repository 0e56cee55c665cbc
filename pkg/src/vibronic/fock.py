"""Truncated multimode Fock states and the elementary Gaussian operators.

States live in a dense truncated number basis (one cutoff per mode).  The
displacement, squeezing and two-mode rotation operators are applied through
their exact matrix elements ``<m|exp(G)|n>`` restricted to the kept basis:
the single-mode blocks are filled by the ladder-operator recurrences the
generators imply (exact and O(cutoff^2)); the rotation conserves total
occupation, so it is exponentiated exactly within each finite
total-occupation sector and applied sector by sector.

The retained blocks are sub-unitary: population pushed past a cutoff is
dropped, never reflected, so the norm of a state can only decrease.  The
lost mass is reported by :func:`leakage` rather than renormalised away,
since renormalising would silently bias transition intensities.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import eval_genlaguerre

from .errors import DimensionError, LeakageError, ParameterError

#: numerical slack allowed on norm bookkeeping
NORM_EPS = 1e-12

FockIndex = tuple  # occupation numbers, one entry per mode


@dataclass(frozen=True, eq=False)
class TruncatedState:
    """Complex amplitude tensor over a truncated multimode number basis.

    ``amplitudes.shape`` is the per-mode cutoff tuple; entry ``[m1, ..., mM]``
    is the amplitude on ``|m1, ..., mM>``.  The array is copied and frozen at
    construction; operations return new states.
    """

    amplitudes: np.ndarray
    norm_sq: float = field(init=False, repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim < 1 or any(c < 2 for c in amps.shape):
            raise DimensionError(
                f"state needs >= 1 mode with cutoff >= 2, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        norm_sq = float(np.vdot(amps, amps).real)
        if norm_sq > 1.0 + NORM_EPS:
            raise ParameterError(f"state norm^2 = {norm_sq} exceeds 1")
        object.__setattr__(self, "norm_sq", norm_sq)

    def __repr__(self):
        return f"TruncatedState(cutoffs={self.cutoffs}, norm_sq={self.norm_sq:.12g})"

    @property
    def nmodes(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoffs(self) -> tuple:
        return self.amplitudes.shape

    def probabilities(self) -> np.ndarray:
        """Occupation probabilities |amplitude|^2, same shape as cutoffs."""
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class Displace:
    """Coherent displacement of one mode by complex amplitude ``alpha``."""

    mode: int
    alpha: complex


@dataclass(frozen=True)
class Squeeze:
    """Single-mode squeeze exp((z* a a - z a†a†)/2) with z = zeta·e^{i·phase}.

    Negative ``zeta`` is the inverse of the positive squeeze at the same phase.
    """

    mode: int
    zeta: float
    phase: float = 0.0


@dataclass(frozen=True)
class Rotate:
    """Two-mode mixing exp(theta·(e^{i·phase} a_i†a_j - e^{-i·phase} a_i a_j†))."""

    mode_i: int
    mode_j: int
    theta: float
    phase: float = 0.0


# any of the three elementary operations
GaussianOp = Displace | Squeeze | Rotate


def new_vacuum(nmodes: int, cutoffs) -> TruncatedState:
    """All-modes ground state |0, ..., 0> on the given truncated basis."""
    if nmodes < 1:
        raise DimensionError(f"need at least one mode, got {nmodes}")
    cuts = [int(c) for c in (cutoffs if np.iterable(cutoffs) else [cutoffs] * nmodes)]
    if len(cuts) != nmodes:
        raise DimensionError(f"{len(cuts)} cutoffs for {nmodes} modes")
    if any(c < 2 for c in cuts):
        raise DimensionError(f"every cutoff must be >= 2, got {cuts}")
    amps = np.zeros(cuts, dtype=complex)
    amps[(0,) * nmodes] = 1.0
    return TruncatedState(amps)


def basis_state(occupations, cutoffs) -> TruncatedState:
    """Single number state |n1, ..., nM>; convenience for tests and calibration."""
    occ = tuple(int(n) for n in occupations)
    cuts = tuple(int(c) for c in cutoffs)
    if len(occ) != len(cuts):
        raise DimensionError(f"{len(occ)} occupations for {len(cuts)} modes")
    if any(n < 0 or n >= c for n, c in zip(occ, cuts)):
        raise IndexError(f"occupations {occ} outside cutoffs {cuts}")
    amps = np.zeros(cuts, dtype=complex)
    amps[occ] = 1.0
    return TruncatedState(amps)


@lru_cache(maxsize=256)
def displacement_block(cutoff: int, alpha: complex) -> np.ndarray:
    """Exact displacement matrix elements ``<m|D(alpha)|n>`` for m, n < cutoff.

    Uses the closed form in associated Laguerre polynomials,
    ``<m|D|n> = sqrt(n!/m!)·alpha^{m-n}·e^{-|alpha|^2/2}·L_n^{(m-n)}(|alpha|^2)``
    for m >= n (transpose-conjugate with alpha -> -alpha below the diagonal).
    The block is a sub-unitary slice of the full unitary: columns lose the
    amplitude displaced past the cutoff.
    """
    alpha = complex(alpha)
    c = int(cutoff)
    if alpha == 0:
        block = np.eye(c, dtype=complex)
        block.setflags(write=False)
        return block
    x = abs(alpha) ** 2
    logfac = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1.0, c)))))
    m, n = np.meshgrid(np.arange(c), np.arange(c), indexing="ij")
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    # sqrt(lo!/hi!), the diagonal L_lo^{(k)}(x), and the amplitude power,
    # combined in log space to keep magnitudes balanced
    mag = np.exp(0.5 * (logfac[lo] - logfac[hi]) + k * math.log(abs(alpha)) - 0.5 * x)
    lag = eval_genlaguerre(lo, k, x)
    unit = np.exp(1j * cmath.phase(alpha) * k)
    upper = np.where(m >= n, unit, np.conj(unit) * (-1.0) ** k)
    block = mag * lag * upper
    block.setflags(write=False)
    return block


def _hermite_functions(orders: int, x: np.ndarray) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions ψ_k(x) for k < orders, shape (orders, len(x)).

    The normalised three-term recurrence is stable upward and the functions
    stay uniformly bounded, so large orders are safe.
    """
    psi = np.zeros((orders, x.size))
    psi[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if orders > 1:
        psi[1] = math.sqrt(2.0) * x * psi[0]
    for k in range(1, orders - 1):
        psi[k + 1] = math.sqrt(2.0 / (k + 1)) * x * psi[k] - math.sqrt(
            k / (k + 1.0)
        ) * psi[k - 1]
    return psi


# quadrature node count is ~cutoff + margin; past this the Gauss-Hermite
# weights underflow and the construction would silently degrade
_MAX_SQUEEZE_CUTOFF = 320


@lru_cache(maxsize=256)
def squeeze_block(cutoff: int, zeta: float, phase: float = 0.0) -> np.ndarray:
    """Exact squeeze matrix elements ``<m|S(z)|n>`` for m, n < cutoff.

    For real positive squeezing the operator is a dilation in position
    representation, S(r)ψ(x) = e^{r/2}·ψ(e^r·x), so the matrix elements are
    Hermite-function overlaps ``e^{r/2}·∫ψ_m(x)·ψ_n(e^r·x)dx``.  The
    integrand is a polynomial times a Gaussian, which Gauss-Hermite
    quadrature evaluates exactly; sign and phase enter as a number-operator
    dressing.  This is stable at any cutoff in range, unlike the Fock-space
    recurrences, whose error grows along the far off-diagonal.
    """
    r = abs(float(zeta))
    c = int(cutoff)
    if c > _MAX_SQUEEZE_CUTOFF:
        raise ParameterError(
            f"squeeze cutoff {c} exceeds the supported maximum {_MAX_SQUEEZE_CUTOFF}"
        )
    if r == 0.0:
        block = np.eye(c, dtype=complex)
        block.setflags(write=False)
        return block
    s = math.exp(r)
    n_nodes = c + 16
    t, w = np.polynomial.hermite.hermgauss(n_nodes)
    gamma = math.sqrt(2.0 / (1.0 + s * s))
    x = gamma * t
    # fold the e^{t^2} de-weighting into logs; w underflows only far beyond
    # the guarded cutoff range
    g = np.exp(np.log(w) + t * t)
    psi_row = _hermite_functions(c, x)
    psi_col = _hermite_functions(c, s * x)
    real_block = math.exp(0.5 * r) * gamma * ((psi_row * g) @ psi_col.T)
    # parity is exact: <m|S|n> vanishes unless m and n have equal parity
    idx = np.arange(c)
    real_block[(idx[:, None] + idx[None, :]) % 2 == 1] = 0.0
    # effective phase: an explicit phase plus pi when zeta < 0
    eff = phase if zeta > 0 else phase + math.pi
    if eff == 0.0:
        block = real_block.astype(complex)
    else:
        dress = np.exp(0.5j * eff * np.arange(c))
        block = dress[:, None] * real_block * np.conj(dress)[None, :]
    block.setflags(write=False)
    return block


@lru_cache(maxsize=8)
def _rotation_sectors(cutoff_i: int, cutoff_j: int, theta: float, phase: float):
    """Per-total-occupation unitaries of the two-mode rotation, restricted to
    the kept indices.

    Each sector n is finite (n+1 states ``|m, n-m>``), so its exponential is
    exact; restriction to occupations below the cutoffs is what makes the
    overall operator sub-unitary.  Within a sector the generator, dressed by
    the diagonal phases (i·e^{i·phase})^k, is -i times a real symmetric
    tridiagonal matrix, so each exponential reduces to eigh_tridiagonal.
    Returns tuples (rows_i, rows_j, unitary).
    """
    sectors = []
    for n in range(cutoff_i + cutoff_j - 1):
        kept = np.array([k for k in range(n + 1) if k < cutoff_i and n - k < cutoff_j])
        if n == 0:
            sector = np.ones((1, 1), dtype=complex)
        else:
            m = np.arange(n)
            coup = theta * np.sqrt((m + 1.0) * (n - m))
            lam, vec = eigh_tridiagonal(np.zeros(n + 1), coup)
            dress = (1j * cmath.exp(1j * phase)) ** np.arange(n + 1)
            core = (vec * np.exp(-1j * lam)) @ vec.T
            sector = dress[:, None] * core * np.conj(dress)[None, :]
        sub = np.ascontiguousarray(sector[np.ix_(kept, kept)])
        sub.setflags(write=False)
        ki = kept
        kj = n - kept
        ki.setflags(write=False)
        kj.setflags(write=False)
        sectors.append((ki, kj, sub))
    return tuple(sectors)


def rotation_block(cutoff_i: int, cutoff_j: int, theta: float, phase: float = 0.0) -> np.ndarray:
    """Assembled two-mode rotation on the kept product basis (sub-unitary).

    Flat indexing is row-major over (m_i, m_j).  Intended for inspection and
    cross-checks; :func:`apply_rotation` streams the sectors instead to avoid
    materialising the (cutoff_i·cutoff_j)^2 matrix.
    """
    dim = cutoff_i * cutoff_j
    out = np.zeros((dim, dim), dtype=complex)
    for ki, kj, sub in _rotation_sectors(cutoff_i, cutoff_j, theta, phase):
        flat = ki * cutoff_j + kj
        out[np.ix_(flat, flat)] = sub
    out.setflags(write=False)
    return out


def _check_mode(state: TruncatedState, mode: int) -> None:
    if not 0 <= mode < state.nmodes:
        raise IndexError(f"mode {mode} out of range for {state.nmodes}-mode state")


def _apply_single(state: TruncatedState, mode: int, block: np.ndarray) -> TruncatedState:
    moved = np.moveaxis(state.amplitudes, mode, 0)
    out = np.tensordot(block, moved, axes=(1, 0))
    return TruncatedState(np.moveaxis(out, 0, mode))


def apply_displacement(state: TruncatedState, mode: int, alpha) -> TruncatedState:
    """Displace one mode; norm can only drop through truncation."""
    _check_mode(state, mode)
    alpha = complex(alpha)
    if not cmath.isfinite(alpha):
        raise ParameterError(f"displacement amplitude must be finite, got {alpha}")
    if state.norm_sq <= 0.0:
        raise ParameterError("cannot displace a zero-norm state")
    return _apply_single(state, mode, displacement_block(state.cutoffs[mode], alpha))


def apply_squeeze(state: TruncatedState, mode: int, zeta: float, phase: float = 0.0) -> TruncatedState:
    """Squeeze one mode.  Vacuum input populates only even occupations."""
    _check_mode(state, mode)
    zeta = float(zeta)
    phase = float(phase)
    if not (math.isfinite(zeta) and math.isfinite(phase)):
        raise ParameterError(f"squeeze parameters must be finite, got {zeta}, {phase}")
    return _apply_single(state, mode, squeeze_block(state.cutoffs[mode], zeta, phase))


def apply_rotation(
    state: TruncatedState, mode_i: int, mode_j: int, theta: float, phase: float = 0.0
) -> TruncatedState:
    """Mix two modes; the distribution of m_i + m_j is conserved."""
    _check_mode(state, mode_i)
    _check_mode(state, mode_j)
    if mode_i == mode_j:
        raise ParameterError(f"rotation needs two distinct modes, got {mode_i} twice")
    theta = float(theta)
    phase = float(phase)
    if not (math.isfinite(theta) and math.isfinite(phase)):
        raise ParameterError(f"rotation parameters must be finite, got {theta}, {phase}")
    ci, cj = state.cutoffs[mode_i], state.cutoffs[mode_j]
    moved = np.moveaxis(state.amplitudes, (mode_i, mode_j), (0, 1)).copy()
    out = np.zeros_like(moved)
    for ki, kj, sub in _rotation_sectors(ci, cj, theta, phase):
        out[ki, kj] = np.tensordot(sub, moved[ki, kj], axes=(1, 0))
    return TruncatedState(np.moveaxis(out, (0, 1), (mode_i, mode_j)))


def apply_op(state: TruncatedState, op: GaussianOp) -> TruncatedState:
    """Dispatch one elementary operation."""
    if isinstance(op, Displace):
        return apply_displacement(state, op.mode, op.alpha)
    if isinstance(op, Squeeze):
        return apply_squeeze(state, op.mode, op.zeta, op.phase)
    if isinstance(op, Rotate):
        return apply_rotation(state, op.mode_i, op.mode_j, op.theta, op.phase)
    raise ParameterError(f"unknown operation {op!r}")


def apply_sequence(state: TruncatedState, ops) -> TruncatedState:
    """Apply operations left to right (first list entry acts first)."""
    for op in ops:
        state = apply_op(state, op)
    return state


def probability(state: TruncatedState, idx) -> float:
    """Occupation probability of one basis state."""
    idx = tuple(int(n) for n in idx)
    if len(idx) != state.nmodes:
        raise IndexError(f"index {idx} has wrong length for {state.nmodes} modes")
    if any(n < 0 or n >= c for n, c in zip(idx, state.cutoffs)):
        raise IndexError(f"index {idx} outside cutoffs {state.cutoffs}")
    return float(abs(state.amplitudes[idx]) ** 2)


def leakage(state: TruncatedState) -> float:
    """Probability mass lost past the cutoffs so far (>= 0)."""
    return max(0.0, 1.0 - state.norm_sq)


def run_with_auto_cutoff(
    ops, nmodes: int, *, start: int = 8, leak_tol: float = 1e-6, cap: int = 64
) -> TruncatedState:
    """Apply ``ops`` to vacuum, doubling all cutoffs until leakage < leak_tol.

    Raises :class:`LeakageError` if the per-mode cap is reached first.
    """
    if leak_tol <= 0:
        raise ParameterError(f"leakage tolerance must be positive, got {leak_tol}")
    cut = max(2, min(int(start), int(cap)))
    while True:
        state = apply_sequence(new_vacuum(nmodes, [cut] * nmodes), ops)
        leak = leakage(state)
        if leak < leak_tol:
            return state
        if cut >= cap:
            raise LeakageError(
                f"leakage {leak:.3e} still above {leak_tol:.1e} at the cutoff cap {cap}"
            )
        cut = min(2 * cut, int(cap))
