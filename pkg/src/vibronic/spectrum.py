"""Stick spectra from transformed states, Gaussian broadening, comparison.

Every retained basis state with nonzero occupation probability contributes a
stick at its transition frequency (the occupation-weighted sum of final-state
mode frequencies, plus the electronic-origin offset); intensities add
incoherently because distinct final Fock states are distinguishable outcomes.
Broadening convolves the sticks with a normalised Gaussian, preserving the
integrated intensity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .fock import TruncatedState

#: sticks weaker than this are dropped from the listing (their mass is kept
#: in ``residual`` so completeness checks still close)
DROP_THRESHOLD = 1e-12

#: default frequency window within which sticks are considered degenerate
MERGE_TOL = 1e-6

WIDTH_KINDS = ("fwhm", "stddev")
_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class Stick:
    """One spectral line: frequency (cm^-1), intensity, contributing states."""

    frequency: float
    intensity: float
    assignment: tuple

    def __iter__(self):  # allows (f, i, a) unpacking
        return iter((self.frequency, self.intensity, self.assignment))


@dataclass(frozen=True)
class StickSpectrum:
    """Sorted, merged stick list plus bookkeeping for completeness checks."""

    sticks: tuple
    offset: float = 0.0
    residual: float = 0.0  # total intensity of sticks below the drop threshold

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([s.frequency for s in self.sticks])

    @property
    def intensities(self) -> np.ndarray:
        return np.array([s.intensity for s in self.sticks])

    @property
    def total_intensity(self) -> float:
        """Sum over listed sticks plus the dropped residual."""
        return float(sum(s.intensity for s in self.sticks) + self.residual)


@dataclass(frozen=True, eq=False)
class BroadenedCurve:
    """Uniform frequency grid with intensity density (per cm^-1)."""

    grid: np.ndarray
    values: np.ndarray
    width: float
    width_kind: str

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        """Trapezoid integral over the grid."""
        return float(np.trapezoid(self.values, self.grid))


def gaussian_sigma(width: float, width_kind: str) -> float:
    """Standard deviation for a width given as FWHM or directly."""
    if width_kind not in WIDTH_KINDS:
        raise ParameterError(f"width_kind must be one of {WIDTH_KINDS}, got {width_kind!r}")
    return width * _FWHM_TO_SIGMA if width_kind == "fwhm" else width


def assemble_sticks(
    entries,
    offset: float = 0.0,
    merge_tol: float = MERGE_TOL,
    drop_below: float = DROP_THRESHOLD,
) -> StickSpectrum:
    """Sort, merge and threshold (frequency, intensity, index) entries.

    Entries closer than ``merge_tol`` in frequency coalesce into one stick at
    the intensity-weighted mean frequency; intensities add and assignments
    concatenate.  Sticks below ``drop_below`` are removed from the listing
    but their mass is retained in ``residual``.
    """
    items = sorted(((float(f), float(p), tuple(idx)) for f, p, idx in entries))
    merged = []
    for f, p, idx in items:
        if merged and f - merged[-1][0] <= merge_tol:
            f0, p0, idx0 = merged[-1]
            ptot = p0 + p
            merged[-1] = ((f0 * p0 + f * p) / ptot if ptot > 0 else f0, ptot, idx0 + [idx])
        else:
            merged.append([f, p, [idx]])
    sticks = []
    residual = 0.0
    for f, p, assigns in merged:
        if p < drop_below:
            residual += p
        else:
            sticks.append(Stick(f, p, tuple(sorted(assigns))))
    return StickSpectrum(sticks=tuple(sticks), offset=float(offset), residual=residual)


def stick_spectrum(
    state: TruncatedState,
    omega_final,
    offset: float = 0.0,
    merge_tol: float = MERGE_TOL,
    drop_below: float = DROP_THRESHOLD,
) -> StickSpectrum:
    """Transition sticks of a transformed state.

    A basis state with occupations m contributes intensity |amplitude|^2 at
    frequency ``offset + sum_k m_k * omega_final[k]``.
    """
    omega = np.asarray(omega_final, dtype=float)
    if omega.shape != (state.nmodes,):
        raise DimensionError(
            f"omega_final has {omega.size} entries for a {state.nmodes}-mode state"
        )
    probs = state.probabilities()
    freq = np.zeros(state.cutoffs)
    for k, w in enumerate(omega):
        shape = [1] * state.nmodes
        shape[k] = state.cutoffs[k]
        freq = freq + w * np.arange(state.cutoffs[k]).reshape(shape)
    entries = (
        (offset + freq[idx], probs[idx], idx)
        for idx in np.ndindex(*state.cutoffs)
        if probs[idx] > 0.0
    )
    return assemble_sticks(entries, offset=offset, merge_tol=merge_tol, drop_below=drop_below)


def broaden(
    spectrum: StickSpectrum,
    width: float,
    width_kind: str = "fwhm",
    grid_step: float = 1.0,
) -> BroadenedCurve:
    """Convolve the sticks with a normalised Gaussian of the given width.

    The grid extends five widths past the extreme sticks; the integral of the
    curve equals the summed stick intensity up to the clipped far tails.
    """
    if width <= 0:
        raise ParameterError(f"width must be positive, got {width}")
    if grid_step <= 0:
        raise ParameterError(f"grid step must be positive, got {grid_step}")
    sigma = gaussian_sigma(width, width_kind)
    if spectrum.sticks:
        freqs = spectrum.frequencies
        lo = freqs.min() - 5.0 * width
        hi = freqs.max() + 5.0 * width
    else:
        lo, hi = spectrum.offset - 5.0 * width, spectrum.offset + 5.0 * width
    npts = int(math.ceil((hi - lo) / grid_step)) + 1
    grid = lo + grid_step * np.arange(npts)
    values = np.zeros(npts)
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    for stick in spectrum.sticks:
        values += stick.intensity * norm * np.exp(
            -0.5 * ((grid - stick.frequency) / sigma) ** 2
        )
    return BroadenedCurve(grid=grid, values=values, width=float(width), width_kind=width_kind)


@dataclass(frozen=True)
class SpectrumComparison:
    """Greedy nearest-frequency match between two stick spectra."""

    matched: tuple  # (freq_a, intensity_a, freq_b, intensity_b) per pair
    max_intensity_deviation: float
    unmatched_mass: float  # summed intensity of sticks without a partner

    @property
    def n_matched(self) -> int:
        return len(self.matched)


def compare_spectra(a: StickSpectrum, b: StickSpectrum, freq_tol: float) -> SpectrumComparison:
    """Pair sticks of ``a`` with the nearest unused stick of ``b`` within freq_tol."""
    available = list(range(len(b.sticks)))
    matched = []
    unmatched = 0.0
    for stick in a.sticks:
        best = None
        for pos, j in enumerate(available):
            gap = abs(b.sticks[j].frequency - stick.frequency)
            if gap <= freq_tol and (best is None or gap < best[0]):
                best = (gap, pos, j)
        if best is None:
            unmatched += stick.intensity
        else:
            _, pos, j = best
            other = b.sticks[j]
            matched.append(
                (stick.frequency, stick.intensity, other.frequency, other.intensity)
            )
            available.pop(pos)
    unmatched += sum(b.sticks[j].intensity for j in available)
    max_dev = max((abs(ia - ib) for _, ia, _, ib in matched), default=0.0)
    return SpectrumComparison(
        matched=tuple(matched), max_intensity_deviation=max_dev, unmatched_mass=unmatched
    )
