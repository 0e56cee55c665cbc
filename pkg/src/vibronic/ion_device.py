"""Trapped-ion realisation: pulse planning, projection measurement, correction.

Operator parameters map to Raman pulse durations through fixed drive rates;
the sign of a parameter is carried by the pulse phase.  The collective
projection measurement transfers the target state's population to the ground
state and reads it out through three sequential fluorescence detections,
classifying each shot as bright-first (P1), dark-bright (P2), dark-dark-
bright (P3) or all-dark (P4); the all-dark frequency estimates the target
population.

The noise model is built to be the exact inverse of the published correction:
a shot is truly dark with probability p·F (transfer fidelity F), the
dark/bright class decision suffers one effective readout flip (dark kept with
probability eta_down, bright registered with probability eta_up), and only
the split of the bright mass across P1/P2/P3 follows the conditional
per-window statistics of the three detections.  The corrected estimate
``(1 - Corr(P1+P2+P3)) / F`` with ``Corr(x) = (x - (1-eta_down)) /
(eta_down + eta_up - 1)`` is then unbiased for every population, transfer
fidelity and readout fidelity pair.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ModelError, OutOfModelWarning, ParameterError
from .fock import Displace, GaussianOp, Rotate, Squeeze, TruncatedState, probability
from .spectrum import MERGE_TOL, StickSpectrum, assemble_sticks

#: squeeze magnitude the drive can reach; larger parameters get a warning flag
SQUEEZE_GUARD = 4.0


@dataclass(frozen=True)
class DeviceConfig:
    """Drive rates, trap parameters, readout fidelities and shot budget.

    Rates are per microsecond (displacement amplitude, squeeze parameter and
    rotation angle respectively); trap frequencies are in MHz and the
    Lamb-Dicke parameters dimensionless, kept for provenance in metadata.
    """

    rate_displacement: float = 0.066
    rate_squeeze: float = 0.006
    rate_rotation: float = 0.006
    trap_freq_x: float = 2.4
    trap_freq_y: float = 1.9
    lamb_dicke_x: float = 0.117
    lamb_dicke_y: float = 0.132
    eta_up: float = 0.972
    eta_down: float = 0.993
    shots: int = 2000
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("rate_displacement", "rate_squeeze", "rate_rotation"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")
        for name in ("eta_up", "eta_down"):
            eta = getattr(self, name)
            if not 0.5 < eta <= 1.0:
                raise ParameterError(f"{name} must lie in (0.5, 1], got {eta}")
        if self.shots < 1:
            raise ParameterError(f"shots must be >= 1, got {self.shots}")
        if self.rng_seed < 0:
            raise ParameterError(f"rng_seed must be >= 0, got {self.rng_seed}")

    def detection_model(self) -> "DetectionModel":
        return DetectionModel(eta_up=self.eta_up, eta_down=self.eta_down)


def _mode_name(mode: int) -> str:
    return "XYZW"[mode] if mode < 4 else f"M{mode}"


@dataclass(frozen=True)
class Pulse:
    """One Raman pulse: operation kind, drive frequency label, timing, phase."""

    kind: str  # displace | squeeze | rotate
    frequency_label: str
    modes: tuple
    duration: float  # microseconds
    phase: float  # radians
    parameter: float  # magnitude of the operator parameter
    warning: str | None = None


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered pulses; schedule order equals operator application order."""

    pulses: tuple

    @property
    def total_duration(self) -> float:
        return float(sum(p.duration for p in self.pulses))

    def warnings(self) -> tuple:
        return tuple(p.warning for p in self.pulses if p.warning)


def _wrap_phase(phi: float) -> float:
    """Map to (-pi, pi] with the convention that pi stays pi."""
    out = math.remainder(phi, 2.0 * math.pi)
    return math.pi if out == -math.pi else out


def plan_pulses(seq, cfg: DeviceConfig = DeviceConfig()) -> PulseSchedule:
    """Translate a Gaussian operation sequence into Raman pulse timings.

    ``seq`` may be a DoktorovSequence or any iterable of operations.  Each
    operation becomes one pulse with duration |parameter| / rate; negative or
    complex parameters put their argument into the pulse phase.
    """
    ops = getattr(seq, "ops", seq)
    pulses = []
    for op in ops:
        if isinstance(op, Displace):
            amp = complex(op.alpha)
            pulses.append(
                Pulse(
                    kind="displace",
                    frequency_label=f"w_{_mode_name(op.mode)}",
                    modes=(op.mode,),
                    duration=abs(amp) / cfg.rate_displacement,
                    phase=_wrap_phase(cmath.phase(amp)) if amp != 0 else 0.0,
                    parameter=abs(amp),
                )
            )
        elif isinstance(op, Squeeze):
            warn = None
            if abs(op.zeta) > SQUEEZE_GUARD:
                warn = f"squeeze parameter {abs(op.zeta):.3f} exceeds device range {SQUEEZE_GUARD}"
            pulses.append(
                Pulse(
                    kind="squeeze",
                    frequency_label=f"2w_{_mode_name(op.mode)}",
                    modes=(op.mode,),
                    duration=abs(op.zeta) / cfg.rate_squeeze,
                    phase=_wrap_phase(op.phase + (math.pi if op.zeta < 0 else 0.0)),
                    parameter=abs(op.zeta),
                    warning=warn,
                )
            )
        elif isinstance(op, Rotate):
            label = f"w_{_mode_name(op.mode_i)}-w_{_mode_name(op.mode_j)}"
            pulses.append(
                Pulse(
                    kind="rotate",
                    frequency_label=label,
                    modes=(op.mode_i, op.mode_j),
                    duration=abs(op.theta) / cfg.rate_rotation,
                    phase=_wrap_phase(op.phase + (math.pi if op.theta < 0 else 0.0)),
                    parameter=abs(op.theta),
                )
            )
        else:
            raise ParameterError(f"unknown operation {op!r}")
    return PulseSchedule(pulses=tuple(pulses))


@dataclass(frozen=True)
class DetectionModel:
    """Readout fidelities plus the per-target transfer fidelity F.

    ``table`` overrides individual targets; otherwise ``f_pi`` (per-pulse
    fidelity of the synthetic transfer model, F = f_pi^(n_total + 2)) is
    used when set, and 1.0 when not.  Table values of zero are tolerated at
    load time and rejected where a division is attempted.
    """

    eta_up: float = 0.972
    eta_down: float = 0.993
    table: tuple = ()  # ((target tuple, fidelity), ...)
    f_pi: float | None = None

    def __post_init__(self):
        for name in ("eta_up", "eta_down"):
            eta = getattr(self, name)
            if not 0.5 < eta <= 1.0:
                raise ParameterError(f"{name} must lie in (0.5, 1], got {eta}")
        entries = tuple((tuple(int(n) for n in t), float(f)) for t, f in self.table)
        for target, f in entries:
            if not 0.0 <= f <= 1.0:
                raise ParameterError(f"transfer fidelity for {target} must be in [0, 1], got {f}")
        if self.f_pi is not None and not 0.0 < self.f_pi <= 1.0:
            raise ParameterError(f"f_pi must lie in (0, 1], got {self.f_pi}")
        object.__setattr__(self, "table", entries)
        object.__setattr__(self, "_lookup", dict(entries))

    def fidelity(self, target) -> float:
        """Transfer-and-measure fidelity for one target state."""
        key = tuple(int(n) for n in target)
        if key in self._lookup:
            return self._lookup[key]
        if self.f_pi is not None:
            return self.f_pi ** (sum(key) + 2)
        return 1.0


@dataclass(frozen=True)
class ShotRecord:
    """Counts of the four measurement classes out of ``shots`` repetitions."""

    counts: tuple
    shots: int

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != 4 or any(c < 0 for c in counts):
            raise ParameterError(f"need four non-negative class counts, got {counts}")
        if sum(counts) != self.shots:
            raise ParameterError(
                f"class counts {counts} do not sum to shots = {self.shots}"
            )
        object.__setattr__(self, "counts", counts)

    @property
    def p1(self) -> float:
        return self.counts[0] / self.shots

    @property
    def p2(self) -> float:
        return self.counts[1] / self.shots

    @property
    def p3(self) -> float:
        return self.counts[2] / self.shots

    @property
    def p4(self) -> float:
        return self.counts[3] / self.shots

    @property
    def bright_fraction(self) -> float:
        """P1 + P2 + P3, computed from counts so the complement is exact."""
        return (self.shots - self.counts[3]) / self.shots


def class_probabilities(population: float, fidelity: float, eta_up: float, eta_down: float) -> np.ndarray:
    """Expected {P1, P2, P3, P4} for a target holding ``population``.

    The dark/bright decision uses one effective readout flip, making the
    published correction formula exactly unbiased; within the bright classes
    the mass is split by the conditional window-by-window statistics.
    """
    q = min(population * fidelity, 1.0)
    dark_keep = eta_down
    bright_keep = eta_up
    p4 = q * dark_keep + (1.0 - q) * (1.0 - bright_keep)
    # conditional window split: geometric in the per-window survival
    miss_d = 1.0 - eta_down
    if miss_d > 0.0:
        split_dark = np.array([1.0, eta_down, eta_down**2]) * miss_d
        split_dark /= split_dark.sum()
    else:
        split_dark = np.array([1.0, 0.0, 0.0])
    miss_b = 1.0 - eta_up
    split_bright = np.array([1.0, miss_b, miss_b**2]) * eta_up
    split_bright /= split_bright.sum()
    bright = q * (1.0 - dark_keep) * split_dark + (1.0 - q) * bright_keep * split_bright
    return np.array([bright[0], bright[1], bright[2], p4])


def measure_target(
    state: TruncatedState,
    target,
    model: DetectionModel,
    shots: int,
    seed: int = 0,
) -> ShotRecord:
    """Finite-shot emulation of the collective projection measurement.

    The per-shot class distribution is fixed by the true target population,
    the transfer fidelity and the readout fidelities, so the record is one
    multinomial draw.  The stream is seeded by (seed, target), making results
    independent of the order targets are visited in.
    """
    if shots < 1:
        raise ParameterError(f"shots must be >= 1, got {shots}")
    pop = probability(state, target)
    fid = model.fidelity(target)
    pi = np.clip(class_probabilities(pop, fid, model.eta_up, model.eta_down), 0.0, None)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, target)]))
    counts = rng.multinomial(shots, pi / pi.sum())
    return ShotRecord(counts=tuple(int(c) for c in counts), shots=shots)


def correct_population(p_measured: float, model: DetectionModel) -> float:
    """Invert the readout-fidelity relation for a measured bright fraction.

    Values outside [-0.05, 1.05] trigger an OutOfModelWarning and are clamped
    to that band; smaller excursions are expected from shot noise and pass
    through so that averaging stays unbiased.
    """
    denom = model.eta_down + model.eta_up - 1.0
    value = (p_measured - (1.0 - model.eta_down)) / denom
    if value < -0.05 or value > 1.05:
        warnings.warn(
            f"corrected population {value:.4f} outside [-0.05, 1.05]; clamped",
            OutOfModelWarning,
            stacklevel=2,
        )
        value = min(max(value, -0.05), 1.05)
    return value


def corrected_p4(record: ShotRecord, model: DetectionModel, target) -> float:
    """Measurement-error-corrected estimate of the target population."""
    fid = model.fidelity(target)
    if fid <= 0.0:
        raise ModelError(
            f"transfer fidelity is zero for target {tuple(target)}; cannot divide"
        )
    return (1.0 - correct_population(record.bright_fraction, model)) / fid


def corrected_stderr(record: ShotRecord, model: DetectionModel, target) -> float:
    """Binomial standard error of the class-4 frequency, propagated through
    the affine correction."""
    phat = record.p4
    denom = model.eta_down + model.eta_up - 1.0
    fid = model.fidelity(target)
    if fid <= 0.0:
        raise ModelError(
            f"transfer fidelity is zero for target {tuple(target)}; cannot divide"
        )
    return math.sqrt(max(phat * (1.0 - phat), 0.0) / record.shots) / (denom * fid)


@dataclass(frozen=True)
class TargetMeasurement:
    """Per-target emulation outcome."""

    target: tuple
    frequency: float
    ideal: float
    record: ShotRecord
    raw: float  # uncorrected P4 frequency
    corrected: float
    stderr: float


@dataclass(frozen=True)
class EmulationResult:
    """All per-target records plus the assembled raw/corrected spectra."""

    measurements: tuple
    ideal: StickSpectrum
    raw: StickSpectrum
    corrected: StickSpectrum
    shots: int
    seed: int


def sampled_spectrum(
    state: TruncatedState,
    omega_final,
    model: DetectionModel,
    cfg: DeviceConfig,
    *,
    offset: float = 0.0,
    threshold: float = 1e-6,
    merge_tol: float = MERGE_TOL,
) -> EmulationResult:
    """Emulate measuring every appreciably populated target state.

    Targets with ideal probability above ``threshold`` are measured with
    ``cfg.shots`` repetitions each; raw (P4) and corrected intensities are
    assembled into stick spectra alongside the ideal one.
    """
    omega = np.asarray(omega_final, dtype=float)
    if omega.shape != (state.nmodes,):
        raise ParameterError(
            f"omega_final has {omega.size} entries for a {state.nmodes}-mode state"
        )
    probs = state.probabilities()
    measurements = []
    for idx in np.ndindex(*state.cutoffs):
        ideal = float(probs[idx])
        if ideal <= threshold:
            continue
        freq = offset + float(np.dot(idx, omega))
        record = measure_target(state, idx, model, cfg.shots, cfg.rng_seed)
        est = corrected_p4(record, model, idx)
        err = corrected_stderr(record, model, idx)
        measurements.append(
            TargetMeasurement(
                target=idx,
                frequency=freq,
                ideal=ideal,
                record=record,
                raw=record.p4,
                corrected=est,
                stderr=err,
            )
        )

    def spectrum_of(key):
        # corrected estimates may be slightly negative; keep them all
        return assemble_sticks(
            ((m.frequency, getattr(m, key), m.target) for m in measurements),
            offset=offset,
            merge_tol=merge_tol,
            drop_below=-math.inf,
        )

    return EmulationResult(
        measurements=tuple(measurements),
        ideal=spectrum_of("ideal"),
        raw=spectrum_of("raw"),
        corrected=spectrum_of("corrected"),
        shots=cfg.shots,
        seed=cfg.rng_seed,
    )
