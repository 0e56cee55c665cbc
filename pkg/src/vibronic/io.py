"""File formats: parameter files, fidelity tables, delimited output, metadata.

Input parameter files are YAML with the field names of the reference data set
(omega_initial, omega_final, duschinsky, delta or d + unit_system, omega_00,
scale).  Outputs are tab-separated tables with stable, documented column
orders, plus a JSON metadata document that records everything needed to
reproduce a run (parameters, cutoffs, seed, package version — deliberately
no timestamps, so reruns are byte-identical).

Column orders:
  sticks:     frequency_cm1, intensity, intensity_maxnorm, assignment
  curve:      frequency_cm1, intensity_density, intensity_density_maxnorm
  records:    nX, nY, P1, P2, P3, P4, P4_corrected, stderr
  comparison: nX, nY, frequency_cm1, ideal, raw, corrected, delta
  pulses:     stage, kind, frequency_label, modes, duration_us, phase_rad, warning
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np
import yaml

from .doktorov import MolecularParams
from .errors import ParamsFileError
from .ion_device import EmulationResult, PulseSchedule
from .spectrum import BroadenedCurve, StickSpectrum

_FLOAT_FMT = "{:.12g}"


def _fmt(x) -> str:
    return _FLOAT_FMT.format(float(x))


# ---------------------------------------------------------------- parameters

_REQUIRED_FIELDS = ("omega_initial", "omega_final", "duschinsky")
_KNOWN_FIELDS = _REQUIRED_FIELDS + (
    "delta",
    "d",
    "unit_system",
    "omega_00",
    "scale",
    "name",
)


def load_params(path) -> tuple[MolecularParams, dict]:
    """Parse a molecular-parameter file.

    Returns the parameters plus a dict of run-level extras found in the file
    (currently ``scale``).  Raises :class:`ParamsFileError` naming the field
    (or the line, for syntax errors) on any problem.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParamsFileError(f"cannot read {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1})" if mark is not None else ""
        raise ParamsFileError(f"{path}: invalid YAML{where}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParamsFileError(f"{path}: expected a mapping of fields, got {type(raw).__name__}")
    unknown = sorted(set(raw) - set(_KNOWN_FIELDS))
    if unknown:
        raise ParamsFileError(f"{path}: unknown field(s) {', '.join(unknown)}")
    for name in _REQUIRED_FIELDS:
        if name not in raw:
            raise ParamsFileError(f"{path}: missing required field '{name}'")
    if ("delta" in raw) == ("d" in raw):
        raise ParamsFileError(f"{path}: exactly one of 'delta' or 'd' must be present")
    try:
        params = MolecularParams(
            omega_initial=raw["omega_initial"],
            omega_final=raw["omega_final"],
            duschinsky=raw["duschinsky"],
            delta=raw.get("delta"),
            d=raw.get("d"),
            unit_system=raw.get("unit_system"),
            omega_00=raw.get("omega_00", 0.0),
            name=str(raw.get("name", path.stem)),
        )
    except (TypeError, ValueError) as exc:
        raise ParamsFileError(f"{path}: {exc}") from exc
    extras = {}
    if "scale" in raw:
        try:
            extras["scale"] = float(raw["scale"])
        except (TypeError, ValueError) as exc:
            raise ParamsFileError(f"{path}: field 'scale': {exc}") from exc
    return params, extras


def load_detection_table(path) -> tuple:
    """Parse a transfer-fidelity table keyed by (n_X, n_Y).

    Whitespace-delimited columns nX, nY, F; '#' starts a comment.  Returns
    entries suitable for DetectionModel(table=...).
    """
    path = Path(path)
    entries = []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ParamsFileError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if parts[:3] == ["nX", "nY", "F"]:
            continue  # optional header
        if len(parts) != 3:
            raise ParamsFileError(f"{path}:{lineno}: expected 'nX nY F', got {body!r}")
        try:
            nx, ny, f = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParamsFileError(f"{path}:{lineno}: {exc}") from exc
        if nx < 0 or ny < 0 or not 0.0 <= f <= 1.0:
            raise ParamsFileError(
                f"{path}:{lineno}: need nX, nY >= 0 and F in [0, 1], got {body!r}"
            )
        entries.append(((nx, ny), f))
    return tuple(entries)


# ------------------------------------------------------------------- writing

def atomic_write(path, text: str) -> None:
    """Write text via a temp file plus rename, so readers never see partials."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _assignment_label(assignment) -> str:
    return ";".join(",".join(str(n) for n in idx) for idx in assignment)


def write_sticks(path, spectrum: StickSpectrum) -> None:
    """Stick table: frequency_cm1, intensity, intensity_maxnorm, assignment."""
    peak = max((abs(s.intensity) for s in spectrum.sticks), default=0.0)
    lines = ["frequency_cm1\tintensity\tintensity_maxnorm\tassignment"]
    for stick in spectrum.sticks:
        maxnorm = stick.intensity / peak if peak > 0 else 0.0
        lines.append(
            "\t".join(
                (
                    _fmt(stick.frequency),
                    _fmt(stick.intensity),
                    _fmt(maxnorm),
                    _assignment_label(stick.assignment),
                )
            )
        )
    atomic_write(path, "\n".join(lines) + "\n")


def write_curve(path, curve: BroadenedCurve) -> None:
    """Curve table: frequency_cm1, intensity_density, intensity_density_maxnorm."""
    peak = float(curve.values.max()) if curve.values.size else 0.0
    lines = ["frequency_cm1\tintensity_density\tintensity_density_maxnorm"]
    for f, v in zip(curve.grid, curve.values):
        lines.append("\t".join((_fmt(f), _fmt(v), _fmt(v / peak if peak > 0 else 0.0))))
    atomic_write(path, "\n".join(lines) + "\n")


def write_records(path, result: EmulationResult) -> None:
    """Shot records: nX, nY, P1, P2, P3, P4, P4_corrected, stderr."""
    lines = ["nX\tnY\tP1\tP2\tP3\tP4\tP4_corrected\tstderr"]
    for m in result.measurements:
        rec = m.record
        lines.append(
            "\t".join(
                (
                    str(m.target[0]),
                    str(m.target[1]),
                    _fmt(rec.p1),
                    _fmt(rec.p2),
                    _fmt(rec.p3),
                    _fmt(rec.p4),
                    _fmt(m.corrected),
                    _fmt(m.stderr),
                )
            )
        )
    atomic_write(path, "\n".join(lines) + "\n")


def write_comparison(path, result: EmulationResult) -> None:
    """Raw vs corrected per target: nX, nY, frequency_cm1, ideal, raw, corrected, delta."""
    lines = ["nX\tnY\tfrequency_cm1\tideal\traw\tcorrected\tdelta"]
    for m in result.measurements:
        lines.append(
            "\t".join(
                (
                    str(m.target[0]),
                    str(m.target[1]),
                    _fmt(m.frequency),
                    _fmt(m.ideal),
                    _fmt(m.raw),
                    _fmt(m.corrected),
                    _fmt(m.corrected - m.raw),
                )
            )
        )
    atomic_write(path, "\n".join(lines) + "\n")


def write_pulse_table(path, schedule: PulseSchedule, include_zero: bool = False) -> None:
    """Pulse plan: stage, kind, frequency_label, modes, duration_us, phase_rad, warning."""
    atomic_write(path, format_pulse_table(schedule, include_zero=include_zero))


def format_pulse_table(schedule: PulseSchedule, include_zero: bool = False) -> str:
    lines = ["stage\tkind\tfrequency_label\tmodes\tduration_us\tphase_rad\twarning"]
    for stage, pulse in enumerate(schedule.pulses):
        if pulse.duration == 0.0 and not include_zero:
            continue
        lines.append(
            "\t".join(
                (
                    str(stage),
                    pulse.kind,
                    pulse.frequency_label,
                    ",".join(str(m) for m in pulse.modes),
                    _fmt(pulse.duration),
                    _fmt(pulse.phase),
                    pulse.warning or "",
                )
            )
        )
    return "\n".join(lines) + "\n"


def params_as_dict(params: MolecularParams) -> dict:
    """JSON-ready view of molecular parameters."""
    out = {
        "name": params.name,
        "omega_initial": list(params.omega_initial),
        "omega_final": list(params.omega_final),
        "duschinsky": np.asarray(params.duschinsky).tolist(),
        "omega_00": params.omega_00,
    }
    if params.delta is not None:
        out["delta"] = list(params.delta)
    else:
        out["d"] = list(params.d)
        out["unit_system"] = params.unit_system
    return out


def write_metadata(path, payload: dict) -> None:
    """Deterministically serialised JSON metadata."""
    atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
