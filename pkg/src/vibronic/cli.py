"""Command-line driver: decompose | spectrum | emulate | pulse-plan.

Each command ingests a molecular parameter file (or a bundled fixture),
factorises the transition into Gaussian operations and runs the requested
stage of the pipeline.  File-writing commands also emit a metadata record
(all parameters, seed, version) sufficient to reproduce the run exactly;
outputs carry no timestamps, so identical configurations are byte-identical.

Exit codes: 0 success, 2 input/parse problems, 3 numerical failure
(truncation would not converge), 4 detection-model errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .data import FIXTURES, fixture_path
from .doktorov import DEFAULT_SCALE, DoktorovSequence, MolecularParams, build_sequence
from .errors import (
    ConfigurationError,
    LeakageError,
    ModelError,
    ParamsFileError,
    VibronicError,
)
from .fock import apply_sequence, leakage, new_vacuum, run_with_auto_cutoff
from .io import (
    format_pulse_table,
    load_detection_table,
    load_params,
    params_as_dict,
    write_comparison,
    write_curve,
    write_metadata,
    write_pulse_table,
    write_records,
    write_sticks,
)
from .ion_device import DetectionModel, DeviceConfig, plan_pulses, sampled_spectrum
from .spectrum import MERGE_TOL, broaden, stick_spectrum

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_MODEL = 4

OUTDIR_ENV = "VIBRONIC_OUTDIR"


@dataclass
class RunConfig:
    """Everything one invocation needs; mirrored into the metadata record."""

    command: str
    params: MolecularParams
    scale: float
    cutoffs: list | None
    leak_tol: float
    max_cutoff: int
    width: float
    width_kind: str
    grid_step: float
    merge_tol: float
    emit: tuple
    figures: bool
    outdir: Path | None
    shots: int
    seed: int
    eta_up: float
    eta_down: float
    f_pi: float | None
    f_dm_table: Path | None
    threshold: float
    include_zero: bool

    def metadata(self, **extra) -> dict:
        payload = {
            "command": self.command,
            "version": __version__,
            "parameters": params_as_dict(self.params),
            "scale": self.scale,
            "cutoffs": self.cutoffs,
            "leak_tol": self.leak_tol,
            "max_cutoff": self.max_cutoff,
            "broaden": {
                "width": self.width,
                "width_kind": self.width_kind,
                "grid_step": self.grid_step,
            },
            "merge_tol": self.merge_tol,
            "emit": list(self.emit),
            "device": {
                "shots": self.shots,
                "seed": self.seed,
                "eta_up": self.eta_up,
                "eta_down": self.eta_down,
                "f_pi": self.f_pi,
                "f_dm_table": str(self.f_dm_table) if self.f_dm_table else None,
            },
        }
        payload.update(extra)
        return payload


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("params", nargs="?", help="molecular parameter file (YAML)")
    parser.add_argument(
        "--fixture",
        choices=FIXTURES,
        help="use a bundled parameter set instead of a file",
    )
    parser.add_argument(
        "--scale",
        type=float,
        default=None,
        help="squeeze rescaling constant (default: value from file, else 25)",
    )


def _add_output_args(parser: argparse.ArgumentParser, required: bool) -> None:
    parser.add_argument(
        "--outdir",
        type=Path,
        default=None,
        help=f"output directory (default: ${OUTDIR_ENV}"
        + ("" if required else ", optional")
        + ")",
    )
    parser.add_argument(
        "--no-figure",
        dest="figures",
        action="store_false",
        help="skip PNG figure rendering",
    )


def _add_spectrum_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--cutoff",
        type=int,
        nargs="+",
        default=None,
        metavar="N",
        help="explicit per-mode Fock cutoffs (one value or one per mode); "
        "default: automatic doubling until converged",
    )
    parser.add_argument(
        "--leak-tol",
        type=float,
        default=1e-6,
        help="leakage tolerance for automatic cutoff selection (default 1e-6)",
    )
    parser.add_argument(
        "--max-cutoff",
        type=int,
        default=64,
        help="per-mode cap for automatic cutoff selection (default 64)",
    )
    parser.add_argument("--width", type=float, default=50.0, help="broadening width in cm^-1 (default 50)")
    parser.add_argument(
        "--width-kind",
        choices=("fwhm", "stddev"),
        default="fwhm",
        help="how --width is interpreted (default fwhm)",
    )
    parser.add_argument("--grid-step", type=float, default=1.0, help="curve grid spacing in cm^-1 (default 1)")
    parser.add_argument(
        "--merge-tol",
        type=float,
        default=MERGE_TOL,
        help="frequency window for merging degenerate sticks (default 1e-6)",
    )


def _add_device_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--shots", type=int, default=2000, help="repetitions per target (default 2000)")
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument("--eta-up", type=float, default=0.972, help="bright-state detection fidelity")
    parser.add_argument("--eta-down", type=float, default=0.993, help="dark-state detection fidelity")
    parser.add_argument(
        "--f-dm-table",
        type=Path,
        default=None,
        help="transfer-fidelity table file keyed by (nX, nY)",
    )
    parser.add_argument(
        "--f-pi",
        type=float,
        default=None,
        help="per-pulse fidelity of the synthetic transfer model F = f_pi^(nX+nY+2)",
    )
    parser.add_argument(
        "--threshold",
        type=float,
        default=1e-6,
        help="minimum ideal probability for a target to be measured (default 1e-6)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vibronic",
        description="Vibronic spectrum simulation via Gaussian operations on "
        "truncated phonon modes, with a trapped-ion measurement emulator.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dec = sub.add_parser("decompose", help="print the operator factorisation of a transition")
    _add_input_args(p_dec)
    p_dec.add_argument("--outdir", type=Path, default=None, help="also write decomposition.json here")

    p_spec = sub.add_parser("spectrum", help="simulate and write the stick spectrum and broadened curve")
    _add_input_args(p_spec)
    _add_spectrum_args(p_spec)
    p_spec.add_argument(
        "--emit",
        default="sticks,curve",
        help="comma-separated subset of {sticks,curve} to write (default both)",
    )
    _add_output_args(p_spec, required=True)

    p_emu = sub.add_parser("emulate", help="finite-shot measurement emulation with error correction")
    _add_input_args(p_emu)
    _add_spectrum_args(p_emu)
    _add_device_args(p_emu)
    _add_output_args(p_emu, required=True)

    p_pp = sub.add_parser("pulse-plan", help="print the Raman pulse schedule for a transition")
    _add_input_args(p_pp)
    p_pp.add_argument(
        "--include-zero",
        action="store_true",
        help="keep zero-duration pulses in the table",
    )
    p_pp.add_argument("--outdir", type=Path, default=None, help="also write pulse_plan.tsv here")
    return parser


def _load_input(args) -> tuple[MolecularParams, float]:
    if (args.params is None) == (args.fixture is None):
        raise ParamsFileError("provide a parameter file or --fixture (exactly one)")
    path = fixture_path(args.fixture) if args.fixture else Path(args.params)
    params, extras = load_params(path)
    scale = args.scale if args.scale is not None else extras.get("scale", DEFAULT_SCALE)
    return params, float(scale)


def _resolve_outdir(args, required: bool) -> Path | None:
    outdir = args.outdir
    if outdir is None and os.environ.get(OUTDIR_ENV):
        outdir = Path(os.environ[OUTDIR_ENV])
    if outdir is None:
        if required:
            raise ConfigurationError(
                f"an output directory is required (--outdir or ${OUTDIR_ENV})"
            )
        return None
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _make_config(args, params: MolecularParams, scale: float, outdir: Path | None) -> RunConfig:
    get = lambda name, default: getattr(args, name, default)
    emit = tuple(part for part in str(get("emit", "sticks,curve")).split(",") if part)
    unknown = set(emit) - {"sticks", "curve"}
    if unknown:
        raise ConfigurationError(f"unknown --emit entries: {', '.join(sorted(unknown))}")
    cutoffs = get("cutoff", None)
    if cutoffs is not None:
        if len(cutoffs) == 1:
            cutoffs = cutoffs * params.nmodes
        if len(cutoffs) != params.nmodes:
            raise ConfigurationError(
                f"--cutoff takes 1 or {params.nmodes} values, got {len(cutoffs)}"
            )
    return RunConfig(
        command=args.command,
        params=params,
        scale=scale,
        cutoffs=list(cutoffs) if cutoffs else None,
        leak_tol=get("leak_tol", 1e-6),
        max_cutoff=get("max_cutoff", 64),
        width=get("width", 50.0),
        width_kind=get("width_kind", "fwhm"),
        grid_step=get("grid_step", 1.0),
        merge_tol=get("merge_tol", MERGE_TOL),
        emit=emit,
        figures=get("figures", True),
        outdir=outdir,
        shots=get("shots", 2000),
        seed=get("seed", 0),
        eta_up=get("eta_up", 0.972),
        eta_down=get("eta_down", 0.993),
        f_pi=get("f_pi", None),
        f_dm_table=get("f_dm_table", None),
        threshold=get("threshold", 1e-6),
        include_zero=get("include_zero", False),
    )


def _simulate(cfg: RunConfig, seq: DoktorovSequence):
    if cfg.cutoffs:
        state = apply_sequence(new_vacuum(cfg.params.nmodes, cfg.cutoffs), seq.ops)
    else:
        state = run_with_auto_cutoff(
            seq.ops, cfg.params.nmodes, leak_tol=cfg.leak_tol, cap=cfg.max_cutoff
        )
    return state


def _print_decomposition(seq: DoktorovSequence) -> None:
    fmt = lambda xs: "(" + ", ".join(f"{x:.4f}" for x in xs) + ")"
    print(f"transition: {seq.name or '(unnamed)'}")
    print(f"rescaling constant: {seq.scale:g}")
    print(f"squeeze in  (per mode): {fmt(seq.zeta_initial)}")
    print(f"rotation angle (rad):   {seq.theta:.4f}")
    print(f"squeeze out (per mode): {fmt(seq.zeta_final)}  [applied inverted]")
    print(f"displacement (per mode): {fmt(seq.delta)}")
    print(f"origin offset (cm^-1):  {seq.omega_00:g}")
    print(f"stages: {len(seq.ops)} operations "
          "(squeeze each mode, rotate, un-squeeze each mode, displace each mode)")


def cmd_decompose(args) -> int:
    params, scale = _load_input(args)
    seq = build_sequence(params, scale)
    _print_decomposition(seq)
    outdir = _resolve_outdir(args, required=False)
    if outdir:
        cfg = _make_config(args, params, scale, outdir)
        payload = cfg.metadata(
            decomposition={
                "zeta_initial": list(seq.zeta_initial),
                "zeta_final": list(seq.zeta_final),
                "theta": seq.theta,
                "delta": list(seq.delta),
                "scale": seq.scale,
            }
        )
        write_metadata(outdir / "decomposition.json", payload)
        print(f"wrote {outdir / 'decomposition.json'}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    params, scale = _load_input(args)
    outdir = _resolve_outdir(args, required=True)
    cfg = _make_config(args, params, scale, outdir)
    seq = build_sequence(params, scale)
    state = _simulate(cfg, seq)
    sticks = stick_spectrum(
        state, params.omega_final, offset=params.omega_00, merge_tol=cfg.merge_tol
    )
    curve = broaden(sticks, cfg.width, cfg.width_kind, cfg.grid_step)
    written = []
    if "sticks" in cfg.emit:
        write_sticks(outdir / "sticks.tsv", sticks)
        written.append("sticks.tsv")
    if "curve" in cfg.emit:
        write_curve(outdir / "curve.tsv", curve)
        written.append("curve.tsv")
    if cfg.figures:
        from .plotting import save_spectrum_figure

        save_spectrum_figure(
            outdir / "spectrum.png", sticks, curve, title=params.name
        )
        written.append("spectrum.png")
    write_metadata(
        outdir / "metadata.json",
        cfg.metadata(
            selected_cutoffs=list(state.cutoffs),
            leakage=leakage(state),
            n_sticks=len(sticks.sticks),
            total_intensity=sticks.total_intensity,
            outputs=written + ["metadata.json"],
        ),
    )
    print(
        f"{params.name}: {len(sticks.sticks)} sticks at cutoffs {list(state.cutoffs)}, "
        f"leakage {leakage(state):.3e}"
    )
    print(f"wrote {', '.join(written + ['metadata.json'])} in {outdir}")
    return EXIT_OK


def _detection_model(cfg: RunConfig) -> DetectionModel:
    table = load_detection_table(cfg.f_dm_table) if cfg.f_dm_table else ()
    return DetectionModel(
        eta_up=cfg.eta_up, eta_down=cfg.eta_down, table=table, f_pi=cfg.f_pi
    )


def cmd_emulate(args) -> int:
    params, scale = _load_input(args)
    outdir = _resolve_outdir(args, required=True)
    cfg = _make_config(args, params, scale, outdir)
    seq = build_sequence(params, scale)
    state = _simulate(cfg, seq)
    model = _detection_model(cfg)
    device = DeviceConfig(
        eta_up=cfg.eta_up, eta_down=cfg.eta_down, shots=cfg.shots, rng_seed=cfg.seed
    )
    result = sampled_spectrum(
        state,
        params.omega_final,
        model,
        device,
        offset=params.omega_00,
        threshold=cfg.threshold,
        merge_tol=cfg.merge_tol,
    )
    write_records(outdir / "records.tsv", result)
    write_sticks(outdir / "raw_sticks.tsv", result.raw)
    write_sticks(outdir / "corrected_sticks.tsv", result.corrected)
    write_comparison(outdir / "comparison.tsv", result)
    written = ["records.tsv", "raw_sticks.tsv", "corrected_sticks.tsv", "comparison.tsv"]
    if cfg.figures:
        from .plotting import save_raw_vs_corrected_figure

        save_raw_vs_corrected_figure(
            outdir / "raw_vs_corrected.png", result, title=params.name
        )
        written.append("raw_vs_corrected.png")
    max_delta = max((abs(m.corrected - m.ideal) for m in result.measurements), default=0.0)
    write_metadata(
        outdir / "metadata.json",
        cfg.metadata(
            selected_cutoffs=list(state.cutoffs),
            leakage=leakage(state),
            n_targets=len(result.measurements),
            max_corrected_minus_ideal=max_delta,
            outputs=written + ["metadata.json"],
        ),
    )
    print(
        f"{params.name}: measured {len(result.measurements)} targets with "
        f"{cfg.shots} shots each (seed {cfg.seed})"
    )
    print(f"wrote {', '.join(written + ['metadata.json'])} in {outdir}")
    return EXIT_OK


def cmd_pulse_plan(args) -> int:
    params, scale = _load_input(args)
    seq = build_sequence(params, scale)
    schedule = plan_pulses(seq, DeviceConfig())
    table = format_pulse_table(schedule, include_zero=args.include_zero)
    sys.stdout.write(table)
    total = schedule.total_duration
    print(f"total duration: {total:.1f} us over {len(schedule.pulses)} pulses")
    for note in schedule.warnings():
        print(f"warning: {note}", file=sys.stderr)
    outdir = _resolve_outdir(args, required=False)
    if outdir:
        write_pulse_table(outdir / "pulse_plan.tsv", schedule, include_zero=args.include_zero)
        cfg = _make_config(args, params, scale, outdir)
        write_metadata(
            outdir / "metadata.json",
            cfg.metadata(total_duration_us=total, outputs=["pulse_plan.tsv", "metadata.json"]),
        )
        print(f"wrote pulse_plan.tsv, metadata.json in {outdir}")
    return EXIT_OK


_COMMANDS = {
    "decompose": cmd_decompose,
    "spectrum": cmd_spectrum,
    "emulate": cmd_emulate,
    "pulse-plan": cmd_pulse_plan,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParamsFileError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except LeakageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except VibronicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
