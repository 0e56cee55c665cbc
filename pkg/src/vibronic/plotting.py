"""Static figure rendering for spectra and raw-vs-corrected comparisons.

Figures are written straight to files with the Agg backend; rendering is
deterministic (fixed dpi, no timestamps in metadata) so repeated runs with
the same seed produce byte-identical images.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .ion_device import EmulationResult
from .spectrum import BroadenedCurve, StickSpectrum

_DPI = 150


def save_spectrum_figure(
    path,
    sticks: StickSpectrum,
    curve: BroadenedCurve | None = None,
    title: str = "",
) -> None:
    """Stick spectrum with an optional broadened envelope."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    if sticks.sticks:
        ax.vlines(
            sticks.frequencies,
            0.0,
            sticks.intensities,
            color="tab:blue",
            lw=1.5,
            label="sticks",
        )
    if curve is not None and curve.values.size:
        peak = curve.values.max()
        top = max(sticks.intensities.max(), 1e-12) if sticks.sticks else 1.0
        scale = top / peak if peak > 0 else 1.0
        ax.plot(
            curve.grid,
            curve.values * scale,
            color="tab:red",
            lw=1.0,
            label=f"broadened ({curve.width:g} cm$^{{-1}}$ {curve.width_kind})",
        )
    ax.set_xlabel("transition frequency (cm$^{-1}$)")
    ax.set_ylabel("intensity")
    ax.set_ylim(bottom=0.0)
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_raw_vs_corrected_figure(path, result: EmulationResult, title: str = "") -> None:
    """Grouped bars of raw and corrected intensities per measured target."""
    ms = sorted(result.measurements, key=lambda m: m.frequency)
    fig, ax = plt.subplots(figsize=(max(7.0, 0.45 * len(ms) + 2.0), 4.0))
    pos = range(len(ms))
    width = 0.38
    ax.bar(
        [p - width / 2 for p in pos],
        [m.raw for m in ms],
        width,
        color="tab:gray",
        label="raw $P_4$",
    )
    ax.bar(
        [p + width / 2 for p in pos],
        [m.corrected for m in ms],
        width,
        yerr=[m.stderr for m in ms],
        color="tab:blue",
        label="corrected",
        error_kw={"lw": 0.8},
    )
    ax.plot(
        list(pos),
        [m.ideal for m in ms],
        linestyle="none",
        marker="_",
        markersize=14,
        color="tab:red",
        label="ideal",
    )
    ax.set_xticks(list(pos))
    ax.set_xticklabels([f"{m.target[0]},{m.target[1]}" for m in ms], rotation=90, fontsize=7)
    ax.set_xlabel("target state $n_X, n_Y$")
    ax.set_ylabel("transition intensity")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
