"""Plot data and static SVG renderings of predictions and learned patterns.

The CSV files are the primary output; the SVGs are a convenience view of
the same numbers.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Composition, Dataset, PhaseLibrary
from .io import atomic_write


def bar_rows(sample_ids: Sequence[str], actuals: Sequence[Composition], predictions: Sequence[Composition]):
    for sid, a, p in zip(sample_ids, actuals, predictions):
        for name, av, pv in zip(a.phase_names, a.fractions, p.fractions):
            yield sid, name, float(av), float(pv)


def format_bars(rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample_id", "phase", "actual", "predicted"])
    for sid, name, av, pv in rows:
        w.writerow([sid, name, repr(av), repr(pv)])
    return buf.getvalue()


def _svg(fig) -> str:
    buf = _io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed element ids so identical data gives identical files
    plt.rcParams["svg.hashsalt"] = "phasefrac"
    return plt


def render_bars_svg(sample_ids, actuals, predictions, ncols: int = 6) -> str:
    plt = _pyplot()
    n = len(sample_ids)
    nrows = int(np.ceil(n / ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(2.0 * ncols, 1.1 * nrows), squeeze=False)
    for ax in axes.flat:
        ax.set_axis_off()
    for ax, sid, a, p in zip(axes.flat, sample_ids, actuals, predictions):
        ax.set_axis_on()
        idx = np.arange(a.M)
        ax.bar(idx - 0.2, a.fractions, width=0.4, color="tab:blue")
        ax.bar(idx + 0.2, p.fractions, width=0.4, color="tab:red")
        ax.set_ylim(0, 1)
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title(sid, fontsize=6)
    fig.suptitle("labeled (blue) vs predicted (red) phase fractions", fontsize=8)
    fig.tight_layout()
    svg = _svg(fig)
    plt.close(fig)
    return svg


def export_bars(directory, sample_ids, actuals, predictions, svg: bool = True) -> list[Path]:
    directory = Path(directory)
    paths = [directory / "fraction_bars.csv"]
    atomic_write(paths[0], format_bars(bar_rows(sample_ids, actuals, predictions)))
    if svg:
        paths.append(directory / "fraction_bars.svg")
        atomic_write(paths[1], render_bars_svg(sample_ids, actuals, predictions))
    return paths


def pure_samples(dataset: Dataset, tol: float = 1e-9) -> dict[str, list[int]]:
    """Indices of single-phase samples, keyed by phase name."""
    out = {name: [] for name in dataset.phase_names}
    for k, comp in enumerate(dataset.compositions):
        j = comp.dominant()
        if comp.fractions[j] >= 1.0 - tol:
            out[comp.phase_names[j]].append(k)
    return out


def export_phase_curves(
    directory,
    library: PhaseLibrary,
    overlay: Dataset | None = None,
    svg: bool = True,
) -> list[Path]:
    """One CSV per phase: angle, estimated intensity, and any pure-sample overlays."""
    directory = Path(directory)
    overlays = pure_samples(overlay) if overlay is not None else {}
    paths = []
    for j, name in enumerate(library.phase_names):
        cols = [library.grid.angles, library.patterns[j]]
        header = ["angle", "estimated"]
        for k in overlays.get(name, []):
            cols.append(overlay.samples[k][0].intensities)
            header.append(f"observed_{overlay.sample_ids[k]}")
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
        path = directory / f"curve_{_safe(name)}.csv"
        atomic_write(path, buf.getvalue())
        paths.append(path)
    if svg:
        path = directory / "phase_patterns.svg"
        atomic_write(path, render_phase_svg(library, overlay, overlays))
        paths.append(path)
    return paths


def render_phase_svg(library: PhaseLibrary, overlay: Dataset | None, overlays: dict) -> str:
    plt = _pyplot()
    M = library.M
    fig, axes = plt.subplots(M, 1, figsize=(8, 1.4 * M), sharex=True, squeeze=False)
    x = library.grid.angles
    for j, (ax, name) in enumerate(zip(axes[:, 0], library.phase_names)):
        for k in overlays.get(name, []):
            ax.plot(x, overlay.samples[k][0].intensities, color="tab:orange", lw=0.6)
        ax.plot(x, library.patterns[j], color="tab:blue", lw=0.6)
        ax.set_ylabel(name, fontsize=7)
        ax.tick_params(labelsize=6)
    axes[-1, 0].set_xlabel("2θ (deg)", fontsize=7)
    fig.tight_layout()
    svg = _svg(fig)
    plt.close(fig)
    return svg


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)

