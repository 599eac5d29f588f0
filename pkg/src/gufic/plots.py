"""SVG figures of a finished run: tracking, contact force, tank levels and pose error."""
from __future__ import annotations

import hashlib
import logging
from pathlib import Path

import numpy as np
from matplotlib import rc_context
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

log = logging.getLogger(__name__)

_SVG_OPTS = {"format": "svg", "metadata": {"Date": None}}


def plot_series(log_):
    """Polylines behind each figure: ``{figure: [(panel, label, t, y), ...]}``."""
    t = log_.column("t")
    out = {"tracking": [], "force": [], "tanks": [], "psi": []}
    for axis in "xyz":
        out["tracking"].append((axis, "robot", t, log_.column(f"g_p{axis}")))
        out["tracking"].append((axis, "reference", t, log_.column(f"gbar_p{axis}")))
    # Contact force along the tool axis, counted positive when pressing.
    out["force"].append(("Fz", "sensed", t, -log_.column("Febar2")))
    out["force"].append(("Fz", "desired", t, log_.column("Fd2")))
    out["tanks"].append(("T", "force tank", t, log_.column("T_f")))
    out["tanks"].append(("T", "impedance tank", t, log_.column("T_i")))
    out["psi"].append(("psi", "error function", t, log_.column("psi")))
    return out


def series_digest(series, digits=9):
    """SHA-256 over the plotted data quantized to ``10**-digits`` of each line's peak.

    A stable fingerprint of a figure set; the quantization keeps it independent
    of last-bit differences between numerically equivalent kernel builds.
    """
    h = hashlib.sha256()
    for name in sorted(series):
        for panel, label, x, y in series[name]:
            h.update(f"{name}/{panel}/{label}".encode())
            for arr in (x, y):
                arr = np.asarray(arr, dtype=float)
                peak = float(np.max(np.abs(arr))) if arr.size else 0.0
                grid = np.rint(arr / (peak or 1.0) * 10.0**digits).astype("<i8")
                h.update(np.ascontiguousarray(grid).tobytes())
    return h.hexdigest()


_TITLES = {
    "tracking": ("end-effector position", "position [m]"),
    "force": ("contact force along the tool axis", "force [N]"),
    "tanks": ("energy tank levels", "energy [J]"),
    "psi": ("pose error function", "psi"),
}


def _figure(lines, title, ylabel):
    panels = list(dict.fromkeys(p for p, *_ in lines))
    fig = Figure(figsize=(7.0, 2.2 * len(panels) + 0.6))
    FigureCanvasSVG(fig)
    axes = fig.subplots(len(panels), 1, sharex=True, squeeze=False)[:, 0]
    for ax, panel in zip(axes, panels):
        for p, label, x, y in lines:
            if p == panel:
                style = "--" if label in ("reference", "desired") else "-"
                ax.plot(x, y, style, label=label, linewidth=1.2)
        ax.set_ylabel(panel if len(panels) > 1 else ylabel)
        ax.grid(True, linewidth=0.4)
        ax.legend(loc="best", fontsize="small")
    axes[0].set_title(title)
    axes[-1].set_xlabel("t [s]")
    fig.tight_layout()
    return fig


def _save(fig, path):
    # A fixed salt keeps the generated element ids, and so the files, reproducible.
    with rc_context({"svg.hashsalt": "gufic"}):
        fig.savefig(path, **_SVG_OPTS)
    return path


def render_plots(log_, outdir):
    """Write ``tracking.svg``, ``force.svg``, ``tanks.svg`` and ``psi.svg``; returns the paths."""
    if len(log_) == 0:
        log.warning("empty log: no plots written")
        return []
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, lines in plot_series(log_).items():
        title, ylabel = _TITLES[name]
        paths.append(_save(_figure(lines, title, ylabel), outdir / f"{name}.svg"))
    return paths


def render_compare(logs, outdir):
    """Overlay the contact force and in-plane tracking of several runs keyed by label."""
    logs = {k: v for k, v in logs.items() if len(v)}
    if not logs:
        log.warning("no non-empty logs to compare")
        return []
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    first = next(iter(logs.values()))
    force = [("Fz", label, lg.column("t"), -lg.column("Febar2")) for label, lg in logs.items()]
    force.append(("Fz", "desired", first.column("t"), first.column("Fd2")))
    track = []
    for label, lg in logs.items():
        t = lg.column("t")
        for axis in "xyz":
            track.append((axis, label, t, lg.column(f"g_p{axis}") - lg.column(f"gbar_p{axis}")))
    return [
        _save(_figure(force, "contact force along the tool axis", "force [N]"),
              outdir / "compare_force.svg"),
        _save(_figure(track, "tracking error (robot minus reference)", "error [m]"),
              outdir / "compare_tracking.svg"),
    ]
