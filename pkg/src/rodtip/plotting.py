"""Matplotlib figures written straight to files (no pyplot state, Agg canvas)."""
from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

# fixed salt and no timestamp so identical data gives identical SVG bytes
_RC = {
    "svg.hashsalt": "rodtip",
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
}


def _figure(width=6.0, height=4.0):
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Date": None} if path.suffix == ".svg" else {}
    with matplotlib.rc_context(_RC):
        fig.savefig(path, metadata=meta, bbox_inches="tight")
    return path


def plot_density_curves(surface, path, title=None):
    """P(theta, t) against t, one line per angle, peaks marked."""
    with matplotlib.rc_context(_RC):
        fig = _figure()
        ax = fig.add_subplot()
        for i, th in enumerate(surface.theta):
            line, = ax.plot(surface.t, surface.density[i], label=rf"$\theta$ = {th:.3g}")
            tp = surface.peak_time[i]
            if np.isfinite(tp) and surface.t[0] <= tp <= surface.t[-1]:
                ax.axvline(tp, color=line.get_color(), lw=0.6, ls=":")
        ax.set_xlabel("t")
        ax.set_ylabel(r"$P(\theta, t)$")
        ax.set_title(title or rf"density vs time, $\sigma$ = {surface.sigma:.3g}")
        ax.legend(frameon=False)
    return _save(fig, path)


def plot_snapshots(snapshots: dict, path, title=None):
    """Density profiles; ``snapshots`` maps engine name to a list of WaveFunctions."""
    styles = {"analytic": "-", "numeric": "--"}
    with matplotlib.rc_context(_RC):
        fig = _figure()
        ax = fig.add_subplot()
        colors = matplotlib.rcParams["axes.prop_cycle"].by_key()["color"]
        for engine, states in snapshots.items():
            for k, psi in enumerate(states):
                ax.plot(psi.theta, psi.density, ls=styles.get(engine, "-"),
                        color=colors[k % len(colors)], label=f"{engine} t={psi.t:.3g}")
        ax.set_xlabel(r"$\theta$ (rad)")
        ax.set_ylabel(r"$|\psi|^2$")
        ax.set_title(title or "density snapshots")
        ax.legend(frameon=False, ncol=2)
    return _save(fig, path)


def plot_sweep(rows, x, ys, path, logx=False, logy=False, title=None):
    with matplotlib.rc_context(_RC):
        fig = _figure()
        ax = fig.add_subplot()
        xs = np.array([r.get(x, np.nan) for r in rows], dtype=float)
        for y in ys:
            vals = np.array([r.get(y, np.nan) for r in rows], dtype=float)
            ax.plot(xs, vals, marker="o", ms=2.5, label=y)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(x)
        ax.set_title(title or f"sweep over {x}")
        ax.legend(frameon=False)
    return _save(fig, path)
