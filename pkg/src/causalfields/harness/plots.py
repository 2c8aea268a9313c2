"""Deterministic SVG figures for harness runs.

All figures route through _save, which pins the SVG hash salt to the run
seed and strips the creation date, so reruns produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib import colors as mcolors
from matplotlib import patches as mpatches

from ..geometry import sample_metric


def _save(fig, path, seed):
    with plt.rc_context({"svg.hashsalt": str(seed)}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _extent(lattice):
    return (
        0.0,
        lattice.length,
        lattice.t_min,
        lattice.t_min + lattice.dt * (lattice.nt - 1),
    )


def plot_metric(model, lattice, path, seed=0):
    """Heatmap of the spatial scale factor a(t, x)."""
    a, _ = sample_metric(model, lattice)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    im = ax.imshow(a, origin="lower", aspect="auto", extent=_extent(lattice), cmap="viridis")
    fig.colorbar(im, ax=ax, label="a(t, x)")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(f"scale factor: {model.name}")
    return _save(fig, path, seed)


def plot_regions(lattice, named_regions, path, seed=0, title="causal regions"):
    """Overlay boolean region masks with distinct colors."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    base = np.zeros((lattice.nt, lattice.nx))
    ax.imshow(base, origin="lower", aspect="auto", extent=_extent(lattice), cmap="gray", vmin=0, vmax=1)
    colors = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple", "tab:cyan")
    handles = []
    for k, (name, region) in enumerate(named_regions.items()):
        color = colors[k % len(colors)]
        overlay = np.zeros((lattice.nt, lattice.nx, 4))
        rgba = mcolors.to_rgba(color, alpha=0.55)
        overlay[region.mask] = rgba
        ax.imshow(overlay, origin="lower", aspect="auto", extent=_extent(lattice))
        handles.append(mpatches.Patch(color=color, label=name, alpha=0.55))
    ax.legend(handles=handles, loc="upper right", fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title)
    return _save(fig, path, seed)


def plot_field(lattice, values, path, seed=0, title="field"):
    """Heatmap of a real grid function (e.g. a propagated solution)."""
    values = np.asarray(values, dtype=float)
    vmax = float(np.abs(values).max()) or 1.0
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    im = ax.imshow(
        values,
        origin="lower",
        aspect="auto",
        extent=_extent(lattice),
        cmap="RdBu_r",
        vmin=-vmax,
        vmax=vmax,
    )
    fig.colorbar(im, ax=ax, label="u(t, x)")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title)
    return _save(fig, path, seed)


def plot_deformation(dfm, path, seed=0):
    """Source and deformed scale factors side by side on matched time axes."""
    a_src, _ = sample_metric(dfm.source, dfm.source_lattice)
    a_def, _ = sample_metric(dfm.deformed, dfm.lattice)
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0), sharey=True)
    vmin = min(a_src.min(), a_def.min())
    vmax = max(a_src.max(), a_def.max())
    im0 = axes[0].imshow(
        a_src,
        origin="lower",
        aspect="auto",
        extent=_extent(dfm.source_lattice),
        cmap="viridis",
        vmin=vmin,
        vmax=vmax,
    )
    axes[1].imshow(
        a_def,
        origin="lower",
        aspect="auto",
        extent=_extent(dfm.lattice),
        cmap="viridis",
        vmin=vmin,
        vmax=vmax,
    )
    for t in (dfm.t_sigma1, dfm.t_sigma2, dfm.t_sigma):
        for ax in axes:
            ax.axhline(t, color="white", lw=0.6, ls="--")
    axes[0].set_title("source a(t, x)")
    axes[1].set_title("deformed a(t, x)")
    axes[0].set_ylabel("t")
    for ax in axes:
        ax.set_xlabel("x")
    fig.colorbar(im0, ax=list(axes), label="a")
    return _save(fig, path, seed)


def plot_report_margins(report, path, seed=0):
    """Horizontal bar chart of check margins in units of their thresholds."""
    names = []
    ratios = []
    colors = []
    for stage in report["stages"]:
        for c in stage["checks"]:
            names.append(f"{stage['name']}:{c['name']}")
            thr = abs(c["threshold"])
            val = abs(c["value"])
            if thr == 0.0:
                ratio = 0.0 if val == 0.0 else 10.0
            else:
                ratio = min(val / thr, 10.0)
            ratios.append(ratio)
            colors.append("tab:green" if c["passed"] else "tab:red")
    fig, ax = plt.subplots(figsize=(7.0, 0.22 * len(names) + 1.2))
    y = np.arange(len(names))
    ax.barh(y, ratios, color=colors)
    ax.axvline(1.0, color="black", lw=0.8, ls="--")
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=6)
    ax.set_xlabel("|value| / |threshold| (capped at 10)")
    ax.set_title("check margins")
    ax.invert_yaxis()
    fig.tight_layout()
    return _save(fig, path, seed)
