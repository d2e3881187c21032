"""Figure rendering for the command-line reports.

Every helper takes data already written to the delimited output and draws a
single PNG next to it.  The Agg backend keeps this headless; figures are a
visual aid only and never feed back into any computed result.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .grid import GridFunction

_DPI = 130


def _finish(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def _profile(ax, f: GridFunction, label: str) -> None:
    if f.dimension == 1:
        xs = f.cell_centers()[:, 0]
        ax.step(xs, f.values, where="mid", label=label, linewidth=1.0)
    else:
        im = ax.imshow(f.shaped_values.T, origin="lower", aspect="equal",
                       extent=[f.root.lower()[0], f.root.upper()[0],
                               f.root.lower()[1], f.root.upper()[1]])
        ax.figure.colorbar(im, ax=ax, shrink=0.8)
        ax.set_title(label)


def plot_condition_report(rows, path: str) -> str:
    """Per-level supremum of each condition quantity, log scale."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_cond: dict[str, dict[int, float]] = {}
    for cond, level, value in rows:
        lvl = by_cond.setdefault(cond, {})
        lvl[level] = max(lvl.get(level, 0.0), value)
    for cond, lvl in sorted(by_cond.items()):
        ks = sorted(lvl)
        ax.plot(ks, [lvl[k] for k in ks], marker="o", markersize=3, label=cond)
    ax.set_xlabel("cube level")
    ax.set_ylabel("supremum of the condition quantity")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def plot_function_pair(f: GridFunction, g: GridFunction, labels: tuple[str, str],
                       path: str) -> str:
    """Input next to output, shared axes in 1-d."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharex=(f.dimension == 1))
    _profile(axes[0], f, labels[0])
    _profile(axes[1], g, labels[1])
    if f.dimension == 1:
        for ax, lab in zip(axes, labels):
            ax.set_title(lab)
            ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def plot_cz_cover(f: GridFunction, lam: float, cubes, path: str) -> str:
    """|f| with the selected cubes shaded (1-d) or outlined (2-d)."""
    fig, ax = plt.subplots(figsize=(7, 4))
    g = f.abs()
    if f.dimension == 1:
        _profile(ax, g, "|f|")
        ax.axhline(lam, color="crimson", linewidth=0.9, label="threshold")
        for q in cubes:
            ax.axvspan(q.lower()[0], q.upper()[0], alpha=0.18, color="tab:orange")
        ax.legend(fontsize=8)
    else:
        _profile(ax, g, "|f| with selected cubes")
        for q in cubes:
            (x0, y0), (x1, y1) = q.lower(), q.upper()
            ax.plot([x0, x1, x1, x0, x0], [y0, y0, y1, y1, y0],
                    color="white", linewidth=1.0)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def plot_decay_curves(rows, path: str, ylabel: str) -> str:
    """One decaying curve per series: rows are (series, n, value)."""
    fig, ax = plt.subplots(figsize=(7, 4))
    series: dict[str, list[tuple[int, float]]] = {}
    for name, n_val, value in rows:
        series.setdefault(name, []).append((n_val, value))
    for name, pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                marker="o", markersize=3, label=name)
    ax.set_xlabel("N")
    ax.set_ylabel(ylabel)
    if any(v > 0 for pts in series.values() for _, v in pts):
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def plot_norm_bars(rows, path: str) -> str:
    """Norm ratio per bank function index."""
    fig, ax = plt.subplots(figsize=(7, 3.6))
    idx = [r[0] for r in rows]
    vals = [r[1] for r in rows]
    ax.bar(idx, vals, width=0.8)
    ax.set_xlabel("bank function")
    ax.set_ylabel("norm ratio")
    ax.grid(True, axis="y", alpha=0.3)
    return _finish(fig, path)


def plot_sparse_layout(f: GridFunction, cubes, path: str) -> str:
    """Members of a sparse family drawn over |f| by level."""
    fig, ax = plt.subplots(figsize=(7, 4))
    if f.dimension == 1:
        _profile(ax, f.abs(), "|f|")
        ymax = max(float(np.max(np.abs(f.values))), 1e-12)
        for q in cubes:
            d = q.level - f.root.level
            y = -0.06 * ymax * (d + 1)
            ax.hlines(y, q.lower()[0], q.upper()[0], linewidth=2.5, color="tab:green")
        ax.set_ylabel("|f| (cubes below axis, one row per level)")
    else:
        _profile(ax, f.abs(), "|f| with family members")
        for q in cubes:
            (x0, y0), (x1, y1) = q.lower(), q.upper()
            ax.plot([x0, x1, x1, x0, x0], [y0, y0, y1, y1, y0],
                    color="lime", linewidth=0.8)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)
