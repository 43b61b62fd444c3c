"""Shared figure helpers with byte-stable SVG output."""

from __future__ import annotations

from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

SVG_RC = {"svg.hashsalt": "kolbif", "svg.fonttype": "path", "path.simplify": False}

GLYPHS = {
    "s": ("x", "tab:purple"),
    "sn": ("o", "tab:blue"),
    "un": ("o", "tab:red"),
    "sf": ("s", "tab:blue"),
    "uf": ("s", "tab:red"),
}


def new_figure(width: float = 6.0, height: float = 6.0) -> tuple[Figure, object]:
    fig = Figure(figsize=(width, height))
    ax = fig.add_subplot(1, 1, 1)
    return fig, ax


def save_svg(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def mark_equilibrium(ax, x: float, y: float, code: str, label: str | None = None) -> None:
    marker, color = GLYPHS.get(code, ("d", "black"))
    filled = code in ("sn", "sf", "s")
    ax.plot(
        [x],
        [y],
        marker=marker,
        color=color,
        markerfacecolor=color if filled else "white",
        markersize=7,
        linestyle="none",
        zorder=5,
    )
    if label:
        ax.annotate(label, (x, y), textcoords="offset points", xytext=(5, 5), fontsize=8)
