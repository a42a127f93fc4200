"""Matplotlib figures written to file (SVG by default, reproducible bytes)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Fixed salt and no date stamp so identical inputs give identical SVG bytes.
_RC = {
    "svg.hashsalt": "flightfall",
    "svg.fonttype": "path",
    "font.size": 11,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.6,
}


def density_figure(radii, densities, title: str = "", label: str = "p(r)"):
    """Line plot of a radial density on linear axes."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        ax.plot(radii, densities, color="k", label=label)
        ax.set_xlabel("distance from source  |x|")
        ax.set_ylabel("stationary density")
        ax.set_xlim(0, max(radii))
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title, fontsize=10)
        ax.grid(True, lw=0.3, alpha=0.5)
        fig.tight_layout()
    return fig


def save_figure(fig, path, fmt: str | None = None) -> None:
    with plt.rc_context(_RC):
        fig.savefig(path, format=fmt, metadata={"Date": None} if (fmt or str(path)).endswith("svg") else None)
    plt.close(fig)
