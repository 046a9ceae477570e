"""Deterministic SVG log-log plots (no timestamps, fixed hash salt)."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def loglog_svg(path, series, xlabel: str, ylabel: str, title: str | None = None) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context({"svg.hashsalt": "lowmach", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 4))
        for x, y, label, style in series:
            x, y = np.asarray(x, float), np.asarray(y, float)
            ok = (x > 0) & (y > 0) & np.isfinite(y)
            if np.any(ok):
                ax.loglog(x[ok], y[ok], style, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
        if ax.get_legend_handles_labels()[0]:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
