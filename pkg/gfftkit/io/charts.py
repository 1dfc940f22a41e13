"""Static SVG charts of residual sequences."""

from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from ..harness.verify import VerifyReport  # noqa: E402

# stable element ids; savefig drops the date below
matplotlib.rcParams["svg.hashsalt"] = "gfftkit"


def residual_chart(reports: Sequence[VerifyReport], path: Path, title: str) -> Path:
    """Plot residual against n for the rows that carry an n."""
    rows = [r for r in reports if r.n is not None and not r.theorem_id.endswith("-mc")]
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        ns = [r.n for r in rows]
        residuals = [max(r.discrepancy, 1e-300) for r in rows]
        ax.semilogy(ns, residuals, marker="o")
        ax.set_xlabel("n")
        ax.set_ylabel("residual")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return path
