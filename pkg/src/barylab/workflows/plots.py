"""SVG figures of solver runs. Presentation only; nothing here feeds a check."""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_energy_curve(energies: Sequence[float], target: Path, title: Optional[str] = None) -> Path:
    """Discrete Dirichlet energy per sweep, saved as SVG without a timestamp."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        ax.plot(range(len(energies)), list(energies), marker=".", linewidth=1)
        ax.set_xlabel("sweep")
        ax.set_ylabel("Dirichlet energy")
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(target, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return target
