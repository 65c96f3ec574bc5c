"""Static SVG charts rendered from sweep CSV files."""

from pathlib import Path

import numpy as np

from .sweep import read_points


def plot_sweep(csv_path, out_path):
    """Log-MSE against log-n_ess, and MSE against l when l varies."""
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    points = read_points(csv_path)
    if not points:
        raise ValueError(f"{csv_path} has no rows")
    ls = sorted({p.params.l for p in points})
    ncols = 2 if len(ls) > 1 else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5.5 * ncols, 4.2), squeeze=False)

    ax = axes[0, 0]
    x = np.array([p.n_ess for p in points])
    y = np.array([p.mean_mse for p in points])
    err = np.array([p.stderr for p in points])
    ax.errorbar(x, y, yerr=err, fmt="o-", ms=4, capsize=2)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("effective sample size")
    ax.set_ylabel("mean squared L2 error")
    ax.grid(True, which="both", alpha=0.3)

    if ncols == 2:
        ax = axes[0, 1]
        groups = {}
        for p in points:
            groups.setdefault((p.params.m, p.params.n), []).append(p)
        for (m, n), pts in sorted(groups.items()):
            pts.sort(key=lambda p: p.params.l)
            ax.errorbar(
                [p.params.l for p in pts], [p.mean_mse for p in pts], yerr=[p.stderr for p in pts],
                fmt="o-", ms=4, capsize=2, label=f"m={m}, n={n}",
            )
        ax.set_yscale("log")
        ax.set_xlabel("bits per encoder l")
        ax.set_ylabel("mean squared L2 error")
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)

    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, format="svg")
    plt.close(fig)
    return out_path
