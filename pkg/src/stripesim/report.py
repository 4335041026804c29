"""Matplotlib figure rendering for campaign and fronthaul reports.

Figures are written to files next to the CSV/JSON output; nothing is shown
interactively (Agg backend).
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

ALGORITHM_LABELS = {
    "oslp": "Sequential optimal (OSLP)",
    "cent": "Centralized LMMSE",
    "altoslp": "Semi-distributed OSLP",
    "nlmmse": "Sequential N-LMMSE",
    "smr": "Sequential MR",
    "rls": "RLS",
}

_STYLES = ["-", "--", "-.", ":", (0, (3, 1, 1, 1)), (0, (5, 2))]


def save_se_cdf_figure(se_by_alg, path, title=None):
    """CDF of per-UE spectral efficiency, one curve per algorithm."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, (alg, samples) in enumerate(se_by_alg.items()):
        values = np.sort(np.asarray(samples, dtype=float))
        probs = np.arange(1, values.size + 1) / values.size
        ax.step(values, probs, where="post",
                linestyle=_STYLES[i % len(_STYLES)],
                label=ALGORITHM_LABELS.get(alg, alg))
    ax.set_xlabel("Spectral efficiency [bit/s/Hz]")
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1)
    ax.grid(True, alpha=0.4)
    ax.legend(loc="lower right", fontsize=9)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_fronthaul_figure(l_values, savings, path):
    """Fronthaul saved by sequential processing vs number of APs."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(l_values, 100.0 * np.asarray(savings, dtype=float), "-o", ms=4)
    ax.set_xlabel("Number of APs")
    ax.set_ylabel("Fronthaul signaling saved [%]")
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
