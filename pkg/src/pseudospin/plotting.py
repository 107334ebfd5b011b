"""Static SVG figures drawn from the CSV tables.

Figures are rendered with a fixed hash salt and no date stamp so the same
table always produces the same file.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "svg.hashsalt": "pseudospin",
    "svg.fonttype": "none",
    "axes.spines.right": False,
    "axes.spines.top": False,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "legend.frameon": False,
    "font.size": 9,
}

_XLABEL = {
    "theta": r"post-selection angle $\theta$ (rad)",
    "n_photons": "photons per window $N$",
    "window": "integration time (ms)",
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_sweep(table, kind, path):
    """Contrast with its spread (left) and angle precision (right)."""
    x = np.asarray(table["value"], dtype=float)
    with plt.rc_context(_RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
        ax1.errorbar(
            x, table["mean_contrast"], yerr=table["std_contrast"],
            fmt="o", ms=3, capsize=2, label="simulated",
        )
        ax1.plot(x, table["exact_contrast"], "k-", lw=1, label="model")
        ax1.set_xlabel(_XLABEL[kind])
        ax1.set_ylabel(r"$(N_+-N_-)/(N_++N_-)$")
        ax1.legend()

        ax2.plot(x, table["std_contrast"], "o", ms=3, label="contrast std")
        ax2.plot(x, table["theta_hat_std"], "s", ms=3, label=r"$\hat\theta$ std (rad)")
        ax2.plot(x, table["crb_std"], "k-", lw=1, label=r"$1/\sqrt{N F_\theta}$")
        if kind != "theta":
            ax1.set_xscale("log")
            ax2.set_xscale("log")
        ax2.set_yscale("log")
        ax2.set_xlabel(_XLABEL[kind])
        ax2.legend()
        _save(fig, path)


def plot_fisher(table, path):
    theta = np.asarray(table["theta"], dtype=float)
    with plt.rc_context(_RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
        ax1.plot(theta, table["sensitivity"], "-", lw=1)
        ax1.set_xlabel(_XLABEL["theta"])
        ax1.set_ylabel(r"$\partial\langle O\rangle/\partial\theta$ (1/rad)")
        ax2.plot(theta, table["crb_std"], "-", lw=1)
        ax2.set_yscale("log")
        ax2.set_xlabel(_XLABEL["theta"])
        ax2.set_ylabel("CRB std (rad)")
        _save(fig, path)


def plot_baseline(table, path):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        for n in sorted(set(table["n_pixels"])):
            rows = [i for i, v in enumerate(table["n_pixels"]) if v == n]
            ax.plot(
                [table["theta"][i] for i in rows],
                [table["ratio"][i] for i in rows],
                "o-", ms=3, lw=1, label=f"{n} pixels",
            )
        ax.set_xscale("log")
        ax.set_xlabel(_XLABEL["theta"])
        ax.set_ylabel(r"$F_{2\,\mathrm{bin}}/F_{\mathrm{pixels}}$")
        ax.legend()
        _save(fig, path)
