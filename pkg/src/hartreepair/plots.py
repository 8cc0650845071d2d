"""Figure rendering for solve reports.

Writes PNG files next to the delimited output: radial profiles of the pair
and its convolution kernels, the convergence history, and the tail views
used by the decay fits.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_solve_figures(outdir, profile: dict, report: dict) -> list[str]:
    """Render report figures into ``outdir``; returns the file names."""
    written = []
    r = np.asarray(profile["r"])

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    floor = 1e-300
    for key, style in (
        ("u_mean", "-"),
        ("v_mean", "--"),
        ("Iau_mean", ":"),
        ("Iav_mean", "-."),
    ):
        vals = np.maximum(np.asarray(profile[key]), floor)
        ax.semilogy(r, vals, style, label=key)
    ax.set_xlabel("r")
    ax.set_ylabel("shell mean")
    ax.set_title("radial profiles")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "profiles.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path.name)

    hist_i = report["history"]["I"]
    hist_r = report["history"]["residual"]
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
    axes[0].plot(hist_i)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("I")
    axes[0].set_title("constrained energy")
    axes[1].semilogy(hist_r)
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("residual")
    axes[1].set_title("scalar residual")
    fig.tight_layout()
    path = outdir / "convergence.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path.name)

    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
    for ax, key, label in ((axes[0], "u_mean", "u"), (axes[1], "v_mean", "v")):
        vals = np.maximum(np.asarray(profile[key]), floor)
        pos = vals > floor
        ax.loglog(r[pos], vals[pos])
        ax.set_xlabel("r")
        ax.set_ylabel(f"{label} shell mean")
        ax.set_title(f"tail of {label}")
    fig.tight_layout()
    path = outdir / "decay.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path.name)
    return written
