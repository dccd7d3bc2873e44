"""Optional figures rendered next to CSV output (``--figure`` on the CLI).

matplotlib is imported lazily with the Agg backend so the library itself
never needs a display or the plotting dependency.
"""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    # fixed metadata keeps repeated renders byte-stable for png
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    fig.clf()


def plot_sweep(table, path, title=None):
    """Gaps, entropies and first cumulants against Gamma."""
    plt = _pyplot()
    g = table.column("gamma")
    fig, axes = plt.subplots(3, 1, figsize=(6, 8), sharex=True)
    axes[0].plot(g, table.column("delta12"), "o-", ms=3, label="delta12")
    axes[0].plot(g, table.column("delta13"), "s-", ms=3, label="delta13")
    axes[0].set_ylabel("gap")
    axes[1].plot(g, table.column("entropy_half"), "o-", ms=3, label="S(block)")
    axes[1].plot(g, table.column("entropy_single"), "s-", ms=3, label="S(single)")
    axes[1].set_ylabel("entropy [bits]")
    for l in range(1, table.m + 1):
        axes[2].plot(g, table.column(f"c_z{l}"), "-", label=f"c_z{l}")
    axes[2].plot(g, table.column("c_rho1"), "k--", label="c_rho1")
    axes[2].set_ylabel("cumulant")
    axes[2].set_xlabel("Gamma")
    flagged = table.column("degeneracy_flag") > 0
    for ax in axes:
        if flagged.any():
            ax.axvspan(g[flagged].min(), g[flagged].max(), color="0.9", zorder=0)
        ax.legend(fontsize=7, frameon=False)
    if title:
        axes[0].set_title(title)
    _save(fig, path)
    plt.close(fig)


def plot_critical_line(fit, points, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    b = np.array([p[0] for p in points])
    ax.plot(b, [p[1] for p in points], "o", label="critical points")
    bb = np.linspace(b.min(), b.max(), 200)
    ax.plot(bb, fit(bb), "-", label="cubic fit")
    ax.set_xlabel("B")
    ax.set_ylabel("Gamma_c")
    ax.legend(frameon=False)
    _save(fig, path)
    plt.close(fig)


def plot_gap_scaling(exp_fit, pow_fit, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    n = np.array(exp_fit.x)
    ax.semilogy(n, exp_fit.y, "o", label="minimum gap")
    nn = np.linspace(n.min(), n.max(), 200)
    ax.semilogy(nn, exp_fit(nn), "-", label=f"exp (rms {exp_fit.rms_residual:.2g})")
    ax.semilogy(nn, pow_fit(nn), "--", label=f"power (rms {pow_fit.rms_residual:.2g})")
    ax.set_xlabel("N")
    ax.set_ylabel("gap")
    ax.legend(frameon=False)
    _save(fig, path)
    plt.close(fig)


def plot_entropy_scaling(points, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot([p.n for p in points], [p.per_site for p in points], "o-")
    ax.set_xlabel("N")
    ax.set_ylabel("S_max / N")
    _save(fig, path)
    plt.close(fig)
