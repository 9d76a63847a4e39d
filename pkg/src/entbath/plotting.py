"""Static figures rendered next to the delimited output files."""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .modes import critical_coupling  # noqa: E402


def evolve_figure(path, times, series: dict):
    """Two-panel time-series figure: Green functions and entanglement."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax1.plot(times, series["abs_u"], label="|u(t)|", color="C0")
    ax1.plot(times, series["v"], label="v(t)", color="C1")
    ax1.set_ylabel("Green functions")
    ax1.legend(frameon=False)
    ax2.plot(times, series["en_plus"], label="center-of-mass $E_N$", color="C2")
    ax2.plot(times, series["en_total"], label="total $E_N$", color="C3")
    ax2.plot(times, series["en_naive"], label="naive joint $E_N$",
             color="C4", ls="--")
    ax2.set_xlabel(r"$t\,\omega_0$")
    ax2.set_ylabel("log. negativity")
    ax2.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def sweep_figure(path, etas, svals, field_matrix, temp, omega_plus, omega_c,
                 label="steady $E_N$", log_floor=None):
    """Contour map over (eta, s) at one temperature, with the critical line."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    data = np.array(field_matrix, dtype=float)
    if log_floor is not None:
        data = np.log10(np.maximum(data, log_floor))
        label = r"$\log_{10}$ " + label
    mesh = ax.pcolormesh(etas, svals, data.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=label)
    s_line = np.linspace(min(svals), max(svals), 200)
    eta_line = [critical_coupling(s, omega_plus, omega_c) for s in s_line]
    ax.plot(eta_line, s_line, "w--", lw=1.2, label=r"$\eta_c(s)$")
    ax.set_xlim(min(etas), max(etas))
    ax.set_xlabel(r"$\eta$")
    ax.set_ylabel("s")
    ax.set_title(f"T = {temp:g}")
    ax.legend(frameon=False, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def fock_figure(path, probs):
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.bar(np.arange(len(probs)), probs, color="C0", width=0.8)
    ax.set_xlabel("n")
    ax.set_ylabel("$p_n$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
