"""Matplotlib figure rendering for trajectories and basin sweeps.

Figures are written next to the CSV output when the CLI is invoked with
``--plot``; everything here is presentation-only.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

LABEL_COLORS = {
    "TT": "#1f77b4",
    "TF": "#ff7f0e",
    "FT": "#2ca02c",
    "FF": "#d62728",
    "IE": "#9467bd",
    "cycle": "#8c564b",
    "timeout": "#7f7f7f",
    "point": "#bcbd22",
}


def plot_classical_trajectory(traj, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    x, y = traj.states[:, 0].real, traj.states[:, 2].real
    ax1.plot(traj.times, x, label="$x_T$")
    ax1.plot(traj.times, y, label="$y_T$")
    ax1.set_xlabel("t")
    ax1.set_ylabel("share of first strategy")
    ax1.set_ylim(-0.02, 1.02)
    ax1.legend()
    ax2.plot(x, y, lw=1.2)
    ax2.plot(x[0], y[0], "go", label="start")
    ax2.plot(x[-1], y[-1], "rs", label="end")
    ax2.set_xlim(-0.02, 1.02)
    ax2.set_ylim(-0.02, 1.02)
    ax2.set_xlabel("$x_T$")
    ax2.set_ylabel("$y_T$")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_quantum_trajectory(traj, path):
    p = np.abs(traj.states[:, :4]) ** 2
    p = p / p.sum(axis=1, keepdims=True)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    for k, name in enumerate(("TT", "TF", "FT", "FF")):
        ax1.plot(traj.times, p[:, k], label=f"$p_{{{name}}}$")
    ax1.set_xlabel("t")
    ax1.set_ylabel("induced probability")
    ax1.legend()
    ax2.plot(traj.times, traj.payoffs[:, 0], label="$u_A$")
    ax2.plot(traj.times, traj.payoffs[:, 1], label="$u_B$")
    ax2.set_xlabel("t")
    ax2.set_ylabel("payoff")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_mixed_trajectory(traj, path):
    pq = np.abs(traj.states[:, :2]) ** 2
    pq = pq / pq.sum(axis=1, keepdims=True)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(traj.times, pq[:, 0], label="quantum $p_T$")
    ax1.plot(traj.times, traj.states[:, 2].real, label="classical $y_T$")
    ax1.set_xlabel("t")
    ax1.set_ylabel("share of first strategy")
    ax1.legend()
    ax2.plot(traj.times, traj.payoffs[:, 0], label="$u_A$")
    ax2.plot(traj.times, traj.payoffs[:, 1], label="$u_B$")
    ax2.set_xlabel("t")
    ax2.set_ylabel("payoff")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(sweep, path):
    n = sweep.grid_n
    names = sorted({lbl.describe() for _, _, lbl in sweep.points})
    index = {name: k for k, name in enumerate(names)}
    grid = np.zeros((n, n))
    for x0, y0, lbl in sweep.points:
        i = int(x0 * n)
        j = int(y0 * n)
        grid[j, i] = index[lbl.describe()]
    colors = [LABEL_COLORS.get(name, "#333333") for name in names]
    cmap = matplotlib.colors.ListedColormap(colors)
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.imshow(grid, origin="lower", extent=(0, 1, 0, 1), cmap=cmap,
              vmin=-0.5, vmax=len(names) - 0.5, interpolation="nearest")
    handles = [plt.Line2D([], [], marker="s", ls="", color=c, label=nm)
               for nm, c in zip(names, colors)]
    ax.legend(handles=handles, loc="center left", bbox_to_anchor=(1.02, 0.5))
    ax.set_xlabel("$x_0$")
    ax.set_ylabel("$y_0$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
