"""Figure rendering for the CLI report path.

Every scenario that writes CSV tables can render the matching overview
figure next to them.  All output goes to files (Agg backend, no display).
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_field",
    "save_trajectory",
    "save_morrey_profile",
    "save_decay",
    "save_picard",
    "save_probe_divergence",
    "save_scan",
]

_DPI = 140


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return str(path)


def save_field(field, path, label="u(r)"):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(field.grid.radii, field.values, lw=1.2)
    ax.set_xlabel("r")
    ax.set_ylabel(label)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_trajectory(traj, path):
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.4))
    axes[0].semilogy(traj.sup_norm[:, 0], np.maximum(traj.sup_norm[:, 1], 1e-300))
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("sup |u|")
    axes[1].plot(traj.l2_norm[:, 0], traj.l2_norm[:, 1])
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("L2 norm")
    axes[2].plot(traj.energy[:, 0], traj.energy[:, 1])
    axes[2].set_xlabel("t")
    axes[2].set_ylabel("energy")
    for ax in axes:
        ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_morrey_profile(result, path):
    prof = result.profile
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.loglog(prof[:, 0], np.maximum(prof[:, 1], 1e-300), "o-", ms=3)
    ax.axvline(result.argmax_radius, color="crimson", ls=":", lw=1,
               label=f"argmax r={result.argmax_radius:.3g}")
    ax.set_xlabel("ball radius r")
    ax.set_ylabel("Morrey quotient")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    return _finish(fig, path)


def save_decay(profile, path):
    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.4))
    axes[0].semilogx(profile["t"], profile["scaled_sup"], "o-", ms=3)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("t^(lam/4) sup |S_t f|")
    axes[1].semilogx(profile["t"], profile["morrey"], "o-", ms=3, color="darkgreen")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("Morrey norm of S_t f")
    for ax in axes:
        ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_picard(diag, path):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    k = np.arange(1, len(diag.increment_norms) + 1)
    ax.semilogy(k, np.maximum(diag.increment_norms, 1e-300), "o-")
    ax.set_xlabel("iteration")
    ax.set_ylabel("increment norm")
    ax.set_title("converged" if diag.converged else "diverged", fontsize=9)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def save_probe_divergence(levels, probe_radii, values, path):
    """values: (n_levels, n_probes) probe table at the evaluation time."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for j, r in enumerate(probe_radii):
        ax.loglog(levels, np.maximum(values[:, j], 1e-300), "o-", label=f"r={r:.2f}")
    ax.set_xlabel("truncation level n")
    ax.set_ylabel("probe value")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    return _finish(fig, path)


def save_scan(xs, ys, path, xlabel, ylabel, logx=False):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    (ax.semilogx if logx else ax.plot)(xs, ys, "o-")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    return _finish(fig, path)
