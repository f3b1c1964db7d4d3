"""Figures written next to the CSV reports (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

REFERENCE_POINT = (0.69, 1.46)


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_entropy_sweep(sweep, path, mark=REFERENCE_POINT) -> Path:
    """Entanglement (bits) against squeezing, both routes, with the quoted point."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.plot(sweep.r, sweep.closed, "-", color="k", lw=1.5, label="closed form")
    ax.plot(sweep.r, sweep.numeric, "o", ms=3, mfc="none", color="tab:blue",
            label="reduced-state entropy")
    if mark is not None:
        ax.plot(*mark, "s", color="tab:red", ms=6, label=f"E({mark[0]}) = {mark[1]}")
    ax.set_xlabel("squeezing parameter r")
    ax.set_ylabel("E (bits)")
    ax.set_xlim(sweep.r[0], sweep.r[-1])
    ax.set_ylim(bottom=0)
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def plot_outcome_map(dist, path) -> Path:
    """Outcome density and, if present, per-outcome fidelity over the label grid."""
    panels = 2 if dist.fidelity is not None else 1
    fig, axes = plt.subplots(1, panels, figsize=(4.2 * panels, 3.6), squeeze=False)
    ext = [dist.grid.X[0], dist.grid.X[-1], dist.grid.P[0], dist.grid.P[-1]]
    im = axes[0, 0].imshow(dist.density * dist.grid.weight / (dist.grid.dX * dist.grid.dP),
                           origin="lower", extent=ext, aspect="auto", cmap="viridis")
    axes[0, 0].set_title("outcome density")
    fig.colorbar(im, ax=axes[0, 0])
    if panels == 2:
        im = axes[0, 1].imshow(dist.fidelity, origin="lower", extent=ext, aspect="auto",
                               cmap="magma", vmin=0, vmax=1)
        axes[0, 1].set_title("fidelity after correction")
        fig.colorbar(im, ax=axes[0, 1])
    for ax in axes[0]:
        ax.set_xlabel("X")
        ax.set_ylabel("P")
    return _save(fig, path)


def plot_sample_fidelities(fidelities, path, reference: float | None = None) -> Path:
    f = np.asarray(fidelities)
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.hist(f, bins=40, range=(0, 1), color="tab:blue", alpha=0.8)
    ax.axvline(f.mean(), color="k", lw=1, label=f"mean {f.mean():.4f}")
    if reference is not None:
        ax.axvline(reference, color="tab:red", ls="--", lw=1, label=f"quadrature {reference:.4f}")
    ax.set_xlabel("fidelity")
    ax.set_ylabel("samples")
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def plot_gamma(g, path) -> Path:
    """Modulus and phase of the coefficient table."""
    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.6))
    im = axes[0].imshow(np.abs(g.gamma), origin="upper", cmap="viridis")
    axes[0].set_title(f"|gamma|  (X={g.X:g}, P={g.P:g})")
    fig.colorbar(im, ax=axes[0])
    im = axes[1].imshow(np.angle(g.gamma), origin="upper", cmap="twilight", vmin=-np.pi, vmax=np.pi)
    axes[1].set_title("arg gamma")
    fig.colorbar(im, ax=axes[1])
    for ax in axes:
        ax.set_xlabel("n")
        ax.set_ylabel("m")
    return _save(fig, path)
