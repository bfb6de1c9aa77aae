"""PNG renderings of scans, slices and first-return samples."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .atlas import ScanResult, SliceResult  # noqa: E402
from .io import palette  # noqa: E402


def plot_scan(result: ScanResult, path: str | Path, boundaries: dict | None = None) -> Path:
    cfg = result.config
    grey = np.array([[palette(c.cls) for c in row] for row in result.cells], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.imshow(
        grey.T,
        origin="lower",
        cmap="gray",
        vmin=0,
        vmax=255,
        extent=(cfg.axis1.lo, cfg.axis1.hi, cfg.axis2.lo, cfg.axis2.hi),
        aspect="auto",
        interpolation="nearest",
    )
    for lines in (boundaries or {}).values():
        for ln in lines:
            ax.plot(ln[:, 0], ln[:, 1], lw=0.6, color="tab:blue")
    ax.set_xlabel(cfg.axis1.name)
    ax.set_ylabel(cfg.axis2.name)
    ax.set_title(f"{cfg.family} scan, {cfg.axis1.n}x{cfg.axis2.n}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_slice(res: SliceResult, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for p in res.points:
        if res.family == "OneD":
            ys = p.support
            ax.plot(np.full(ys.shape, p.t), ys, ",", color="k")
        elif len(p.support):
            ax.plot(np.full(len(p.support), p.t), p.support[:, 0], ",", color="k")
    ax.set_xlabel("eta" if res.family == "OneD" else "t along segment")
    ax.set_ylabel("z" if res.family == "OneD" else "x")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_return_samples(z: np.ndarray, z_prime: np.ndarray, hz: np.ndarray, in_psi0: np.ndarray, path: str | Path) -> Path:
    """z' against z for first-return samples, with h(z) for comparison."""
    fig, ax = plt.subplots(figsize=(5, 5))
    order = np.argsort(z)
    ax.plot(z[order], hz[order], ".", ms=1, color="tab:red", label="h(z)")
    ax.plot(z[in_psi0], z_prime[in_psi0], ".", ms=1, color="tab:cyan", label="z' in Psi_0")
    ax.plot(z[~in_psi0], z_prime[~in_psi0], ".", ms=1, color="0.6", label="z' outside Psi_0")
    ax.set_xlabel("z")
    ax.set_ylabel("z'")
    ax.legend(loc="best", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_mask(mask: np.ndarray, extent: tuple[float, float, float, float], path: str | Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.imshow(mask.T, origin="lower", extent=extent, aspect="auto", cmap="Blues", interpolation="nearest")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
