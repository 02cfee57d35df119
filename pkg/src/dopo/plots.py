"""SVG rendering of space-time plots, diagrams, scans and histograms."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def spacetime_plot(path, times, x, frames, title="Re(signal near field)"):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.pcolormesh(x, times, frames.real, shading="auto", cmap="RdBu_r", rasterized=True)
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title)
    fig.savefig(path, format="svg")
    plt.close(fig)


def far_field_plot(path, times, k, frames):
    order = np.fft.fftshift(np.arange(k.size))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.pcolormesh(k[order], times, np.abs(frames[:, order]),
                       shading="auto", cmap="magma", rasterized=True)
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("k")
    ax.set_ylabel("t")
    ax.set_title("|signal far field|")
    fig.savefig(path, format="svg")
    plt.close(fig)


def stability_plot(path, rows):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    by_v: dict[float, list] = {}
    for row in rows:
        by_v.setdefault(row["v"], []).append(row)
    for v, pts in sorted(by_v.items()):
        pts = sorted(pts, key=lambda r: r["delta1"])
        ax.plot([p["delta1"] for p in pts], [p["f_c"] for p in pts],
                label=f"v={v:g}")
    ax.axhline(1.0, color="k", lw=0.8, ls=":")
    ax.set_xlabel("delta1")
    ax.set_ylabel("F_c")
    ax.set_title("absolute-instability threshold")
    ax.legend()
    fig.savefig(path, format="svg")
    plt.close(fig)


def angle_scan_plot(path, thetas, ratios):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(thetas, ratios)
    ax.axhline(1.0, color="k", lw=0.8, ls=":")
    ax.set_xlabel("theta (rad)")
    ax.set_ylabel("Var(X-(theta)) / shot")
    fig.savefig(path, format="svg")
    plt.close(fig)


def histogram_plot(path, hist, title="W"):
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.pcolormesh(hist.re_edges, hist.im_edges, hist.probability().T,
                       shading="auto", cmap="viridis", rasterized=True)
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    fig.savefig(path, format="svg")
    plt.close(fig)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
