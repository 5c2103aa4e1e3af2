"""Report figures: functional traces, residual histories, margin histograms.

Rendering happens only on the CLI report path; the library core emits data.
All figures go straight to files (Agg backend, no display).
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 120


def _finite(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = np.isfinite(y)
    return x[ok], y[ok]


def render_functionals(samples, kappa: float, path: Path) -> Path:
    t = np.array([s.t for s in samples])
    fig, axes = plt.subplots(2, 2, figsize=(9.5, 6.5), constrained_layout=True)

    ax = axes[0, 0]
    ax.plot(*_finite(t, [s.N_p for s in samples]), label="N_p", color="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(*_finite(t, [s.H_p for s in samples]), label="H_p", color="tab:orange", ls="--")
    ax.set_xlabel("t"), ax.set_ylabel("N_p"), ax2.set_ylabel("H_p")
    ax.set_title("entropy and entropy power")

    ax = axes[0, 1]
    ax.plot(*_finite(t, [s.I_p for s in samples]), label="I_p", color="tab:green")
    if np.all(t > 0):
        ax.plot(t, kappa / t, label="kappa/t", color="k", ls=":")
    ax.set_xlabel("t"), ax.set_ylabel("I_p"), ax.legend(frameon=False)
    ax.set_title("Fisher information vs bound")

    ax = axes[1, 0]
    for key, color in (("E", "tab:blue"), ("Eprime", "tab:orange"), ("Edoubleprime", "tab:red")):
        xx, yy = _finite(t, [getattr(s, key) for s in samples])
        ax.plot(xx, np.abs(yy) + 1e-300, label=key, color=color)
    ax.set_yscale("log")
    ax.set_xlabel("t"), ax.legend(frameon=False)
    ax.set_title("|E|, |E'|, |E''|")

    ax = axes[1, 1]
    for key, color in (("N_u", "tab:blue"), ("W_p", "tab:purple"), ("dW_dt", "tab:red")):
        xx, yy = _finite(t, [getattr(s, key) for s in samples])
        if xx.size:
            ax.plot(xx, yy, label=key, color=color)
    ax.set_xlabel("t"), ax.legend(frameon=False)
    ax.set_title("t-weighted entropy and W-entropy")

    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def render_residuals(reports, path: Path) -> Path:
    fig, (ax_r, ax_m) = plt.subplots(1, 2, figsize=(10.5, 4.2), constrained_layout=True)
    for rep in reports:
        target = ax_r if rep.mode == "residual" else ax_m
        target.plot(rep.times, np.abs(rep.values) + 1e-300, lw=0.9, label=rep.name)
        target.axhline(rep.tolerance, color="k", lw=0.5, ls=":")
    for ax, title in ((ax_r, "identity residuals"), (ax_m, "inequality margins (abs)")):
        ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_title(title)
        if ax.lines:
            ax.legend(frameon=False, fontsize=7)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def render_margin_histogram(margins: Dict[str, Sequence[float]], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    for name, vals in margins.items():
        vals = np.asarray(list(vals), float)
        ax.hist(np.log10(np.maximum(vals, 1e-12)), bins=30, alpha=0.6, label=name)
    ax.set_xlabel("log10 margin")
    ax.set_ylabel("count")
    ax.legend(frameon=False)
    ax.set_title("inequality margins on sampled densities")
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def render_sweep(values: Sequence[float], worsts: Dict[str, List[float]], axis: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    for name, ys in worsts.items():
        ax.plot(values, np.abs(np.asarray(ys, float)) + 1e-300, marker="o", ms=3, label=name)
    ax.set_xlabel(axis)
    ax.set_ylabel("worst |residual| / |margin|")
    ax.set_xscale("log" if axis == "N" else "linear")
    ax.set_yscale("log")
    ax.legend(frameon=False, fontsize=7)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)
