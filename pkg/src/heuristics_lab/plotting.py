"""Figures written next to the ``dist`` and ``drift`` tables.

Uses the non-interactive Agg backend; nothing is ever shown on screen.
"""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .stats import DominanceVerdict, DriftEstimate  # noqa: E402


def survival_figure(
    quantiles: list[dict], verdict: DominanceVerdict, path: str | os.PathLike, title: str = ""
) -> None:
    """Empirical ``Pr[T >= t]`` with its DKW band against the scaled geometric tail."""
    t = np.array([row["t"] for row in quantiles], dtype=float)
    emp = np.array([row["empirical_survival"] for row in quantiles])
    bound = np.array([row["bound_survival"] for row in quantiles])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(t, emp, where="post", label="empirical Pr[T >= t]")
    ax.fill_between(
        t, np.clip(emp - verdict.band_width, 1e-300, 1), np.minimum(emp + verdict.band_width, 1),
        step="post", alpha=0.25, label=f"DKW band ({verdict.confidence:g})",
    )
    ax.plot(t, bound, "k--", label=f"{verdict.scale:g} * Geom({verdict.p:.3g}) tail")
    ax.set_xscale("symlog", linthresh=1)
    ax.set_yscale("log")
    ax.set_ylim(max(1e-6, 0.5 / verdict.n_samples), 1.5)
    ax.set_xlabel("iterations t")
    ax.set_ylabel("survival")
    ax.set_title(title or f"dominance check: {verdict.status}")
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def drift_figure(
    estimate: DriftEstimate, path: str | os.PathLike, exact: dict[int, float] | None = None, title: str = ""
) -> None:
    levels = sorted(estimate.per_level)
    mean = np.array([estimate.per_level[d].mean for d in levels])
    err = np.array([3 * estimate.per_level[d].stderr for d in levels])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(levels, mean, yerr=err, fmt="o", capsize=3, label="empirical (3 s.e.)")
    if exact:
        ks = sorted(exact)
        ax.plot(ks, [exact[k] for k in ks], "kx", label="exact")
    ax.axhline(0.0, color="grey", lw=0.8)
    if estimate.d0 is not None:
        ax.axvline(estimate.d0, color="tab:red", ls=":", label=f"d0 = {estimate.d0:.3g}")
    ax.set_xlabel("distance d to the optimum")
    ax.set_ylabel("E[d - d']")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
