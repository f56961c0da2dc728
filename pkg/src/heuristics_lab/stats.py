"""Geometric tails, dominance verdicts, confidence intervals, drift estimates."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import norm

from .benchmarks import BenchmarkSpec
from .core import RngStream, popcount
from .heuristics import AlgorithmSpec, trajectory_kernel
from .noise import NoiseSpec


def geom_tail(p: float, k: int) -> float:
    """``Pr[X >= k]`` for ``X ~ Geom(p)`` on ``{1, 2, ...}``."""
    if not 0 < p <= 1:
        raise ValueError("success probability must lie in (0, 1]")
    if k <= 1:
        return 1.0
    return (1.0 - p) ** (k - 1)


def dkw_band(n_samples: int, confidence: float) -> float:
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n_samples))


@dataclass
class DominanceVerdict:
    """Result of checking ``T <= m * Geom(p)`` (stochastic order) from samples.

    ``status`` is ``"pass"``, ``"fail"`` or ``"inconclusive"``; the last one
    arises when censored runs hide the part of the tail the verdict hinges
    on.  ``worst_quantile`` is the sample value where the empirical survival
    function comes closest to (or furthest over) the bound, and
    ``worst_margin`` is ``band_width`` minus that excess.
    """

    passed: bool
    status: str
    worst_quantile: float
    worst_margin: float
    confidence: float
    band_width: float
    n_samples: int
    n_censored: int
    scale: float
    p: float

    def to_dict(self) -> dict:
        return asdict(self)


def _scaled_tail(t: np.ndarray, scale: float, p: float) -> np.ndarray:
    k = np.maximum(1.0, np.ceil(np.asarray(t, dtype=float) / scale))
    if p == 1.0:
        return (k <= 1).astype(float)
    return np.exp((k - 1) * math.log1p(-p))


def check_dominated_by_scaled_geom(
    samples: Sequence[float],
    scale: float,
    p: float,
    confidence: float = 0.99,
    censored: Sequence[bool] | None = None,
) -> DominanceVerdict:
    """One-sided DKW check of ``Pr[T >= t] <= Pr[scale * Geom(p) >= t]``.

    A censored sample with value ``B`` is known to exceed ``B``; it counts
    towards the empirical survival up to ``B + 1`` for a failure, and
    everywhere for a pass.
    """
    if not 0 < p <= 1:
        raise ValueError("success probability must lie in (0, 1]")
    if scale <= 0:
        raise ValueError("scale must be positive")
    values = np.asarray(samples, dtype=float)
    n = values.size
    if n == 0:
        raise ValueError("no samples")
    cens = np.zeros(n, dtype=bool) if censored is None else np.asarray(censored, dtype=bool)
    band = dkw_band(n, confidence)

    exact = np.sort(values[~cens])
    known_until = np.sort(values[cens] + 1.0)
    n_cens = int(cens.sum())

    def survival(t, sorted_vals):
        return (sorted_vals.size - np.searchsorted(sorted_vals, t, side="left")) / n

    # lower envelope of the survival function: censored runs count up to B + 1
    points = np.unique(np.concatenate([exact, known_until]))
    points = points[points > 0]
    if points.size:
        low_excess = survival(points, exact) + survival(points, known_until) - _scaled_tail(points, scale, p)
        i = int(np.argmax(low_excess))
        worst_low, worst_low_t = float(low_excess[i]), float(points[i])
    else:
        worst_low, worst_low_t = -math.inf, 0.0

    if worst_low > band:
        status, worst, worst_t = "fail", worst_low, worst_low_t
    else:
        # upper envelope: censored runs survive forever
        pts = exact[exact > 0]
        high = survival(pts, exact) + n_cens / n - _scaled_tail(pts, scale, p) if pts.size else np.array([])
        worst, worst_t = (float(high.max()), float(pts[int(np.argmax(high))])) if pts.size else (-math.inf, 0.0)
        if n_cens and n_cens / n > worst:
            worst, worst_t = n_cens / n, math.inf
        if worst <= band:
            status = "pass"
        else:
            status = "inconclusive"
        if not math.isfinite(worst):
            worst, worst_t = worst_low, worst_low_t
    margin = band - worst if math.isfinite(worst) else band
    return DominanceVerdict(
        passed=status == "pass",
        status=status,
        worst_quantile=worst_t,
        worst_margin=margin,
        confidence=confidence,
        band_width=band,
        n_samples=n,
        n_censored=n_cens,
        scale=scale,
        p=p,
    )


def survival_table(samples: Sequence[float], scale: float, p: float) -> list[dict]:
    """Empirical ``Pr[T >= t]`` and the bound's tail at every distinct sample value."""
    values = np.sort(np.asarray(samples, dtype=float))
    t = np.unique(values)
    emp = (values.size - np.searchsorted(values, t, side="left")) / values.size
    bound = _scaled_tail(t, scale, p)
    return [
        {"t": int(a) if float(a).is_integer() else float(a), "empirical_survival": float(e), "bound_survival": float(b)}
        for a, e, b in zip(t, emp, bound)
    ]


def mean_ci(samples: Iterable[float], confidence: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval: ``(mean, z * s / sqrt(N))``."""
    x = np.asarray(list(samples), dtype=float)
    if x.size < 2:
        raise ValueError("insufficient samples")
    z = norm.ppf(0.5 + confidence / 2.0)
    return float(x.mean()), float(z * x.std(ddof=1) / math.sqrt(x.size))


@dataclass
class LevelDrift:
    mean: float
    stderr: float
    count: int


@dataclass
class DriftEstimate:
    """Per-level mean one-step decrease of the OneMax distance.

    Positive values mean progress towards the optimum.  ``d0`` is the
    reference threshold ``2 e^2 n^eps / lambda`` when ``eps`` was supplied.
    """

    per_level: dict[int, LevelDrift] = field(default_factory=dict)
    d0: float | None = None


def prepare_parent(spec: BenchmarkSpec, distance: int, rng: RngStream) -> int:
    """A OneMax parent with exactly ``distance`` zero bits at random positions."""
    if spec.kind != "onemax" or not 0 <= distance <= spec.n:
        raise ValueError("unpreparable level")
    zeros = rng.numpy().choice(spec.n, size=distance, replace=False)
    x = (1 << spec.n) - 1
    for i in zeros:
        x ^= 1 << int(i)
    return x


def estimate_drift(
    alg: AlgorithmSpec,
    spec: BenchmarkSpec,
    noise: NoiseSpec,
    levels: Iterable[int],
    samples_per_level: int,
    rng: RngStream,
    epsilon: float | None = None,
) -> DriftEstimate:
    if spec.kind != "onemax":
        raise ValueError("unpreparable level")
    if samples_per_level < 2:
        raise ValueError("need at least two samples per level")
    step = trajectory_kernel(alg, spec, noise)
    n = spec.n
    out = DriftEstimate()
    if epsilon is not None and alg.lam:
        out.d0 = 2 * math.e**2 * n**epsilon / alg.lam
    for j, d in enumerate(sorted(set(levels))):
        level_rng = rng.child(j)
        parent = prepare_parent(spec, d, level_rng)
        changes = np.empty(samples_per_level)
        for s in range(samples_per_level):
            nxt, _, _ = step(parent, 1, level_rng)
            changes[s] = d - (n - popcount(nxt))
        out.per_level[d] = LevelDrift(
            float(changes.mean()),
            float(changes.std(ddof=1) / math.sqrt(samples_per_level)),
            samples_per_level,
        )
    return out
