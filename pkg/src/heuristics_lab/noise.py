"""Prior, posterior and adversarial noise around a benchmark.

Every call to an evaluator draws fresh randomness; nothing is cached
between evaluations, so re-evaluating a point gives an independent sample.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .benchmarks import BenchmarkSpec, fitness_function
from .core import BitString, RngStream

PARENT = "parent"
OFFSPRING = "offspring"
ROLES = (PARENT, OFFSPRING)

# Surrogates for "best/worst possible value"; halved so that differences
# stay finite inside exp() and divisions.
F_MAX = sys.float_info.max / 2
F_MIN = -F_MAX

NOISE_KINDS = ("none", "onebit", "bitwise", "pq", "additive", "adversarial")
_NOISE_ALIASES = {
    "one_bit": "onebit",
    "one-bit": "onebit",
    "bit_wise": "bitwise",
    "bit-wise": "bitwise",
    "pqnoise": "pq",
    "posterior": "additive",
    "additive_posterior": "additive",
    "adversary": "adversarial",
}


@dataclass(frozen=True)
class AdditiveDist:
    """Distribution of the additive noise term.

    ``gaussian(a, b)``: mean ``a``, standard deviation ``b``.
    ``cauchy(a, b)``: location ``a``, scale ``b``.
    ``uniform(a, b)``: on ``[a, b)``.  ``constant(a)``: always ``a``.
    """

    kind: str
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "cauchy", "uniform", "constant"):
            raise ValueError(f"unknown additive distribution {self.kind!r}")
        if self.kind in ("gaussian", "cauchy") and self.b <= 0:
            raise ValueError(f"{self.kind} needs a positive scale")
        if self.kind == "uniform" and self.b < self.a:
            raise ValueError("uniform needs a <= b")

    def sampler(self) -> Callable[[RngStream], float]:
        a, b = self.a, self.b
        if self.kind == "gaussian":
            return lambda rng: rng.gauss(a, b)
        if self.kind == "cauchy":
            return lambda rng: a + b * math.tan(math.pi * (rng.random() - 0.5))
        if self.kind == "uniform":
            return lambda rng: a + (b - a) * rng.random()
        return lambda rng: a

    def sample_array(self, gen: np.random.Generator, size: int) -> np.ndarray:
        """``size`` iid draws, for vectorised checks of the comparison laws."""
        a, b = self.a, self.b
        if self.kind == "gaussian":
            return gen.normal(a, b, size)
        if self.kind == "cauchy":
            return a + b * gen.standard_cauchy(size)
        if self.kind == "uniform":
            return gen.uniform(a, b, size)
        return np.full(size, a, dtype=float)

    def difference_cdf(self, t: float) -> float:
        """``Pr[Y - X <= t]`` for independent copies ``X, Y``."""
        if self.kind == "gaussian":
            return 0.5 * math.erfc(-t / (2.0 * self.b))
        if self.kind == "cauchy":
            # difference of two iid Cauchy(a, b) is Cauchy(0, 2b)
            return 0.5 + math.atan(t / (2.0 * self.b)) / math.pi
        if self.kind == "uniform":
            w = self.b - self.a
            if w == 0:
                return 1.0 if t >= 0 else 0.0
            s = min(max(t / w, -1.0), 1.0)
            return 0.5 * (1 + s) ** 2 if s < 0 else 1 - 0.5 * (1 - s) ** 2
        return 1.0 if t >= 0 else 0.0

    def __str__(self):
        if self.kind == "constant":
            return f"constant:{self.a!r}"
        return f"{self.kind}:{self.a!r},{self.b!r}"


def parse_dist(text: str) -> AdditiveDist:
    """Parse ``gaussian:0,100`` style descriptors."""
    kind, _, args = text.partition(":")
    vals = [float(v) for v in args.split(",") if v.strip()]
    return AdditiveDist(kind.strip().lower(), *vals)


@dataclass(frozen=True)
class AdversaryPolicy:
    """Restricted adversary: sees only (point, true fitness, role, iteration).

    ``constant`` returns ``value``; ``anti`` returns :data:`F_MAX` for
    parents and :data:`F_MIN` for offspring.
    """

    kind: str = "anti"
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("anti", "constant"):
            raise ValueError(f"unknown adversary {self.kind!r}")

    def __call__(self, x: int, fitness: float, role: str, iteration: int) -> float:
        if self.kind == "constant":
            return self.value
        return F_MAX if role == PARENT else F_MIN

    def __str__(self):
        return "anti" if self.kind == "anti" else f"constant:{self.value!r}"


def parse_adversary(text: str) -> AdversaryPolicy:
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("anti", "antiimprovement", "anti_improvement"):
        return AdversaryPolicy("anti")
    return AdversaryPolicy("constant", float(arg))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    p: float = 0.0
    q: float = 0.0
    dist: AdditiveDist | None = None
    adversary: AdversaryPolicy | None = None

    def __post_init__(self):
        kind = _NOISE_ALIASES.get(self.kind.lower(), self.kind.lower())
        object.__setattr__(self, "kind", kind)
        if kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        for name in ("p", "q"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"noise probability {name} must lie in [0, 1]")
        if kind == "additive" and self.dist is None:
            raise ValueError("additive noise needs a distribution")
        if kind == "adversarial" and self.adversary is None:
            object.__setattr__(self, "adversary", AdversaryPolicy("anti"))

    def to_config(self) -> dict[str, str]:
        out = {"noise.kind": self.kind}
        if self.kind in ("onebit", "pq", "adversarial"):
            out["noise.p"] = repr(self.p)
        if self.kind in ("bitwise", "pq"):
            out["noise.q"] = repr(self.q)
        if self.dist is not None:
            out["noise.dist"] = str(self.dist)
        if self.kind == "adversarial":
            out["noise.adversary"] = str(self.adversary)
        return out


NO_NOISE = NoiseSpec()


def noise_from_config(cfg: dict[str, str]) -> NoiseSpec:
    kind = cfg.get("noise.kind", "none")
    dist = parse_dist(cfg["noise.dist"]) if cfg.get("noise.dist") else None
    adv = parse_adversary(cfg["noise.adversary"]) if cfg.get("noise.adversary") else None
    return NoiseSpec(
        kind,
        p=float(cfg.get("noise.p", 0.0)),
        q=float(cfg.get("noise.q", 0.0)),
        dist=dist,
        adversary=adv,
    )


def no_noise_probability(noise: NoiseSpec, n: int) -> float:
    """Lower bound on the chance that an evaluation returns the true fitness.

    Returns ``nan`` for additive noise, where the notion does not apply.
    """
    if noise.kind == "none":
        return 1.0
    if noise.kind in ("onebit", "adversarial"):
        return 1.0 - noise.p
    if noise.kind == "bitwise":
        return (1.0 - noise.q) ** n
    if noise.kind == "pq":
        return 1.0 - noise.p * (1.0 - (1.0 - noise.q) ** n)
    return math.nan


def comparison_constant(noise: NoiseSpec, n: int) -> float:
    """Probability bound that a better-or-equal offspring also looks so.

    ``1`` without noise, ``1/2`` for additive noise, ``min(1/2, eps^2)``
    for prior and adversarial noise with no-noise probability ``eps``.
    """
    if noise.kind == "none":
        return 1.0
    if noise.kind == "additive":
        return 0.5
    eps = no_noise_probability(noise, n)
    return min(0.5, eps * eps)


Evaluator = Callable[[int, str, RngStream, int], float]


@lru_cache(maxsize=256)
def make_evaluator(noise: NoiseSpec, spec: BenchmarkSpec) -> Evaluator:
    """Build ``ev(x, role, rng, iteration) -> noisy fitness`` on packed ints."""
    f = fitness_function(spec)
    n = spec.n
    kind = noise.kind
    p, q = noise.p, noise.q

    if kind == "none" or (kind in ("onebit", "pq", "adversarial") and p == 0.0) or (
        kind == "bitwise" and q == 0.0
    ):
        return lambda x, role, rng, t=0: f(x)
    if kind == "onebit":

        def onebit(x, role, rng, t=0):
            if rng.random() < p:
                return f(x ^ (1 << rng.randrange(n)))
            return f(x)

        return onebit
    if kind == "bitwise":
        return lambda x, role, rng, t=0: f(x ^ rng.bit_mask(n, q))
    if kind == "pq":

        def pq(x, role, rng, t=0):
            if rng.random() < p:
                return f(x ^ rng.bit_mask(n, q))
            return f(x)

        return pq
    if kind == "additive":
        draw = noise.dist.sampler()
        return lambda x, role, rng, t=0: f(x) + draw(rng)
    adversary = noise.adversary

    def adversarial(x, role, rng, t=0):
        fx = f(x)
        if rng.random() < p:
            return adversary(x, fx, role, t)
        return fx

    return adversarial


def noisy_eval(
    noise: NoiseSpec,
    spec: BenchmarkSpec,
    x: BitString,
    role: str,
    rng: RngStream,
    iteration: int = 0,
) -> float:
    """One fresh sample of the noisy fitness of ``x``."""
    if x.n != spec.n:
        raise ValueError("dimension mismatch")
    if role not in ROLES:
        raise ValueError(f"unknown evaluation role {role!r}")
    return make_evaluator(noise, spec)(x.bits, role, rng, iteration)


def value_distribution(
    noise: NoiseSpec, spec: BenchmarkSpec, fvals: np.ndarray, role: str
) -> tuple[np.ndarray, np.ndarray]:
    """Exact law of the noisy fitness of every point.

    ``fvals`` holds the true fitness of all ``2**n`` points.  Returns the
    sorted support ``grid`` and a matrix ``P`` with ``P[x, j]`` the
    probability that evaluating ``x`` returns ``grid[j]``.  Additive noise
    has no finite support and is rejected.
    """
    n = spec.n
    size = 1 << n
    pts = np.arange(size)
    if noise.kind == "additive":
        raise ValueError("additive noise has no finite value distribution")
    support = set(np.unique(fvals).tolist())
    adv_value = None
    if noise.kind == "adversarial" and noise.p > 0:
        adv_value = noise.adversary(0, 0.0, role, 0)
        support.add(adv_value)
    grid = np.array(sorted(support))
    col = np.searchsorted(grid, fvals)

    def point_mass_rows(target_pts, weight, out):
        np.add.at(out, (pts, col[target_pts]), weight)

    P = np.zeros((size, grid.size))
    kind = noise.kind
    if kind == "none":
        point_mass_rows(pts, 1.0, P)
    elif kind == "onebit":
        point_mass_rows(pts, 1.0 - noise.p, P)
        for i in range(n):
            point_mass_rows(pts ^ (1 << i), noise.p / n, P)
    elif kind in ("bitwise", "pq"):
        weight_flip = 1.0 if kind == "bitwise" else noise.p
        if kind == "pq":
            point_mass_rows(pts, 1.0 - noise.p, P)
        for m in range(size):
            h = bin(m).count("1")
            w = weight_flip * noise.q**h * (1.0 - noise.q) ** (n - h)
            if w:
                point_mass_rows(pts ^ m, w, P)
    else:
        point_mass_rows(pts, 1.0 - noise.p, P)
        if adv_value is not None:
            P[:, np.searchsorted(grid, adv_value)] += noise.p
    return grid, P
