"""Pseudo-Boolean benchmark functions (all maximised, optimum 1^n)."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import BitString, popcount

KINDS = ("onemax", "linear", "leadingones", "jump", "plateau", "monotone_polynomial")

_ALIASES = {
    "om": "onemax",
    "lo": "leadingones",
    "leading_ones": "leadingones",
    "monpoly": "monotone_polynomial",
    "polynomial": "monotone_polynomial",
}

MAX_EXHAUSTIVE_N = 16


@dataclass(frozen=True)
class BenchmarkSpec:
    """Which fitness function to use.

    ``monomials`` holds ``(coefficient, positions)`` pairs with 1-based
    positions.  Needle is not a kind of its own; :func:`needle` builds the
    plateau with ``k = n``.
    """

    kind: str
    n: int
    k: int | None = None
    weights: tuple[float, ...] = ()
    monomials: tuple[tuple[float, frozenset[int]], ...] = field(default=())

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind == "needle":
            object.__setattr__(self, "k", self.n)
            kind = "plateau"
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown benchmark kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if kind in ("jump", "plateau"):
            if self.k is None or not 1 <= self.k <= self.n:
                raise ValueError(f"{kind} needs k in [1..n], got k={self.k}")
        if kind == "linear":
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
            if len(self.weights) != self.n:
                raise ValueError("linear needs exactly n weights")
        if kind == "monotone_polynomial":
            monos = []
            for coef, idx in self.monomials:
                idx = frozenset(int(i) for i in idx)
                if coef < 0:
                    raise ValueError("negative monomial coefficient")
                if any(not 1 <= i <= self.n for i in idx):
                    raise ValueError("monomial position out of range")
                monos.append((float(coef), idx))
            object.__setattr__(self, "monomials", tuple(monos))

    def to_config(self) -> dict[str, str]:
        out = {"bench.kind": self.kind, "bench.n": str(self.n)}
        if self.k is not None:
            out["bench.k"] = str(self.k)
        if self.weights:
            out["bench.weights"] = ",".join(repr(w) for w in self.weights)
        if self.monomials:
            out["bench.monomials"] = ";".join(
                f"{c!r}:" + ",".join(str(i) for i in sorted(idx)) for c, idx in self.monomials
            )
        return out

    def __str__(self) -> str:
        return " ".join(f"{key.split('.', 1)[1]}={val}" for key, val in self.to_config().items())


def needle(n: int) -> BenchmarkSpec:
    return BenchmarkSpec("plateau", n, k=n)


def parse_monomials(text: str) -> tuple[tuple[float, frozenset[int]], ...]:
    """Parse ``"2:1,3;0.5:4"`` into monomials ``2*x1*x3 + 0.5*x4``."""
    monos = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        coef, _, idx = part.partition(":")
        positions = frozenset(int(i) for i in idx.split(",") if i.strip())
        monos.append((float(coef), positions))
    return tuple(monos)


def parse_benchmark(text: str) -> BenchmarkSpec:
    """Parse the ``kind=jump n=20 k=3`` form."""
    fields = dict(tok.split("=", 1) for tok in text.split())
    return benchmark_from_config({f"bench.{k}": v for k, v in fields.items()})


def benchmark_from_config(cfg: dict[str, str]) -> BenchmarkSpec:
    kind = cfg["bench.kind"]
    n = int(cfg["bench.n"])
    k = int(cfg["bench.k"]) if cfg.get("bench.k") not in (None, "") else None
    weights = tuple(float(w) for w in cfg.get("bench.weights", "").split(",") if w.strip())
    monomials = parse_monomials(cfg.get("bench.monomials", ""))
    return BenchmarkSpec(kind, n, k=k, weights=weights, monomials=monomials)


def _leading_ones(x: int) -> int:
    # number of trailing set bits of the packed int == leading ones of the string
    return ((x ^ (x + 1)) >> 1).bit_length()


@lru_cache(maxsize=256)
def fitness_function(spec: BenchmarkSpec) -> Callable[[int], float]:
    """Fast evaluator on packed ints."""
    n = spec.n
    kind = spec.kind
    if kind == "onemax":
        return lambda x: float(popcount(x))
    if kind == "leadingones":
        return lambda x: float(_leading_ones(x))
    if kind == "jump":
        k = spec.k

        def jump(x):
            ones = popcount(x)
            if ones <= n - k or ones == n:
                return float(ones + k)
            return float(n - ones)

        return jump
    if kind == "plateau":
        k = spec.k

        def plateau(x):
            ones = popcount(x)
            if ones <= n - k:
                return float(ones + k)
            if ones < n:
                return float(n)
            return float(n + k)

        return plateau
    if kind == "linear":
        weights = spec.weights

        def linear(x):
            total = 0.0
            while x:
                low = x & -x
                total += weights[low.bit_length() - 1]
                x ^= low
            return total

        return linear
    masks = [(coef, sum(1 << (i - 1) for i in idx)) for coef, idx in spec.monomials]

    def polynomial(x):
        return float(sum(coef for coef, m in masks if x & m == m))

    return polynomial


def eval_benchmark(spec: BenchmarkSpec, x: BitString) -> float:
    if x.n != spec.n:
        raise ValueError("dimension mismatch")
    return fitness_function(spec)(x.bits)


def optimum(spec: BenchmarkSpec) -> BitString:
    if spec.kind == "linear" and any(w <= 0 for w in spec.weights):
        raise ValueError("optimum not all-ones")
    return BitString.ones(spec.n)


def all_points(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def evaluate_all(spec: BenchmarkSpec) -> np.ndarray:
    """Fitness of every point of {0,1}^n, indexed by the packed int."""
    n = spec.n
    if n > 24:
        raise ValueError("exhaustive check infeasible")
    pts = all_points(n)
    bits = (pts[:, None] >> np.arange(n)) & 1
    ones = bits.sum(axis=1)
    if spec.kind == "onemax":
        return ones.astype(float)
    if spec.kind == "leadingones":
        return np.cumprod(bits, axis=1).sum(axis=1).astype(float)
    if spec.kind == "jump":
        k = spec.k
        return np.where((ones <= n - k) | (ones == n), ones + k, n - ones).astype(float)
    if spec.kind == "plateau":
        k = spec.k
        return np.where(ones <= n - k, ones + k, np.where(ones < n, n, n + k)).astype(float)
    if spec.kind == "linear":
        return bits @ np.asarray(spec.weights, dtype=float)
    out = np.zeros(1 << n)
    for coef, idx in spec.monomials:
        m = sum(1 << (i - 1) for i in idx)
        out += coef * ((pts & m) == m)
    return out


def is_weakly_monotonic(spec: BenchmarkSpec) -> bool:
    """Exhaustively check that no 0 -> 1 flip lowers the fitness."""
    if spec.n > MAX_EXHAUSTIVE_N:
        raise ValueError("exhaustive check infeasible")
    f = evaluate_all(spec)
    pts = all_points(spec.n)
    for i in range(spec.n):
        lower = pts[(pts >> i) & 1 == 0]
        if np.any(f[lower | (1 << i)] < f[lower]):
            return False
    return True
