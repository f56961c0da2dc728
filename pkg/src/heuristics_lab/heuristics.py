"""Randomised search heuristics as single-step transitions plus a run loop.

The public step functions work on :class:`TrajectoryState` /
:class:`PopulationState`; :func:`run_until_hit` drives the same kernels on
packed ints for speed.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from itertools import accumulate
from typing import Callable, Sequence

from .benchmarks import BenchmarkSpec
from .core import BitString, RngStream, full_mask
from .noise import NO_NOISE, OFFSPRING, PARENT, NoiseSpec, make_evaluator

ALG_KINDS = ("rls", "metropolis", "sa", "ea", "fast_ea", "fp_ea", "comma", "simple_ga")
ONE_PLUS_ONE_KINDS = ("rls", "metropolis", "sa", "ea", "fast_ea", "fp_ea")

_ALG_ALIASES = {
    "randomized_local_search": "rls",
    "simulated_annealing": "sa",
    "oneplusoneea": "ea",
    "(1+1)ea": "ea",
    "1+1ea": "ea",
    "one_plus_one_ea": "ea",
    "fastea": "fast_ea",
    "fast": "fast_ea",
    "fpea": "fp_ea",
    "fp": "fp_ea",
    "onecommalambdaea": "comma",
    "(1,lambda)ea": "comma",
    "one_comma_lambda": "comma",
    "simplega": "simple_ga",
    "ga": "simple_ga",
}


@dataclass(frozen=True)
class Schedule:
    """Temperature schedule ``T(t)``.

    ``geometric``: ``t0 * r**t`` with ``0 < r < 1``.
    ``log``: ``c / ln(t + 2)``.
    """

    kind: str
    t0: float = 1.0
    r: float = 0.99
    c: float = 1.0

    def __post_init__(self):
        if self.kind == "geometric":
            if self.t0 <= 0 or not 0 < self.r < 1:
                raise ValueError("geometric schedule needs t0 > 0 and 0 < r < 1")
        elif self.kind == "log":
            if self.c <= 0:
                raise ValueError("log schedule needs c > 0")
        else:
            raise ValueError(f"unknown schedule {self.kind!r}")

    def __call__(self, t: int) -> float:
        if self.kind == "geometric":
            # clamp so that the temperature stays positive after underflow
            return max(self.t0 * self.r**t, 5e-324)
        return self.c / math.log(t + 2)

    def __str__(self):
        if self.kind == "geometric":
            return f"geometric:{self.t0!r},{self.r!r}"
        return f"log:{self.c!r}"


def parse_schedule(text: str) -> Schedule:
    kind, _, args = text.partition(":")
    vals = [float(v) for v in args.split(",") if v.strip()]
    kind = kind.strip().lower()
    if kind == "geometric":
        return Schedule("geometric", t0=vals[0], r=vals[1])
    if kind in ("log", "logarithmic"):
        return Schedule("log", c=vals[0])
    raise ValueError(f"unknown schedule {text!r}")


@dataclass(frozen=True)
class AlgorithmSpec:
    kind: str
    temperature: float | None = None
    schedule: Schedule | None = None
    beta: float | None = None
    lam: int | None = None
    mu: int | None = None
    rate: float | None = None

    def __post_init__(self):
        key = self.kind.lower().replace(" ", "")
        kind = _ALG_ALIASES.get(key, key)
        object.__setattr__(self, "kind", kind)
        if kind not in ALG_KINDS:
            raise ValueError(f"unknown algorithm kind {self.kind!r}")
        if kind == "metropolis" and (self.temperature is None or self.temperature <= 0):
            raise ValueError("metropolis needs a temperature T > 0")
        if kind == "sa" and self.schedule is None:
            raise ValueError("simulated annealing needs a schedule")
        if kind == "fast_ea":
            if self.beta is None:
                object.__setattr__(self, "beta", 1.5)
            elif self.beta <= 1:
                raise ValueError("power-law exponent beta must exceed 1")
        if kind == "comma" and (self.lam is None or self.lam < 1):
            raise ValueError("(1,lambda) EA needs lambda >= 1")
        if kind == "simple_ga" and (self.mu is None or self.mu < 1):
            raise ValueError("simple GA needs mu >= 1")
        if self.rate is not None and not 0 < self.rate <= 1:
            raise ValueError("mutation rate must lie in (0, 1]")

    def mutation_rate(self, n: int) -> float:
        return self.rate if self.rate is not None else 1.0 / n

    def to_config(self) -> dict[str, str]:
        out = {"alg.kind": self.kind}
        if self.temperature is not None:
            out["alg.T"] = repr(self.temperature)
        if self.schedule is not None:
            out["alg.schedule"] = str(self.schedule)
        if self.beta is not None:
            out["alg.beta"] = repr(self.beta)
        if self.lam is not None:
            out["alg.lambda"] = str(self.lam)
        if self.mu is not None:
            out["alg.mu"] = str(self.mu)
        if self.rate is not None:
            out["alg.rate"] = repr(self.rate)
        return out


def algorithm_from_config(cfg: dict[str, str]) -> AlgorithmSpec:
    def opt(key, conv):
        val = cfg.get(key)
        return conv(val) if val not in (None, "") else None

    return AlgorithmSpec(
        cfg["alg.kind"],
        temperature=opt("alg.T", float),
        schedule=opt("alg.schedule", parse_schedule),
        beta=opt("alg.beta", float),
        lam=opt("alg.lambda", int),
        mu=opt("alg.mu", int),
        rate=opt("alg.rate", float),
    )


@dataclass(frozen=True)
class TrajectoryState:
    current: BitString
    iteration: int = 0


@dataclass(frozen=True)
class PopulationState:
    members: tuple[BitString, ...]
    iteration: int = 0


@dataclass(frozen=True)
class HittingRecord:
    """Outcome of one replicate; censored runs carry ``hitting_time == budget``."""

    hitting_time: int
    censored: bool
    evaluations: int
    replicate_index: int = 0
    seed: int = 0
    budget: int = 0


def acceptance_constant(alg: AlgorithmSpec, n: int) -> float:
    """``c_A`` with ``Pr[offspring == given neighbour] >= c_A / n``."""
    kind = alg.kind
    if kind in ("rls", "metropolis", "sa"):
        return 1.0
    if kind in ("ea", "fp_ea"):
        r = alg.mutation_rate(n)
        return n * r * (1.0 - r) ** (n - 1)
    if kind == "fast_ea":
        return fast_mutation_weights(n, alg.beta)[0] * (1.0 - 1.0 / n) ** (n - 1)
    raise ValueError(f"no neighbour constant for {kind}")


# -- variation ---------------------------------------------------------------


def standard_bit_mutation(x: BitString, rate: float, rng: RngStream) -> BitString:
    """Flip every bit of ``x`` independently with probability ``rate``."""
    if not 0 < rate <= 1:
        raise ValueError("mutation rate must lie in (0, 1]")
    return BitString(x.n, x.bits ^ rng.bit_mask(x.n, rate))


@lru_cache(maxsize=128)
def fast_mutation_weights(n: int, beta: float) -> tuple[float, ...]:
    """Normalised power-law weights of strengths ``1..max(1, n // 2)``."""
    if beta <= 1:
        raise ValueError("power-law exponent beta must exceed 1")
    raw = [k**-beta for k in range(1, max(1, n // 2) + 1)]
    total = sum(raw)
    return tuple(w / total for w in raw)


@lru_cache(maxsize=128)
def _fast_cumulative(n: int, beta: float) -> tuple[float, ...]:
    return tuple(accumulate(fast_mutation_weights(n, beta)))


def sample_fast_mutation_strength(n: int, beta: float, rng: RngStream) -> int:
    cum = _fast_cumulative(n, beta)
    idx = bisect_right(cum, rng.random() * cum[-1])
    return min(idx, len(cum) - 1) + 1


def fp_select(values: Sequence[float], rng: RngStream) -> int:
    """Fitness-proportionate choice of an index; uniform if all values are 0."""
    if not values:
        raise ValueError("empty population")
    if any(v < 0 for v in values):
        raise ValueError("fitness-proportionate selection needs non-negative values")
    cum = list(accumulate(values))
    total = cum[-1]
    if total == 0:
        return rng.randrange(len(values))
    return _pick(cum, rng.random() * total)


def _pick(cum: list[float], r: float) -> int:
    idx = bisect_right(cum, r)
    if idx >= len(cum):
        # r rounded onto the total: fall back to the last positive weight
        idx = len(cum) - 1
        while idx > 0 and cum[idx] == cum[idx - 1]:
            idx -= 1
    return idx


def _fp_accept(vx: float, vy: float, rng: RngStream) -> bool:
    if vx < 0 or vy < 0:
        raise ValueError("fitness-proportionate acceptance undefined")
    total = vx + vy
    if total == 0:
        return rng.random() < 0.5
    return rng.random() * total < vy


# -- kernels on packed ints ----------------------------------------------------

StepFn = Callable[[int, int, RngStream], tuple]


def _mutation_operator(alg: AlgorithmSpec, n: int) -> Callable[[int, RngStream], int]:
    if alg.kind in ("rls", "metropolis", "sa"):
        return lambda x, rng: x ^ (1 << rng.randrange(n))
    if alg.kind == "fast_ea":
        cum = _fast_cumulative(n, alg.beta)
        top = len(cum) - 1

        def fast(x, rng):
            alpha = min(bisect_right(cum, rng.random() * cum[-1]), top) + 1
            return x ^ rng.bit_mask(n, alpha / n)

        return fast
    rate = alg.mutation_rate(n)
    return lambda x, rng: x ^ rng.bit_mask(n, rate)


def _acceptance_rule(alg: AlgorithmSpec) -> Callable[[float, float, int, RngStream], bool]:
    kind = alg.kind
    if kind == "metropolis":
        temp = alg.temperature

        def metropolis(vx, vy, t, rng):
            return vy >= vx or rng.random() < math.exp(-(vx - vy) / temp)

        return metropolis
    if kind == "sa":
        schedule = alg.schedule

        def annealing(vx, vy, t, rng):
            return vy >= vx or rng.random() < math.exp(-(vx - vy) / schedule(t))

        return annealing
    if kind == "fp_ea":
        return lambda vx, vy, t, rng: _fp_accept(vx, vy, rng)
    return lambda vx, vy, t, rng: vy >= vx


@lru_cache(maxsize=128)
def trajectory_kernel(alg: AlgorithmSpec, spec: BenchmarkSpec, noise: NoiseSpec) -> StepFn:
    """``step(x, t, rng) -> (x_next, optimum_generated, evaluations)``."""
    n = spec.n
    target = full_mask(n)
    ev = make_evaluator(noise, spec)

    if alg.kind == "comma":
        lam = alg.lam
        rate = alg.mutation_rate(n)

        def comma_step(x, t, rng):
            hit = False
            best = best_val = None
            ties = 0
            for _ in range(lam):
                y = x ^ rng.bit_mask(n, rate)
                if y == target:
                    hit = True
                v = ev(y, OFFSPRING, rng, t)
                if best is None or v > best_val:
                    best, best_val, ties = y, v, 1
                elif v == best_val:
                    # reservoir draw keeps the choice uniform among the ties
                    ties += 1
                    if rng.random() * ties < 1.0:
                        best = y
            return best, hit, lam

        return comma_step

    if alg.kind not in ONE_PLUS_ONE_KINDS:
        raise ValueError(f"{alg.kind} is not a single-trajectory algorithm")
    mutate = _mutation_operator(alg, n)
    accept = _acceptance_rule(alg)

    def step(x, t, rng):
        y = mutate(x, rng)
        vx = ev(x, PARENT, rng, t)
        vy = ev(y, OFFSPRING, rng, t)
        return (y if accept(vx, vy, t, rng) else x), y == target, 2

    return step


@lru_cache(maxsize=128)
def population_kernel(alg: AlgorithmSpec, spec: BenchmarkSpec, noise: NoiseSpec):
    """``step(pop, t, rng) -> (next_pop, optimum_generated, evaluations)``."""
    n = spec.n
    mu = alg.mu
    rate = alg.mutation_rate(n)
    target = full_mask(n)
    ev = make_evaluator(noise, spec)

    def step(pop, t, rng):
        values = [ev(x, PARENT, rng, t) for x in pop]
        if any(v < 0 for v in values):
            raise ValueError("fitness-proportionate selection needs non-negative values")
        cum = list(accumulate(values))
        total = cum[-1]
        nxt = []
        hit = False
        for _ in range(mu):
            if total == 0:
                parent = pop[rng.randrange(mu)]
            else:
                parent = pop[_pick(cum, rng.random() * total)]
            child = parent ^ rng.bit_mask(n, rate)
            hit = hit or child == target
            nxt.append(child)
        return nxt, hit, mu

    return step


def _check_dims(spec: BenchmarkSpec, *points: BitString) -> None:
    for p in points:
        if p.n != spec.n:
            raise ValueError("dimension mismatch")


def step_single_trajectory(
    alg: AlgorithmSpec,
    state: TrajectoryState,
    spec: BenchmarkSpec,
    noise: NoiseSpec,
    rng: RngStream,
) -> TrajectoryState:
    if alg.kind not in ONE_PLUS_ONE_KINDS:
        raise ValueError(f"{alg.kind} is not a (1+1)-type algorithm")
    _check_dims(spec, state.current)
    t = state.iteration + 1
    x, _, _ = trajectory_kernel(alg, spec, noise)(state.current.bits, t, rng)
    return TrajectoryState(BitString(spec.n, x), t)


def step_one_comma_lambda(
    alg: AlgorithmSpec,
    state: TrajectoryState,
    spec: BenchmarkSpec,
    noise: NoiseSpec,
    rng: RngStream,
) -> TrajectoryState:
    if alg.kind != "comma":
        raise ValueError("expected a (1,lambda) EA specification")
    _check_dims(spec, state.current)
    t = state.iteration + 1
    x, _, _ = trajectory_kernel(alg, spec, noise)(state.current.bits, t, rng)
    return TrajectoryState(BitString(spec.n, x), t)


def step_simple_ga(
    alg: AlgorithmSpec,
    pop: PopulationState,
    spec: BenchmarkSpec,
    noise: NoiseSpec,
    rng: RngStream,
) -> PopulationState:
    if alg.kind != "simple_ga":
        raise ValueError("expected a simple GA specification")
    if len(pop.members) != alg.mu:
        raise ValueError(f"population must have mu={alg.mu} members")
    _check_dims(spec, *pop.members)
    t = pop.iteration + 1
    nxt, _, _ = population_kernel(alg, spec, noise)([m.bits for m in pop.members], t, rng)
    return PopulationState(tuple(BitString(spec.n, x) for x in nxt), t)


def run_until_hit(
    alg: AlgorithmSpec,
    spec: BenchmarkSpec,
    noise: NoiseSpec = NO_NOISE,
    init: BitString | str | None = "uniform",
    budget: int = 10**7,
    rng: RngStream | None = None,
    replicate_index: int = 0,
) -> HittingRecord:
    """Iterate until the optimum is generated or ``budget`` iterations pass.

    The hitting time counts the first iteration that *generates* 1^n,
    whether or not selection keeps it; a fixed ``init`` equal to the
    optimum gives 0.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if rng is None:
        rng = RngStream(0, replicate_index)
    n = spec.n
    target = full_mask(n)
    seed = rng.master_seed

    def done(t, evals):
        return HittingRecord(t, False, evals, replicate_index, seed, budget)

    if alg.kind == "simple_ga":
        if isinstance(init, BitString):
            _check_dims(spec, init)
            pop = [init.bits] * alg.mu
        else:
            pop = [rng.getrandbits(n) for _ in range(alg.mu)]
        if target in pop:
            return done(0, 0)
        step = population_kernel(alg, spec, noise)
        state = pop
    else:
        if isinstance(init, BitString):
            _check_dims(spec, init)
            x = init.bits
        else:
            x = rng.getrandbits(n)
        if x == target:
            return done(0, 0)
        step = trajectory_kernel(alg, spec, noise)
        state = x

    evals = 0
    for t in range(1, budget + 1):
        state, hit, used = step(state, t, rng)
        evals += used
        if hit:
            return done(t, evals)
    return HittingRecord(budget, True, evals, replicate_index, seed, budget)
