"""The acceptance suite, shared by ``heuristics-lab verify`` and the tests.

Each check returns a :class:`CheckResult`; a check also fails when it
overruns its time limit.  All randomness is seeded, so every run of the
suite reproduces the same numbers.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .benchmarks import BenchmarkSpec, evaluate_all, fitness_function, is_weakly_monotonic, needle, optimum
from .core import BitString, RngStream
from .harness import ExperimentConfig, run_experiment
from .heuristics import AlgorithmSpec, PopulationState, fp_select, step_simple_ga
from .noise import NO_NOISE, OFFSPRING, PARENT, AdditiveDist, NoiseSpec, make_evaluator
from .oracle import (
    DriftConditionError,
    TransitionMatrix,
    comma_exact_drift,
    condition_constant,
    expected_hitting_time,
    fp_runtime_bound,
    full_chain,
    hitting_times,
    lumped_chain,
    path_probability,
    phase_success_bound,
    runtime_bound,
    verify_drift_bound,
)
from .stats import check_dominated_by_scaled_geom, estimate_drift


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    seconds: float
    limit: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return (
            f"[{mark}] AC{self.number:02d} {self.title} "
            f"({self.seconds:.2f}s / {self.limit:g}s) {info}"
        )


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _uniform_start(n: int) -> np.ndarray:
    return np.full(1 << n, 1.0 / (1 << n))


# -- individual checks ---------------------------------------------------------------


def check_oracle_exactness():
    alg, spec = AlgorithmSpec("rls"), BenchmarkSpec("onemax", 3)
    lumped = expected_hitting_time(lumped_chain(alg, spec), 3)
    full = expected_hitting_time(full_chain(alg, spec), BitString.from_str("000"))
    res = run_experiment(
        ExperimentConfig(alg, spec, replicates=10**5, master_seed=1, init="000"), workers=1
    )
    mean, se = res.summary["mean"], res.summary["stderr"]
    ok = abs(lumped - 5.5) <= 1e-9 and abs(full - 5.5) <= 1e-9 and abs(mean - 5.5) <= 3 * se
    return ok, {"lumped": lumped, "full": full, "mc_mean": mean, "mc_se": se}


def check_path_probability():
    ok = True
    details = {}
    for n in (2, 3, 4):
        r = path_probability(
            AlgorithmSpec("rls"), BenchmarkSpec("onemax", n), NO_NOISE, BitString.zeros(n), n
        )
        expected = math.factorial(n) / n**n
        ok &= abs(r.exact_prob - expected) <= 1e-9 and r.exact_prob > math.exp(-n)
        ok &= r.lower_bound == phase_success_bound(n, 1.0)
        details[f"n{n}"] = r.exact_prob
    return ok, details


def check_theorem3_oracle():
    ok = True
    worst = 0.0
    onebit = NoiseSpec("onebit", p=0.5)
    for kind in ("ea", "rls"):
        alg = AlgorithmSpec(kind)
        for bench in ("onemax", "leadingones"):
            for noise in (NO_NOISE, onebit):
                for n in range(3, 7):
                    spec = BenchmarkSpec(bench, n)
                    c = condition_constant(alg, noise, n)
                    times = hitting_times(full_chain(alg, spec, noise))
                    bound = runtime_bound(n, c)
                    ok &= bool(np.all(np.isfinite(times))) and float(times.max()) <= bound
                    worst = max(worst, float(times.max()) / bound)
    return ok, {"cases": 32, "max_ratio_ET_to_bound": worst}


def _pair_frequency(ev, x: int, y: int, trials: int, rng: RngStream, strict: bool) -> float:
    hits = 0
    if strict:
        for _ in range(trials):
            if ev(x, PARENT, rng) > ev(y, OFFSPRING, rng):
                hits += 1
    else:
        for _ in range(trials):
            if ev(x, PARENT, rng) <= ev(y, OFFSPRING, rng):
                hits += 1
    return hits / trials


def check_additive_comparison():
    n, trials = 20, 10**5
    f = fitness_function(BenchmarkSpec("onemax", n))
    floor = 0.5 - 3 * math.sqrt(0.25 / trials)
    rng = RngStream(4, 0)
    gen = rng.numpy()
    worst = {}
    ok = True
    # Gaussian(0, 100) is read as variance 100, i.e. standard deviation 10
    for dist in (AdditiveDist("gaussian", 0.0, 10.0), AdditiveDist("cauchy", 0.0, 10.0)):
        lo = 1.0
        for _ in range(20):
            while True:
                x, y = rng.getrandbits(n), rng.getrandbits(n)
                if f(x) != f(y):
                    break
            if f(x) < f(y):
                x, y = y, x
            noisy_x = f(x) + dist.sample_array(gen, trials)
            noisy_y = f(y) + dist.sample_array(gen, trials)
            lo = min(lo, float(np.mean(noisy_x > noisy_y)))
        ok &= lo >= floor
        worst[f"min_freq_{dist.kind}"] = lo
    worst["floor"] = floor
    return ok, worst


def check_prior_comparison():
    n, trials, eps = 10, 10**5, 0.5
    spec = BenchmarkSpec("onemax", n)
    ev = make_evaluator(NoiseSpec("onebit", p=0.5), spec)
    rng = RngStream(5, 0)
    sigma = math.sqrt(eps**2 * (1 - eps**2) / trials)
    pairs = [("1111100000", "1111100000"), ("1111100000", "0111110000"), ("1111000000", "1111100000"),
             ("0000000000", "1111111111"), ("1111111110", "1111111111")]
    lo = 1.0
    for xs, ys in pairs:
        x, y = BitString.from_str(xs), BitString.from_str(ys)
        lo = min(lo, _pair_frequency(ev, x.bits, y.bits, trials, rng, strict=False))
    floor = eps**2 - 3 * sigma
    return lo >= floor, {"min_freq": lo, "floor": floor}


def check_extreme_bitwise():
    n, q, trials = 20, 0.9, 10**6
    spec = BenchmarkSpec("onemax", n)
    ev = make_evaluator(NoiseSpec("bitwise", q=q), spec)
    rng = RngStream(6, 0)
    target = 0.5 * (1 - q) ** 2
    sigma = math.sqrt(target * (1 - target) / trials)
    # y is x with one 0-bit set, so OneMax(y) = OneMax(x) + 1
    x = BitString.from_str("11111111110000000000").bits
    y = x | (1 << 10)
    hits = 0
    for _ in range(trials):
        if ev(x, PARENT, rng) < ev(y, OFFSPRING, rng):
            hits += 1
    freq = hits / trials
    return freq >= target - 3 * sigma, {"freq": freq, "bound": target}


def check_theorem4_dominance():
    n, p_noise = 7, 0.9
    alg = AlgorithmSpec("ea")
    noise = NoiseSpec("onebit", p=p_noise)
    c = (1 - 1 / n) ** (n - 1) * (1 - p_noise) ** 2
    assert math.isclose(c, condition_constant(alg, noise, n))
    res = run_experiment(
        ExperimentConfig(alg, BenchmarkSpec("leadingones", n), noise, replicates=10**4, budget=10**7,
                         master_seed=7),
    )
    times = [r.hitting_time for r in res.records]
    cens = [r.censored for r in res.records]
    verdict = check_dominated_by_scaled_geom(times, n, (c / math.e) ** n, 0.99, censored=cens)
    ok = not any(cens) and verdict.passed
    return ok, {"censored": sum(cens), "status": verdict.status, "mean_T": res.summary["mean"],
                "worst_margin": verdict.worst_margin}


def check_fp_bound():
    ok = True
    details = {}
    alg = AlgorithmSpec("fp_ea")
    for n in (4, 5, 6):
        spec = BenchmarkSpec("onemax", n)
        M = full_chain(alg, spec)
        exact = expected_hitting_time(M, _uniform_start(n))
        worst = float(hitting_times(M).max())
        res = run_experiment(ExperimentConfig(alg, spec, replicates=10**3, master_seed=8 + n), workers=1)
        mean, se = res.summary["mean"], res.summary["stderr"]
        ok &= worst <= fp_runtime_bound(n) and abs(mean - exact) <= 4 * se
        details[f"n{n}"] = f"exact={exact:.4g} mc={mean:.4g}+-{se:.2g}"
    return ok, details


def check_comma_drift():
    n, lam = 100, 5
    est = estimate_drift(AlgorithmSpec("comma", lam=lam), BenchmarkSpec("onemax", n), NO_NOISE,
                         (1, 2, 5, 25, 50), 20000, RngStream(9, 0), epsilon=0.5)
    ok = True
    worst_z = 0.0
    for d, lev in est.per_level.items():
        z = abs(lev.mean - comma_exact_drift(n, d, lam)) / lev.stderr
        worst_z = max(worst_z, z)
        ok &= z <= 3
    ok &= est.per_level[1].mean < 0 < est.per_level[50].mean
    return ok, {"max_z": worst_z, "drift_d1": est.per_level[1].mean,
                "drift_d50": est.per_level[50].mean, "d0(eps=0.5)": est.d0}


def biased_walk(size: int = 10, down: float = 0.6) -> TransitionMatrix:
    """Walk on 0..size towards 0; at the top the up-move becomes a self-loop."""
    P = np.zeros((size + 1, size + 1))
    P[0, 0] = 1.0
    for s in range(1, size + 1):
        P[s, s - 1] = down
        P[s, min(s + 1, size)] += 1 - down
    return TransitionMatrix(list(range(size + 1)), P, 0)


def check_additive_drift():
    rls = lumped_chain(AlgorithmSpec("rls"), BenchmarkSpec("onemax", 10))
    ok_rls = verify_drift_bound(rls, lambda d: d, 0.1, 10)
    ok_walk = verify_drift_bound(biased_walk(), lambda s: s, 0.1, 10)
    try:
        verify_drift_bound(biased_walk(down=0.5), lambda s: s, 0.1, 10)
        raised = False
    except DriftConditionError:
        raised = True
    return ok_rls and ok_walk and raised, {"rls": ok_rls, "walk": ok_walk, "violation_raised": raised}


def check_simple_ga():
    n, mu = 8, 16
    spec = BenchmarkSpec("onemax", n)
    alg = AlgorithmSpec("simple_ga", mu=mu)
    res = run_experiment(ExperimentConfig(alg, spec, replicates=100, budget=10**6, master_seed=11), workers=1)
    found = sum(not r.censored for r in res.records)
    ok = found >= 95
    rng = RngStream(11, 1)
    worst_z = 0.0
    for ones in (0, 4, 8):
        x = BitString.from_str("1" * ones + "0" * (n - ones))
        pop = PopulationState((x,) * mu)
        vals = []
        for _ in range(1000):
            vals.extend(m.ones_count() for m in step_simple_ga(alg, pop, spec, NO_NOISE, rng).members)
        vals = np.asarray(vals, dtype=float)
        expected = ones + (n - ones) / n - ones / n
        z = abs(vals.mean() - expected) / (vals.std(ddof=1) / math.sqrt(vals.size))
        worst_z = max(worst_z, z)
        ok &= z <= 3
    draws = 96000
    counts = np.bincount([fp_select([0.0] * mu, rng) for _ in range(draws)], minlength=mu)
    sigma = math.sqrt(draws * (1 / mu) * (1 - 1 / mu))
    uniform_z = float(np.max(np.abs(counts - draws / mu)) / sigma)
    ok &= uniform_z <= 3
    return ok, {"replicates_hit": found, "identity_max_z": worst_z, "zero_fitness_max_z": uniform_z}


def check_benchmarks():
    ok = True
    checked = 0
    for n in range(1, 13):
        om = evaluate_all(BenchmarkSpec("onemax", n))
        ones = om.astype(int)
        top = (1 << n) - 1
        specs = [
            BenchmarkSpec("onemax", n),
            BenchmarkSpec("leadingones", n),
            BenchmarkSpec("linear", n, weights=tuple(range(1, n + 1))),
            BenchmarkSpec("monotone_polynomial", n, monomials=((2.0, frozenset({1, n})), (1.0, frozenset(range(1, n + 1))))),
            needle(n),
        ] + [BenchmarkSpec("jump", n, k=k) for k in range(1, n + 1)] + [
            BenchmarkSpec("plateau", n, k=k) for k in range(1, n + 1)
        ]
        for spec in specs:
            f = evaluate_all(spec)
            ok &= optimum(spec).bits == top and f[top] == f.max()
            if spec.kind in ("jump", "plateau", "leadingones", "onemax", "linear"):
                ok &= int(np.sum(f == f.max())) == 1
            if spec.kind == "jump":
                if spec.k == 1:
                    ok &= bool(np.all(f == om + 1))
                else:
                    # above level n-k, the points beaten by that level are exactly the gap
                    ref = f[ones == n - spec.k].min()
                    upper = ones >= n - spec.k
                    gap = (ones > n - spec.k) & (ones < n)
                    ok &= bool(np.all((f[upper] < ref) == gap[upper]))
            if spec.kind == "plateau":
                level = (ones >= n - spec.k) & (ones <= n - 1)
                ok &= bool(np.all(f[level] == n)) and f[top] == n + spec.k
            if n <= 12 and n >= 2:
                expect = not (spec.kind == "jump" and spec.k >= 2)
                ok &= is_weakly_monotonic(spec) == expect
            checked += 1
    return ok, {"specs_checked": checked}


def check_determinism():
    cfg = ExperimentConfig(AlgorithmSpec("ea"), BenchmarkSpec("onemax", 10), NoiseSpec("onebit", p=0.3),
                           replicates=300, master_seed=13)
    first = run_experiment(cfg, workers=1).to_csv()
    again = run_experiment(cfg, workers=1).to_csv()
    parallel = run_experiment(cfg, workers=2).to_csv()
    return first == again == parallel, {"bytes": len(first)}


CHECKS: list[tuple[int, str, float, Callable]] = [
    (1, "oracle exactness", 5, check_oracle_exactness),
    (2, "phase success probability", 1, check_path_probability),
    (3, "runtime bound on full chains", 30, check_theorem3_oracle),
    (4, "additive noise comparison", 20, check_additive_comparison),
    (5, "one-bit noise comparison", 10, check_prior_comparison),
    (6, "extreme bit-wise noise", 30, check_extreme_bitwise),
    (7, "dominance on noisy LeadingOnes", 300, check_theorem4_dominance),
    (8, "fitness-proportionate EA bound", 120, check_fp_bound),
    (9, "(1,lambda) EA drift", 120, check_comma_drift),
    (10, "additive drift bound", 1, check_additive_drift),
    (11, "simple GA", 180, check_simple_ga),
    (12, "benchmark suite", 30, check_benchmarks),
    (13, "determinism", 10, check_determinism),
]


def run_check(number: int) -> CheckResult:
    for num, title, limit, fn in CHECKS:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, details = fn()
            except Exception as exc:  # a crash is a failed check, not a crashed suite
                ok, details = False, {"error": f"{type(exc).__name__}: {exc}"}
            seconds = time.perf_counter() - t0
            if seconds > limit:
                details["timeout"] = True
            return CheckResult(num, title, bool(ok) and seconds <= limit, seconds, limit, details)
    raise KeyError(f"no acceptance check {number}")


def run_all(numbers=None) -> list[CheckResult]:
    return [run_check(num) for num, *_ in CHECKS if numbers is None or num in numbers]
