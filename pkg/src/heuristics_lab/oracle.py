"""Exact small-instance oracles.

Chains here use *sampling* semantics: the target is absorbing and the
transition ``x -> target`` carries the probability that the optimum is
generated in that iteration, whether or not selection would keep it.  Hitting
times of these chains therefore equal the runtime ``T`` reported by
:func:`heuristics_lab.heuristics.run_until_hit`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg
from scipy.stats import binom

from .benchmarks import BenchmarkSpec, evaluate_all
from .core import BitString, popcount
from .heuristics import (
    ONE_PLUS_ONE_KINDS,
    AlgorithmSpec,
    acceptance_constant,
    fast_mutation_weights,
)
from .noise import (
    NO_NOISE,
    OFFSPRING,
    PARENT,
    NoiseSpec,
    comparison_constant,
    value_distribution,
)

MAX_LUMPED_N = 64
ROW_TOL = 1e-12


class LumpingError(ValueError):
    pass


class StateSpaceTooLarge(ValueError):
    pass


class DriftConditionError(ValueError):
    def __init__(self, state, drift: float, delta: float):
        super().__init__(
            f"drift condition violated at state {state}: drift {drift:.6g} < delta {delta:.6g}"
        )
        self.state = state
        self.drift = drift


@dataclass
class TransitionMatrix:
    states: list
    probs: np.ndarray
    target: int

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        k = len(self.states)
        if self.probs.shape != (k, k):
            raise ValueError("transition matrix shape does not match the state list")
        if np.any(self.probs < 0):
            raise ValueError("negative transition probability")
        if np.max(np.abs(self.probs.sum(axis=1) - 1.0)) > ROW_TOL:
            raise ValueError("rows must sum to 1")

    def index(self, state) -> int:
        if isinstance(state, (int, np.integer)) and not isinstance(state, bool):
            if isinstance(self.states[0], BitString):
                return int(state)
        return self.states.index(state)


@dataclass
class PathProbabilityResult:
    exact_prob: float
    lower_bound: float
    horizon: int
    c: float

    @property
    def holds(self) -> bool:
        return self.exact_prob >= self.lower_bound


# -- bounds ---------------------------------------------------------------------


def condition_constant(alg: AlgorithmSpec, noise: NoiseSpec, n: int) -> float:
    """``c = c_A * c_N`` for a (1+1)-type algorithm under ``noise``.

    Fitness-proportionate acceptance contributes another factor 1/2 (a
    better neighbour is accepted with probability at least 1/2).
    """
    if alg.kind not in ONE_PLUS_ONE_KINDS:
        raise ValueError(f"no neighbour-step constant for {alg.kind}")
    c = acceptance_constant(alg, n) * comparison_constant(noise, n)
    if alg.kind == "fp_ea":
        c *= 0.5
    return c


def phase_success_bound(n: int, c: float) -> float:
    """``(c/e)^n``: chance that an n-iteration phase reaches the target."""
    return (c / math.e) ** n


def runtime_bound(n: int, c: float) -> float:
    """``n (e/c)^n``."""
    return n * (math.e / c) ** n


def jump_phase_bound(n: int, c: float) -> float:
    """``(c/e^2)^n / e``: the jump variant with one final k-bit jump."""
    return (c / math.e**2) ** n / math.e


def fp_runtime_bound(n: int) -> float:
    """``(2e^2)^n``."""
    return (2 * math.e**2) ** n


# -- building blocks ------------------------------------------------------------


def acceptance_kernel(
    alg: AlgorithmSpec, parent_vals: np.ndarray, child_vals: np.ndarray, iteration: int | None = None
) -> np.ndarray:
    """``K[i, j]``: probability of accepting an offspring valued ``child_vals[j]``
    against a parent valued ``parent_vals[i]``."""
    v = np.asarray(parent_vals, dtype=float)[:, None]
    w = np.asarray(child_vals, dtype=float)[None, :]
    kind = alg.kind
    if kind in ("rls", "ea", "fast_ea"):
        return (w >= v).astype(float)
    if kind in ("metropolis", "sa"):
        if kind == "metropolis":
            temp = alg.temperature
        elif iteration is None:
            raise ValueError("simulated annealing chain is time-inhomogeneous; pass iteration")
        else:
            temp = alg.schedule(iteration)
        with np.errstate(over="ignore", invalid="ignore"):
            worse = np.exp(-(v - w) / temp)
        return np.where(w >= v, 1.0, worse)
    if kind == "fp_ea":
        if np.any(v < 0) or np.any(w < 0):
            raise ValueError("fitness-proportionate acceptance undefined")
        total = v + w
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total == 0, 0.5, w / np.where(total == 0, 1.0, total))
    raise ValueError(f"no acceptance rule for {kind}")


def _assemble_one_plus_one(Q: np.ndarray, A: np.ndarray, target: int) -> np.ndarray:
    P = Q * A
    P[:, target] = Q[:, target]
    np.fill_diagonal(P, 0.0)
    P[np.arange(len(P)), np.arange(len(P))] = np.clip(1.0 - P.sum(axis=1), 0.0, None)
    P[target] = 0.0
    P[target, target] = 1.0
    return P


def _assemble_comma(Q: np.ndarray, Po: np.ndarray, lam: int, target: int) -> np.ndarray:
    """Best-of-lambda transition with uniform tie breaking.

    ``Q[x, y]`` is the offspring law, ``Po[y, j]`` the law of the noisy
    value of ``y`` on a sorted value grid.  Conditional on the best value
    being ``v``, the chosen offspring is distributed as ``Q * Po[:, v]``
    renormalised, which gives ``P = Q * (M / h) @ Po.T``.
    """
    q_hit = Q[:, target]
    miss = 1.0 - q_hit
    Qm = Q.copy()
    Qm[:, target] = 0.0
    safe = np.where(miss > 0, miss, 1.0)
    Qm /= safe[:, None]
    h = Qm @ Po
    H = np.cumsum(h, axis=1)
    H_prev = H - h
    M = np.clip(H, 0, 1) ** lam - np.clip(H_prev, 0, 1) ** lam
    ratio = np.divide(M, h, out=np.zeros_like(M), where=h > 0)
    P = Qm * (ratio @ Po.T)
    P *= (miss**lam)[:, None]
    P[:, target] = 1.0 - miss**lam
    np.fill_diagonal(P, 0.0)
    idx = np.arange(len(P))
    P[idx, idx] = np.clip(1.0 - P.sum(axis=1), 0.0, None)
    P[target] = 0.0
    P[target, target] = 1.0
    return P


def _hamming_matrix(n: int) -> np.ndarray:
    pts = np.arange(1 << n)
    x = pts[:, None] ^ pts[None, :]
    counts = np.zeros_like(x)
    for i in range(n):
        counts += (x >> i) & 1
    return counts


def mutation_matrix(alg: AlgorithmSpec, n: int) -> np.ndarray:
    """Exact offspring law ``Q[x, y]`` over all ``2**n`` points."""
    H = _hamming_matrix(n)
    if alg.kind in ("rls", "metropolis", "sa"):
        return (H == 1) / n
    if alg.kind == "fast_ea":
        Q = np.zeros(H.shape)
        for alpha, w in enumerate(fast_mutation_weights(n, alg.beta), start=1):
            r = alpha / n
            Q += w * r**H * (1 - r) ** (n - H)
        return Q
    r = alg.mutation_rate(n)
    return r**H * (1 - r) ** (n - H)


def _level_mutation(alg: AlgorithmSpec, n: int) -> np.ndarray:
    """Offspring distance law ``g[d, d']`` on OneMax distance levels."""
    g = np.zeros((n + 1, n + 1))
    if alg.kind in ("rls", "metropolis", "sa"):
        for d in range(n + 1):
            if d > 0:
                g[d, d - 1] = d / n
            if d < n:
                g[d, d + 1] = (n - d) / n
        return g
    if alg.kind == "fast_ea":
        rates = [(w, a / n) for a, w in enumerate(fast_mutation_weights(n, alg.beta), start=1)]
    else:
        rates = [(1.0, alg.mutation_rate(n))]
    for w, r in rates:
        for d in range(n + 1):
            zeros_flip = binom.pmf(np.arange(d + 1), d, r)
            ones_flip = binom.pmf(np.arange(n - d + 1), n - d, r)
            joint = np.outer(zeros_flip, ones_flip)
            i, j = np.indices(joint.shape)
            np.add.at(g[d], d - i + j, w * joint)
    return g


def _level_values(noise: NoiseSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Noisy OneMax value law per distance level, on the values it can take."""
    grid = np.arange(-1, n + 2, dtype=float)
    P = np.zeros((n + 1, grid.size))
    p = noise.p if noise.kind == "onebit" else 0.0
    for d in range(n + 1):
        f = n - d
        P[d, f + 1] += 1 - p
        P[d, f + 2] += p * d / n
        P[d, f] += p * (n - d) / n
    # the padding columns -1 and n+1 never carry mass
    keep = P.any(axis=0)
    return grid[keep], P[:, keep]


# -- chains -------------------------------------------------------------------------


def lumped_chain(alg: AlgorithmSpec, spec: BenchmarkSpec, noise: NoiseSpec = NO_NOISE) -> TransitionMatrix:
    """Chain on OneMax distance levels ``d = n - |x|_1``; target is ``d = 0``."""
    n = spec.n
    if spec.kind != "onemax" or noise.kind not in ("none", "onebit"):
        raise LumpingError("lumping invalid")
    if alg.kind not in ONE_PLUS_ONE_KINDS + ("comma",) or alg.kind == "sa":
        raise LumpingError("lumping invalid")
    if n > MAX_LUMPED_N:
        raise StateSpaceTooLarge("state space too large")
    g = _level_mutation(alg, n)
    grid, Pv = _level_values(noise, n)
    if alg.kind == "comma":
        P = _assemble_comma(g, Pv, alg.lam, target=0)
    else:
        A = Pv @ acceptance_kernel(alg, grid, grid) @ Pv.T
        P = _assemble_one_plus_one(g, A, target=0)
    return TransitionMatrix(list(range(n + 1)), P, 0)


def _full_limit(noise: NoiseSpec) -> int:
    if noise.kind == "none" or (noise.kind in ("onebit", "pq", "adversarial") and noise.p == 0):
        return 10
    if noise.kind in ("bitwise", "pq"):
        return 6
    return 8


def full_chain(
    alg: AlgorithmSpec,
    spec: BenchmarkSpec,
    noise: NoiseSpec = NO_NOISE,
    iteration: int | None = None,
) -> TransitionMatrix:
    """Chain over all ``2**n`` points, target ``1^n``.

    Noisy acceptance is exact: noise outcomes are enumerated for prior and
    adversarial noise, and for additive noise the elitist acceptance
    probability is the CDF of the difference of two noise draws.
    ``iteration`` selects the temperature for simulated annealing.
    """
    n = spec.n
    if alg.kind == "simple_ga":
        raise ValueError("no exact chain for the simple GA")
    if n > _full_limit(noise):
        raise StateSpaceTooLarge("state space too large")
    fvals = evaluate_all(spec)
    size = 1 << n
    target = size - 1
    Q = mutation_matrix(alg, n)
    if noise.kind == "additive":
        if alg.kind not in ("rls", "ea", "fast_ea"):
            raise ValueError("additive noise is supported for elitist acceptance only")
        diff = fvals[None, :] - fvals[:, None]
        A = np.vectorize(noise.dist.difference_cdf)(diff)
        P = _assemble_one_plus_one(Q, A, target)
    elif alg.kind == "comma":
        _, Po = value_distribution(noise, spec, fvals, OFFSPRING)
        P = _assemble_comma(Q, Po, alg.lam, target)
    else:
        grid_p, Pp = value_distribution(noise, spec, fvals, PARENT)
        grid_o, Po = value_distribution(noise, spec, fvals, OFFSPRING)
        A = Pp @ acceptance_kernel(alg, grid_p, grid_o, iteration) @ Po.T
        P = _assemble_one_plus_one(Q, A, target)
    states = [BitString(n, int(x)) for x in range(size)]
    return TransitionMatrix(states, P, target)


def project_to_levels(M: TransitionMatrix) -> np.ndarray:
    """Sum a full OneMax chain by distance level; rows must agree within a level."""
    n = M.states[0].n
    level = np.array([n - popcount(s.bits) for s in M.states])
    out = np.full((n + 1, n + 1), np.nan)
    for d in range(n + 1):
        rows = M.probs[level == d]
        summed = np.stack([rows[:, level == e].sum(axis=1) for e in range(n + 1)], axis=1)
        if np.max(np.ptp(summed, axis=0)) > 1e-12:
            raise LumpingError("lumping invalid")
        out[d] = summed[0]
    return out


# -- hitting times ----------------------------------------------------------------


def _start_vector(M: TransitionMatrix, start) -> np.ndarray:
    k = len(M.states)
    if isinstance(start, (np.ndarray, list, tuple)) and not isinstance(start, BitString):
        vec = np.asarray(start, dtype=float)
        if vec.shape != (k,) or abs(vec.sum() - 1) > 1e-9 or np.any(vec < 0):
            raise ValueError("start distribution must be a probability vector over the states")
        return vec
    vec = np.zeros(k)
    vec[M.index(start)] = 1.0
    return vec


def hitting_times(M: TransitionMatrix) -> np.ndarray:
    """Expected hitting time of the target from every state (``inf`` if not a.s.)."""
    P = M.probs
    k = len(P)
    adj = P > 0
    can_reach = np.zeros(k, dtype=bool)
    can_reach[M.target] = True
    while True:
        grown = can_reach | (adj[:, can_reach].any(axis=1))
        if np.array_equal(grown, can_reach):
            break
        can_reach = grown
    doomed = ~can_reach
    # states that can wander into a doomed state also have infinite mean
    while True:
        grown = doomed | (adj[:, doomed].any(axis=1))
        if np.array_equal(grown, doomed):
            break
        doomed = grown
    times = np.full(k, np.inf)
    times[M.target] = 0.0
    transient = np.where(~doomed)[0]
    transient = transient[transient != M.target]
    if transient.size:
        sub = np.eye(transient.size) - P[np.ix_(transient, transient)]
        times[transient] = linalg.solve(sub, np.ones(transient.size))
    return times


def hitting_probabilities(M: TransitionMatrix) -> np.ndarray:
    """Probability of ever reaching the target from every state."""
    P = M.probs
    k = len(P)
    adj = P > 0
    can_reach = np.zeros(k, dtype=bool)
    can_reach[M.target] = True
    while True:
        grown = can_reach | (adj[:, can_reach].any(axis=1))
        if np.array_equal(grown, can_reach):
            break
        can_reach = grown
    probs = np.zeros(k)
    probs[M.target] = 1.0
    live = np.where(can_reach)[0]
    live = live[live != M.target]
    if live.size:
        sub = np.eye(live.size) - P[np.ix_(live, live)]
        probs[live] = linalg.solve(sub, P[live, M.target])
    return probs


def expected_hitting_time(M: TransitionMatrix, start) -> float:
    vec = _start_vector(M, start)
    times = hitting_times(M)
    mass = vec > 0
    if np.any(np.isinf(times[mass])):
        return math.inf
    return float(vec[mass] @ times[mass])


def absorption_within(M: TransitionMatrix, start, horizon: int) -> float:
    vec = _start_vector(M, start)
    for _ in range(horizon):
        vec = vec @ M.probs
    return float(vec[M.target])


def path_probability(
    alg: AlgorithmSpec,
    spec: BenchmarkSpec,
    noise: NoiseSpec,
    start: BitString,
    horizon: int,
) -> PathProbabilityResult:
    """Exact chance of generating ``1^n`` within ``horizon`` iterations.

    The lower bound is ``(c/e)^n``; for jump functions with ``k >= 2`` the
    final step is a k-bit jump and the bound becomes ``(c/e^2)^n / e``.
    """
    n = spec.n
    if alg.kind == "sa":
        vec = np.zeros(1 << n)
        vec[start.bits] = 1.0
        target = (1 << n) - 1
        for t in range(1, horizon + 1):
            vec = vec @ full_chain(alg, spec, noise, iteration=t).probs
        prob = float(vec[target])
    else:
        prob = absorption_within(full_chain(alg, spec, noise), start, horizon)
    try:
        c = condition_constant(alg, noise, n)
    except ValueError:
        return PathProbabilityResult(prob, math.nan, horizon, math.nan)
    if spec.kind == "jump" and spec.k >= 2:
        bound = jump_phase_bound(n, c)
    else:
        bound = phase_success_bound(n, c)
    return PathProbabilityResult(prob, bound, horizon, c)


# -- drift ----------------------------------------------------------------------------


def _potential_vector(M: TransitionMatrix, potential) -> np.ndarray:
    if callable(potential):
        return np.array([float(potential(s)) for s in M.states])
    return np.asarray(potential, dtype=float)


def drift_per_state(M: TransitionMatrix, potential) -> np.ndarray:
    """``E[phi(X_t) - phi(X_{t+1}) | X_t = s]`` for every state ``s``."""
    phi = _potential_vector(M, potential)
    return phi - M.probs @ phi


def verify_drift_bound(
    M: TransitionMatrix,
    potential: Callable | Sequence[float],
    delta: float,
    start,
) -> bool:
    """Check the additive drift bound ``E[T] <= E[phi(X_0)] / delta`` exactly.

    Raises :class:`DriftConditionError` if some non-target state has drift
    below ``delta``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    phi = _potential_vector(M, potential)
    if phi[M.target] != 0:
        raise ValueError("potential must vanish on the target")
    if np.any(phi < 0):
        raise ValueError("potential must be non-negative")
    drift = drift_per_state(M, phi)
    for s in range(len(M.states)):
        if s != M.target and drift[s] < delta - 1e-12:
            raise DriftConditionError(M.states[s], float(drift[s]), delta)
    vec = _start_vector(M, start)
    return expected_hitting_time(M, vec) <= float(vec @ phi) / delta + 1e-9


def comma_step_distribution(n: int, d: int, lam: int, rate: float | None = None) -> np.ndarray:
    """Law of the next parent's distance for the noise-free (1,lambda) EA on OneMax.

    Enumerates (one-bits flipped, zero-bits flipped) pairs for a single
    offspring and takes the minimum distance over ``lam`` iid offspring.
    """
    r = 1.0 / n if rate is None else rate
    zeros_flip = binom.pmf(np.arange(d + 1), d, r)
    ones_flip = binom.pmf(np.arange(n - d + 1), n - d, r)
    joint = np.outer(zeros_flip, ones_flip)
    i, j = np.indices(joint.shape)
    single = np.zeros(n + 1)
    np.add.at(single, d - i + j, joint)
    # survival S(k) = Pr[offspring distance >= k]
    surv = np.clip(np.cumsum(single[::-1])[::-1], 0.0, 1.0)
    surv_next = np.append(surv[1:], 0.0)
    return surv**lam - surv_next**lam


def comma_exact_drift(n: int, d: int, lam: int, rate: float | None = None) -> float:
    dist = comma_step_distribution(n, d, lam, rate)
    return float(d - np.arange(n + 1) @ dist)
