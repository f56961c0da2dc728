import math

import numpy as np
import pytest

from heuristics_lab.benchmarks import BenchmarkSpec
from heuristics_lab.core import BitString, derive_stream
from heuristics_lab.heuristics import AlgorithmSpec, parse_schedule, run_until_hit
from heuristics_lab.noise import NO_NOISE, AdditiveDist, NoiseSpec
from heuristics_lab.oracle import (
    DriftConditionError,
    LumpingError,
    StateSpaceTooLarge,
    TransitionMatrix,
    comma_exact_drift,
    comma_step_distribution,
    condition_constant,
    expected_hitting_time,
    fp_runtime_bound,
    full_chain,
    hitting_probabilities,
    hitting_times,
    jump_phase_bound,
    lumped_chain,
    path_probability,
    project_to_levels,
    runtime_bound,
    verify_drift_bound,
)

RLS, EA = AlgorithmSpec("rls"), AlgorithmSpec("ea")


def om(n):
    return BenchmarkSpec("onemax", n)


def test_lumped_rls_n3_matrix():
    P = lumped_chain(RLS, om(3)).probs
    for d in (1, 2, 3):
        assert P[d, d - 1] == pytest.approx(d / 3, abs=1e-12)
        assert P[d, d] == pytest.approx(1 - d / 3, abs=1e-12)
    assert P[0, 0] == 1.0


def test_lumped_ea_all_bits_flip():
    assert lumped_chain(EA, om(3)).probs[3, 0] == pytest.approx(1 / 27, abs=1e-12)


@pytest.mark.parametrize(
    "alg, noise",
    [(RLS, NO_NOISE), (EA, NO_NOISE), (EA, NoiseSpec("onebit", p=0.4)), (AlgorithmSpec("comma", lam=3), NO_NOISE),
     (AlgorithmSpec("metropolis", temperature=0.8), NoiseSpec("onebit", p=0.2)), (AlgorithmSpec("fp_ea"), NO_NOISE)],
)
def test_lumping_consistency(alg, noise):
    for n in (3, 5):
        lumped = lumped_chain(alg, om(n), noise).probs
        assert np.max(np.abs(project_to_levels(full_chain(alg, om(n), noise)) - lumped)) <= 1e-12


def test_lumping_rejects_asymmetric_configurations():
    with pytest.raises(LumpingError, match="lumping invalid"):
        lumped_chain(RLS, BenchmarkSpec("leadingones", 4))
    with pytest.raises(LumpingError, match="lumping invalid"):
        lumped_chain(RLS, om(4), NoiseSpec("bitwise", q=0.1))
    with pytest.raises(StateSpaceTooLarge):
        lumped_chain(RLS, om(65))


@pytest.mark.parametrize(
    "noise, n",
    [(NO_NOISE, 11), (NoiseSpec("onebit", p=0.2), 9), (NoiseSpec("bitwise", q=0.1), 7)],
)
def test_full_chain_limits(noise, n):
    with pytest.raises(StateSpaceTooLarge, match="state space too large"):
        full_chain(RLS, om(n), noise)


@pytest.mark.parametrize(
    "alg, spec, noise",
    [
        (RLS, BenchmarkSpec("jump", 4, k=2), NO_NOISE),
        (EA, BenchmarkSpec("leadingones", 5), NoiseSpec("bitwise", q=0.2)),
        (EA, om(4), NoiseSpec("pq", p=0.5, q=0.3)),
        (EA, om(4), NoiseSpec("adversarial", p=0.3)),
        (AlgorithmSpec("metropolis", temperature=1.0), BenchmarkSpec("plateau", 5, k=2), NoiseSpec("onebit", p=0.5)),
        (AlgorithmSpec("fast_ea"), om(5), NoiseSpec("additive", dist=AdditiveDist("gaussian", 0, 1))),
        (AlgorithmSpec("comma", lam=4), om(5), NoiseSpec("onebit", p=0.3)),
    ],
)
def test_full_chain_is_row_stochastic(alg, spec, noise):
    M = full_chain(alg, spec, noise)
    assert np.all(M.probs >= 0)
    assert np.max(np.abs(M.probs.sum(axis=1) - 1)) <= 1e-12


def test_transition_matrix_validation():
    with pytest.raises(ValueError):
        TransitionMatrix([0, 1], [[0.5, 0.6], [0, 1]], 1)
    with pytest.raises(ValueError):
        TransitionMatrix([0, 1], [[1.5, -0.5], [0, 1]], 1)


def test_rls_cannot_cross_jump_gap():
    n, k = 5, 2
    M = full_chain(RLS, BenchmarkSpec("jump", n, k=k), NO_NOISE)
    probs = hitting_probabilities(M)
    local = BitString.from_str("11100")
    assert probs[local.bits] == 0.0
    assert expected_hitting_time(M, local) == math.inf


def test_expected_hitting_time_basics():
    M = lumped_chain(RLS, om(3))
    assert expected_hitting_time(M, 0) == 0
    assert expected_hitting_time(M, 3) == pytest.approx(5.5, rel=1e-9)
    p = 0.3
    two = TransitionMatrix([0, 1], [[1 - p, p], [0, 1]], 1)
    assert expected_hitting_time(two, 0) == pytest.approx(1 / p, rel=1e-9)


def test_hitting_time_start_distribution():
    M = lumped_chain(RLS, om(4))
    times = hitting_times(M)
    vec = np.array([1, 4, 6, 4, 1]) / 16
    assert expected_hitting_time(M, vec) == pytest.approx(float(vec @ times))


@pytest.mark.parametrize("n, expected", [(2, 0.5), (3, 6 / 27), (4, 24 / 256)])
def test_path_probability_rls(n, expected):
    r = path_probability(RLS, om(n), NO_NOISE, BitString.zeros(n), n)
    assert r.exact_prob == pytest.approx(expected, abs=1e-9)
    assert r.lower_bound == pytest.approx(math.exp(-n))
    assert r.holds


def test_path_probability_jump_final_jump():
    n, k = 6, 2
    r = path_probability(EA, BenchmarkSpec("jump", n, k=k), NO_NOISE, BitString.zeros(n), n - k + 1)
    c = (1 - 1 / n) ** (n - 1)
    assert r.c == pytest.approx(c)
    assert r.lower_bound == pytest.approx(jump_phase_bound(n, c))
    assert r.holds


@pytest.mark.parametrize(
    "alg, noise",
    [(RLS, NoiseSpec("onebit", p=0.3)), (EA, NoiseSpec("bitwise", q=0.05)), (AlgorithmSpec("metropolis", temperature=1.0), NO_NOISE),
     (AlgorithmSpec("sa", schedule=parse_schedule("geometric:2,0.9")), NO_NOISE), (AlgorithmSpec("fast_ea"), NoiseSpec("onebit", p=0.6))],
)
def test_phase_bound_holds_across_configurations(alg, noise):
    for bench in ("onemax", "leadingones"):
        n = 5
        r = path_probability(alg, BenchmarkSpec(bench, n), noise, BitString.zeros(n), n)
        assert r.holds, (bench, r)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_runtime_bound_on_full_chains(n):
    for alg in (RLS, EA, AlgorithmSpec("fast_ea")):
        for noise in (NO_NOISE, NoiseSpec("onebit", p=0.5), NoiseSpec("adversarial", p=0.4)):
            times = hitting_times(full_chain(alg, BenchmarkSpec("leadingones", n), noise))
            assert times.max() <= runtime_bound(n, condition_constant(alg, noise, n))


@pytest.mark.parametrize("n", [4, 5, 6])
def test_fp_bound(n):
    times = hitting_times(full_chain(AlgorithmSpec("fp_ea"), om(n)))
    assert times.max() <= fp_runtime_bound(n)


@pytest.mark.parametrize(
    "alg, spec, noise, start",
    [
        (EA, BenchmarkSpec("leadingones", 4), NoiseSpec("onebit", p=0.5), "0000"),
        (AlgorithmSpec("metropolis", temperature=0.5), om(4), NO_NOISE, "0010"),
        (AlgorithmSpec("fast_ea"), BenchmarkSpec("jump", 4, k=2), NO_NOISE, "1000"),
        (AlgorithmSpec("comma", lam=3), om(4), NO_NOISE, "0000"),
        (EA, om(4), NoiseSpec("bitwise", q=0.1), "0000"),
        (RLS, om(4), NoiseSpec("additive", dist=AdditiveDist("gaussian", 0, 1)), "0000"),
        (RLS, om(4), NoiseSpec("adversarial", p=0.2), "0000"),
    ],
)
def test_monte_carlo_agrees_with_oracle(alg, spec, noise, start):
    exact = expected_hitting_time(full_chain(alg, spec, noise), BitString.from_str(start))
    init = BitString.from_str(start)
    times = np.array([run_until_hit(alg, spec, noise, init, rng=derive_stream(21, i)).hitting_time for i in range(20000)])
    se = times.std(ddof=1) / math.sqrt(times.size)
    assert abs(times.mean() - exact) <= 4 * se


def test_drift_bound_examples():
    M = lumped_chain(RLS, om(3))
    assert verify_drift_bound(M, lambda d: d, 1 / 3, 3)
    walk = np.zeros((11, 11))
    walk[0, 0] = 1
    for s in range(1, 11):
        walk[s, s - 1] = 0.6
        walk[s, min(s + 1, 10)] += 0.4
    W = TransitionMatrix(list(range(11)), walk, 0)
    assert verify_drift_bound(W, lambda s: s, 0.2, 10)
    flat = TransitionMatrix([0, 1, 2], [[1, 0, 0], [0.5, 0, 0.5], [0, 1.0, 0]], 0)
    with pytest.raises(DriftConditionError) as err:
        verify_drift_bound(flat, lambda s: s, 0.1, 2)
    assert "1" in str(err.value)


def test_comma_step_distribution_properties():
    for d in (0, 1, 10, 50):
        dist = comma_step_distribution(100, d, 5)
        assert dist.sum() == pytest.approx(1.0) and np.all(dist >= -1e-15)
    assert comma_exact_drift(100, 1, 5) < 0 < comma_exact_drift(100, 50, 5)


def test_comma_step_distribution_matches_lumped_chain():
    n, lam = 8, 3
    P = lumped_chain(AlgorithmSpec("comma", lam=lam), om(n)).probs
    for d in range(1, n + 1):
        assert np.allclose(P[d], comma_step_distribution(n, d, lam), atol=1e-12)
