import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heuristics_lab.benchmarks import BenchmarkSpec, eval_benchmark, evaluate_all
from heuristics_lab.core import BitString, derive_stream
from heuristics_lab.noise import (
    F_MAX,
    F_MIN,
    NO_NOISE,
    OFFSPRING,
    PARENT,
    AdditiveDist,
    AdversaryPolicy,
    NoiseSpec,
    comparison_constant,
    no_noise_probability,
    noise_from_config,
    noisy_eval,
    parse_dist,
    value_distribution,
)

OM5 = BenchmarkSpec("onemax", 5)


def samples(noise, spec, text, count, role=PARENT, seed=0):
    rng = derive_stream(seed, 0)
    x = BitString.from_str(text)
    return [noisy_eval(noise, spec, x, role, rng) for _ in range(count)]


def test_onebit_p0_is_exact():
    assert set(samples(NoiseSpec("onebit", p=0.0), OM5, "10110", 200)) == {3}


def test_bitwise_q1_complements():
    assert set(samples(NoiseSpec("bitwise", q=1.0), OM5, "10110", 200)) == {2}


def test_onebit_p1_on_11():
    assert set(samples(NoiseSpec("onebit", p=1.0), BenchmarkSpec("onemax", 2), "11", 200)) == {1}


def test_additive_constant_zero_is_exact():
    noise = NoiseSpec("additive", dist=AdditiveDist("constant", 0.0))
    assert set(samples(noise, OM5, "10110", 50)) == {3}


def test_adversary_roles():
    noise = NoiseSpec("adversarial", p=1.0, adversary=AdversaryPolicy("anti"))
    assert set(samples(noise, OM5, "10110", 20, role=OFFSPRING)) == {F_MIN}
    assert set(samples(noise, OM5, "10110", 20, role=PARENT)) == {F_MAX}
    assert math.isfinite(F_MAX - F_MIN)


def test_adversary_constant_policy():
    noise = NoiseSpec("adversarial", p=1.0, adversary=AdversaryPolicy("constant", 7.0))
    assert set(samples(noise, OM5, "10110", 20)) == {7.0}


def test_noisy_eval_checks_inputs():
    rng = derive_stream(0, 0)
    with pytest.raises(ValueError, match="dimension mismatch"):
        noisy_eval(NO_NOISE, OM5, BitString.from_str("01"), PARENT, rng)
    with pytest.raises(ValueError):
        noisy_eval(NO_NOISE, OM5, BitString.from_str("01010"), "sibling", rng)


@pytest.mark.parametrize("kwargs", [dict(kind="onebit", p=1.5), dict(kind="bitwise", q=-0.1), dict(kind="additive"), dict(kind="gamma")])
def test_invalid_noise_specs(kwargs):
    with pytest.raises(ValueError):
        NoiseSpec(**kwargs)


def test_no_noise_probability_formulas():
    n = 10
    assert no_noise_probability(NoiseSpec("onebit", p=0.3), n) == pytest.approx(0.7)
    assert no_noise_probability(NoiseSpec("adversarial", p=0.3), n) == pytest.approx(0.7)
    assert no_noise_probability(NoiseSpec("bitwise", q=0.1), n) == pytest.approx(0.9**10)
    assert no_noise_probability(NoiseSpec("pq", p=0.5, q=0.1), n) == pytest.approx(1 - 0.5 * (1 - 0.9**10))
    assert comparison_constant(NoiseSpec("onebit", p=0.1), n) == 0.5
    assert comparison_constant(NoiseSpec("onebit", p=0.9), n) == pytest.approx(0.01)
    assert comparison_constant(NO_NOISE, n) == 1.0


@pytest.mark.parametrize("q", [0.1, 0.3, 0.7])
def test_bitwise_expectation_identity(q):
    n, count = 10, 10**5
    x = "1111111000"
    vals = np.array(samples(NoiseSpec("bitwise", q=q), BenchmarkSpec("onemax", n), x, count, seed=3))
    expected = (1 - q) * 7 + q * 3
    assert abs(vals.mean() - expected) <= 3 * vals.std(ddof=1) / math.sqrt(count)


@pytest.mark.parametrize("kind", ["none", "onebit", "pq", "adversarial", "bitwise"])
def test_degenerate_noise_equals_benchmark(kind):
    noise = NoiseSpec(kind, p=0.0, q=0.0)
    spec = BenchmarkSpec("jump", 5, k=2)
    rng = derive_stream(0, 0)
    for b in range(32):
        x = BitString(5, b)
        assert noisy_eval(noise, spec, x, PARENT, rng) == eval_benchmark(spec, x)


def test_fresh_randomness_per_evaluation():
    vals = samples(NoiseSpec("onebit", p=0.5), OM5, "10110", 200)
    assert len(set(vals)) > 1


@pytest.mark.parametrize("dist", [AdditiveDist("gaussian", 0, 2.0), AdditiveDist("cauchy", 0, 1.5), AdditiveDist("uniform", -1, 3)])
def test_difference_cdf_matches_sampling(dist):
    rng = derive_stream(1, 0)
    draw = dist.sampler()
    diffs = np.array([draw(rng) - draw(rng) for _ in range(40000)])
    for t in (-2.0, -0.5, 0.0, 1.0):
        p = dist.difference_cdf(t)
        assert abs(np.mean(diffs <= t) - p) <= 4 * math.sqrt(max(p * (1 - p), 1e-4) / diffs.size)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["gaussian", "cauchy", "uniform"]), st.floats(-5, 5), st.floats(0.1, 10))
def test_difference_cdf_is_symmetric(kind, t, scale):
    dist = AdditiveDist(kind, 0.0, scale) if kind != "uniform" else AdditiveDist("uniform", -scale, scale)
    assert dist.difference_cdf(t) + dist.difference_cdf(-t) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "noise",
    [NoiseSpec("onebit", p=0.4), NoiseSpec("bitwise", q=0.2), NoiseSpec("pq", p=0.6, q=0.3), NoiseSpec("adversarial", p=0.3)],
)
def test_value_distribution_is_exact(noise):
    spec = BenchmarkSpec("onemax", 4)
    grid, P = value_distribution(noise, spec, evaluate_all(spec), OFFSPRING)
    assert np.allclose(P.sum(axis=1), 1.0)
    x = 0b0110
    rng = derive_stream(8, 0)
    vals = np.array([noisy_eval(noise, spec, BitString(4, x), OFFSPRING, rng) for _ in range(20000)])
    for j, g in enumerate(grid):
        p = P[x, j]
        assert abs(np.mean(vals == g) - p) <= 4 * math.sqrt(max(p * (1 - p), 1e-4) / vals.size)


def test_config_roundtrip():
    for noise in (NO_NOISE, NoiseSpec("pq", p=0.2, q=0.1), NoiseSpec("additive", dist=parse_dist("gaussian:0,10")),
                  NoiseSpec("adversarial", p=0.5, adversary=AdversaryPolicy("constant", 2.0))):
        assert noise_from_config(noise.to_config()) == noise
