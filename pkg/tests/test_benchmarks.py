import numpy as np
import pytest
from hypothesis import given, strategies as st

from heuristics_lab.benchmarks import (
    BenchmarkSpec,
    eval_benchmark,
    evaluate_all,
    is_weakly_monotonic,
    needle,
    optimum,
    parse_benchmark,
)
from heuristics_lab.core import BitString


def ev(spec, text):
    return eval_benchmark(spec, BitString.from_str(text))


@pytest.mark.parametrize(
    "spec, x, expected",
    [
        (BenchmarkSpec("onemax", 5), "10110", 3),
        (BenchmarkSpec("leadingones", 4), "1101", 2),
        (BenchmarkSpec("jump", 6, k=2), "111101", 1),
        (BenchmarkSpec("jump", 6, k=2), "111111", 8),
        (BenchmarkSpec("plateau", 5, k=2), "11101", 5),
        (needle(4), "0110", 4),
        (needle(4), "1111", 8),
        (BenchmarkSpec("linear", 3, weights=(1, 2, 3)), "011", 5),
        (BenchmarkSpec("monotone_polynomial", 4, monomials=((2.0, frozenset({1, 3})), (0.5, frozenset({4})))), "1011", 2.5),
    ],
)
def test_eval_examples(spec, x, expected):
    assert ev(spec, x) == expected


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        ev(BenchmarkSpec("onemax", 3), "0101")


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="jump", n=5, k=0),
        dict(kind="jump", n=5, k=6),
        dict(kind="plateau", n=5),
        dict(kind="monotone_polynomial", n=3, monomials=((-1.0, frozenset({1})),)),
        dict(kind="linear", n=3, weights=(1, 2)),
        dict(kind="trap", n=3),
    ],
)
def test_malformed_specs(kwargs):
    with pytest.raises(ValueError):
        BenchmarkSpec(**kwargs)


def test_needle_is_plateau_with_k_n():
    assert needle(6) == BenchmarkSpec("plateau", 6, k=6) == BenchmarkSpec("needle", 6)


@pytest.mark.parametrize(
    "spec",
    [BenchmarkSpec("onemax", 3), BenchmarkSpec("jump", 6, k=2), BenchmarkSpec("linear", 3, weights=(1, 2, 3))],
)
def test_optimum_all_ones(spec):
    top = optimum(spec)
    assert top == BitString.ones(spec.n)
    f = evaluate_all(spec)
    assert f[top.bits] == f.max()
    assert int(np.sum(f == f.max())) == 1


def test_jump_optimum_value():
    assert eval_benchmark(BenchmarkSpec("jump", 6, k=2), optimum(BenchmarkSpec("jump", 6, k=2))) == 8


def test_linear_nonpositive_weight_has_no_all_ones_optimum():
    with pytest.raises(ValueError, match="optimum not all-ones"):
        optimum(BenchmarkSpec("linear", 3, weights=(1, 0, 2)))


@pytest.mark.parametrize(
    "spec, expected",
    [
        (BenchmarkSpec("onemax", 8), True),
        (BenchmarkSpec("jump", 8, k=3), False),
        (BenchmarkSpec("plateau", 8, k=3), True),
        (BenchmarkSpec("leadingones", 8), True),
        (BenchmarkSpec("linear", 8, weights=tuple(range(1, 9))), True),
        (needle(8), True),
        (BenchmarkSpec("monotone_polynomial", 8, monomials=((1.0, frozenset({1, 2})), (3.0, frozenset({5})))), True),
        (BenchmarkSpec("jump", 8, k=1), True),
    ],
)
def test_weak_monotonicity_table(spec, expected):
    assert is_weakly_monotonic(spec) is expected


def test_monotonicity_check_infeasible_beyond_16():
    with pytest.raises(ValueError, match="exhaustive check infeasible"):
        is_weakly_monotonic(BenchmarkSpec("onemax", 17))


def _ones(n):
    return evaluate_all(BenchmarkSpec("onemax", n)).astype(int)


@pytest.mark.parametrize("n", range(1, 13))
def test_jump_k1_is_onemax_plus_one(n):
    assert np.array_equal(evaluate_all(BenchmarkSpec("jump", n, k=1)), _ones(n) + 1)


@pytest.mark.parametrize("n", range(2, 13))
def test_jump_gap_region(n):
    ones = _ones(n)
    for k in range(2, n + 1):
        f = evaluate_all(BenchmarkSpec("jump", n, k=k))
        ref = f[ones == n - k].min()
        upper = ones >= n - k
        gap = (ones > n - k) & (ones < n)
        assert np.array_equal(f[upper] < ref, gap[upper])


@pytest.mark.parametrize("n", range(1, 13))
def test_plateau_levels(n):
    ones = _ones(n)
    for k in range(1, n + 1):
        f = evaluate_all(BenchmarkSpec("plateau", n, k=k))
        level = (ones >= n - k) & (ones <= n - 1)
        assert np.all(f[level] == n)
        assert f[-1] == n + k
        assert np.all(f[ones <= n - k] == ones[ones <= n - k] + k)


@pytest.mark.parametrize("n", range(1, 13))
def test_onemax_leadingones_ranges(n):
    for kind in ("onemax", "leadingones"):
        f = evaluate_all(BenchmarkSpec(kind, n))
        assert f.min() >= 0 and f.max() == n
        assert np.flatnonzero(f == n).tolist() == [2**n - 1]


@given(st.integers(1, 10), st.data())
def test_vectorised_matches_scalar(n, data):
    kind = data.draw(st.sampled_from(["onemax", "leadingones", "jump", "plateau"]))
    k = data.draw(st.integers(1, n)) if kind in ("jump", "plateau") else None
    spec = BenchmarkSpec(kind, n, k=k)
    x = data.draw(st.integers(0, 2**n - 1))
    assert evaluate_all(spec)[x] == eval_benchmark(spec, BitString(n, x))


def test_parse_benchmark_roundtrip():
    spec = parse_benchmark("kind=jump n=20 k=3")
    assert spec == BenchmarkSpec("jump", 20, k=3)
    assert parse_benchmark(str(spec)) == spec
    poly = BenchmarkSpec("monotone_polynomial", 4, monomials=((2.0, frozenset({1, 3})),))
    assert parse_benchmark(str(poly)) == poly
