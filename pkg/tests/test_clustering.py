import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from oracles import enumerate_pairs

from metchar import DEFAULT_COMPONENTS, ComponentId, WeightedMetric, extract_features, kmeans
from metchar.features import stack_features

HBV = WeightedMetric([ComponentId("hbv", "md")], [1.0])


def random_dataset(rng, n, S=6):
    return [extract_features((rng.random((S, S)) < rng.uniform(0.1, 0.6)).astype(np.uint8))
            for _ in range(n)]


def test_single_cluster(two_class):
    fs, _ = two_class
    res = kmeans(fs, 1, HBV, seed=0)
    assert not res.assignments.any()
    assert res.converged and res.iterations <= 2


def test_zero_metric_ties_to_first(two_class):
    fs, _ = two_class
    zero = WeightedMetric(DEFAULT_COMPONENTS, [0.0] * 10)
    res = kmeans(fs, 2, zero, seed=3, max_iter=1)
    assert not res.assignments.any()
    assert not kmeans(fs, 2, zero, seed=3).assignments.any()


def test_two_class_separated(two_class):
    fs, labels = two_class
    for seed in range(5):
        res = kmeans(fs, 2, HBV, seed=seed)
        pairs = enumerate_pairs(labels, res.assignments.tolist())
        assert pairs["acc"] == 1


def test_rejects_bad_k(two_class):
    fs, _ = two_class
    with pytest.raises(ValueError):
        kmeans(fs, 0, HBV)
    with pytest.raises(ValueError):
        kmeans(fs[:3], 4, HBV)
    with pytest.raises(ValueError):
        kmeans(fs, 2, HBV, max_iter=0)


def test_deterministic():
    rng = np.random.default_rng(0)
    fs = random_dataset(rng, 30)
    m = WeightedMetric(DEFAULT_COMPONENTS, rng.random(10))
    a, b = kmeans(fs, 4, m, seed=9), kmeans(stack_features(fs), 4, m, seed=9)
    assert np.array_equal(a.assignments, b.assignments)
    assert (a.iterations, a.converged) == (b.iterations, b.converged)


def test_assignments_in_range():
    rng = np.random.default_rng(1)
    fs = random_dataset(rng, 25)
    res = kmeans(fs, 5, WeightedMetric(DEFAULT_COMPONENTS, rng.random(10)), seed=2)
    assert len(res.assignments) == 25 and res.assignments.max() < 5


def test_duplicate_samples_repair_terminates():
    fs = random_dataset(np.random.default_rng(2), 3)
    data = [fs[0]] * 6 + [fs[1]] * 2
    res = kmeans(data, 4, HBV, seed=0, max_iter=20)
    assert res.assignments.max() < 4


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30), st.integers(1, 6))
def test_assignment_step_never_increases_objective(seed, n, k):
    k = min(k, n)
    rng = np.random.default_rng(seed)
    fs = random_dataset(rng, n)
    trace = []
    kmeans(fs, k, WeightedMetric(DEFAULT_COMPONENTS, rng.random(10)), seed=seed, trace=trace)
    for before, after in trace:
        # ties within TIE_RTOL may pick a marginally larger distance
        assert after <= before * (1 + 1e-9) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.01, 0.5, 137.5, 2.0**-20]))
def test_partition_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 30))
    k = int(rng.integers(1, 5))
    fs = random_dataset(rng, n)
    m = WeightedMetric(DEFAULT_COMPONENTS, rng.random(10))
    a = kmeans(fs, k, m, seed=seed)
    b = kmeans(fs, k, m.scaled(c), seed=seed)
    assert np.array_equal(a.assignments, b.assignments)
    assert a.iterations == b.iterations
