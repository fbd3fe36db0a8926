import numpy as np
import pytest

from mbk import (
    ContractViolation,
    RandomStream,
    TinyInstance,
    brute_force_optimal,
    cost,
    delta_set,
    center_of_mass,
    lloyd_full_batch,
    naive_cost,
)


def test_naive_cost_known_value(four_points):
    assert naive_cost(four_points, [[0.05], [0.95]]) == pytest.approx(0.0025)


def test_naive_cost_single_center():
    X = [[0.0, 0.0], [1.0, 1.0]]
    assert naive_cost(X, [[0.5, 0.5]]) == pytest.approx(0.5)


def test_naive_cost_agrees_with_fast_path(rng):
    worst = 0.0
    for _ in range(50):
        X = rng.random(size=(1 + int(rng.integers(30)), 1 + int(rng.integers(4))))
        C = rng.random(size=(1 + int(rng.integers(4)), X.shape[1]))
        worst = max(worst, abs(cost(X, C) - naive_cost(X, C)))
    assert worst <= 1e-12


def test_naive_cost_validates():
    with pytest.raises(ContractViolation):
        naive_cost(np.empty((0, 2)), [[0.5, 0.5]])
    with pytest.raises(ContractViolation):
        naive_cost([[0.5, 0.5]], np.empty((0, 2)))
    with pytest.raises(ContractViolation):
        naive_cost([[0.5]], [[0.5, 0.5]])


def test_brute_force_four_points(four_points):
    res = brute_force_optimal(four_points, 2)
    assert res.cost == pytest.approx(0.0025)
    # the optimal split pairs the two left points against the two right ones
    assert res.labels[0] == res.labels[1]
    assert res.labels[2] == res.labels[3]
    assert res.labels[0] != res.labels[2]


def test_brute_force_k1_is_variance(rng):
    X = rng.random(size=(8, 2))
    res = brute_force_optimal(X, 1)
    expected = delta_set(X, center_of_mass(X)) / 8
    assert res.cost == pytest.approx(expected, rel=1e-12)
    assert set(res.labels) == {0}


def test_brute_force_never_beaten_by_lloyd(rng):
    for case in range(10):
        stream = rng.substream(case)
        X = stream.random(size=(8 + int(stream.integers(4)), 2))
        k = 2 + case % 2
        res = brute_force_optimal(X, k)
        for seed in range(3):
            refined = lloyd_full_batch(X, k, seed=seed)
            assert res.cost <= refined.final_global_cost + 1e-12


def test_brute_force_labels_rescore_to_reported_cost(rng):
    X = rng.random(size=(9, 2))
    res = brute_force_optimal(X, 3)
    labels = np.asarray(res.labels)
    total = 0.0
    for j in range(3):
        part = X[labels == j]
        if part.shape[0]:
            total += delta_set(part, center_of_mass(part))
    assert total / X.shape[0] == pytest.approx(res.cost, rel=1e-12, abs=1e-15)


def test_brute_force_allows_empty_clusters():
    X = np.array([[0.5, 0.5], [0.5, 0.5]])
    res = brute_force_optimal(X, 2)
    assert res.cost == 0.0


def test_enumeration_limits():
    big_n = np.zeros((15, 2))
    with pytest.raises(ContractViolation):
        brute_force_optimal(big_n, 2)
    wide = np.zeros((4, 5))
    with pytest.raises(ContractViolation):
        brute_force_optimal(wide, 2)
    with pytest.raises(ContractViolation):
        brute_force_optimal(np.zeros((4, 2)), 4)
    # 3^14 = 4.8e6 is inside the budget; n=14, k=3 must be accepted
    res = brute_force_optimal(np.linspace(0, 1, 14).reshape(-1, 1), 3)
    assert res.cost >= 0.0


def test_tiny_instance_validation():
    TinyInstance(points=((0.0, 0.0), (1.0, 1.0)), k=2)
    with pytest.raises(ContractViolation):
        TinyInstance(points=tuple((float(i), 0.0) for i in range(15)), k=2)
    with pytest.raises(ContractViolation):
        TinyInstance(points=((0.0, 0.0),), k=4)
