import itertools

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from d2dsecrecy.assignment import hungarian, pad_to_square, solve_matching


def brute_min(cost):
    n = cost.shape[0]
    return min(sum(cost[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def brute_max_injective(profit):
    # rows may stay unmatched; columns used at most once
    r, c = profit.shape
    best = 0.0
    for cols in itertools.product(range(-1, c), repeat=r):
        used = [j for j in cols if j >= 0]
        if len(used) != len(set(used)):
            continue
        best = max(best, sum(profit[i, j] for i, j in enumerate(cols) if j >= 0))
    return best


def test_diag_zero_matrix():
    cost = 1 - np.eye(4)
    sol = hungarian(cost)
    assert sol.match == {i: i for i in range(4)} and sol.total_cost == 0


def test_two_by_two_example():
    sol = hungarian([[1, 2], [2, 4]])
    assert sol.match == {0: 1, 1: 0} and sol.total_cost == 4


def test_empty_and_single():
    assert hungarian(np.zeros((0, 0))).match == {}
    assert hungarian([[3.5]]).total_cost == 3.5


def test_non_square_and_non_finite_rejected():
    with pytest.raises(ValueError):
        hungarian(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        hungarian([[1, np.inf], [0, 1]])


@pytest.mark.parametrize("seed", range(40))
def test_random_vs_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    cost = rng.normal(size=(n, n))
    sol = hungarian(cost)
    assert sorted(sol.match.values()) == list(range(n))
    assert sol.total_cost == pytest.approx(sum(cost[i, j] for i, j in sol.match.items()), abs=1e-12)
    assert sol.total_cost == brute_min(cost)
    r, c = linear_sum_assignment(cost)
    assert sol.total_cost == pytest.approx(cost[r, c].sum(), abs=1e-12)


def test_integer_costs_with_ties():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(2, 7))
        cost = rng.integers(0, 3, size=(n, n)).astype(float)
        assert hungarian(cost).total_cost == brute_min(cost)


def test_deterministic():
    cost = np.ones((5, 5))
    assert hungarian(cost).match == hungarian(cost.copy()).match


def test_permutation_invariance():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(2, 8))
        cost = rng.random((n, n))
        pr, pc = rng.permutation(n), rng.permutation(n)
        a = hungarian(cost)
        b = hungarian(cost[np.ix_(pr, pc)])
        assert b.total_cost == pytest.approx(a.total_cost, abs=1e-12)


def test_pad_to_square():
    p = np.arange(6.0).reshape(2, 3)
    out = pad_to_square(p)
    assert out.shape == (3, 3)
    np.testing.assert_array_equal(out[:2], -p)
    np.testing.assert_array_equal(out[2], 0)
    tall = pad_to_square(p.T)
    assert tall.shape == (3, 3) and np.all(tall[:, 2] == 0)
    sq = np.eye(2)
    np.testing.assert_array_equal(pad_to_square(sq), -sq)


def test_pad_six_by_ten():
    rng = np.random.default_rng(3)
    psi = rng.random((6, 10))
    assert pad_to_square(psi).shape == (10, 10)
    sol = solve_matching(psi)
    assert len(sol.match) <= 6
    assert len(set(sol.match.values())) == len(sol.match)
    assert all(0 <= j < 10 for j in sol.match.values())


def test_solve_matching_examples():
    assert solve_matching(np.zeros((3, 4))).match == {}
    assert solve_matching(np.zeros((3, 4))).total_profit == 0
    sol = solve_matching([[5.0]])
    assert sol.match == {0: 0} and sol.total_profit == 5


@pytest.mark.parametrize("shape", [(5, 8), (8, 5), (3, 3), (1, 4), (4, 1)])
def test_solve_matching_vs_brute_force(shape):
    rng = np.random.default_rng(sum(shape))
    for _ in range(3 if shape[0] > 5 else 10):
        profit = rng.random(shape)
        profit[rng.random(shape) < 0.3] = 0.0
        sol = solve_matching(profit)
        assert sol.total_profit == pytest.approx(brute_max_injective(profit), abs=1e-12)
        assert all(profit[i, j] > 0 for i, j in sol.match.items())


def test_padding_neutrality():
    rng = np.random.default_rng(4)
    for _ in range(50):
        r, c = rng.integers(1, 7, 2)
        profit = rng.random((r, c))
        extra = np.vstack([profit, np.zeros((1, c))])
        assert solve_matching(extra).total_profit == pytest.approx(solve_matching(profit).total_profit, abs=1e-12)
