import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _corpus import random_chain, random_mg1
from blockgth import augment, gth, oracle
from blockgth.blocklinalg import BlockMatrix, NotStochasticError, SingularPivotError

seeds = st.integers(0, 2**32 - 1)


def numpy_censor(P: BlockMatrix, n: int) -> np.ndarray:
    """``T + U (I - Q)^{-1} D`` straight from numpy."""
    k = P.offsets[n + 1]
    a = P.array
    return a[:k, :k] + a[:k, k:] @ np.linalg.solve(np.eye(a.shape[0] - k) - a[k:, k:], a[k:, :k])


def numpy_stationary(P: BlockMatrix) -> np.ndarray:
    n = P.shape[0]
    m = (np.eye(n) - P.array).T
    m[-1] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return np.linalg.solve(m, rhs)


def test_forward_eliminate_single_level():
    P = BlockMatrix([[0.2, 0.8], [0.6, 0.4]], [2], stochastic=True)
    rec = gth.forward_eliminate(P)
    assert rec.num_levels == 1
    assert np.array_equal(rec.pivots[0], P.array)
    assert rec.up[0].size == 0 and rec.down[0].size == 0


def test_forward_eliminate_two_states():
    P = BlockMatrix([[0.5, 0.5], [0.25, 0.75]], [1, 1], stochastic=True)
    rec = gth.forward_eliminate(P)
    assert rec.pivots[0][0, 0] == pytest.approx(1.0, abs=1e-15)
    assert rec.pivots[1].tolist() == [[0.75]]


def test_elimination_matches_numpy_censoring():
    rng = np.random.default_rng(4)
    a = rng.random((12, 12))
    P = BlockMatrix(a / a.sum(axis=1, keepdims=True), [3, 3, 3, 3], stochastic=True)
    rec = gth.forward_eliminate(P)
    for n in range(4):
        corner = gth.eliminate_to(P, n).array
        assert np.abs(corner - numpy_censor(P, n)).max() <= 1e-12
        k = P.offsets[n]
        assert np.abs(rec.pivots[n] - corner[k:, k:]).max() <= 1e-12


@given(seeds, st.integers(1, 8))
@settings(max_examples=60, deadline=None)
def test_intermediate_corners_stochastic(seed, levels):
    P = random_chain(np.random.default_rng(seed), levels, 4)
    for n in range(levels):
        assert gth.eliminate_to(P, n).is_stochastic(1e-10)


def test_scalar_gth_examples():
    assert gth.scalar_gth_level0([[1.0]]).tolist() == [1.0]
    assert gth.scalar_gth_level0([[0, 1], [1, 0]]).tolist() == [1.0, 1.0]
    assert gth.scalar_gth_level0([[0.9, 0.1], [0.3, 0.7]]) == pytest.approx([1, 1 / 3], rel=1e-15)


def test_scalar_gth_avoids_subtraction():
    # 1 - 1e-20 rounds to 1, so a pivot formed as 1 - p[1, 1] would be zero
    eps, delta = 1e-20, 0.25
    phi = [[1 - delta, delta], [eps, 1.0]]
    r0 = gth.scalar_gth_level0(phi)
    assert r0[1] == pytest.approx(delta / eps, rel=1e-15)


def test_scalar_gth_reducible_block():
    with pytest.raises(SingularPivotError):
        gth.scalar_gth_level0([[1.0, 0.0], [0.0, 1.0]])


def test_back_substitute_examples():
    P = BlockMatrix([[0.5, 0.5], [0.5, 0.5]], [2], stochastic=True)
    rec = gth.forward_eliminate(P)
    assert gth.back_substitute(rec, np.array([1.0, 2.0])).tolist() == [1.0, 2.0]
    P = BlockMatrix([[0.5, 0.5], [0.5, 0.5]], [1, 1], stochastic=True)
    rec = gth.forward_eliminate(P)
    r = gth.back_substitute(rec, gth.scalar_gth_level0(rec.pivots[0]))
    assert r == pytest.approx([1.0, 1.0], abs=1e-15)


def test_back_substitute_matches_power_iteration():
    P = random_chain(np.random.default_rng(5), 3, 3, density=0.8)
    rec = gth.forward_eliminate(P)
    pi = gth.normalize(gth.back_substitute(rec, gth.scalar_gth_level0(rec.pivots[0])),
                       P.phase_counts)
    assert np.abs(pi.array - oracle.power_iteration(P).array).max() <= 1e-10


def test_normalize(queue_spec):
    assert gth.normalize([1.0], [1]).array.tolist() == [1.0]
    assert gth.normalize([1, 1, 2], [1, 1, 1]).array.tolist() == [0.25, 0.25, 0.5]
    with pytest.raises(ValueError):
        gth.normalize([0.0, 0.0], [2])
    P = augment.natural_lbca(queue_spec, 10)
    rec = gth.forward_eliminate(P)
    pi = gth.normalize(gth.back_substitute(rec, gth.scalar_gth_level0(rec.pivots[0])),
                       P.phase_counts)
    assert abs(pi.total - 1) <= 1e-14


def test_solve_examples():
    assert gth.solve(BlockMatrix([[0, 1], [1, 0]], [1, 1])).array.tolist() == [0.5, 0.5]
    pi = gth.solve(BlockMatrix([[0.9, 0.1], [0.3, 0.7]], [2]))
    assert pi.array == pytest.approx([0.75, 0.25], abs=1e-15)


def test_solve_six_levels_four_phases():
    rng = np.random.default_rng(6)
    a = rng.random((24, 24))
    P = BlockMatrix(a / a.sum(axis=1, keepdims=True), [4] * 6, stochastic=True)
    assert np.abs(gth.solve(P).array - oracle.power_iteration(P).array).max() <= 1e-10


@given(seeds, st.integers(1, 10))
@settings(max_examples=80, deadline=None)
def test_solve_stationarity_and_dense_agreement(seed, levels):
    P = random_chain(np.random.default_rng(seed), levels, 5, density=0.5)
    pi = gth.solve(P).array
    assert np.abs(pi @ P.array - pi).max() <= 1e-10
    assert abs(pi.sum() - 1) <= 1e-14
    if P.shape[0] <= 50:
        assert np.abs(pi - numpy_stationary(P)).max() <= 1e-10


def test_reducible_and_non_stochastic_input():
    with pytest.raises(SingularPivotError):
        gth.solve(BlockMatrix(np.eye(2), [1, 1]))
    with pytest.raises(NotStochasticError):
        gth.forward_eliminate(BlockMatrix([[0.5, 0.4], [0.5, 0.5]], [1, 1]))


def test_pivot_solver_matches_inverse():
    rng = np.random.default_rng(7)
    phi = rng.random((5, 5))
    exit_mass = rng.random(5)
    scale = phi.sum(axis=1) + exit_mass
    phi /= scale[:, None]
    exit_mass /= scale
    inv = np.linalg.inv(np.eye(5) - phi)
    piv = gth.PivotSolver(phi, exit_mass)
    x = rng.random((5, 3))
    w = rng.random((2, 5))
    assert np.abs(piv.right(x) - inv @ x).max() <= 1e-13
    assert np.abs(piv.left(w) - w @ inv).max() <= 1e-13


def test_pivot_solver_keeps_relative_accuracy():
    # 1 - phi would lose about four digits here; the exit mass is exact
    exit_mass = 1e-13
    piv = gth.PivotSolver([[1 - exit_mass]], [exit_mass])
    assert piv.right([[1.0]])[0, 0] == pytest.approx(1e13, rel=1e-15)
    with pytest.raises(SingularPivotError):
        gth.PivotSolver([[0.5, 0.5], [0.5, 0.5]], [0.0, 0.0])


@pytest.mark.parametrize("N, checkpoint", [(1, None), (7, None), (40, None), (40, 3), (41, 7)])
def test_solve_hessenberg_matches_dense(N, checkpoint):
    spec = random_mg1(np.random.default_rng(N), r0=2, r=3, K=4)
    extra = augment.lbca_column(spec, N)
    got = gth.solve_hessenberg(spec.phase_counts(N),
                               lambda j: spec.column(j) + extra if j == N else spec.column(j),
                               spec.down, checkpoint=checkpoint)
    want = gth.solve(augment.augmented_matrix(spec, N, extra))
    assert np.abs(got.array - want.array).max() <= 1e-14
