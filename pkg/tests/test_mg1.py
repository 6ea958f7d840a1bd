import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _corpus import mg1_corpus, random_mg1
from blockgth import mg1, models, oracle
from blockgth.blocklinalg import MatrixFileError, NotStochasticError, row_defects

seeds = st.integers(0, 2**32 - 1)


def drop_spec(N: int, K: int) -> mg1.MG1Spec:
    """Levels >= 1 only fall (``A_-1`` stochastic); level 0 jumps up to ``K``.

    From complement level ``s`` the chain re-enters level ``N`` after exactly
    ``s + 1`` steps, so every finite truncation above ``K`` censors exactly.
    """
    Am1 = np.array([[0.3, 0.7], [0.6, 0.4]])
    A = np.zeros((2, 2, 2))
    A[0] = Am1
    w = np.arange(1, K + 1, dtype=float)
    B = (0.5 * w / w.sum())[:, None, None] * np.array([[0.4, 0.6]])[None]
    return mg1.MG1Spec([[0.5]], B, [[1.0], [1.0]], A)


@pytest.fixture(scope="module")
def strong():
    return random_mg1(np.random.default_rng(21), r0=2, r=2, K=3, down=(0.6, 0.8))


# -- spec ------------------------------------------------------------------

def test_spec_shapes_and_blocks(strong):
    assert strong.r0 == 2 and strong.r == 2 and strong.cutoff == 3
    assert strong.phase_counts(3) == (2, 2, 2, 2)
    assert not strong.a(4).any() and not strong.b(7).any()
    with pytest.raises(ValueError):
        strong.b(0)
    assert np.allclose(strong.a_tail(-2).sum(axis=1), 1.0)
    assert np.array_equal(strong.a_tail(2), strong.a(3))


def test_spec_validation():
    with pytest.raises(NotStochasticError):
        mg1.MG1Spec([[1.0]], [[[0.1]]], [[0.5]], [[[0.5]], [[0.5]], [[0.1]]])
    with pytest.raises(NotStochasticError):
        mg1.MG1Spec([[0.5]], [[[0.5]]], [[0.5]], [[[-0.1]], [[1.1]], [[0.0]]])
    with pytest.raises(ValueError):
        mg1.MG1Spec([[0.5]], [[[0.5]]], [[0.5]], np.zeros((1, 1, 1)))


def test_corner_row_defects_are_tail_masses(strong):
    N = 4
    d = row_defects(strong.corner(N))
    off = strong.corner(N).offsets
    assert np.allclose(d[:off[1]], strong.b_tail(N).sum(axis=1), atol=1e-15)
    for i in range(1, N + 1):
        assert np.allclose(d[off[i]:off[i + 1]], strong.a_tail(N - i).sum(axis=1), atol=1e-15)


# -- path recursion ----------------------------------------------------------

def test_g_columns_low_order_terms():
    spec = random_mg1(np.random.default_rng(22), r=3, K=3)
    a = spec.a
    g = mg1.g_columns(spec, 3)
    assert np.array_equal(g.block(0, 0), a(-1))
    assert not g.block(0, 1).any()
    assert np.allclose(g.block(1, 0), a(0) @ a(-1), atol=1e-15)
    assert np.allclose(g.block(1, 1), a(-1) @ a(-1), atol=1e-15)
    assert np.allclose(g.block(2, 0), (a(0) @ a(0) + a(1) @ a(-1)) @ a(-1), atol=1e-15)
    assert np.allclose(g.block(2, 1), (a(-1) @ a(0) + a(0) @ a(-1)) @ a(-1), atol=1e-15)
    assert np.allclose(g.block(2, 2), a(-1) @ a(-1) @ a(-1), atol=1e-15)


def test_path_oracle_examples():
    spec = random_mg1(np.random.default_rng(23), r=2, K=2)
    a = spec.a
    assert np.allclose(mg1.path_sum_oracle(spec, 1, 0), a(0) @ a(-1), atol=1e-15)
    assert not mg1.path_sum_oracle(spec, 1, 2).any()
    five = (a(-1) @ a(0) @ a(0) + a(-1) @ a(1) @ a(-1) + a(0) @ a(-1) @ a(0)
            + a(0) @ a(0) @ a(-1) + a(1) @ a(-1) @ a(-1)) @ a(-1)
    assert np.allclose(mg1.path_sum_oracle(spec, 3, 1), five, atol=1e-15)
    with pytest.raises(ValueError):
        mg1.path_sum_oracle(spec, mg1.PATH_ORACLE_MAX_DEPTH + 1, 0)


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_g_columns_match_path_oracle(seed):
    spec = random_mg1(np.random.default_rng(seed), K=3)
    g = mg1.g_columns(spec, 5)
    for m in range(6):
        for i in range(m + 1):
            assert np.abs(g.block(m, i) - mg1.path_sum_oracle(spec, m, i)).max() <= 1e-13


def test_vanishing_and_captured_masses(strong):
    g = mg1.g_columns(strong, 30)
    for m in range(31):
        assert g.terms[m].shape[0] == m + 1
        assert g.block(m, m + 3).tolist() == np.zeros((2, 2)).tolist()
    prev = np.zeros(1)
    for M in (0, 5, 10, 30):
        cap = mg1.g_columns(strong, M, keep_terms=False).captured
        assert cap.max() <= 1 + 1e-12 and cap.min() >= 0
        assert np.all(cap[:prev.shape[0]] >= prev - 1e-15)
        prev = cap
    with pytest.raises(ValueError):
        mg1.g_columns(strong, -1)
    with pytest.raises(ValueError):
        mg1.g_columns(strong, 2, keep_terms=False).block(0, 0)


def test_fundamental_g_is_stochastic(strong):
    G = mg1.g_columns(strong, 500, keep_terms=False).fundamental_g()
    assert np.abs(G.sum(axis=1) - 1).max() <= 1e-8


# -- censored column and bound -------------------------------------------------

def test_censored_column_depth_zero(strong):
    N = 2
    g = mg1.g_columns(strong, 0)
    col = mg1.censored_column(strong, N, g)
    off = strong.corner(N).offsets
    assert np.allclose(col[:off[1]], strong.b(N + 1) @ strong.a(-1), atol=1e-15)
    for i in range(1, N + 1):
        assert np.allclose(col[off[i]:off[i + 1]], strong.a(N + 1 - i) @ strong.a(-1), atol=1e-15)
    with pytest.raises(ValueError):
        mg1.censored_column(strong, 0, g)


def test_drop_spec_is_exact_at_finite_depth():
    N, K = 3, 6
    spec = drop_spec(N, K)
    dense = oracle.dense_censor_oracle(spec, N, 10)
    T = spec.corner(N)
    exact = dense.array[:, T.offsets[N]:] - T.array[:, T.offsets[N]:]
    for M in (N + 2, N + 5):
        g = mg1.g_columns(spec, M, keep_terms=False)
        assert np.abs(mg1.censored_column(spec, N, g) - exact).max() <= 1e-15
        assert mg1.error_bound(spec, N, g).max <= 1e-15
    assert mg1.error_bound(spec, N, mg1.g_columns(spec, 0)).max > 0.1


def test_error_bound_zero_when_one_step_return():
    N = 2
    spec = drop_spec(N, N + 1)
    b = mg1.error_bound(spec, N, mg1.g_columns(spec, 0))
    assert b.max == 0.0
    assert b.matrix.shape == (spec.r0 + N * spec.r, spec.r)


def test_column_monotone_and_bound_covers_error(strong):
    N = 3
    dense = oracle.dense_censor_oracle(strong, N, 200)
    T = strong.corner(N)
    exact = dense.array[:, T.offsets[N]:] - T.array[:, T.offsets[N]:]
    prev = np.zeros_like(exact)
    for M in (0, 1, 5, 25, 125):
        g = mg1.g_columns(strong, M, keep_terms=False)
        col = mg1.censored_column(strong, N, g)
        assert np.all(col >= prev - 1e-15)
        assert np.all(col <= exact + 1e-12)
        assert np.all(mg1.error_bound(strong, N, g).matrix >= exact - col - 1e-12)
        assert np.all(col.sum(axis=1) <= row_defects(T) + 1e-12)
        prev = col


def test_queue_bound_decreases(queue_spec):
    vals = [mg1.error_bound(queue_spec, 10, mg1.g_columns(queue_spec, M, keep_terms=False)).max
            for M in (10, 50, 100)]
    assert vals[0] > vals[1] > vals[2] > 0


# -- stopping depth ------------------------------------------------------------

def test_stop_depth_trivial_tolerance(strong):
    M, b = mg1.stop_depth(strong, 3, 1.0)
    assert M == 0 and b <= 1.0


def test_stop_depth_minimal_and_consistent(strong):
    N, eps = 3, 1e-8
    M, b, g = mg1.stop_depth(strong, N, eps, return_series=True)
    assert g.M == M and b <= eps
    direct = mg1.error_bound(strong, N, g).max
    assert abs(direct - b) <= 1e-15
    assert mg1.error_bound(strong, N, mg1.g_columns(strong, M - 1, keep_terms=False)).max > eps
    dense = oracle.dense_censor_oracle(strong, N, 200)
    T = strong.corner(N)
    exact = dense.array[:, T.offsets[N]:] - T.array[:, T.offsets[N]:]
    assert np.abs(exact - mg1.censored_column(strong, N, g)).max() <= b + 1e-12


def test_stop_depth_report(strong):
    M, rep = mg1.stop_depth(strong, 3, 1e-6, report=True)
    assert rep.M == M and rep.bound == rep.rows.max()
    assert rep.captured.shape == (M + 1, strong.r)
    g = mg1.g_columns(strong, M, keep_terms=False)
    assert np.abs(rep.captured - g.captured).max() <= 1e-14


def test_stop_depth_errors(strong):
    with pytest.raises(ValueError):
        mg1.stop_depth(strong, 3, 0.0)
    with pytest.raises(ValueError):
        mg1.stop_depth(strong, 0, 1e-3)
    with pytest.raises(mg1.DepthCeilingError) as info:
        mg1.stop_depth(strong, 3, 1e-300, max_depth=20)
    assert info.value.M == 20 and info.value.best > 0


def test_stop_depth_fft_agrees_with_blocks(queue_spec):
    # depths past the FFT switch against the block recursion
    M, b = mg1.stop_depth(queue_spec, 10, 1e-4)
    assert M > mg1._FFT_FROM
    direct = mg1.error_bound(queue_spec, 10, mg1.g_columns(queue_spec, M, keep_terms=False)).max
    assert abs(direct - b) <= 1e-14
    assert direct <= 1e-4


@pytest.mark.slow
def test_stop_depth_queue_tight_tolerance(queue_spec):
    M, b = mg1.stop_depth(queue_spec, 10, 1e-6)
    assert 0 < M < 10**5 and b <= 1e-6


# -- text format -----------------------------------------------------------------

def test_spec_text_round_trip(strong):
    back = mg1.parse_spec(mg1.format_spec(strong))
    for name in ("B0", "B", "C0", "A", "B_beyond", "A_beyond"):
        assert np.array_equal(getattr(back, name), getattr(strong, name))
    rate = models.build_rate_spec(models.MxM1WvParams(cutoff=5))
    back = mg1.parse_spec(mg1.format_spec(rate))
    assert back.generator and np.array_equal(back.A, rate.A)


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("hello\n", 1),
    ("mg1\nboundary_phases 1\nphases 1\n", 3),
    ("mg1\nboundary_phases x\n", 2),
    ("mg1\nboundary_phases 1\nphases 1\ncutoff 1\ngenerator 0\nblock Z\n", 6),
    ("mg1\nboundary_phases 1\nphases 1\ncutoff 1\ngenerator 0\nblock A 5\n", 6),
    ("mg1\nboundary_phases 1\nphases 1\ncutoff 1\ngenerator 0\nblock A x\n", 6),
    ("mg1\nboundary_phases 1\nphases 1\ncutoff 1\ngenerator 0\nblock B0\n0.5 0.5\n", 7),
    ("mg1\nboundary_phases 1\nphases 1\ncutoff 1\ngenerator 0\nblock B0\nabc\n", 7),
    ("mg1\nboundary_phases 1\nphases 1\ncutoff 1\ngenerator 0\nblock B0\n", 6),
])
def test_spec_parse_errors(text, line):
    with pytest.raises(MatrixFileError) as info:
        mg1.parse_spec(text)
    assert info.value.lineno == line


def test_spec_parse_rejects_non_stochastic():
    text = ("mg1\nboundary_phases 1\nphases 1\ncutoff 1\ngenerator 0\n"
            "block B0\n0.5\nblock A -1\n1.0\n")
    # reported as a file error so that callers can point at the input
    with pytest.raises(MatrixFileError, match="off by"):
        mg1.parse_spec(text)
