import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from toeplitz_enum import (SolverParams, decompose, estimate_rank, project_nonneg_diag, project_toeplitz,
                           svt_step, truncate_top_k)
from toeplitz_enum.errors import ConfigError, DomainError
from toeplitz_enum.experiments import structure_violations
from toeplitz_enum.solver import objective

from conftest import random_hermitian, random_psd

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def complex_square(m):
    return st.tuples(arrays(float, (m, m), elements=finite), arrays(float, (m, m), elements=finite)).map(
        lambda p: p[0] + 1j * p[1])


def is_toeplitz(t, tol=1e-12):
    m = t.shape[0]
    return all(np.ptp(np.diagonal(t, k).real) + np.ptp(np.diagonal(t, k).imag) <= tol
               for k in range(-m + 1, m))


def random_toeplitz(rng, m):
    c = rng.standard_normal(2 * m - 1) + 1j * rng.standard_normal(2 * m - 1)
    i, j = np.indices((m, m))
    return c[j - i + m - 1]


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6).flatmap(complex_square))
def test_toeplitz_projection_is_idempotent(x):
    p = project_toeplitz(x)
    assert is_toeplitz(p, 1e-9 * max(1.0, np.abs(x).max()))
    np.testing.assert_allclose(project_toeplitz(p), p, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5).flatmap(lambda m: st.tuples(complex_square(m), complex_square(m))),
       st.floats(-10, 10), st.floats(-10, 10))
def test_toeplitz_projection_is_linear(pair, a, b):
    x, y = pair
    np.testing.assert_allclose(project_toeplitz(a * x + b * y),
                               a * project_toeplitz(x) + b * project_toeplitz(y), atol=1e-7)


def test_toeplitz_projection_beats_random_candidates(rng):
    for m in (3, 4, 5):
        x = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        best = np.linalg.norm(x - project_toeplitz(x))
        for _ in range(1000):
            t = random_toeplitz(rng, m)
            assert np.linalg.norm(x - t) >= best - 1e-12
        # Small perturbations along Toeplitz directions cannot help either.
        for _ in range(1000):
            t = project_toeplitz(x) + 1e-3 * random_toeplitz(rng, m)
            assert np.linalg.norm(x - t) >= best - 1e-12


def test_toeplitz_projection_rejects_non_square():
    with pytest.raises(DomainError):
        project_toeplitz(np.ones((2, 3)))


def test_nonneg_diag_enumerated():
    vals = (-2.0, -0.5, 0.0, 0.5, 3.0)
    for diag in itertools.product(vals, repeat=3):
        x = np.diag(diag).astype(complex) + 7j * np.eye(3) + np.ones((3, 3))
        d = project_nonneg_diag(x)
        np.testing.assert_array_equal(d, np.diag(np.maximum(np.array(diag) + 1, 0)))
        assert not np.iscomplexobj(d)


def test_truncate_top_k_enumerated():
    for vec in itertools.product((0.0, 1.0, 2.0, 5.0), repeat=3):
        vec = np.array(vec)
        for k in range(4):
            out = truncate_top_k(vec, k)
            assert np.count_nonzero(out) <= k
            assert np.sum(out) == pytest.approx(np.sort(vec)[::-1][:k].sum())
            np.testing.assert_array_equal(out[out != 0], vec[out != 0])
    np.testing.assert_array_equal(truncate_top_k(np.array([1.0, 1.0, 1.0]), 2), [1.0, 1.0, 0.0])
    np.testing.assert_array_equal(truncate_top_k(np.diag([3.0, 1.0, 2.0]), 1), np.diag([3.0, 0, 0]))
    with pytest.raises(DomainError):
        truncate_top_k(np.ones(3), 4)


def test_svt_on_diagonal_example():
    x = np.diag([5.0, 3.0, 1.0]).astype(complex)
    np.testing.assert_allclose(svt_step(x, 2.0, 3), np.diag([3.0, 1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(svt_step(x, 0.5, 1), np.diag([4.5, 0.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(svt_step(x, 10.0, 3), 0, atol=1e-12)


def test_svt_preserves_singular_vectors(rng):
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    u, s, vh = np.linalg.svd(x)
    out = svt_step(x, 0.3, 2)
    expected = (u[:, :2] * (s[:2] - 0.3)) @ vh[:2]
    np.testing.assert_allclose(out, expected, atol=1e-10)


def test_params_validation():
    with pytest.raises(ConfigError):
        SolverParams(eta=-1)
    with pytest.raises(ConfigError):
        SolverParams(eta=1, mu=0)
    with pytest.raises(ConfigError):
        SolverParams(eta=1, k_max=5).resolved_k_max(3)
    assert SolverParams(eta=1).resolved_k_max(4) == 3


def test_identity_gives_zero_sources():
    res = decompose(np.eye(3, dtype=complex), SolverParams(eta=0.5))
    assert res.est_num_sources == 0
    assert res.converged
    assert res.fit_error < 1e-5


def test_single_boresight_source_is_rank_one():
    r = 10 * np.ones((3, 3), dtype=complex) + np.eye(3)
    res = decompose(r, SolverParams(eta=0.5))
    assert res.est_num_sources == 1
    assert res.converged
    assert not structure_violations(res, 1e-6)


def test_decompose_rejects_non_hermitian_and_tiny():
    with pytest.raises(DomainError):
        decompose(np.array([[1, 1], [0, 1]], dtype=complex), SolverParams(eta=1))
    with pytest.raises(DomainError):
        decompose(np.eye(1), SolverParams(eta=1))


def test_outputs_are_structured(rng):
    for _ in range(20):
        r = random_psd(rng, 4)
        res = decompose(r, SolverParams(eta=0.3))
        assert not structure_violations(res, 1e-6), structure_violations(res, 1e-6)
        assert 0 <= res.est_num_sources <= 3


def test_scale_equivariance(rng):
    # Scaling R by c and eta by c scales the exact optimum by c.
    for _ in range(5):
        r = random_psd(rng, 3)
        p = SolverParams(eta=0.4, eps=1e-10, max_iters=20000)
        a = decompose(r, p)
        b = decompose(7.0 * r, p.replace(eta=7 * 0.4))
        assert a.est_num_sources == b.est_num_sources
        np.testing.assert_allclose(7.0 * a.L_hat, b.L_hat, atol=1e-5 * np.linalg.norm(b.L_hat))


def test_convex_objective_settles_near_monotone(rng):
    # With k_max = M the iteration is convex ADMM, so the tail objective must
    # level off and not exceed its early values.
    r = random_psd(rng, 4)
    res = decompose(r, SolverParams(eta=0.5, k_max=4, eps=1e-9, max_iters=5000))
    obj = res.objective
    assert res.converged
    assert obj[-1] <= obj[:10].max() + 1e-9
    assert abs(obj[-1] - objective(res.L_hat, res.D_hat, r, 0.5)) < 1e-5 * max(1, obj[-1])


def test_rank_readout_threshold():
    l = np.diag([10.0, 0.6, 0.4])
    assert estimate_rank(l, SolverParams(eta=1)) == 2
    assert estimate_rank(l, rel_tol=0.01) == 3
    assert estimate_rank(np.zeros((3, 3))) == 0
    assert estimate_rank(1e-12 * np.eye(3)) == 0


def test_hermitian_random_inputs_stay_finite(rng):
    for _ in range(10):
        r = random_hermitian(rng, 3, scale=5)
        res = decompose(r, SolverParams(eta=1.0, max_iters=500))
        assert np.all(np.isfinite(res.L_hat))
