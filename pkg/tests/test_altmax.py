import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorbody.altmax import max_decomposable_rayleigh, tensor_spectral_norm

seeds = st.integers(0, 2**31)


def _circle(n):
    t = np.linspace(0, np.pi, n, endpoint=False)
    return np.stack([np.cos(t), np.sin(t)], axis=1)


def grid_spectral_norm_222(T, n=721):
    # brute force: the last factor is solved in closed form
    X = _circle(n)
    M = np.einsum("ia,jb,abc->ijc", X, X, T)
    return float(np.max(np.linalg.norm(M, axis=2)))


def grid_rayleigh_22(M, n=721):
    X = _circle(n)
    U = np.einsum("ia,jb->ijab", X, X).reshape(n, n, 4)
    return float(np.max(np.einsum("ijk,kl,ijl->ij", U, M, U)))


def test_matrix_case_is_top_singular_value():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 4))
    r = tensor_spectral_norm(A)
    assert r.value == pytest.approx(np.linalg.svd(A, compute_uv=False)[0], rel=1e-12)


def test_identity_tensor():
    # e1(x)e1 + e2(x)e2 has spectral norm 1
    assert tensor_spectral_norm(np.eye(2)).value == pytest.approx(1.0)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_three_way_matches_grid(seed):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((2, 2, 2))
    r = tensor_spectral_norm(T, rng=np.random.default_rng(1))
    ref = grid_spectral_norm_222(T)
    # the grid is a lower bound accurate to about 1e-5 relative
    assert r.value >= ref - 1e-9
    assert r.value == pytest.approx(ref, rel=1e-4)
    x = r.factors
    assert abs(np.einsum("abc,a,b,c->", T, *x)) == pytest.approx(r.value, rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_rank_one_tensor(seed):
    rng = np.random.default_rng(seed)
    x, y, z = rng.standard_normal(2), rng.standard_normal(3), rng.standard_normal(2)
    T = np.einsum("a,b,c->abc", x, y, z)
    expected = np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(z)
    assert tensor_spectral_norm(T).value == pytest.approx(expected, rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_rayleigh_kronecker(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((2, 2)), rng.standard_normal((3, 3))
    A, B = A @ A.T, B @ B.T
    r = max_decomposable_rayleigh(np.kron(A, B), (2, 3), rng=np.random.default_rng(0))
    assert r.value == pytest.approx(np.linalg.eigvalsh(A)[-1] * np.linalg.eigvalsh(B)[-1], rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_rayleigh_matches_grid(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4))
    M = A @ A.T
    r = max_decomposable_rayleigh(M, (2, 2), rng=np.random.default_rng(0))
    ref = grid_rayleigh_22(M)
    assert r.value >= ref - 1e-9
    assert r.value == pytest.approx(ref, rel=1e-4)
    v = r.vector()
    assert v @ M @ v == pytest.approx(r.value, rel=1e-9)
    assert r.value <= np.linalg.eigvalsh(M)[-1] + 1e-9
