import itertools
from fractions import Fraction
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from tensorbody import _numeric as num
from tensorbody.bodies import (
    Ellipsoid,
    HPolytope,
    as_vpolytope,
    gauge,
    polar,
    random_rational_vpolytope,
    random_vpolytope,
    standard_ball,
    support,
)
from tensorbody.errors import NotPolytopal, ShapeMismatch
from tensorbody.products import eps_product, gauge_eps, gauge_pi, hilbert_product, pi_product
from tensorbody.tensor_space import kron

seeds = st.integers(0, 2**31)


def b(d, p, exact=False):
    return standard_ball(d, p, materialize=True, exact=exact)


def test_l1_projective_product():
    P = pi_product((2, 2), [b(2, 1), b(2, 1)])
    assert num.same_rows_up_to_sign(P.generators, np.eye(4))


def test_cube_injective_product():
    Q = eps_product((2, 2), [b(2, "inf"), b(2, "inf")])
    assert isinstance(Q, HPolytope)
    assert num.same_rows_up_to_sign(Q.normals, np.eye(4))


def test_exact_products_stay_exact():
    P = pi_product((2, 3), [b(2, 1, True), b(3, 1, True)])
    assert P.exact and num.same_rows_up_to_sign(P.generators, num.eye(6, True))


def test_single_factor_injective():
    F = random_vpolytope(3, 4, np.random.default_rng(0))
    assert eps_product((3,), [F]) is F


def test_hilbert_products():
    E = hilbert_product((2, 2), [standard_ball(2, 2), standard_ball(2, 2)])
    assert np.array_equal(E.matrix, np.eye(4))
    E = hilbert_product((2, 2), [Ellipsoid(np.diag([4.0, 1.0])), Ellipsoid(np.eye(2))])
    assert np.allclose(np.diag(E.matrix), [4, 4, 1, 1])
    with pytest.raises(ShapeMismatch):
        hilbert_product((2, 2), [b(2, 1), b(2, 1)])


def test_shape_checks():
    with pytest.raises(ShapeMismatch):
        pi_product((2, 2), [b(2, 1), b(3, 1)])
    with pytest.raises(NotPolytopal):
        pi_product((2, 2), [standard_ball(2, 2), b(2, 1)])


def test_euclidean_gauges_of_identity_tensor():
    u = np.array([1.0, 0, 0, 1])
    B2 = [standard_ball(2, 2)] * 2
    assert gauge_pi((2, 2), B2, u).value == pytest.approx(2.0)
    assert gauge_eps((2, 2), B2, u).value == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_pi_gauge_matches_highs(seed):
    rng = np.random.default_rng(seed)
    F = [random_vpolytope(2, 3, rng), random_vpolytope(3, 4, rng)]
    u = rng.standard_normal(6)
    G = np.array([np.kron(g, h) for g, h in itertools.product(F[0].generators, F[1].generators)])
    ref = linprog(np.ones(2 * len(G)), A_eq=np.hstack([G.T, -G.T]), b_eq=u, method="highs").fun
    assert float(gauge_pi((2, 3), F, u).value) == pytest.approx(ref, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_eps_gauge_is_max_over_polar_generators(seed):
    rng = np.random.default_rng(seed)
    F = [random_vpolytope(2, 3, rng), random_vpolytope(2, 3, rng)]
    u = rng.standard_normal(4)
    W = [as_vpolytope(polar(f)).generators for f in F]
    ref = max(abs(np.kron(a, c) @ u) for a in W[0] for c in W[1])
    assert float(gauge_eps((2, 2), F, u).value) == pytest.approx(ref, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_ellipsoid_gauges_match_matrix_norms(seed):
    rng = np.random.default_rng(seed)
    mats = []
    for d in (2, 3):
        A = rng.standard_normal((d, d))
        mats.append(A @ A.T + 0.3 * np.eye(d))
    E = [Ellipsoid(m) for m in mats]
    u = rng.standard_normal(6)
    # oracle: in whitened coordinates the gauges are nuclear and spectral norms
    W = np.linalg.cholesky(mats[0]).T @ u.reshape(2, 3) @ np.linalg.cholesky(mats[1])
    s = np.linalg.svd(W, compute_uv=False)
    assert gauge_pi((2, 3), E, u).value == pytest.approx(s.sum(), rel=1e-10)
    assert gauge_eps((2, 3), E, u).value == pytest.approx(s[0], rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_crossnorm_on_decomposables(seed):
    rng = np.random.default_rng(seed)
    F = [random_vpolytope(2, 3, rng), random_vpolytope(2, 3, rng)]
    x, y = rng.standard_normal(2), rng.standard_normal(2)
    u = kron((2, 2), [x, y])
    prod = float(gauge(F[0], x).value) * float(gauge(F[1], y).value)
    assert float(gauge_pi((2, 2), F, u).value) == pytest.approx(prod, rel=1e-8)
    assert float(gauge_eps((2, 2), F, u).value) == pytest.approx(prod, rel=1e-8)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_sandwich_and_product_gauges(seed):
    rng = np.random.default_rng(seed)
    F = [random_vpolytope(2, 3, rng), random_vpolytope(3, 4, rng)]
    P, Q = pi_product((2, 3), F), eps_product((2, 3), F)
    for _ in range(10):
        u = rng.standard_normal(6)
        e, p = float(gauge_eps((2, 3), F, u).value), float(gauge_pi((2, 3), F, u).value)
        assert e <= p + 1e-9
        assert float(gauge(P, u).value) == pytest.approx(p, rel=1e-9)
        assert float(gauge(Q, u).value) == pytest.approx(e, rel=1e-9)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_exact_duality(seed):
    rng = np.random.default_rng(seed)
    F = [random_rational_vpolytope(2, 3, rng), random_rational_vpolytope(2, 3, rng)]
    lhs = polar(pi_product((2, 2), F))
    rhs = eps_product((2, 2), [polar(f) for f in F])
    assert num.same_rows_up_to_sign(lhs.normals, rhs.normals)
    u = num.as_array([1, Fraction(1, 3), -2, 5], exact=True)
    assert support(pi_product((2, 2), F), u) == gauge(rhs, u).value


def test_three_factor_hilbert_gauge():
    mats = [np.diag([1.0, 4.0]), np.diag([2.0, 1.0]), np.eye(2)]
    E = hilbert_product((2, 2, 2), [Ellipsoid(m) for m in mats])
    assert np.allclose(E.matrix, reduce(np.kron, mats))
