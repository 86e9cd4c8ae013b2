import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from tensorbody import _numeric as num
from tensorbody.bodies import (
    Ellipsoid,
    HPolytope,
    LpBall,
    VPolytope,
    as_hpolytope,
    as_vpolytope,
    contains,
    dual_exponent,
    enumerate_vertices,
    gauge,
    irredundant,
    linear_image,
    polar,
    random_rational_vpolytope,
    random_vpolytope,
    scale,
    standard_ball,
    support,
)
from tensorbody.errors import DegenerateBody, DimensionTooLarge, InvalidP

seeds = st.integers(0, 2**31)


def lp_gauge_oracle(G, x):
    """min sum |l| with G^T l = x, via HiGHS."""
    k = G.shape[0]
    res = linprog(np.ones(2 * k), A_eq=np.hstack([G.T, -G.T]), b_eq=x, method="highs")
    return res.fun


def test_gauge_examples():
    assert gauge(HPolytope(np.eye(2)), [1, 1]).value == 1
    assert gauge(VPolytope(np.eye(2)), [1, 1]).value == pytest.approx(2)
    assert gauge(Ellipsoid(np.diag([0.25, 1.0])), [2, 0]).value == pytest.approx(1)


def test_support_examples():
    assert support(VPolytope(np.eye(2)), [1, 1]) == 1
    y = np.array([0.3, -1.7])
    assert support(Ellipsoid(np.eye(2)), y) == pytest.approx(np.linalg.norm(y))


def test_contains_tolerance():
    B2 = standard_ball(2, 2)
    assert contains(B2, [1, 0], tol=0)
    assert not contains(B2, [1.001, 0], tol=1e-9)
    assert contains(B2, [1.001, 0], tol=1e-2)


def test_standard_balls():
    b1 = standard_ball(4, 1, materialize=True)
    assert isinstance(b1, VPolytope) and num.same_rows_up_to_sign(b1.generators, np.eye(4))
    binf = standard_ball(4, "inf", materialize=True)
    assert isinstance(binf, HPolytope) and num.same_rows_up_to_sign(binf.normals, np.eye(4))
    b2 = standard_ball(4, 2)
    assert isinstance(b2, Ellipsoid) and np.array_equal(b2.matrix, np.eye(4))
    assert isinstance(standard_ball(4, 3), LpBall)
    with pytest.raises(InvalidP):
        standard_ball(4, 0.5)


def test_degenerate_inputs():
    with pytest.raises(DegenerateBody):
        VPolytope([[1.0, 0.0]])
    with pytest.raises(DegenerateBody):
        VPolytope([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(DegenerateBody):
        Ellipsoid([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(DegenerateBody):
        Ellipsoid([[1.0, 0.5], [0.0, 1.0]])


def test_square_vertices_and_cross_polytope():
    V = as_vpolytope(HPolytope(np.eye(2)))
    assert num.same_rows_up_to_sign(V.generators, np.array([[1.0, 1.0], [1.0, -1.0]]))
    V = enumerate_vertices(HPolytope([[1, 1], [1, -1]]))
    assert num.same_rows_up_to_sign(V.generators, np.eye(2))


def test_exact_enumeration_stays_exact():
    H = HPolytope(np.array([[Fraction(1), Fraction(1, 2)], [Fraction(0), Fraction(1)]], dtype=object))
    V = enumerate_vertices(H)
    assert V.exact
    assert all(max(abs(H.normals @ v)) == 1 for v in V.generators)


def test_enumeration_guard():
    with pytest.raises(DimensionTooLarge):
        enumerate_vertices(HPolytope(np.eye(9)))


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, math.inf])
def test_lp_ball_gauges(p):
    rng = np.random.default_rng(1)
    B = LpBall(5, p, 2.0)
    for _ in range(20):
        x = rng.standard_normal(5)
        assert gauge(B, x).value == pytest.approx(np.linalg.norm(x, p) / 2)
        assert support(B, x) == pytest.approx(2 * np.linalg.norm(x, dual_exponent(p)))


def test_dual_exponent():
    assert dual_exponent(1) == math.inf
    assert dual_exponent(math.inf) == 1
    assert dual_exponent(2) == 2
    assert 1 / 3 + 1 / dual_exponent(3) == pytest.approx(1)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 3), seeds)
def test_vgauge_matches_highs(d, extra, seed):
    rng = np.random.default_rng(seed)
    P = random_vpolytope(d, d + extra, rng)
    x = rng.standard_normal(d)
    assert gauge(P, x).value == pytest.approx(lp_gauge_oracle(P.generators, x), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), seeds)
def test_vertex_enumeration_matches_qhull(d, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d + 2, d))
    V = enumerate_vertices(HPolytope(A)).generators
    hs = np.vstack([np.hstack([A, -np.ones((d + 2, 1))]), np.hstack([-A, -np.ones((d + 2, 1))])])
    ref = HalfspaceIntersection(hs, np.zeros(d)).intersections
    ref = ref[ConvexHull(ref).vertices]
    # same vertex set up to the +- pairing
    for v in ref:
        assert min(min(np.linalg.norm(v - w), np.linalg.norm(v + w)) for w in V) < 1e-7
    for w in V:
        assert min(np.linalg.norm(v - w) for v in ref) < 1e-7


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 3), seeds)
def test_polar_roundtrip_preserves_gauge(d, seed):
    rng = np.random.default_rng(seed)
    H = HPolytope(rng.standard_normal((d + 2, d)))
    again = polar(as_hpolytope(polar(as_vpolytope(H))))
    for _ in range(100):
        x = rng.standard_normal(d)
        assert float(gauge(again, x).value) == pytest.approx(float(gauge(H, x).value), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), seeds)
def test_support_is_polar_gauge(d, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    bodies = [random_vpolytope(d, d + 1, rng), HPolytope(rng.standard_normal((d + 1, d))),
              Ellipsoid(A @ A.T + np.eye(d)), LpBall(d, 1 + rng.random() * 3, 0.5 + rng.random())]
    for B in bodies:
        y = rng.standard_normal(d)
        assert float(support(B, y)) == pytest.approx(float(gauge(polar(B), y).value), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), seeds)
def test_gauge_is_a_norm(d, seed):
    rng = np.random.default_rng(seed)
    P = random_vpolytope(d, d + 2, rng)
    x, y = rng.standard_normal((2, d))
    c = float(rng.random() * 5)
    g = lambda v: float(gauge(P, v).value)
    assert g(c * x) == pytest.approx(c * g(x), rel=1e-9)
    assert g(-x) == pytest.approx(g(x), rel=1e-9)
    assert g(x + y) <= g(x) + g(y) + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), seeds)
def test_scale_and_linear_image(d, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d)) + 2 * np.eye(d)
    x = rng.standard_normal(d)
    for B in (random_vpolytope(d, d + 1, rng), HPolytope(rng.standard_normal((d + 1, d))),
              Ellipsoid(np.eye(d) * 2)):
        assert float(gauge(scale(B, 3.0), x).value) == pytest.approx(float(gauge(B, x).value) / 3)
        img = linear_image(B, A)
        assert float(gauge(img, A @ x).value) == pytest.approx(float(gauge(B, x).value), rel=1e-8)


def test_exact_gauge_is_fraction():
    P = random_rational_vpolytope(3, 4, np.random.default_rng(0))
    g = gauge(P, [1, 2, 3]).value
    assert isinstance(g, Fraction)
    assert float(g) == pytest.approx(lp_gauge_oracle(num.to_float(P.generators), [1, 2, 3]))
    E = Ellipsoid(np.array([[Fraction(1, 4), 0], [0, Fraction(1)]], dtype=object))
    assert gauge(E, [2, 0]).value == 1


def test_irredundant_drops_interior_rows():
    rows = np.array([[1.0, 0.0], [0.0, 1.0], [0.3, 0.3]])
    kept = irredundant(rows)
    assert num.same_rows_up_to_sign(kept, np.eye(2))
    exact = num.as_array([[1, 0], [0, 1], [Fraction(1, 2), Fraction(1, 2)]], exact=True)
    assert len(irredundant(exact)) == 2
