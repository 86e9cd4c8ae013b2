import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorbody.bodies import (
    Ellipsoid,
    HPolytope,
    LpBall,
    gauge,
    random_rational_vpolytope,
    random_vpolytope,
    standard_ball,
)
from tensorbody.errors import ShapeMismatch
from tensorbody.serialization import (
    InvalidInput,
    body_from_json,
    body_to_json,
    dumps,
    map_from_json,
    map_to_json,
    matrix_from_json,
    scalar,
)
from tensorbody.tensor_space import TensorMap, apply_tensor_map, random_tensor_map

seeds = st.integers(0, 2**31)
PROBES = np.random.default_rng(123).standard_normal((10, 4))


def roundtrip(body):
    return body_from_json(json.loads(dumps(body_to_json(body))))


def test_scalars():
    assert scalar(Fraction(1)) == "1/1"
    assert scalar(Fraction(-3, 4)) == "-3/4"
    assert scalar(math.inf) == "inf"
    assert scalar(np.float64(-0.0)) == 0.0
    assert scalar(np.int64(3)) == 3


def test_exact_body_roundtrip():
    B = random_rational_vpolytope(4, 5, np.random.default_rng(0))
    text = dumps(body_to_json(B))
    assert '"/' not in text and "/" in text
    B2 = body_from_json(json.loads(text))
    assert B2.exact
    for x in PROBES:
        xq = [Fraction(v).limit_denominator(100) for v in x]
        assert gauge(B2, xq).value == gauge(B, xq).value


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_float_bodies_roundtrip(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4))
    bodies = [random_vpolytope(4, 6, rng), HPolytope(rng.standard_normal((5, 4))),
              Ellipsoid(A @ A.T + np.eye(4)), LpBall(4, 3.0, 2.0), standard_ball(4, "inf")]
    for B in bodies:
        B2 = roundtrip(B)
        assert type(B2) is type(B)
        for x in PROBES:
            assert float(gauge(B2, x).value) == float(gauge(B, x).value)


def test_mode_forcing():
    obj = body_to_json(standard_ball(3, 1, materialize=True))
    assert body_from_json(obj, exact=True).exact
    exact = body_to_json(standard_ball(3, 1, materialize=True, exact=True))
    assert not body_from_json(exact, exact=False).exact


def test_bad_inputs():
    with pytest.raises(InvalidInput):
        body_from_json({"dim": 2})
    with pytest.raises(InvalidInput):
        body_from_json({"rep": {"kind": "blob"}})
    with pytest.raises(InvalidInput):
        body_from_json({"rep": {"kind": "v-polytope", "generators": [[1, 0], [0]]}})
    with pytest.raises(InvalidInput):
        body_from_json({"rep": {"kind": "v-polytope", "generators": [["x", 0], [0, 1]]}})
    with pytest.raises(ShapeMismatch):
        body_from_json({"dim": 3, "rep": {"kind": "h-polytope", "normals": [[1, 0], [0, 1]]}})
    with pytest.raises(InvalidInput):
        matrix_from_json({"rep": {"kind": "h-polytope", "normals": [[1, 0], [0, 1]]}})


def test_map_roundtrip():
    rng = np.random.default_rng(5)
    T = random_tensor_map((2, 2), rng)
    obj = json.loads(dumps(map_to_json(T)))
    assert sorted(obj["sigma"]) == [1, 2]
    T2 = map_from_json(obj)
    u = rng.standard_normal(4)
    np.testing.assert_array_equal(apply_tensor_map(T2, u), apply_tensor_map(T, u))
    swap = map_from_json({"sigma": [2, 1], "factors": [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]})
    assert isinstance(swap, TensorMap) and swap.sigma == (1, 0)


def test_dumps_is_canonical():
    a = dumps({"b": 1, "a": [Fraction(1, 2), 2.5]})
    assert a == dumps({"a": [Fraction(1, 2), 2.5], "b": 1})
    assert a.endswith("\n")
