"""JSON encoding of bodies, maps and reports.

Bodies look like ``{"dim": 4, "rep": {"kind": "v-polytope", "generators": [[1, 0, 0, 0], ...]}}``.
Exact scalars are written as ``"num/den"`` strings, floats as JSON numbers
and infinity as ``"inf"``.  Output is canonical (sorted keys, fixed
indentation) so equal inputs give byte-identical text.
"""

from __future__ import annotations

import dataclasses
import json
import math
from fractions import Fraction

import numpy as np

from . import _numeric as num
from .bodies import Body, Ellipsoid, HPolytope, LpBall, VPolytope
from .errors import ShapeMismatch, TensorBodyError
from .tensor_space import TensorMap


class InvalidInput(TensorBodyError):
    code = "invalid-input"


def scalar(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v + 0.0  # drop negative zero
    return v


def to_jsonable(obj):
    """Recursively turn library values into plain JSON data."""
    if isinstance(obj, Body):
        return body_to_json(obj)
    if isinstance(obj, TensorMap):
        return map_to_json(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): to_jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return scalar(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def body_to_json(body: Body) -> dict:
    if isinstance(body, VPolytope):
        rep = {"kind": "v-polytope", "generators": to_jsonable(body.generators)}
    elif isinstance(body, HPolytope):
        rep = {"kind": "h-polytope", "normals": to_jsonable(body.normals)}
    elif isinstance(body, Ellipsoid):
        rep = {"kind": "ellipsoid", "matrix": to_jsonable(body.matrix)}
    elif isinstance(body, LpBall):
        rep = {"kind": "lp-ball", "p": scalar(body.p)}
        if body.radius != 1:
            rep["radius"] = scalar(body.radius)
    else:
        raise TypeError(f"unknown body {type(body).__name__}")
    return {"dim": body.dim, "rep": rep}


def _matrix(data, exact):
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise InvalidInput("expected a non-empty list of rows")
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise InvalidInput("rows have different lengths")
    try:
        return num.as_array(data, exact=exact)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"bad scalar in matrix: {exc}") from exc


def body_from_json(obj, exact: bool | None = None) -> Body:
    """Parse a body; ``exact`` forces rational or float scalars, None keeps what is written."""
    if not isinstance(obj, dict) or "rep" not in obj:
        raise InvalidInput("body JSON needs a 'rep' object")
    rep = obj["rep"]
    kind = rep.get("kind")
    if kind == "v-polytope":
        body = VPolytope(_matrix(rep.get("generators"), exact))
    elif kind == "h-polytope":
        body = HPolytope(_matrix(rep.get("normals"), exact))
    elif kind == "ellipsoid":
        body = Ellipsoid(_matrix(rep.get("matrix"), exact))
    elif kind == "lp-ball":
        p = rep.get("p")
        p = math.inf if p in ("inf", "infinity") else float(Fraction(p) if isinstance(p, str) else p)
        if "dim" not in obj:
            raise InvalidInput("lp-ball needs 'dim'")
        r = rep.get("radius", 1)
        body = LpBall(int(obj["dim"]), p, float(Fraction(r) if isinstance(r, str) else r))
    else:
        raise InvalidInput(f"unknown body kind {kind!r}")
    if "dim" in obj and int(obj["dim"]) != body.dim:
        raise ShapeMismatch(f"declared dim {obj['dim']} but representation has dim {body.dim}")
    return body


def map_to_json(T: TensorMap) -> dict:
    return {"sigma": [s + 1 for s in T.sigma], "factors": [to_jsonable(F) for F in T.factors]}


def map_from_json(obj) -> TensorMap:
    try:
        sigma = [int(s) - 1 for s in obj["sigma"]]
        factors = [_matrix(F, None) for F in obj["factors"]]
    except (KeyError, TypeError) as exc:
        raise InvalidInput("tensor map JSON needs 'sigma' and 'factors'") from exc
    return TensorMap(tuple(sigma), tuple(factors))


def matrix_from_json(obj, exact: bool | None = None) -> np.ndarray:
    """A bare matrix, ``{"matrix": ...}``, or an ellipsoid body."""
    if isinstance(obj, dict) and "rep" in obj:
        body = body_from_json(obj, exact)
        if not isinstance(body, Ellipsoid):
            raise InvalidInput("expected an ellipsoid body")
        return body.matrix
    if isinstance(obj, dict):
        obj = obj.get("matrix")
    return _matrix(obj, exact)
