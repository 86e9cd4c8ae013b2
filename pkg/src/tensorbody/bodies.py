"""0-symmetric convex bodies and their Minkowski gauges.

Four representations are supported:

* :class:`VPolytope` -- ``conv{+-g_k}``, one generator stored per +- pair;
* :class:`HPolytope` -- ``{x : |<a_j, x>| <= 1 for all j}``;
* :class:`Ellipsoid` -- ``{x : x^T M x <= 1}`` with ``M`` positive definite;
* :class:`LpBall` -- ``radius * B_p^d``.

Polytopes may carry exact rational coordinates (object arrays of
``Fraction``); gauges, supports and vertex enumeration then stay exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _numeric as num
from .errors import (
    DegenerateBody,
    DimensionTooLarge,
    InvalidP,
    NotPolytopal,
    ShapeMismatch,
)
from .simplex import linprog_eq

MAX_ENUM_DIM = 8
MAX_ENUM_PAIRS = 64
VERTEX_DEDUP_TOL = 1e-9
GENERATOR_DEDUP_TOL = 1e-12
# beyond this many d-subsets the float path hands vertex enumeration to qhull
BRUTE_FORCE_LIMIT = 200_000


class Body:
    """Common base; concrete bodies are frozen dataclasses below."""

    dim: int

    @property
    def exact(self) -> bool:
        return False


def _rows(a, exact=None) -> np.ndarray:
    arr = num.as_array(a, exact=exact)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a list of vectors, got array of shape {arr.shape}")
    return arr


def _check_rows(rows: np.ndarray, what: str) -> np.ndarray:
    if rows.shape[0] == 0:
        raise DegenerateBody(f"no {what} given")
    zero = [k for k in range(rows.shape[0]) if all(v == 0 for v in rows[k])]
    if zero:
        raise DegenerateBody(f"{what} {zero[0]} is the zero vector")
    rows = num.dedupe_signed(rows, GENERATOR_DEDUP_TOL)
    if num.rank(rows) < rows.shape[1]:
        raise DegenerateBody(f"{what} do not span R^{rows.shape[1]}")
    return rows


@dataclass(frozen=True, eq=False)
class VPolytope(Body):
    generators: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "generators", _check_rows(_rows(self.generators), "generators"))

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    @property
    def exact(self) -> bool:
        return num.is_exact(self.generators)


@dataclass(frozen=True, eq=False)
class HPolytope(Body):
    normals: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "normals", _check_rows(_rows(self.normals), "normals"))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def exact(self) -> bool:
        return num.is_exact(self.normals)


@dataclass(frozen=True, eq=False)
class Ellipsoid(Body):
    matrix: np.ndarray

    def __post_init__(self):
        M = _rows(self.matrix)
        if M.shape[0] != M.shape[1]:
            raise ShapeMismatch(f"ellipsoid matrix must be square, got {M.shape}")
        if num.is_exact(M):
            if any(M[i, j] != M[j, i] for i in range(len(M)) for j in range(i)):
                raise DegenerateBody("ellipsoid matrix is not symmetric")
        else:
            if not np.allclose(M, M.T, rtol=1e-10, atol=1e-12):
                raise DegenerateBody("ellipsoid matrix is not symmetric")
            M = (M + M.T) / 2
        if not num.is_positive_definite(M):
            raise DegenerateBody("ellipsoid matrix is not positive definite")
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def exact(self) -> bool:
        return num.is_exact(self.matrix)


@dataclass(frozen=True, eq=False)
class LpBall(Body):
    dim: int
    p: float
    radius: float = 1.0

    def __post_init__(self):
        p = float(self.p)
        if not p >= 1:
            raise InvalidP(f"p must lie in [1, inf], got {self.p}")
        if self.dim < 1 or self.radius <= 0:
            raise DegenerateBody("lp-ball needs dim >= 1 and radius > 0")
        object.__setattr__(self, "p", p)


@dataclass
class GaugeResult:
    value: object
    witness: dict | None = None

    def __float__(self):
        return float(self.value)


def _vec(body: Body, x) -> np.ndarray:
    x = num.as_array(x, exact=True if body.exact else None)
    if x.shape != (body.dim,):
        raise ShapeMismatch(f"vector of shape {x.shape} does not live in R^{body.dim}")
    return x


def _sqrt(q):
    if isinstance(q, Fraction) and q >= 0:
        n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
        if n * n == q.numerator and d * d == q.denominator:
            return Fraction(n, d)
    return math.sqrt(max(float(q), 0.0))


def dual_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def _lp_norm(x: np.ndarray, p: float) -> float:
    return float(np.linalg.norm(num.to_float(x), ord=p))


def _vgauge(generators: np.ndarray, x: np.ndarray) -> GaugeResult:
    """min sum |lambda_k| subject to x = sum lambda_k g_k."""
    exact = num.is_exact(generators) or num.is_exact(x)
    G = num.as_array(generators, exact=exact).T
    x = num.as_array(x, exact=exact)
    k = G.shape[1]
    A = np.concatenate([G, -G], axis=1)
    c = num.as_array([1] * (2 * k), exact=exact)
    res = linprog_eq(c, A, x)
    if res.status != "optimal":
        raise DegenerateBody(f"generators do not span the vector (LP {res.status})")
    lam = res.x[:k] - res.x[k:]
    value = res.value
    if not exact:
        value = max(float(value), 0.0)
    return GaugeResult(value, {"multipliers": lam})


def irredundant(rows: np.ndarray) -> np.ndarray:
    """Keep only rows that are vertices of conv{+-rows}.

    For H-polytope normals this drops constraints implied by the others; for
    V-polytope generators it drops points inside the hull of the rest.
    """
    rows = num.dedupe_signed(rows, GENERATOR_DEDUP_TOL)
    exact = num.is_exact(rows)
    keep = list(range(rows.shape[0]))
    for j in range(rows.shape[0]):
        others = [k for k in keep if k != j]
        if not others:
            continue
        try:
            g = _vgauge(rows[others], rows[j]).value
        except DegenerateBody:
            continue
        if g <= (1 if exact else 1 + 1e-12):
            keep = others
    return rows[keep]


def gauge(body: Body, x) -> GaugeResult:
    x = _vec(body, x)
    if isinstance(body, HPolytope):
        vals = np.abs(body.normals @ x)
        j = int(np.argmax(num.to_float(vals)))
        return GaugeResult(vals[j], {"active_constraint": j})
    if isinstance(body, Ellipsoid):
        return GaugeResult(_sqrt(x @ body.matrix @ x))
    if isinstance(body, LpBall):
        return GaugeResult(_lp_norm(x, body.p) / body.radius)
    if isinstance(body, VPolytope):
        return _vgauge(body.generators, x)
    raise TypeError(f"unknown body {type(body).__name__}")


def gauge_value(body: Body, x):
    return gauge(body, x).value


def support(body: Body, y):
    """h_Q(y) = sup_{x in Q} |<x, y>|, which is the gauge of the polar body."""
    y = _vec(body, y)
    if isinstance(body, VPolytope):
        vals = np.abs(body.generators @ y)
        return vals[int(np.argmax(num.to_float(vals)))]
    if isinstance(body, Ellipsoid):
        return _sqrt(y @ num.solve(body.matrix, y))
    if isinstance(body, LpBall):
        return body.radius * _lp_norm(y, dual_exponent(body.p))
    if isinstance(body, HPolytope):
        return _vgauge(body.normals, y).value
    raise TypeError(f"unknown body {type(body).__name__}")


def polar(body: Body) -> Body:
    if isinstance(body, VPolytope):
        return HPolytope(body.generators)
    if isinstance(body, HPolytope):
        return VPolytope(body.normals)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(num.inv(body.matrix))
    if isinstance(body, LpBall):
        return LpBall(body.dim, dual_exponent(body.p), 1.0 / body.radius)
    raise TypeError(f"unknown body {type(body).__name__}")


def contains(body: Body, x, tol: float = 0.0) -> bool:
    return gauge(body, x).value <= 1 + tol


def scale(body: Body, c) -> Body:
    """The body c * Q for c > 0."""
    if c == 1:
        return body
    if isinstance(body, VPolytope):
        return VPolytope(body.generators * c)
    if isinstance(body, HPolytope):
        return HPolytope(body.normals / c)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(body.matrix / (c * c))
    if isinstance(body, LpBall):
        return LpBall(body.dim, body.p, body.radius * float(c))
    raise TypeError(f"unknown body {type(body).__name__}")


def linear_image(body: Body, A) -> Body:
    """The body A(Q) for an invertible d x d matrix A."""
    A = num.as_array(A)
    if A.shape != (body.dim, body.dim):
        raise ShapeMismatch(f"map of shape {A.shape} does not act on R^{body.dim}")
    if isinstance(body, LpBall):
        if body.p == 2:
            body = Ellipsoid(num.eye(body.dim, False) / body.radius**2)
        else:
            body = as_vpolytope(body)
    if isinstance(body, VPolytope):
        return VPolytope(body.generators @ A.T)
    if isinstance(body, HPolytope):
        return HPolytope(body.normals @ num.inv(A))
    if isinstance(body, Ellipsoid):
        Ainv = num.inv(A)
        return Ellipsoid(Ainv.T @ body.matrix @ Ainv)
    raise TypeError(f"unknown body {type(body).__name__}")


def _sign_vectors(d: int, exact: bool) -> np.ndarray:
    """All of {+-1}^d with first coordinate +1, as columns."""
    cols = [(1,) + s for s in itertools.product((1, -1), repeat=d - 1)]
    return num.as_array(np.array(cols, dtype=object).T, exact=exact)


def enumerate_vertices(body: HPolytope, tol: float = VERTEX_DEDUP_TOL) -> VPolytope:
    """Vertices of an H-polytope by brute force over d-subsets of its constraints."""
    if not isinstance(body, HPolytope):
        raise NotPolytopal("vertex enumeration needs an H-polytope")
    A = body.normals
    m, d = A.shape
    if d > MAX_ENUM_DIM or m > MAX_ENUM_PAIRS:
        raise DimensionTooLarge(
            f"vertex enumeration limited to dim <= {MAX_ENUM_DIM} and "
            f"<= {MAX_ENUM_PAIRS} constraint pairs (got dim {d}, {m} pairs)"
        )
    exact = num.is_exact(A)
    if not exact and math.comb(m, d) > BRUTE_FORCE_LIMIT:
        return VPolytope(_vertices_qhull(A, tol))
    S = _sign_vectors(d, exact)
    found = []
    for subset in itertools.combinations(range(m), d):
        As = A[list(subset)]
        if exact:
            if num.det(As) == 0:
                continue
            X = num.solve(As, S)
            feas = np.max(np.abs(A @ X), axis=0)
            keep = [k for k in range(X.shape[1]) if feas[k] <= 1]
        else:
            if np.linalg.cond(As) > 1e12:
                continue
            X = np.linalg.solve(As, S.astype(float))
            feas = np.max(np.abs(A @ X), axis=0)
            keep = np.nonzero(feas <= 1 + tol)[0]
        found.extend(X[:, k] for k in keep)
    if not found:
        raise DegenerateBody("no vertices found; constraints do not bound a body")
    V = np.array(found, dtype=object if exact else float)
    if exact:
        V = num.dedupe_signed(V)
    else:
        V = num.dedupe_signed(V, tol, unit=True)
    return VPolytope(V)


def _vertices_qhull(A: np.ndarray, tol: float) -> np.ndarray:
    from scipy.spatial import HalfspaceIntersection

    m, d = A.shape
    halfspaces = np.concatenate(
        [np.concatenate([A, -np.ones((m, 1))], axis=1), np.concatenate([-A, -np.ones((m, 1))], axis=1)]
    )
    hs = HalfspaceIntersection(halfspaces, np.zeros(d))
    V = hs.intersections
    V = V[np.max(np.abs(V @ A.T), axis=1) <= 1 + 1e-7]
    return num.dedupe_signed(V, tol, unit=True)


def standard_ball(shape_or_d, p, materialize: bool = False, exact: bool = False) -> Body:
    """B_p^d. ``p == 2`` always gives ``Ellipsoid(I)``."""
    d = shape_or_d if isinstance(shape_or_d, int) else math.prod(getattr(shape_or_d, "dims", shape_or_d))
    p = math.inf if p in ("inf", "infinity") else float(p)
    if not p >= 1:
        raise InvalidP(f"p must lie in [1, inf], got {p}")
    if p == 2:
        return Ellipsoid(num.eye(d, exact))
    if materialize and p == 1:
        return VPolytope(num.eye(d, exact))
    if materialize and math.isinf(p):
        return HPolytope(num.eye(d, exact))
    return LpBall(d, p)


def as_vpolytope(body: Body) -> VPolytope:
    if isinstance(body, VPolytope):
        return body
    if isinstance(body, HPolytope):
        return enumerate_vertices(body)
    if isinstance(body, LpBall):
        if body.p == 1:
            return VPolytope(np.eye(body.dim) * body.radius)
        if math.isinf(body.p):
            return VPolytope(_sign_vectors(body.dim, False).T * body.radius)
    raise NotPolytopal(f"{type(body).__name__} has no finite vertex set")


def as_hpolytope(body: Body) -> HPolytope:
    if isinstance(body, HPolytope):
        return body
    if isinstance(body, VPolytope):
        return HPolytope(enumerate_vertices(HPolytope(body.generators)).generators)
    if isinstance(body, LpBall):
        if math.isinf(body.p):
            return HPolytope(np.eye(body.dim) / body.radius)
        if body.p == 1:
            return HPolytope(_sign_vectors(body.dim, False).T / body.radius)
    raise NotPolytopal(f"{type(body).__name__} has no finite facet set")


def is_polytopal(body: Body) -> bool:
    return isinstance(body, (VPolytope, HPolytope)) or (
        isinstance(body, LpBall) and (body.p == 1 or math.isinf(body.p))
    )


def as_ellipsoid(body: Body) -> Ellipsoid | None:
    if isinstance(body, Ellipsoid):
        return body
    if isinstance(body, LpBall) and body.p == 2:
        return Ellipsoid(np.eye(body.dim) / body.radius**2)
    return None


def vertices(body: Body) -> np.ndarray:
    return as_vpolytope(body).generators


def facet_normals(body: Body) -> np.ndarray:
    return as_hpolytope(body).normals


def random_vpolytope(dim: int, n_generators: int, rng: np.random.Generator) -> VPolytope:
    """Gaussian generators; resampled until they span."""
    while True:
        G = rng.standard_normal((n_generators, dim))
        if np.linalg.matrix_rank(G) == dim:
            return VPolytope(G)


def random_rational_vpolytope(dim: int, n_generators: int, rng: np.random.Generator, denom: int = 6) -> VPolytope:
    while True:
        G = rng.integers(-denom, denom + 1, size=(n_generators, dim))
        if np.linalg.matrix_rank(G) == dim and not np.any(np.all(G == 0, axis=1)):
            rows = [[Fraction(int(v), denom) for v in row] for row in G]
            return VPolytope(np.array(rows, dtype=object))
