"""Coordinates on a tensor product of real spaces.

The space R^{d_1} (x) ... (x) R^{d_l} is identified with R^d, d = d_1...d_l,
by lexicographic flattening (last factor fastest), so that
``e_i (x) e_j -> e_{(i-1) n + j}`` for two factors.  Decomposable vectors are
plain Kronecker products under this identification and the Hilbert scalar
product is the ordinary dot product of flattened coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from . import _numeric as num
from .errors import (
    IndexOutOfRange,
    InvalidDimension,
    NotDecomposable,
    ShapeMismatch,
    SingularFactor,
    ZeroVector,
)

MAX_DIM = 4096
TOL_DET = 1e-12
RANK_ONE_TOL = 1e-9


@dataclass(frozen=True)
class TensorShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidDimension(f"factor dimensions must be >= 1, got {dims}")
        if math.prod(dims) > MAX_DIM:
            raise InvalidDimension(f"total dimension {math.prod(dims)} exceeds {MAX_DIM}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def parse(cls, text: str) -> "TensorShape":
        return cls(tuple(int(t) for t in text.replace("x", ",").split(",") if t.strip()))

    @property
    def d(self) -> int:
        return math.prod(self.dims)

    @property
    def order(self) -> int:
        return len(self.dims)

    def __str__(self):
        return ",".join(map(str, self.dims))


def _as_shape(shape) -> TensorShape:
    return shape if isinstance(shape, TensorShape) else TensorShape(tuple(shape))


def flatten_index(shape, multi: Sequence[int]) -> int:
    """1-based multi-index -> 1-based linear index."""
    shape = _as_shape(shape)
    if len(multi) != shape.order:
        raise ShapeMismatch(f"expected {shape.order} indices, got {len(multi)}")
    k = 0
    for j, dim in zip(multi, shape.dims):
        if not 1 <= j <= dim:
            raise IndexOutOfRange(f"index {j} outside 1..{dim}")
        k = k * dim + (j - 1)
    return k + 1


def unflatten_index(shape, k: int) -> tuple[int, ...]:
    """Inverse of :func:`flatten_index` (both 1-based)."""
    shape = _as_shape(shape)
    if not 1 <= k <= shape.d:
        raise IndexOutOfRange(f"linear index {k} outside 1..{shape.d}")
    k -= 1
    out = []
    for dim in reversed(shape.dims):
        out.append(k % dim + 1)
        k //= dim
    return tuple(reversed(out))


@dataclass(frozen=True, eq=False)
class DecomposableVector:
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(num.as_array(f) for f in self.factors))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.factors)

    def vector(self) -> np.ndarray:
        return reduce(np.kron, self.factors)


def _check_factors(shape: TensorShape, factors) -> list[np.ndarray]:
    if isinstance(factors, DecomposableVector):
        factors = factors.factors
    factors = [num.as_array(f) for f in factors]
    if len(factors) != shape.order or any(
        f.ndim != 1 or len(f) != d for f, d in zip(factors, shape.dims)
    ):
        raise ShapeMismatch(
            f"factor lengths {[np.shape(f) for f in factors]} do not match {shape.dims}"
        )
    return factors


def kron(shape, factors) -> np.ndarray:
    shape = _as_shape(shape)
    return reduce(np.kron, _check_factors(shape, factors))


def _check_vector(shape: TensorShape, u) -> np.ndarray:
    u = num.as_array(u)
    if u.shape != (shape.d,):
        raise ShapeMismatch(f"vector of shape {u.shape} is not in R^{shape.d}")
    return u


def inner_h(shape, u, v):
    shape = _as_shape(shape)
    return _check_vector(shape, u) @ _check_vector(shape, v)


def embedding(shape, anchor, i: int) -> np.ndarray:
    """Matrix of x -> a^1 (x) ... (x) x (x) ... (x) a^l (x in slot ``i``, 0-based).

    Returns a ``d x d_i`` matrix.
    """
    shape = _as_shape(shape)
    factors = _check_factors(shape, anchor)
    exact = any(num.is_exact(f) for f in factors)
    cols = [f.reshape(-1, 1) for f in factors]
    cols[i] = num.eye(shape.dims[i], exact)
    return reduce(np.kron, cols)


@dataclass(frozen=True, eq=False)
class TensorMap:
    """An element of GL of the tensor space that maps decomposables to decomposables.

    Acts by ``x^1 (x) ... (x) x^l -> T_1 x^{sigma(1)} (x) ... (x) T_l x^{sigma(l)}``.
    ``sigma`` is stored 0-based.
    """

    sigma: tuple[int, ...]
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        sigma = tuple(int(s) for s in self.sigma)
        factors = tuple(num.as_array(f) for f in self.factors)
        if sorted(sigma) != list(range(len(sigma))) or len(factors) != len(sigma):
            raise ShapeMismatch(f"sigma {sigma} is not a permutation of the factors")
        dims = tuple(f.shape[0] for f in factors)
        for i, f in enumerate(factors):
            if f.ndim != 2 or f.shape[0] != f.shape[1]:
                raise ShapeMismatch(f"factor {i} is not square")
            if dims[sigma[i]] != dims[i]:
                raise ShapeMismatch(
                    f"sigma may only permute equal-dimension factors ({i} -> {sigma[i]})"
                )
            det = num.det(f)
            if (det == 0) if num.is_exact(f) else abs(det) <= TOL_DET:
                raise SingularFactor(f"factor {i} is singular (det={float(det):.3g})")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "factors", factors)

    @property
    def shape(self) -> TensorShape:
        return TensorShape(tuple(f.shape[0] for f in self.factors))

    @property
    def exact(self) -> bool:
        return any(num.is_exact(f) for f in self.factors)

    @classmethod
    def identity(cls, shape, exact: bool = False) -> "TensorMap":
        shape = _as_shape(shape)
        return cls(tuple(range(shape.order)), tuple(num.eye(d, exact) for d in shape.dims))

    def permutation_matrix(self) -> np.ndarray:
        shape = self.shape
        idx = np.arange(shape.d).reshape(shape.dims)
        perm = np.transpose(idx, self.sigma).reshape(-1)
        P = num.zeros((shape.d, shape.d), self.exact)
        for row, col in enumerate(perm):
            P[row, col] = num.to_fraction(1) if self.exact else 1.0
        return P

    def matrix(self) -> np.ndarray:
        """Dense d x d matrix: Kronecker product of factors after the factor permutation."""
        K = reduce(np.kron, self.factors)
        if self.sigma == tuple(range(len(self.sigma))):
            return K
        return K @ self.permutation_matrix()

    def scaled(self, c) -> "TensorMap":
        factors = list(self.factors)
        factors[0] = factors[0] * c
        return TensorMap(self.sigma, tuple(factors))


def apply_tensor_map(T: TensorMap, u) -> np.ndarray:
    shape = T.shape
    u = _check_vector(shape, u)
    U = np.transpose(u.reshape(shape.dims), T.sigma)
    for axis, F in enumerate(T.factors):
        U = np.moveaxis(np.tensordot(F, U, axes=([1], [axis])), 0, axis)
    return U.reshape(-1)


def tensor_map_inverse(T: TensorMap) -> TensorMap:
    l = len(T.sigma)
    inv_sigma = [0] * l
    for i, s in enumerate(T.sigma):
        inv_sigma[s] = i
    try:
        factors = tuple(num.inv(T.factors[inv_sigma[j]]) for j in range(l))
    except Exception as exc:
        raise SingularFactor("factor is not invertible") from exc
    return TensorMap(tuple(inv_sigma), factors)


def tensor_map_compose(T: TensorMap, S: TensorMap) -> TensorMap:
    """The map u -> T(S(u))."""
    if T.shape != S.shape:
        raise ShapeMismatch(f"cannot compose maps on {T.shape} and {S.shape}")
    sigma = tuple(S.sigma[T.sigma[k]] for k in range(len(T.sigma)))
    factors = tuple(T.factors[k] @ S.factors[T.sigma[k]] for k in range(len(T.sigma)))
    return TensorMap(sigma, factors)


def decompose_rank_one(shape, u, tol: float = RANK_ONE_TOL) -> DecomposableVector:
    """Split ``u`` as x^1 (x) ... (x) x^l or raise :class:`NotDecomposable`.

    Float vectors are peeled one factor at a time by SVD of the
    ``d_1 x (d_2...d_l)`` reshape; the leading singular value is carried to
    the last factor.  Exact vectors use an exact rank-one test.
    """
    shape = _as_shape(shape)
    u = _check_vector(shape, u)
    if num.is_exact(u):
        if all(v == 0 for v in u):
            raise ZeroVector("cannot decompose the zero vector")
        return DecomposableVector(tuple(_peel_exact(u, shape.dims)))
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        raise ZeroVector("cannot decompose the zero vector")
    factors = []
    rest = u
    dims = list(shape.dims)
    while len(dims) > 1:
        Mat = rest.reshape(dims[0], -1)
        U, s, Vt = np.linalg.svd(Mat, full_matrices=False)
        if len(s) > 1 and s[1] > tol * s[0]:
            raise NotDecomposable(
                f"second singular value {s[1]:.3g} exceeds tol * {s[0]:.3g}",
                singular_values=s,
            )
        x = U[:, 0]
        i = int(np.argmax(np.abs(x)))
        sign = 1.0 if x[i] >= 0 else -1.0
        factors.append(sign * x)
        rest = sign * s[0] * Vt[0]
        dims.pop(0)
    factors.append(rest)
    out = DecomposableVector(tuple(factors))
    if np.linalg.norm(out.vector() - u) > max(tol, 1e-12) * norm * 10:
        raise NotDecomposable("reconstruction residual above tolerance")
    return out


def _peel_exact(u: np.ndarray, dims) -> list[np.ndarray]:
    if len(dims) == 1:
        return [u]
    Mat = u.reshape(dims[0], -1)
    r, c = next((r, c) for (r, c), v in np.ndenumerate(Mat) if v != 0)
    col = Mat[:, c] / Mat[r, c]
    row = Mat[r, :]
    if not all(v == 0 for v in (Mat - np.outer(col, row)).flat):
        raise NotDecomposable("reshaped vector has rank above one")
    return [col] + _peel_exact(row, dims[1:])


def random_tensor_map(shape, rng: np.random.Generator, permute: bool = True) -> TensorMap:
    """Random element of the group: Gaussian factors, random admissible permutation."""
    shape = _as_shape(shape)
    sigma = list(range(shape.order))
    if permute:
        for d in set(shape.dims):
            slots = [i for i, di in enumerate(shape.dims) if di == d]
            shuffled = list(rng.permutation(slots))
            for a, b in zip(slots, shuffled):
                sigma[a] = int(b)
    factors = []
    for d in shape.dims:
        while True:
            F = rng.standard_normal((d, d))
            if abs(np.linalg.det(F)) > 0.05:
                break
        factors.append(F)
    return TensorMap(tuple(sigma), tuple(factors))
