"""Tensorial ellipsoids.

An ellipsoid ``{x : x^T M x <= 1}`` on a tensor space is tensorial exactly when
``M`` is a Kronecker product of positive definite factors, i.e. when it is
the image of the Euclidean ball under ``T_1 (x) ... (x) T_l``.  The
Euclidean ball itself is the only ellipsoid squeezed between the projective
and injective products of Euclidean factor balls; this module checks that
rigidity numerically, together with the bilinear identity that encodes it
and the block-matrix fact used to prove it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import _numeric as num
from .altmax import RESTARTS, max_decomposable_rayleigh
from .bodies import Ellipsoid
from .errors import (
    NotKronecker,
    NotPD,
    NotUnitVector,
    NumericallyAmbiguous,
    ShapeMismatch,
    SingularMatrix,
)
from .tensor_space import _as_shape

KRONECKER_TOL = 1e-8


@dataclass
class KroneckerFactors:
    factors: list[np.ndarray]
    residual: float  # relative Frobenius residual


def _check_square(shape, M) -> np.ndarray:
    M = num.as_array(M)
    if M.shape != (shape.d, shape.d):
        raise ShapeMismatch(f"matrix of shape {M.shape} does not act on shape {shape.dims}")
    return M


def rearrange(M: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Map A (x) B to vec(A) vec(B)^T, so Kronecker products become rank one."""
    return M.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)


def _split_float(M, d1, d2, tol):
    R = rearrange(M, d1, d2)
    U, s, Vt = np.linalg.svd(R, full_matrices=False)
    norm = float(np.linalg.norm(s))
    resid = float(np.linalg.norm(s[1:])) / norm if norm else 0.0
    if resid > tol:
        raise NotKronecker(
            f"relative Kronecker residual {resid:.3g} exceeds {tol:.3g}",
            residual=resid,
            second_singular_value=float(s[1]) if len(s) > 1 else 0.0,
        )
    A = math.sqrt(s[0]) * U[:, 0].reshape(d1, d1)
    B = math.sqrt(s[0]) * Vt[0].reshape(d2, d2)
    return (A + A.T) / 2, (B + B.T) / 2, resid


def _split_exact(M, d1, d2):
    R = rearrange(M, d1, d2)
    if num.rank(R) != 1:
        raise NotKronecker("rearranged matrix has rank above one", residual=None)
    (r, c) = next(idx for idx, v in np.ndenumerate(R) if v != 0)
    A = R[:, c].reshape(d1, d1)
    B = (R[r, :] / R[r, c]).reshape(d2, d2)
    return A, B, 0.0


def kronecker_decompose(shape, M, tol: float = KRONECKER_TOL) -> KroneckerFactors:
    """PD factors M_1..M_l with M = M_1 (x) ... (x) M_l, trace(M_i) = d_i for i < l."""
    shape = _as_shape(shape)
    M = _check_square(shape, M)
    exact = num.is_exact(M)
    dims = list(shape.dims)
    factors = []
    rest = M
    worst = 0.0
    while len(dims) > 1:
        d1, d2 = dims[0], math.prod(dims[1:])
        A, B, resid = _split_exact(rest, d1, d2) if exact else _split_float(rest, d1, d2, tol)
        worst = max(worst, resid)
        tr = sum(A[i, i] for i in range(d1))
        if tr == 0:
            raise NotPD(f"factor {len(factors)} has zero trace")
        c = d1 / tr
        A, B = A * c, B / c
        factors.append(A)
        rest = B
        dims.pop(0)
    factors.append(rest)
    for i, F in enumerate(factors):
        if not num.is_positive_definite(F):
            raise NotPD(f"recovered factor {i} is not positive definite")
    if not exact:
        full = reduce(np.kron, factors)
        worst = max(worst, float(np.linalg.norm(full - M) / np.linalg.norm(M)))
        if worst > tol:
            raise NotKronecker(f"reconstruction residual {worst:.3g} exceeds {tol:.3g}", residual=worst)
    return KroneckerFactors(factors, worst)


@dataclass
class EllipsoidReport:
    verdict: bool
    factors: list | None
    residual: float | None
    generic_verdict: bool | None = None
    agrees: bool | None = None


def is_tensorial_ellipsoid(shape, M, tol: float = KRONECKER_TOL, cross_check: bool = True) -> EllipsoidReport:
    shape = _as_shape(shape)
    M = _check_square(shape, M)
    try:
        kf = kronecker_decompose(shape, M, tol)
        report = EllipsoidReport(True, kf.factors, kf.residual)
    except NotKronecker as exc:
        report = EllipsoidReport(False, None, exc.details.get("residual"))
    if cross_check:
        from .tensoriality import is_tensorial

        try:
            generic = is_tensorial(shape, Ellipsoid(M)).verdict
        except NumericallyAmbiguous:
            generic = None
        report.generic_verdict = generic
        report.agrees = generic == report.verdict
    return report


@dataclass
class SandwichReport:
    passed: bool
    pi_max: float  # sup of x^T M x over unit decomposables
    eps_max: float  # sup of x^T M^{-1} x over unit decomposables
    violation: dict | None = None
    identity_deviation: float = 0.0


def sandwich_check_euclidean(shape, M, tol: float = 1e-8, restarts: int = RESTARTS,
                             seed: int = 0) -> SandwichReport:
    """Is the ellipsoid between the projective and injective products of Euclidean balls?"""
    shape = _as_shape(shape)
    M = num.to_float(_check_square(shape, M))
    if not num.is_positive_definite(M):
        raise NotPD("matrix is not positive definite")
    rng = np.random.default_rng(seed)
    up = max_decomposable_rayleigh(M, shape.dims, restarts=restarts, rng=rng)
    lo = max_decomposable_rayleigh(np.linalg.inv(M), shape.dims, restarts=restarts, rng=rng)
    violation = None
    if up.value > 1 + tol:
        violation = {"kind": "pi-vertex-outside", "factors": [f.tolist() for f in up.factors], "value": up.value}
    elif lo.value > 1 + tol:
        violation = {"kind": "eps-constraint-violated", "factors": [f.tolist() for f in lo.factors],
                     "value": lo.value}
    dev = float(np.linalg.norm(M - np.eye(shape.d)))
    report = SandwichReport(violation is None, up.value, lo.value, violation, dev)
    if report.passed and dev > math.sqrt(tol) * shape.d:
        raise NumericallyAmbiguous(
            f"sandwich passed but the matrix is {dev:.3g} away from the identity", deviation=dev
        )
    return report


def slice_ellipsoid(shape, M, z) -> np.ndarray:
    """Matrix of the slice {u : u (x) z in E} over the first l-1 factors."""
    shape = _as_shape(shape)
    M = _check_square(shape, M)
    z = num.as_array(z)
    if z.shape != (shape.dims[-1],):
        raise ShapeMismatch(f"slice vector must have length {shape.dims[-1]}")
    if abs(float(np.linalg.norm(num.to_float(z))) - 1.0) > 1e-12:
        raise NotUnitVector("slice vector must have unit Euclidean norm")
    n = shape.d // shape.dims[-1]
    J = np.kron(num.eye(n, num.is_exact(z)), z.reshape(-1, 1))
    if num.is_exact(J) != num.is_exact(M):
        J, M = num.to_float(J), num.to_float(M)
    return J.T @ M @ J


@dataclass
class BilinearResult:
    passed: bool
    samples: int
    failure: dict | None = None


def bilinear_identity_check(shape, T, n_samples: int = 1000, tol: float = 1e-8,
                            seed: int = 0) -> BilinearResult:
    """Sample <x,z><y,w> = (<L(x(x)y), L(z(x)w)> + <L(x(x)w), L(z(x)y)>)/2 for L = T^{-1} and T^t."""
    shape = _as_shape(shape)
    if shape.order != 2:
        raise ShapeMismatch("the bilinear identity is defined for two factors only")
    m, n = shape.dims
    T = num.to_float(_check_square(shape, T))
    try:
        Tinv = np.linalg.inv(T)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("map is singular") from exc
    if not np.all(np.isfinite(Tinv)) or abs(np.linalg.det(T)) < 1e-12:
        raise SingularMatrix("map is singular")
    rng = np.random.default_rng(seed)
    for name, L in (("inverse", Tinv), ("transpose", T.T)):
        G = L.T @ L
        for k in range(n_samples):
            x, z = rng.standard_normal((2, m))
            y, w = rng.standard_normal((2, n))
            lhs = (x @ z) * (y @ w)
            rhs = (np.kron(x, y) @ G @ np.kron(z, w) + np.kron(x, w) @ G @ np.kron(z, y)) / 2
            scale = max(1.0, np.linalg.norm(x) * np.linalg.norm(z) * np.linalg.norm(y) * np.linalg.norm(w))
            if abs(lhs - rhs) > tol * scale:
                return BilinearResult(False, k + 1, {
                    "map": name, "x": x.tolist(), "z": z.tolist(), "y": y.tolist(), "w": w.tolist(),
                    "lhs": float(lhs), "rhs": float(rhs),
                })
    return BilinearResult(True, n_samples)


@dataclass
class BlockMatrixWitness:
    """Upper off-diagonal blocks of a symmetric (m n) x (m n) matrix with identity diagonal blocks.

    ``blocks[(k, i)]`` for ``k < i`` (0-based) is the antisymmetric n x n block
    ``A_{ki}``; the mirrored block is ``-A_{ki}``.
    """

    m: int
    n: int
    blocks: dict = field(default_factory=dict)

    def matrix(self) -> np.ndarray:
        m, n = self.m, self.n
        S = np.eye(m * n)
        for (k, i), A in self.blocks.items():
            A = np.asarray(A, float)
            if k >= i or A.shape != (n, n):
                raise ShapeMismatch(f"block ({k},{i}) must be n x n above the diagonal")
            S[k * n:(k + 1) * n, i * n:(i + 1) * n] = A
            S[i * n:(i + 1) * n, k * n:(k + 1) * n] = -A
        return S

    def is_structured(self, tol: float = 1e-12) -> bool:
        return all(np.max(np.abs(np.asarray(A, float) + np.asarray(A, float).T)) <= tol
                   for A in self.blocks.values())


def random_block_witness(m: int, n: int, rng: np.random.Generator, scale: float = 1.0) -> BlockMatrixWitness:
    blocks = {}
    for k in range(m):
        for i in range(k + 1, m):
            X = rng.standard_normal((n, n)) * scale
            blocks[(k, i)] = X - X.T
    return BlockMatrixWitness(m, n, blocks)


@dataclass
class BlockIdentityResult:
    status: str  # "confirmed" | "structure-broken" | "counterexample"
    block: tuple | None = None
    deviation: float = 0.0


def _block_structure_deviation(S: np.ndarray, m: int, n: int):
    """Largest departure from identity diagonal blocks and antisymmetric off-diagonal blocks."""
    worst, where = 0.0, None
    for k in range(m):
        for i in range(m):
            B = S[k * n:(k + 1) * n, i * n:(i + 1) * n]
            dev = float(np.max(np.abs(B - np.eye(n)))) if k == i else float(np.max(np.abs(B + B.T)))
            if dev > worst:
                worst, where = dev, (k, i)
    return worst, where


def block_identity_check(witness: BlockMatrixWitness, tol: float = 1e-9) -> BlockIdentityResult:
    """If S and S^{-1} both carry the block structure, S must be the identity."""
    if not witness.is_structured():
        raise ShapeMismatch("off-diagonal blocks must be antisymmetric")
    S = witness.matrix()
    if not num.is_positive_definite(S):
        raise NotPD("assembled matrix is not positive definite")
    d = witness.m * witness.n
    Sinv = np.linalg.inv(S)
    dev, where = _block_structure_deviation(Sinv, witness.m, witness.n)
    if dev > tol:
        return BlockIdentityResult("structure-broken", where, dev)
    off = float(np.linalg.norm(S - np.eye(d)))
    if off > tol * d:
        return BlockIdentityResult("counterexample", None, off)
    return BlockIdentityResult("confirmed", None, off)
