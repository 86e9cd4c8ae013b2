"""Alternating maximization over unit decomposable vectors.

Two nonconvex problems show up repeatedly:

* ``max |T(x^1, ..., x^l)|`` over unit ``x^i`` (the spectral norm of a tensor);
* ``max (x^1 (x) ... (x) x^l)^T M (x^1 (x) ... (x) x^l)`` over unit ``x^i`` for a
  symmetric positive semidefinite ``M``.

Both are handled by block-coordinate ascent: with all factors but one fixed
the problem in the free factor is a linear (resp. Rayleigh) maximization with
a closed-form solution, so every sweep is monotone.  One start is
deterministic (a rank-one truncation of the leading singular/eigen vector) and
the rest are drawn from a seeded generator; the best value wins, ties broken
by the lower start index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

RESTARTS = 20
MAX_ITER = 200
CONV_TOL = 1e-10


@dataclass
class AltMaxResult:
    value: float
    factors: list[np.ndarray]
    start: int

    def vector(self) -> np.ndarray:
        return reduce(np.kron, self.factors)


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        out = np.zeros_like(v)
        out[0] = 1.0
        return out
    return v / n


def _rank_one_start(v: np.ndarray, dims) -> list[np.ndarray]:
    """Leading singular vectors of successive unfoldings of ``v``."""
    out = []
    rest = v.reshape(dims)
    for k in range(len(dims) - 1):
        U, s, Vt = np.linalg.svd(rest.reshape(dims[k], -1), full_matrices=False)
        out.append(_unit(U[:, 0]))
        rest = (s[0] * Vt[0]).reshape(dims[k + 1:])
    out.append(_unit(rest.reshape(-1)))
    return out


def _random_start(dims, rng) -> list[np.ndarray]:
    return [_unit(rng.standard_normal(d)) for d in dims]


def _contract_except(T: np.ndarray, factors, skip: int) -> np.ndarray:
    """T contracted with every factor except slot ``skip``."""
    out = T
    for k in reversed(range(len(factors))):
        if k != skip:
            out = np.tensordot(out, factors[k], axes=([k], [0]))
    return out


def _ascend_linear(T: np.ndarray, factors, max_iter, tol):
    l = len(factors)
    value = -np.inf
    for _ in range(max_iter):
        for i in range(l):
            factors[i] = _unit(_contract_except(T, factors, i))
        new = float(np.abs(_contract_except(T, factors, l - 1) @ factors[-1]))
        if new - value <= tol * max(1.0, abs(new)):
            value = new
            break
        value = new
    return value, factors


def tensor_spectral_norm(T: np.ndarray, restarts: int = RESTARTS, max_iter: int = MAX_ITER,
                         tol: float = CONV_TOL, rng: np.random.Generator | None = None) -> AltMaxResult:
    """Best found value of ``max |T(x^1,...,x^l)|`` over unit vectors (a lower bound)."""
    T = np.asarray(T, float)
    dims = T.shape
    if len(dims) == 1:
        return AltMaxResult(float(np.linalg.norm(T)), [_unit(T)], 0)
    if len(dims) == 2:
        U, s, Vt = np.linalg.svd(T)
        return AltMaxResult(float(s[0]), [U[:, 0], Vt[0]], 0)
    rng = rng if rng is not None else np.random.default_rng(0)
    starts = [_rank_one_start(T.reshape(-1), dims)]
    starts += [_random_start(dims, rng) for _ in range(max(restarts - 1, 0))]
    best = None
    for k, f in enumerate(starts):
        value, f = _ascend_linear(T, f, max_iter, tol)
        if best is None or value > best.value:
            best = AltMaxResult(value, f, k)
    return best


def _section_matrix(M4: np.ndarray, factors, i: int) -> np.ndarray:
    """J_i^T M J_i where J_i puts the free variable in slot ``i`` and ``factors`` elsewhere."""
    l = len(factors)
    out = M4
    for k in reversed(range(l)):
        if k != i:
            out = np.tensordot(out, factors[k], axes=([l + k], [0]))
    for k in reversed(range(l)):
        if k != i:
            out = np.tensordot(out, factors[k], axes=([k], [0]))
    return out


def max_decomposable_rayleigh(M: np.ndarray, dims, restarts: int = RESTARTS, max_iter: int = MAX_ITER,
                              tol: float = CONV_TOL, rng: np.random.Generator | None = None) -> AltMaxResult:
    """Best found ``max (kron x)^T M (kron x)`` over unit factors ``x^i``; ``M`` PSD."""
    M = np.asarray(M, float)
    dims = tuple(int(d) for d in dims)
    l = len(dims)
    if l == 1:
        w, V = np.linalg.eigh(M)
        return AltMaxResult(float(w[-1]), [V[:, -1]], 0)
    M4 = M.reshape(dims + dims)
    rng = rng if rng is not None else np.random.default_rng(0)
    w, V = np.linalg.eigh(M)
    starts = [_rank_one_start(V[:, -1], dims)]
    starts += [_random_start(dims, rng) for _ in range(max(restarts - 1, 0))]
    best = None
    for k, f in enumerate(starts):
        value = -np.inf
        for _ in range(max_iter):
            for i in range(l):
                B = _section_matrix(M4, f, i)
                ew, ev = np.linalg.eigh((B + B.T) / 2)
                f[i] = ev[:, -1]
            x = reduce(np.kron, f)
            new = float(x @ M @ x)
            if new - value <= tol * max(1.0, abs(new)):
                value = new
                break
            value = new
        if best is None or value > best.value:
            best = AltMaxResult(value, [fi.copy() for fi in f], k)
    return best
