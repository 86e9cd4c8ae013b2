"""Scalar-agnostic linear algebra.

Arrays are either float64 or ``dtype=object`` holding :class:`fractions.Fraction`
entries.  The object path is the "exact" mode: every routine here keeps
rationals rational, so identities can be compared with ``==``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import SingularMatrix

FLOAT_EPS = 1e-12


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, (float, np.floating)):
        # decimal reading of the literal, not the binary expansion
        return Fraction(repr(float(v)))
    raise TypeError(f"cannot convert {v!r} to an exact rational")


def as_array(x, exact: bool | None = None) -> np.ndarray:
    """Coerce ``x`` to a float or Fraction array.

    ``exact=None`` keeps whatever ``x`` already is (object arrays and any
    Fraction/str entries stay exact).
    """
    if isinstance(x, np.ndarray) and exact is None:
        return x if x.dtype == object else x.astype(float)
    arr = np.asarray(x, dtype=object)
    if exact is None:
        exact = any(isinstance(v, (Fraction, str)) for v in arr.flat)
    if exact:
        out = np.empty(arr.shape, dtype=object)
        for idx, v in np.ndenumerate(arr):
            out[idx] = to_fraction(v)
        return out
    if any(isinstance(v, str) for v in arr.flat):
        arr = np.vectorize(lambda v: float(to_fraction(v)) if isinstance(v, str) else v, otypes=[object])(arr)
    return arr.astype(float)


def to_float(a) -> np.ndarray:
    return np.asarray(a).astype(float)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def eye(n: int, exact: bool) -> np.ndarray:
    out = zeros((n, n), exact)
    for i in range(n):
        out[i, i] = Fraction(1) if exact else 1.0
    return out


def _gauss_jordan(A: np.ndarray, B: np.ndarray):
    """Row-reduce [A | B] over the rationals. Returns (rref of A, transformed B, pivots)."""
    A = A.copy()
    B = B.copy()
    m, n = A.shape
    pivots = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        piv = next((r for r in range(row, m) if A[r, col] != 0), None)
        if piv is None:
            continue
        if piv != row:
            A[[row, piv]] = A[[piv, row]]
            B[[row, piv]] = B[[piv, row]]
        p = A[row, col]
        A[row] = A[row] / p
        B[row] = B[row] / p
        for r in range(m):
            if r != row and A[r, col] != 0:
                f = A[r, col]
                A[r] = A[r] - f * A[row]
                B[r] = B[r] - f * B[row]
        pivots.append(col)
        row += 1
    return A, B, pivots


def solve(A, b) -> np.ndarray:
    """Solve the square system ``A x = b`` (``b`` may be a matrix)."""
    if is_exact(A) or is_exact(b):
        A = as_array(A, exact=True)
        b = as_array(b, exact=True)
        n = A.shape[0]
        if A.shape != (n, n):
            raise SingularMatrix("matrix is not square")
        vec = b.ndim == 1
        B = b.reshape(n, -1)
        R, X, pivots = _gauss_jordan(A, B)
        if len(pivots) < n:
            raise SingularMatrix("matrix is singular")
        return X[:, 0] if vec else X
    try:
        return np.linalg.solve(np.asarray(A, float), np.asarray(b, float))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("matrix is singular") from exc


def inv(A) -> np.ndarray:
    n = A.shape[0]
    return solve(A, eye(n, is_exact(A)))


def rank(A, tol: float = 1e-10) -> int:
    if is_exact(A):
        if A.size == 0:
            return 0
        _, _, pivots = _gauss_jordan(A, zeros((A.shape[0], 0), True))
        return len(pivots)
    A = np.asarray(A, float)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def det(A):
    if is_exact(A):
        A = A.copy()
        n = A.shape[0]
        out = Fraction(1)
        for col in range(n):
            piv = next((r for r in range(col, n) if A[r, col] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                A[[col, piv]] = A[[piv, col]]
                out = -out
            p = A[col, col]
            out *= p
            for r in range(col + 1, n):
                if A[r, col] != 0:
                    A[r] = A[r] - (A[r, col] / p) * A[col]
        return out
    return float(np.linalg.det(np.asarray(A, float)))


def is_positive_definite(M) -> bool:
    if is_exact(M):
        n = M.shape[0]
        return all(det(M[:k, :k]) > 0 for k in range(1, n + 1))
    M = np.asarray(M, float)
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return False
    return True


def sign_normalize(rows: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Flip each row so that its first nonzero coordinate is positive."""
    out = rows.copy()
    for k in range(out.shape[0]):
        for v in out[k]:
            if abs(v) > tol:
                if v < 0:
                    out[k] = -out[k]
                break
    return out


def dedupe_signed(rows: np.ndarray, tol: float = FLOAT_EPS, unit: bool = False) -> np.ndarray:
    """Drop rows equal up to sign to an earlier row. Order of first occurrence is kept.

    With ``unit=True`` rows are compared by direction (normalized to the unit
    sphere) rather than by value.
    """
    if rows.shape[0] == 0:
        return rows
    norm = sign_normalize(rows, 0 if is_exact(rows) else tol)
    if is_exact(rows):
        seen = set()
        keep = []
        for k, r in enumerate(norm):
            key = tuple(r)
            if key not in seen:
                seen.add(key)
                keep.append(k)
        return norm[keep]
    cmp = norm
    if unit:
        cmp = norm / np.linalg.norm(norm, axis=1, keepdims=True)
    keep: list[int] = []
    for k in range(cmp.shape[0]):
        if keep:
            diff = np.max(np.abs(cmp[keep] - cmp[k]), axis=1)
            if np.min(diff) <= tol:
                continue
        keep.append(k)
    return norm[keep]


def same_rows_up_to_sign(a: np.ndarray, b: np.ndarray, tol: float = 0.0) -> bool:
    """Set equality of two generator lists modulo sign and order."""
    if a.shape != b.shape:
        return False
    na = sign_normalize(a)
    nb = sign_normalize(b)
    if is_exact(a) and is_exact(b) and tol == 0:
        return sorted(map(tuple, na)) == sorted(map(tuple, nb))
    na, nb = to_float(na), to_float(nb)
    used = np.zeros(nb.shape[0], dtype=bool)
    for r in na:
        diff = np.max(np.abs(nb - r), axis=1) if nb.size else np.array([])
        diff[used] = np.inf
        j = int(np.argmin(diff))
        if diff[j] > tol:
            return False
        used[j] = True
    return True
