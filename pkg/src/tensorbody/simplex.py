"""Two-phase tableau simplex with Bland's rule.

Works over float64 or over exact rationals (object arrays of Fraction); in
the exact case no tolerance is used anywhere and the optimum is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _numeric as num

FLOAT_TOL = 1e-11


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: object = None
    x: np.ndarray | None = None
    pivots: int = 0


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], eps):
        self.T = T
        self.basis = basis
        self.eps = eps
        self.pivots = 0

    def pivot(self, i: int, j: int) -> None:
        T = self.T
        T[i] = T[i] / T[i, j]
        col = T[:, j].copy()
        col[i] = 0
        T -= np.outer(col, T[i])
        self.basis[i] = j
        self.pivots += 1

    def run(self, allowed: int) -> str:
        """Minimize the objective in the last row over columns ``< allowed``."""
        T, eps = self.T, self.eps
        m = T.shape[0] - 1
        while True:
            cost = T[m, :allowed]
            entering = next((j for j in range(allowed) if cost[j] < -eps), None)
            if entering is None:
                return "optimal"
            best = None
            for i in range(m):
                a = T[i, entering]
                if a > eps:
                    ratio = T[i, -1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], entering)


def linprog_eq(c, A, b) -> LPResult:
    """Minimize ``c @ x`` subject to ``A @ x == b``, ``x >= 0``."""
    exact = num.is_exact(A) or num.is_exact(b) or num.is_exact(c)
    A = num.as_array(A, exact=exact)
    b = num.as_array(b, exact=exact)
    c = num.as_array(c, exact=exact)
    m, n = A.shape
    eps = 0
    if not exact and A.size:
        eps = FLOAT_TOL * max(1.0, float(np.max(np.abs(A))))
    flip = np.array([bi < 0 for bi in b])
    A = A.copy()
    b = b.copy()
    A[flip] = -A[flip]
    b[flip] = -b[flip]

    T = num.zeros((m + 1, n + m + 1), exact)
    T[:m, :n] = A
    for i in range(m):
        T[i, n + i] = 1
    T[:m, -1] = b
    # phase one: minimize the sum of artificials
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    tab = _Tableau(T, list(range(n, n + m)), eps)
    tab.run(n + m)
    infeas = -T[m, -1]
    if infeas > (0 if exact else eps * max(1.0, float(np.sum(b)))):
        return LPResult("infeasible", pivots=tab.pivots)

    # drive remaining artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(m):
        if tab.basis[i] >= n:
            j = next((j for j in range(n) if abs(T[i, j]) > eps), None)
            if j is None:
                continue
            tab.pivot(i, j)
        keep.append(i)
    rows = keep + [m]
    T2 = np.concatenate([tab.T[rows][:, :n], tab.T[rows][:, -1:]], axis=1)
    basis = [tab.basis[i] for i in keep]
    k = len(keep)
    T2[k, :n] = c
    T2[k, -1] = 0
    for i, bj in enumerate(basis):
        if c[bj] != 0:
            T2[k] = T2[k] - c[bj] * T2[i]
    tab2 = _Tableau(T2, basis, eps)
    status = tab2.run(n)
    if status == "unbounded":
        return LPResult("unbounded", pivots=tab.pivots + tab2.pivots)
    x = num.zeros(n, exact)
    for i, bj in enumerate(tab2.basis):
        x[bj] = T2[i, -1]
    value = -T2[k, -1]
    if exact:
        value = num.to_fraction(value)
    return LPResult("optimal", value=value, x=x, pivots=tab.pivots + tab2.pivots)
