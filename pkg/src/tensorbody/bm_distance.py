"""Upper estimates for the (tensorial) Banach-Mazur distance between polytopes.

For an invertible map T the smallest lambda with ``Q subset c T(P) subset lambda Q``
(optimizing over the dilation c) is ``s_in * s_out`` where

    s_in  = max over vertices v of Q   of the gauge of T(P) at v,
    s_out = max over vertices w of T(P) of the gauge of Q at w.

Both maxima are entries of small dense products, so the objective is cheap
and we minimize it by a derivative-free pattern search over the factor
matrices of T.  Every value reported is attained by the returned witness map,
so it is a certified upper bound on the distance, never a lower bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import _numeric as num
from ._parallel import pmap
from .bodies import Body, as_hpolytope, as_vpolytope, gauge
from .errors import NotPolytopal, ShapeMismatch
from .products import pi_product
from .tensor_space import TensorMap, _as_shape
from .tensoriality import transform_body

STEP_INIT = 0.5
STEP_FLOOR = 1e-6
MAX_ITER = 500
MAX_ORDER = 5
RANDOM_DIRECTIONS = 8
POLISH_TOP = 15


@dataclass
class DistanceReport:
    upper: float
    witness: object  # TensorMap, or a dense matrix for the classical search
    factor_product_bound: float | None = None
    dimension_bound: float | None = None
    restarts_used: int = 0
    history: list = field(default_factory=list)


@dataclass(frozen=True)
class _Reps:
    V: np.ndarray  # vertices, one per +- pair
    N: np.ndarray  # facet normals, |N x| <= 1

    @classmethod
    def of(cls, body: Body, exact: bool = False):
        try:
            V = as_vpolytope(body).generators
            N = as_hpolytope(body).normals
        except NotPolytopal as exc:
            raise NotPolytopal(f"distance estimation needs polytopes: {exc}") from exc
        if not exact:
            V, N = num.to_float(V), num.to_float(N)
        return cls(V, N)


def _lambda(P: _Reps, Q: _Reps, M, Minv) -> tuple:
    s_in = np.max(np.abs(P.N @ Minv @ Q.V.T))
    s_out = np.max(np.abs(Q.N @ M @ P.V.T))
    return s_in * s_out, s_in


def lambda_for_map(shape, P: Body, Q: Body, T) -> object:
    """Optimal dilation-adjusted lambda for the fixed map T (TensorMap or matrix)."""
    shape = _as_shape(shape)
    if P.dim != shape.d or Q.dim != shape.d:
        raise ShapeMismatch("bodies do not live on the given shape")
    M = T.matrix() if isinstance(T, TensorMap) else num.as_array(T)
    exact = num.is_exact(M) and P.exact and Q.exact
    if not exact:
        M = num.to_float(M)
    lam, _ = _lambda(_Reps.of(P, exact), _Reps.of(Q, exact), M, num.inv(M))
    return lam


def _admissible_permutations(dims) -> list[tuple[int, ...]]:
    l = len(dims)
    return [s for s in itertools.permutations(range(l)) if all(dims[s[i]] == dims[i] for i in range(l))]


def _perm_matrix(dims, sigma) -> np.ndarray:
    d = math.prod(dims)
    perm = np.transpose(np.arange(d).reshape(dims), sigma).reshape(-1)
    P = np.zeros((d, d))
    P[np.arange(d), perm] = 1.0
    return P


class _Objective:
    """lambda as a function of the factor matrices of a map with a fixed permutation."""

    def __init__(self, P: _Reps, Q: _Reps, perm: np.ndarray | None):
        self.P, self.Q, self.perm = P, Q, perm

    def __call__(self, factors) -> float:
        try:
            M = reduce(np.kron, factors)
            Minv = reduce(np.kron, [np.linalg.inv(F) for F in factors])
        except np.linalg.LinAlgError:
            return math.inf
        if self.perm is not None:
            M = M @ self.perm
            Minv = self.perm.T @ Minv
        lam, _ = _lambda(self.P, self.Q, M, Minv)
        return float(lam) if np.isfinite(lam) else math.inf


def _normalize(factors):
    # the objective is invariant under scaling each factor; keep them well-conditioned
    return [F / abs(np.linalg.det(F)) ** (1.0 / F.shape[0]) for F in factors]


def _pattern_search(obj: _Objective, factors, rng: np.random.Generator, max_iter: int = MAX_ITER):
    factors = _normalize([np.array(F, float) for F in factors])
    best = obj(factors)
    step = STEP_INIT
    it = 0
    while step >= STEP_FLOOR and it < max_iter:
        it += 1
        improved = False
        moves = []
        for k, F in enumerate(factors):
            n = F.shape[0]
            for i in range(n):
                for j in range(n):
                    E = np.zeros((n, n))
                    E[i, j] = 1.0
                    moves.append((k, E))
                    moves.append((k, -E))
        for _ in range(RANDOM_DIRECTIONS):
            k = int(rng.integers(len(factors)))
            n = factors[k].shape[0]
            R = rng.standard_normal((n, n))
            moves.append((k, R / np.linalg.norm(R)))
        for k, E in moves:
            trial = list(factors)
            trial[k] = factors[k] @ (np.eye(E.shape[0]) + step * E)
            val = obj(trial)
            if val < best - 1e-15 * best:
                best, factors, improved = val, _normalize(trial), True
        if not improved:
            step /= 2
    return best, factors


def _jacobian(factors, perm):
    """d M / d F_k[i, j] for M = (F_1 (x) ... (x) F_l) perm, one column per parameter."""
    cols = []
    for k, F in enumerate(factors):
        n = F.shape[0]
        for i in range(n):
            for j in range(n):
                E = np.zeros((n, n))
                E[i, j] = 1.0
                dM = reduce(np.kron, [E if m == k else G for m, G in enumerate(factors)])
                cols.append(dM if perm is None else dM @ perm)
    return cols


def _slp_polish(obj: _Objective, factors, max_iter: int = 200, radius: float = 0.1):
    """Trust-region sequential LP on the minimax form of lambda.

    With the dilation fixed so that s_in = 1, minimize s_out subject to
    s_in <= 1 after linearizing both in the factor entries.
    """
    from scipy.optimize import linprog

    factors = _normalize([np.array(F, float) for F in factors])
    best = obj(factors)
    P, Q = obj.P, obj.Q
    for _ in range(max_iter):
        if radius < 1e-12 or best <= 1.0:
            break
        M = reduce(np.kron, factors)
        if obj.perm is not None:
            M = M @ obj.perm
        Minv = np.linalg.inv(M)
        inner = P.N @ Minv @ Q.V.T
        s_in = np.max(np.abs(inner))
        inner = inner / s_in
        outer = (Q.N @ M @ P.V.T) * s_in
        J = _jacobian(factors, obj.perm)
        d_in = np.stack([-(P.N @ Minv @ dM @ Minv @ Q.V.T).ravel() / s_in for dM in J], axis=1)
        d_out = np.stack([(Q.N @ dM @ P.V.T).ravel() * s_in for dM in J], axis=1)
        n = len(J)
        # variables: delta (n), t ;  minimize t
        c = np.zeros(n + 1)
        c[-1] = 1.0
        o, iv = outer.ravel(), inner.ravel()
        A = np.block([
            [d_out, -np.ones((len(o), 1))],
            [-d_out, -np.ones((len(o), 1))],
            [d_in, np.zeros((len(iv), 1))],
            [-d_in, np.zeros((len(iv), 1))],
        ])
        b = np.concatenate([-o, o, 1 - iv, 1 + iv])
        bounds = [(-radius, radius)] * n + [(0, None)]
        res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
        if res.status != 0:
            radius /= 4
            continue
        delta = res.x[:n]
        trial, pos = [], 0
        for F in factors:
            m = F.size
            trial.append(F + delta[pos:pos + m].reshape(F.shape))
            pos += m
        val = obj(trial)
        predicted = best - res.x[-1]
        if val < best:
            gain = (best - val) / predicted if predicted > 0 else 0.0
            best, factors = val, _normalize(trial)
            if gain > 0.75:
                radius *= 2
        else:
            radius /= 4
    return best, factors


def _polish_in_order(polish, order):
    """Polish candidates best-first; stop once one reaches lambda = 1, which cannot be beaten."""
    best = None
    for i in order:
        out = polish(i)
        if best is None or out[0] < best[0]:
            best = out
        if best[0] <= 1 + 1e-12:
            break
    return best


def _random_factors(dims, rng) -> list[np.ndarray]:
    out = []
    for d in dims:
        while True:
            F = rng.standard_normal((d, d))
            if abs(np.linalg.det(F)) > 0.05:
                break
        out.append(F)
    return out


def _exact_candidates(shape, P: Body, Q: Body):
    """Permutation maps evaluated in rational arithmetic (used when both bodies are exact)."""
    Pr, Qr = _Reps.of(P, True), _Reps.of(Q, True)
    out = []
    for sigma in _admissible_permutations(shape.dims):
        T = TensorMap(sigma, tuple(num.eye(d, True) for d in shape.dims))
        M = T.matrix()
        lam, s_in = _lambda(Pr, Qr, M, num.inv(M))
        out.append((lam, T, s_in))
    return out


def tensorial_bm_upper(shape, P: Body, Q: Body, budget: int = 20, seed: int = 0,
                       seeds=(), factor_bounds=None, max_iter: int = MAX_ITER) -> DistanceReport:
    """Best found lambda over decomposable-preserving maps, with its witness."""
    shape = _as_shape(shape)
    if P.dim != shape.d or Q.dim != shape.d:
        raise ShapeMismatch("bodies do not live on the given shape")
    if shape.order > MAX_ORDER:
        raise ShapeMismatch(f"at most {MAX_ORDER} factors supported")
    Pr, Qr = _Reps.of(P), _Reps.of(Q)
    perms = _admissible_permutations(shape.dims)
    # one job per (permutation, start); starts: identity, extra seeds, then random
    starts = [[np.eye(d) for d in shape.dims]]
    seed_maps = [s for s in seeds if isinstance(s, TensorMap)]
    rng = np.random.default_rng(seed)
    starts += [_random_factors(shape.dims, rng) for _ in range(budget)]
    jobs = []
    children = np.random.SeedSequence(seed).spawn(len(perms) * len(starts) + len(seed_maps))
    c = 0
    for S in seed_maps:
        jobs.append((S.sigma, [num.to_float(F) for F in S.factors], children[c]))
        c += 1
    for sigma in perms:
        for st in starts:
            jobs.append((sigma, st, children[c]))
            c += 1

    def run(job):
        sigma, st, ss = job
        perm = None if sigma == tuple(range(shape.order)) else _perm_matrix(shape.dims, sigma)
        obj = _Objective(Pr, Qr, perm)
        val, F = _pattern_search(obj, st, np.random.default_rng(ss), max_iter)
        return val, sigma, F

    results = pmap(run, jobs)
    order = sorted(range(len(results)), key=lambda i: (results[i][0], i))[:POLISH_TOP]

    def polish(i):
        val, sigma, F = results[i]
        perm = None if sigma == tuple(range(shape.order)) else _perm_matrix(shape.dims, sigma)
        val, F = _slp_polish(_Objective(Pr, Qr, perm), F)
        return val, sigma, F

    val, sigma, F = _polish_in_order(polish, order)
    T = TensorMap(sigma, tuple(F))
    M = T.matrix()
    lam, s_in = _lambda(Pr, Qr, M, np.linalg.inv(M))
    best = (float(lam), T.scaled(float(s_in)))
    if P.exact and Q.exact:
        for lam_e, Te, s_e in _exact_candidates(shape, P, Q):
            if lam_e <= best[0]:
                best = (lam_e, Te.scaled(s_e))
    return DistanceReport(
        upper=best[0],
        witness=best[1],
        factor_product_bound=product_bound(factor_bounds) if factor_bounds else None,
        dimension_bound=diameter_bound(shape),
        restarts_used=len(jobs),
        history=[float(r[0]) for r in results],
    )


def classical_bm_upper(shape, P: Body, Q: Body, budget: int = 20, seed: int = 0,
                       seed_map=None, max_iter: int = MAX_ITER) -> DistanceReport:
    """Same search over all invertible d x d matrices, seeded with ``seed_map``."""
    shape = _as_shape(shape)
    Pr, Qr = _Reps.of(P), _Reps.of(Q)
    d = shape.d
    obj = _Objective(Pr, Qr, None)
    rng = np.random.default_rng(seed)
    starts = []
    if seed_map is not None:
        M0 = seed_map.matrix() if isinstance(seed_map, TensorMap) else seed_map
        starts.append([num.to_float(M0)])
    starts.append([np.eye(d)])
    starts += [_random_factors((d,), rng) for _ in range(budget)]
    children = np.random.SeedSequence(seed).spawn(len(starts))

    def run(job):
        st, ss = job
        return _pattern_search(obj, st, np.random.default_rng(ss), max_iter)

    results = pmap(run, list(zip(starts, children)))
    order = sorted(range(len(results)), key=lambda i: (results[i][0], i))[:POLISH_TOP]
    M = _polish_in_order(lambda i: _slp_polish(obj, results[i][1]), order)[-1][0]
    lam, s_in = _lambda(Pr, Qr, M, np.linalg.inv(M))
    upper, witness = float(lam), M * float(s_in)
    if seed_map is not None:
        # the seed itself is a valid candidate; never report worse than it
        seed_lam = lambda_for_map(shape, P, Q, seed_map)
        if float(seed_lam) < upper:
            M0 = num.to_float(seed_map.matrix() if isinstance(seed_map, TensorMap) else seed_map)
            _, s0 = _lambda(Pr, Qr, M0, np.linalg.inv(M0))
            upper, witness = float(seed_lam), M0 * float(s0)
    return DistanceReport(upper=upper, witness=witness, dimension_bound=diameter_bound(shape),
                          restarts_used=len(starts), history=[float(r[0]) for r in results])


def verify_witness(P: Body, Q: Body, T, lam, tol: float = 1e-8) -> bool:
    """Check Q subset T(P) subset lam Q through body gauges (independent of the optimizer)."""
    if isinstance(T, TensorMap):
        TP = transform_body(T, P)
    else:
        from .bodies import linear_image

        TP = linear_image(P, T)
    inner = max(float(gauge(TP, v).value) for v in num.to_float(as_vpolytope(Q).generators))
    outer = max(float(gauge(Q, w).value) for w in num.to_float(as_vpolytope(TP).generators))
    return inner <= 1 + tol and outer <= float(lam) * (1 + tol)


def product_bound(bounds) -> float:
    return math.prod(bounds)


def diameter_bound(shape) -> int:
    shape = _as_shape(shape)
    return math.prod(shape.dims[:-1]) ** 2 * shape.d


def diameter_bound_sections(shape, per_factor_bounds) -> float:
    shape = _as_shape(shape)
    return math.prod(shape.dims[:-1]) ** 2 * math.prod(per_factor_bounds)


@dataclass
class SandwichFactor:
    factor: object
    bound: float
    holds: bool


def sandwich_factor_check(shape, Q: Body, sections) -> SandwichFactor:
    """Smallest c with Q inside c * pi_product(sections), compared against d / d_l."""
    shape = _as_shape(shape)
    secs = getattr(sections, "sections", sections)
    Pi = pi_product(shape, list(secs))
    V = as_vpolytope(Q).generators
    if num.is_exact(V) != Pi.exact:
        V = num.to_float(V)
    c = max((gauge(Pi, v).value for v in V), key=float)
    bound = shape.d / shape.dims[-1]
    return SandwichFactor(c, bound, float(c) <= bound * (1 + 1e-9))
