"""Section bodies and the tensorial-body decision procedure.

A body ``Q`` in R^{d_1} (x) ... (x) R^{d_l} is tensorial exactly when, for a
decomposable boundary point ``a^1 (x) ... (x) a^l``, the section bodies
``Q_i = {x : a^1 (x) .. x .. (x) a^l in Q}`` satisfy

    pi_product(Q_1..Q_l)  subset  Q  subset  eps_product(Q_1..Q_l).

Both inclusions are checked on finite certificates: Kronecker products of
section vertices against the facets of ``Q`` (left), and vertices of ``Q``
against Kronecker products of section facet normals (right).  For
ellipsoids the two inclusions become maxima of a Rayleigh quotient over unit
decomposable vectors, found by alternating maximization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from . import _numeric as num
from .altmax import max_decomposable_rayleigh
from .bodies import (
    Body,
    Ellipsoid,
    HPolytope,
    LpBall,
    VPolytope,
    as_ellipsoid,
    as_hpolytope,
    enumerate_vertices,
    gauge,
    irredundant,
    linear_image,
    polar,
    scale,
    support,
)
from .errors import (
    DegenerateSection,
    NotPolytopal,
    NotProportional,
    NumericallyAmbiguous,
    ShapeMismatch,
)
from .products import kron_rows
from .tensor_space import TensorMap, TensorShape, _as_shape, embedding, kron

VERDICT_TOL = 1e-8


@dataclass
class SectionFamily:
    anchor: list[np.ndarray]
    sections: list[Body]


@dataclass
class TensorialityReport:
    verdict: bool
    sections: SectionFamily
    violation: dict | None = None
    lower_max: object = None  # largest Q-gauge over the pi-product certificate
    upper_max: object = None  # largest eps-constraint value over Q
    method: str = ""
    cross_check: dict | None = field(default=None)


def transform_body(T: TensorMap, Q: Body) -> Body:
    """The image T(Q) of a body under a decomposable-preserving map."""
    if T.shape.d != Q.dim:
        raise ShapeMismatch(f"map on R^{T.shape.d} cannot act on a body in R^{Q.dim}")
    return linear_image(Q, T.matrix())


def _one(exact: bool):
    return Fraction(1) if exact else 1.0


def _basis_vector(n: int, exact: bool) -> np.ndarray:
    e = num.zeros(n, exact)
    e[0] = _one(exact)
    return e


def _exact_body(Q: Body) -> bool:
    return Q.exact and not isinstance(Q, Ellipsoid)


def boundary_anchor(shape, Q: Body, factors) -> list[np.ndarray]:
    """Rescale the last factor so that the Kronecker product lies on the boundary of Q."""
    shape = _as_shape(shape)
    factors = [num.as_array(f) for f in factors]
    g = gauge(Q, kron(shape, factors)).value
    if g == 0:
        raise DegenerateSection("anchor vector is zero")
    factors[-1] = factors[-1] / g
    return factors


def canonical_anchor(shape, Q: Body) -> list[np.ndarray]:
    shape = _as_shape(shape)
    exact = _exact_body(Q)
    return boundary_anchor(shape, Q, [_basis_vector(d, exact) for d in shape.dims])


def random_anchor(shape, Q: Body, rng: np.random.Generator) -> list[np.ndarray]:
    shape = _as_shape(shape)
    return boundary_anchor(shape, Q, [rng.standard_normal(d) for d in shape.dims])


def _section_source(Q: Body) -> Body:
    """H-polytope, ellipsoid or non-polytopal lp-ball view of Q."""
    if isinstance(Q, (HPolytope, Ellipsoid)):
        return Q
    if isinstance(Q, VPolytope):
        return as_hpolytope(Q)
    e = as_ellipsoid(Q)
    if e is not None:
        return e
    if isinstance(Q, LpBall) and (Q.p == 1 or math.isinf(Q.p)):
        return as_hpolytope(Q)
    return Q


def section_body(shape, Q: Body, anchor, i: int) -> Body:
    """Pull Q back along x -> a^1 (x) .. x (slot i, 0-based) .. (x) a^l."""
    shape = _as_shape(shape)
    if Q.dim != shape.d:
        raise ShapeMismatch(f"body in R^{Q.dim} does not live on shape {shape.dims}")
    src = _section_source(Q)
    if isinstance(src, LpBall):
        others = [float(np.linalg.norm(num.to_float(a), ord=src.p)) for k, a in enumerate(anchor) if k != i]
        return LpBall(shape.dims[i], src.p, src.radius / math.prod(others))
    J = embedding(shape, anchor, i)
    if isinstance(src, HPolytope):
        A = src.normals
        if num.is_exact(A) != num.is_exact(J):
            A, J = num.to_float(A), num.to_float(J)
        N = A @ J
        nz = [k for k in range(N.shape[0]) if any(v != 0 for v in N[k])]
        N = N[nz]
        if not num.is_exact(N):
            N = N[np.max(np.abs(N), axis=1) > 1e-14]
        if N.shape[0] == 0 or num.rank(N) < shape.dims[i]:
            raise DegenerateSection(f"section {i} is unbounded")
        return HPolytope(irredundant(N))
    M = num.to_float(src.matrix) if num.is_exact(src.matrix) != num.is_exact(J) else src.matrix
    J = J if num.is_exact(M) == num.is_exact(J) else num.to_float(J)
    S = J.T @ M @ J
    if not num.is_positive_definite(S):
        raise DegenerateSection(f"section {i} is not a proper ellipsoid")
    return Ellipsoid(S)


def sections(shape, Q: Body, anchor=None) -> SectionFamily:
    shape = _as_shape(shape)
    anchor = canonical_anchor(shape, Q) if anchor is None else [num.as_array(a) for a in anchor]
    return SectionFamily(anchor, [section_body(shape, Q, anchor, i) for i in range(shape.order)])


def _vec_out(v) -> list:
    return [x if isinstance(x, Fraction) else float(x) for x in v]


def _polytope_decision(shape: TensorShape, Q: Body, fam: SectionFamily, tol: float):
    Qh = _section_source(Q)
    Qv = Q if isinstance(Q, VPolytope) else enumerate_vertices(Qh)
    exact = num.is_exact(Qh.normals) and all(num.is_exact(s.normals) for s in fam.sections)
    limit = 1 if exact else 1 + tol
    sec_vertices = [enumerate_vertices(s).generators for s in fam.sections]
    sec_normals = [s.normals for s in fam.sections]
    A = Qh.normals
    V = Qv.generators
    if not exact:
        A, V = num.to_float(A), num.to_float(V)
        sec_vertices = [num.to_float(s) for s in sec_vertices]
        sec_normals = [num.to_float(s) for s in sec_normals]

    # pi_product(sections) inside Q
    K = kron_rows(sec_vertices)
    lower = np.max(np.abs(A @ K.T), axis=0)
    k = int(np.argmax(num.to_float(lower)))
    lower_max = lower[k]
    # Q inside eps_product(sections)
    N = kron_rows(sec_normals)
    vals = np.abs(N @ V.T)
    flat = int(np.argmax(num.to_float(vals)))
    r, c = divmod(flat, vals.shape[1])
    upper_max = vals[r, c]

    violation = None
    if lower_max > limit:
        violation = {
            "kind": "pi-vertex-outside",
            "point": _vec_out(K[k]),
            "gauge": lower_max,
        }
    elif upper_max > limit:
        violation = {
            "kind": "eps-constraint-violated",
            "point": _vec_out(V[c]),
            "constraint": _vec_out(N[r]),
            "gauge": upper_max,
        }
    return violation is None, violation, lower_max, upper_max


def _ellipsoid_decision(shape: TensorShape, Q: Ellipsoid, fam: SectionFamily, tol: float, rng):
    M = num.to_float(Q.matrix)
    Ls = [np.linalg.cholesky(num.to_float(s.matrix)) for s in fam.sections]
    Linv = reduce(np.kron, [np.linalg.inv(L) for L in Ls])
    Lfull = reduce(np.kron, Ls)
    # points of the pi-product boundary are (x) L_i^{-T} z_i, z_i unit
    lower = max_decomposable_rayleigh(Linv @ M @ Linv.T, shape.dims, rng=rng)
    # constraints of the eps-product are (x) L_i z_i, z_i unit
    Minv = np.linalg.inv(M)
    upper = max_decomposable_rayleigh(Lfull.T @ Minv @ Lfull, shape.dims, rng=rng)
    lower_max = math.sqrt(max(lower.value, 0.0))
    upper_max = math.sqrt(max(upper.value, 0.0))
    violation = None
    if lower_max > 1 + tol:
        x = Linv.T @ lower.vector()
        violation = {"kind": "pi-vertex-outside", "point": _vec_out(x), "gauge": lower_max}
    elif upper_max > 1 + tol:
        y = Lfull @ upper.vector()
        h = math.sqrt(float(y @ Minv @ y))
        x = Minv @ y / h
        violation = {
            "kind": "eps-constraint-violated",
            "point": _vec_out(x),
            "constraint": _vec_out(y),
            "gauge": h,
        }
    return violation is None, violation, lower_max, upper_max


def _decide(shape, Q, fam, tol, rng):
    src = _section_source(Q)
    if isinstance(src, HPolytope):
        return _polytope_decision(shape, Q, fam, tol) + ("polytope",)
    if isinstance(src, Ellipsoid):
        return _ellipsoid_decision(shape, src, fam, tol, rng) + ("ellipsoid",)
    if isinstance(src, LpBall):
        # l_p norms factor over Kronecker products, so both inclusions are equalities
        return True, None, 1.0, 1.0, "lp-analytic"
    raise NotPolytopal(f"cannot decide tensoriality of {type(Q).__name__}")


def is_tensorial(shape, Q: Body, tol: float = VERDICT_TOL, anchor=None, cross_check: bool = True,
                 seed: int = 0) -> TensorialityReport:
    shape = _as_shape(shape)
    if Q.dim != shape.d:
        raise ShapeMismatch(f"body in R^{Q.dim} does not live on shape {shape.dims}")
    rng = np.random.default_rng(seed)
    fam = sections(shape, Q, anchor)
    verdict, violation, lo, up, method = _decide(shape, Q, fam, tol, rng)
    report = TensorialityReport(verdict, fam, violation, lo, up, method)
    exact_run = _exact_body(Q) and method == "polytope"
    if cross_check and not exact_run and method != "lp-analytic" and shape.order > 1:
        alt = sections(shape, Q, random_anchor(shape, Q, rng))
        v2, _, lo2, up2, _ = _decide(shape, Q, alt, tol, rng)
        report.cross_check = {"verdict": v2, "lower_max": lo2, "upper_max": up2}
        if v2 != verdict:
            raise NumericallyAmbiguous(
                "verdict differs between the canonical anchor and a random anchor",
                canonical=verdict,
                random=v2,
            )
    return report


@dataclass
class FactorizationResult:
    passed: bool
    samples: int
    max_rel_error: float
    failure: dict | None = None


def _random_factor(d: int, rng, exact: bool):
    if exact:
        return num.as_array([Fraction(int(v), 4) for v in rng.integers(-8, 9, size=d)], exact=True)
    return rng.standard_normal(d)


def factorization_check(shape, Q: Body, secs, n_samples: int = 1000, tol: float = 1e-9,
                        seed: int = 0) -> FactorizationResult:
    """Sample g_Q(x^1 (x) .. (x) x^l) = prod g_{Q_i}(x^i), and the same for the polars."""
    shape = _as_shape(shape)
    secs = secs.sections if isinstance(secs, SectionFamily) else list(secs)
    rng = np.random.default_rng(seed)
    exact = _exact_body(Q) and all(_exact_body(s) for s in secs)
    worst = 0.0
    for n in range(n_samples):
        xs = [_random_factor(d, rng, exact) for d in shape.dims]
        if any(all(v == 0 for v in x) for x in xs):
            continue
        u = kron(shape, xs)
        for kind, lhs, rhs in (
            ("gauge", gauge(Q, u).value, math.prod(gauge(s, x).value for s, x in zip(secs, xs))),
            ("polar-gauge", support(Q, u), math.prod(support(s, x) for s, x in zip(secs, xs))),
        ):
            if exact:
                ok = lhs == rhs
                err = 0.0 if ok else float(abs(lhs - rhs) / rhs)
            else:
                err = abs(float(lhs) - float(rhs)) / max(float(rhs), 1e-300)
                ok = err <= tol
            worst = max(worst, err)
            if not ok:
                return FactorizationResult(False, n + 1, worst, {
                    "kind": kind, "factors": [_vec_out(x) for x in xs], "body": lhs, "product": rhs,
                })
    return FactorizationResult(True, n_samples, worst)


def sections_unique_up_to_scaling(fam_a, fam_b, tol: float = 1e-8, n_samples: int = 50,
                                  seed: int = 0) -> list[float]:
    """Scalars lambda_i with B_i = lambda_i A_i, or NotProportional."""
    A = fam_a.sections if isinstance(fam_a, SectionFamily) else list(fam_a)
    B = fam_b.sections if isinstance(fam_b, SectionFamily) else list(fam_b)
    if [s.dim for s in A] != [s.dim for s in B]:
        raise ShapeMismatch("section families have different dimensions")
    rng = np.random.default_rng(seed)
    lams = []
    for i, (a, b) in enumerate(zip(A, B)):
        ratios = []
        for _ in range(n_samples):
            v = rng.standard_normal(a.dim)
            ratios.append(float(gauge(a, v).value) / float(gauge(b, v).value))
        lo, hi = min(ratios), max(ratios)
        if hi - lo > tol * hi:
            raise NotProportional(f"section {i} ratios range over [{lo:.6g}, {hi:.6g}]", index=i)
        lams.append(float(np.median(ratios)))
    prod = math.prod(lams)
    if abs(prod - 1) > tol:
        raise NotProportional(f"product of scalings is {prod:.12g}, not 1", scalings=lams)
    return lams


@dataclass
class ClosureResult:
    polar_report: TensorialityReport
    scaled_report: TensorialityReport
    polar_scalings: list[float]
    scaled_scalings: list[float]


def polar_and_scaling_closure(shape, Q: Body, report: TensorialityReport, lam: float, k: int,
                              tol: float = VERDICT_TOL) -> ClosureResult:
    """Re-decide the polar and lam*Q and relate their sections to those of Q (k 0-based)."""
    shape = _as_shape(shape)
    pr = is_tensorial(shape, polar(Q), tol)
    sr = is_tensorial(shape, scale(Q, lam), tol)
    if report.verdict and not (pr.verdict and sr.verdict):
        raise NumericallyAmbiguous("tensorial body has a non-tensorial polar or dilate")
    ps = ss = []
    if report.verdict:
        ps = sections_unique_up_to_scaling(
            [polar(s) for s in report.sections.sections], pr.sections, tol=1e-6
        )
        expected = [scale(s, lam) if i == k else s for i, s in enumerate(report.sections.sections)]
        ss = sections_unique_up_to_scaling(expected, sr.sections, tol=1e-6)
    return ClosureResult(pr, sr, ps, ss)


def trivial_case_decompose(d: int, Q: Body) -> Body:
    """Q in R^1 (x) R^d viewed as a body in R^d; Q = [-1,1] (x)_pi result."""
    if Q.dim != d:
        raise ShapeMismatch(f"expected a body in R^1 (x) R^{d}, got dimension {Q.dim}")
    return Q


def counterexample_body(m: int, n: int, exact: bool = False) -> Ellipsoid:
    """Diagonal ellipsoid with weight 1/3 at (1,1), 1/2 at (m,n) and 1 elsewhere."""
    from .errors import InvalidDimension

    if m < 2 or n < 2:
        raise InvalidDimension(f"needs m, n >= 2, got ({m}, {n})")
    w = [Fraction(1)] * (m * n)
    w[0] = Fraction(1, 3)
    w[-1] = Fraction(1, 2)
    M = np.diag(np.array(w, dtype=object)) if exact else np.diag([float(x) for x in w])
    if exact:
        M = num.as_array(M, exact=True)
    return Ellipsoid(M)
