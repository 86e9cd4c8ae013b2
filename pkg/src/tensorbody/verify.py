"""The desk-scale claim battery run by ``tensorbody verify`` and the acceptance tests.

Each claim is a function returning a :class:`ClaimResult`; all randomness is
drawn from generators seeded by the claim's own seed, so results are
reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import _numeric as num
from .bm_distance import lambda_for_map, tensorial_bm_upper, verify_witness
from .bodies import (
    Ellipsoid,
    HPolytope,
    gauge,
    polar,
    random_rational_vpolytope,
    random_vpolytope,
    standard_ball,
    support,
)
from .ellipsoids import (
    BlockMatrixWitness,
    bilinear_identity_check,
    kronecker_decompose,
    block_identity_check,
    random_block_witness,
    sandwich_check_euclidean,
)
from .errors import NotDecomposable, NotPD
from .products import eps_product, gauge_eps, gauge_pi, hilbert_product, pi_product
from .tensor_space import TensorMap, decompose_rank_one, random_tensor_map
from .tensoriality import (
    factorization_check,
    is_tensorial,
    random_anchor,
    sections,
    sections_unique_up_to_scaling,
    transform_body,
)


@dataclass
class ClaimResult:
    id: str
    title: str
    passed: bool
    measured: object
    tolerance: object
    details: dict = field(default_factory=dict)
    seconds: float = 0.0


SHAPES_EXACT = [(2, 2), (2, 3), (3, 2), (2, 2, 2)]


def _exact_ball(d, p):
    return standard_ball(d, p, materialize=True, exact=True)


def claim_l1_linf_products(seed: int = 0) -> ClaimResult:
    mismatches = []
    for dims in SHAPES_EXACT:
        d = math.prod(dims)
        pi = pi_product(dims, [_exact_ball(k, 1) for k in dims])
        if not num.same_rows_up_to_sign(pi.generators, _exact_ball(d, 1).generators):
            mismatches.append(("pi", dims))
        eps = eps_product(dims, [_exact_ball(k, "inf") for k in dims])
        if not num.same_rows_up_to_sign(eps.normals, _exact_ball(d, "inf").normals):
            mismatches.append(("eps", dims))
    return ClaimResult(
        "l1-linf-products",
        "projective product of l1 balls is the l1 ball, injective product of cubes is the cube",
        not mismatches, len(mismatches), 0, {"mismatches": mismatches, "shapes": SHAPES_EXACT},
    )


def claim_pi_eps_duality(seed: int = 0) -> ClaimResult:
    rng = np.random.default_rng(seed)
    mismatches, cases = [], 0
    for dims in SHAPES_EXACT:
        families = [
            [_exact_ball(k, 1) for k in dims],
            [random_rational_vpolytope(k, k + 1, rng) for k in dims],
        ]
        for fam in families:
            cases += 1
            lhs = polar(pi_product(dims, fam))
            rhs = eps_product(dims, [polar(f) for f in fam])
            if not (isinstance(lhs, HPolytope) and num.same_rows_up_to_sign(lhs.normals, rhs.normals)):
                mismatches.append(dims)
    return ClaimResult(
        "pi-eps-duality", "the polar of a projective product is the injective product of the polars",
        not mismatches, len(mismatches), 0, {"cases": cases, "mismatches": mismatches},
    )


def claim_crossnorm_sandwich(seed: int = 0, n_vectors: int = 1000, tol: float = 1e-10) -> ClaimResult:
    rng = np.random.default_rng(seed)
    violations, checked = 0, 0
    worst = -math.inf
    for dims in [(2, 2), (2, 3), (2, 2, 2)]:
        factors = [random_vpolytope(k, k + 1, rng) for k in dims]
        bodies = [pi_product(dims, factors), eps_product(dims, factors)]
        for _ in range(n_vectors):
            u = rng.standard_normal(math.prod(dims))
            e = float(gauge_eps(dims, factors, u).value)
            p = float(gauge_pi(dims, factors, u).value)
            for Q in bodies:
                g = float(gauge(Q, u).value)
                slack = max(e - g, g - p) / max(1.0, p)
                worst = max(worst, slack)
                checked += 1
                if slack > tol:
                    violations += 1
    return ClaimResult(
        "crossnorm-sandwich", "injective <= body gauge <= projective on products",
        violations == 0, violations, tol, {"checked": checked, "worst_relative_slack": worst},
    )


def claim_gauge_factorization(seed: int = 0, n_samples: int = 1000, tol: float = 1e-9) -> ClaimResult:
    cases = {
        "l2-ball": standard_ball(4, 2),
        "l1-ball": standard_ball(4, 1, materialize=True),
        "linf-ball": standard_ball(4, "inf", materialize=True),
    }
    out, ok = {}, True
    for name, Q in cases.items():
        fam = sections((2, 2), Q)
        res = factorization_check((2, 2), Q, fam, n_samples=n_samples, tol=tol, seed=seed)
        out[name] = {"passed": res.passed, "max_rel_error": res.max_rel_error, "failure": res.failure}
        ok &= res.passed
    worst = max(v["max_rel_error"] for v in out.values())
    return ClaimResult("gauge-factorization", "body and polar gauges factor over decomposables",
                       ok, worst, tol, out)


def _certificate_holds(shape, Q, report, tol) -> bool:
    """Recompute a violation certificate from scratch."""
    v = report.violation
    secs = report.sections.sections
    x = np.asarray(num.to_float(v["point"]), float)
    if v["kind"] == "pi-vertex-outside":
        try:
            dv = decompose_rank_one(shape, x, tol=1e-7)
        except NotDecomposable:
            return False
        inside = math.prod(float(gauge(s, f).value) for s, f in zip(secs, dv.factors))
        return inside <= 1 + 1e-7 and float(gauge(Q, x).value) > 1 + tol
    y = np.asarray(num.to_float(v["constraint"]), float)
    try:
        dy = decompose_rank_one(shape, y, tol=1e-7)
    except NotDecomposable:
        return False
    in_polar_product = math.prod(float(support(s, f)) for s, f in zip(secs, dy.factors))
    return (in_polar_product <= 1 + 1e-7 and float(gauge(Q, x).value) <= 1 + 1e-7
            and abs(float(x @ y)) > 1 + tol)


def claim_tensoriality_decision(seed: int = 0, tol: float = 1e-8) -> ClaimResult:
    from .tensoriality import counterexample_body

    rng = np.random.default_rng(seed)
    errors = []
    for p in (1, 2, "inf"):
        if not is_tensorial((2, 2), standard_ball(4, p, materialize=True), tol).verdict:
            errors.append(f"l{p} ball")
    planted = 0
    for k in range(20):
        dims = (2, 2) if k % 2 == 0 else (2, 3)
        kind = k % 4
        if kind in (0, 1):
            Q = pi_product(dims, [random_vpolytope(d, d + 1, rng) for d in dims])
        elif kind == 2:
            Q = eps_product(dims, [random_vpolytope(d, d + 1, rng) for d in dims])
        else:
            mats = []
            for d in dims:
                A = rng.standard_normal((d, d))
                mats.append(A @ A.T + 0.5 * np.eye(d))
            Q = hilbert_product(dims, [Ellipsoid(m) for m in mats])
        if is_tensorial(dims, Q, tol, seed=k).verdict:
            planted += 1
        else:
            errors.append(f"planted {k}")
    certs = {}
    for mn in [(2, 2), (2, 3)]:
        Q = counterexample_body(*mn)
        r = is_tensorial(mn, Q, tol)
        good = (not r.verdict) and r.violation is not None and _certificate_holds(mn, Q, r, tol)
        certs[str(mn)] = {"verdict": r.verdict, "certificate_verified": good,
                          "violation_value": r.violation and r.violation["gauge"]}
        if not good:
            errors.append(f"counterexample {mn}")
    return ClaimResult("tensoriality-decision",
                       "decision is true on standard balls and planted products, false on the counterexample",
                       not errors, {"planted_true": planted, "errors": errors}, tol, certs)


def _planted_tensorial(rng, dims):
    mats = []
    for d in dims:
        A = rng.standard_normal((d, d))
        mats.append(A @ A.T + 0.5 * np.eye(d))
    return [
        ("hilbert", hilbert_product(dims, [Ellipsoid(m) for m in mats])),
        ("pi", pi_product(dims, [random_vpolytope(d, d + 1, rng) for d in dims])),
        ("l1", standard_ball(math.prod(dims), 1, materialize=True)),
    ]


def claim_section_uniqueness(seed: int = 0, tol: float = 1e-8) -> ClaimResult:
    rng = np.random.default_rng(seed)
    out, ok = {}, True
    for name, Q in _planted_tensorial(rng, (2, 2)):
        fa = sections((2, 2), Q)
        fb = sections((2, 2), Q, random_anchor((2, 2), Q, rng))
        try:
            lams = sections_unique_up_to_scaling(fa, fb, tol=tol)
            out[name] = {"scalings": lams, "product": math.prod(lams)}
        except Exception as exc:  # reported, counted as failure
            out[name] = {"error": str(exc)}
            ok = False
    worst = max((abs(v["product"] - 1) for v in out.values() if "product" in v), default=math.inf)
    return ClaimResult("section-uniqueness", "sections at two anchors differ by scalings with product one",
                       ok, worst, tol, out)


def claim_tensor_map_invariance(seed: int = 0, n_maps: int = 20) -> ClaimResult:
    rng = np.random.default_rng(seed)
    bodies = [standard_ball(4, 1, materialize=True), standard_ball(4, "inf", materialize=True)]
    bodies += [pi_product((2, 2), [random_vpolytope(2, 3, rng), random_vpolytope(2, 3, rng)]) for _ in range(3)]
    good = 0
    for k in range(n_maps):
        T = random_tensor_map((2, 2), rng)
        Q = bodies[k % len(bodies)]
        if is_tensorial((2, 2), transform_body(T, Q), seed=k).verdict:
            good += 1
    return ClaimResult("tensor-map-invariance", "images of tensorial polytopes under tensor maps stay tensorial",
                       good == n_maps, good, n_maps)


def claim_tensorial_bm_distance(seed: int = 0, budget: int = 49) -> ClaimResult:
    # identity start plus ``budget`` random starts: 50 per factor permutation
    rng = np.random.default_rng(seed)
    B1 = _exact_ball(4, 1)
    Binf = _exact_ball(4, "inf")
    self_dist = tensorial_bm_upper((2, 2), B1, B1, budget=2, seed=seed).upper
    Q = pi_product((2, 2), [random_vpolytope(2, 3, rng), random_vpolytope(2, 3, rng)])
    T0 = random_tensor_map((2, 2), rng)
    P = transform_body(T0, Q)
    planted = tensorial_bm_upper((2, 2), P, Q, budget=budget, seed=seed)
    cross = tensorial_bm_upper((2, 2), B1, Binf, budget=10, seed=seed)
    witness_ok = verify_witness(B1, Binf, cross.witness, cross.upper)
    ok = (self_dist == 1 and planted.upper <= 1 + 1e-6 and cross.upper <= 16 and witness_ok)
    return ClaimResult(
        "tensorial-bm-distance", "distance estimates: reflexive, planted recovery, l1 vs cube bound",
        ok,
        {"self": self_dist, "planted": planted.upper, "l1_vs_cube": cross.upper},
        {"self": 1, "planted": 1 + 1e-6, "l1_vs_cube": 16},
        {"witness_valid": witness_ok, "planted_restarts": planted.restarts_used,
         "identity_lambda_l1_vs_cube": lambda_for_map((2, 2), B1, Binf, TensorMap.identity((2, 2), True))},
    )


def _orthogonal(d, rng):
    Qm, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Qm * np.sign(np.diag(R))


def claim_bilinear_identity_equivalence(seed: int = 0, tol: float = 1e-8) -> ClaimResult:
    rng = np.random.default_rng(seed)
    agree, rows = 0, []
    for k in range(30):
        group = k // 10
        if group == 0:
            T = np.kron(_orthogonal(2, rng), _orthogonal(3, rng))
        elif group == 1:
            T = np.kron(rng.standard_normal((2, 2)), rng.standard_normal((3, 3)))
        else:
            T = np.kron(_orthogonal(2, rng), _orthogonal(3, rng)) + 0.05 * rng.standard_normal((6, 6))
        Tinv = np.linalg.inv(T)
        M = Tinv.T @ Tinv
        b = bilinear_identity_check((2, 3), T, n_samples=200, tol=tol, seed=k).passed
        s = sandwich_check_euclidean((2, 3), M, tol=tol, seed=k).passed
        agree += b == s
        rows.append({"group": group, "bilinear": b, "sandwich": s})
    return ClaimResult("bilinear-identity-equivalence", "bilinear identity agrees with the Euclidean sandwich",
                       agree == 30, agree, 30, {"cases": rows})


def claim_euclidean_sandwich_rigidity(seed: int = 0, tol: float = 1e-8) -> ClaimResult:
    rng = np.random.default_rng(seed)
    shapes = [(2, 2), (2, 3), (2, 2, 2)]
    passing_dev, bad = 0.0, []
    for dims in shapes:
        d = math.prod(dims)
        U = reduce(np.kron, [_orthogonal(k, rng) for k in dims])
        for M in (np.eye(d), U.T @ U):
            r = sandwich_check_euclidean(dims, M, tol=tol)
            if r.passed:
                passing_dev = max(passing_dev, r.identity_deviation)
            else:
                bad.append(f"identity failed on {dims}")
    failed_with_witness = 0
    for k in range(50):
        dims = shapes[k % 3]
        d = math.prod(dims)
        X = rng.standard_normal((d, d))
        E = (X + X.T) / 2
        E *= rng.uniform(0.02, 0.5) / np.linalg.norm(E, 2)
        M = np.eye(d) + E
        r = sandwich_check_euclidean(dims, M, tol=tol, seed=k)
        if r.passed:
            passing_dev = max(passing_dev, r.identity_deviation)
            bad.append(f"perturbed {k} passed")
            continue
        x = reduce(np.kron, [np.asarray(f) for f in r.violation["factors"]])
        form = M if r.violation["kind"] == "pi-vertex-outside" else np.linalg.inv(M)
        if abs(np.linalg.norm(x) - 1) < 1e-9 and x @ form @ x > 1 + tol:
            failed_with_witness += 1
        else:
            bad.append(f"perturbed {k} witness invalid")
    ok = not bad and passing_dev <= 1e-6 and failed_with_witness == 50
    return ClaimResult("euclidean-sandwich-rigidity",
                       "only the Euclidean ball sits between the Euclidean projective and injective products",
                       ok, {"max_passing_deviation": passing_dev, "perturbed_failed": failed_with_witness},
                       {"deviation": 1e-6, "perturbed": 50}, {"problems": bad})


def rotation_witness(t: float) -> BlockMatrixWitness:
    return BlockMatrixWitness(2, 2, {(0, 1): t * np.array([[0.0, 1.0], [-1.0, 0.0]])})


def claim_block_matrix_identity(seed: int = 0, n_random: int = 1000) -> ClaimResult:
    rng = np.random.default_rng(seed)
    counter, statuses = 0, {}
    for m, n in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        tally = {}
        for _ in range(n_random):
            w = random_block_witness(m, n, rng)
            S = w.matrix()
            # shrink the off-diagonal part so S is positive definite
            K = S - np.eye(m * n)
            c = rng.uniform(0.05, 0.95) / max(np.linalg.norm(K, 2), 1e-300)
            w = BlockMatrixWitness(m, n, {key: A * c for key, A in w.blocks.items()})
            st = block_identity_check(w).status
            tally[st] = tally.get(st, 0) + 1
            counter += st == "counterexample"
        statuses[f"{m}x{n}"] = tally
    zero = block_identity_check(BlockMatrixWitness(2, 2, {})).status
    rot = block_identity_check(rotation_witness(0.5)).status
    try:
        block_identity_check(rotation_witness(1.0))
        unit = "positive-definite"
    except NotPD:
        unit = "not-positive-definite"
    ok = counter == 0 and zero == "confirmed" and rot == "structure-broken"
    return ClaimResult("block-matrix-identity", "structured S with structured inverse is the identity",
                       ok, counter, 0, {"random": statuses, "zero_blocks": zero, "half_rotation": rot,
                                        "unit_rotation": unit})


def claim_kronecker_recovery(seed: int = 0) -> ClaimResult:
    rng = np.random.default_rng(seed)
    worst_res, worst_gauge = 0.0, 0.0
    for k in range(20):
        dims = (2, 2) if k % 2 == 0 else (2, 2, 2)
        mats = []
        for d in dims:
            A = rng.standard_normal((d, d))
            mats.append(A @ A.T + 0.3 * np.eye(d))
        M = reduce(np.kron, mats)
        kf = kronecker_decompose(dims, M)
        R = reduce(np.kron, kf.factors)
        worst_res = max(worst_res, float(np.linalg.norm(R - M) / np.linalg.norm(M)))
        E, E2 = Ellipsoid(M), hilbert_product(dims, [Ellipsoid(F) for F in kf.factors])
        for _ in range(200):
            x = rng.standard_normal(M.shape[0])
            g1, g2 = float(gauge(E, x).value), float(gauge(E2, x).value)
            worst_gauge = max(worst_gauge, abs(g1 - g2) / g1)
    ok = worst_res <= 1e-10 and worst_gauge <= 1e-9
    return ClaimResult("kronecker-recovery", "Kronecker factors of Hilbertian products are recovered",
                       ok, {"residual": worst_res, "gauge_deviation": worst_gauge},
                       {"residual": 1e-10, "gauge_deviation": 1e-9})


CLAIMS = {
    "l1-linf-products": claim_l1_linf_products,
    "pi-eps-duality": claim_pi_eps_duality,
    "crossnorm-sandwich": claim_crossnorm_sandwich,
    "gauge-factorization": claim_gauge_factorization,
    "tensoriality-decision": claim_tensoriality_decision,
    "section-uniqueness": claim_section_uniqueness,
    "tensor-map-invariance": claim_tensor_map_invariance,
    "tensorial-bm-distance": claim_tensorial_bm_distance,
    "bilinear-identity-equivalence": claim_bilinear_identity_equivalence,
    "euclidean-sandwich-rigidity": claim_euclidean_sandwich_rigidity,
    "block-matrix-identity": claim_block_matrix_identity,
    "kronecker-recovery": claim_kronecker_recovery,
}

EXACT_CLAIMS = ("l1-linf-products", "pi-eps-duality")


def run_claim(claim_id: str, seed: int = 0) -> ClaimResult:
    t0 = time.perf_counter()
    res = CLAIMS[claim_id](seed=seed)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(only=None, exact_only: bool = False, seed: int = 0) -> list[ClaimResult]:
    ids = list(CLAIMS)
    if exact_only:
        ids = [c for c in ids if c in EXACT_CLAIMS]
    if only:
        unknown = [c for c in only if c not in CLAIMS]
        if unknown:
            raise KeyError(f"unknown claim id(s): {', '.join(unknown)}")
        ids = [c for c in ids if c in only]
    return [run_claim(c, seed) for c in ids]
