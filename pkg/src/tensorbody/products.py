"""Projective, injective and Hilbertian tensor products of bodies.

Polytopal factors are multiplied out into explicit V-/H-polytopes whose
generators (normals) are Kronecker products of the factor generators.
Ellipsoidal factors are never multiplied out for the projective/injective
products; their gauges are evaluated directly instead (nuclear and spectral
norms of a reshaped, whitened coordinate matrix).
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

from . import _numeric as num
from .altmax import tensor_spectral_norm
from .bodies import (
    GENERATOR_DEDUP_TOL,
    Body,
    Ellipsoid,
    GaugeResult,
    HPolytope,
    VPolytope,
    _vgauge,
    as_ellipsoid,
    as_vpolytope,
    is_polytopal,
    polar,
)
from .errors import NotPolytopal, ShapeMismatch
from .tensor_space import TensorShape, _as_shape


def _check_dims(shape: TensorShape, factors) -> None:
    if len(factors) != shape.order or any(f.dim != d for f, d in zip(factors, shape.dims)):
        raise ShapeMismatch(
            f"factor dimensions {[f.dim for f in factors]} do not match shape {shape.dims}"
        )


def kron_rows(blocks) -> np.ndarray:
    """All Kronecker products of one row per block, lexicographic in the block indices."""
    rows = [reduce(np.kron, combo) for combo in itertools.product(*blocks)]
    exact = any(num.is_exact(b) for b in blocks)
    return num.as_array(np.array(rows, dtype=object if exact else float), exact=exact)


def _generator_blocks(factors) -> list[np.ndarray]:
    try:
        return [as_vpolytope(f).generators for f in factors]
    except NotPolytopal as exc:
        raise NotPolytopal(f"projective product needs polytopal factors: {exc}") from exc


def _unify(blocks):
    if any(num.is_exact(b) for b in blocks) and not all(num.is_exact(b) for b in blocks):
        return [num.as_array(b, exact=False) for b in blocks]
    return blocks


def pi_product(shape, factors) -> VPolytope:
    shape = _as_shape(shape)
    _check_dims(shape, factors)
    blocks = _unify(_generator_blocks(factors))
    G = kron_rows(blocks)
    return VPolytope(num.dedupe_signed(G, GENERATOR_DEDUP_TOL))


def eps_product(shape, factors) -> Body:
    shape = _as_shape(shape)
    _check_dims(shape, factors)
    if shape.order == 1:
        return factors[0]
    try:
        blocks = [as_vpolytope(polar(f)).generators for f in factors]
    except NotPolytopal as exc:
        raise NotPolytopal(f"injective product needs polytopal factors: {exc}") from exc
    A = kron_rows(_unify(blocks))
    return HPolytope(num.dedupe_signed(A, GENERATOR_DEDUP_TOL))


def hilbert_product(shape, ellipsoids) -> Ellipsoid:
    shape = _as_shape(shape)
    _check_dims(shape, ellipsoids)
    mats = []
    for e in ellipsoids:
        e2 = as_ellipsoid(e)
        if e2 is None:
            raise ShapeMismatch(f"Hilbertian product needs ellipsoid factors, got {type(e).__name__}")
        mats.append(e2.matrix)
    return Ellipsoid(reduce(np.kron, _unify(mats)))


def _ellipsoid_factors(factors):
    out = [as_ellipsoid(f) for f in factors]
    return None if any(e is None for e in out) else out


def _whitened(shape: TensorShape, ellipsoids, u) -> np.ndarray:
    """(L_1^T (x) ... (x) L_l^T) u reshaped to the tensor shape, M_i = L_i L_i^T."""
    U = np.asarray(num.to_float(u)).reshape(shape.dims)
    for axis, e in enumerate(ellipsoids):
        L = np.linalg.cholesky(num.to_float(e.matrix))
        U = np.moveaxis(np.tensordot(L.T, U, axes=([1], [axis])), 0, axis)
    return U


def _vector(shape: TensorShape, u) -> np.ndarray:
    u = num.as_array(u)
    if u.shape != (shape.d,):
        raise ShapeMismatch(f"vector of shape {u.shape} is not in R^{shape.d}")
    return u


def gauge_pi(shape, factors, u) -> GaugeResult:
    """Projective norm of ``u`` with respect to the factor bodies."""
    shape = _as_shape(shape)
    _check_dims(shape, factors)
    u = _vector(shape, u)
    if all(is_polytopal(f) for f in factors):
        G = kron_rows(_unify(_generator_blocks(factors)))
        return _vgauge(num.dedupe_signed(G, GENERATOR_DEDUP_TOL), u)
    ells = _ellipsoid_factors(factors)
    if ells is not None and shape.order <= 2:
        if shape.order == 1:
            return GaugeResult(float(np.linalg.norm(_whitened(shape, ells, u))))
        s = np.linalg.svd(_whitened(shape, ells, u), compute_uv=False)
        return GaugeResult(float(np.sum(s)), {"singular_values": s})
    raise NotPolytopal("projective gauge supports polytopal factors or two ellipsoid factors")


def gauge_eps(shape, factors, u, rng: np.random.Generator | None = None) -> GaugeResult:
    """Injective norm of ``u``; for three or more ellipsoid factors the value is a best-found lower bound."""
    shape = _as_shape(shape)
    _check_dims(shape, factors)
    u = _vector(shape, u)
    if all(is_polytopal(f) for f in factors):
        blocks = _unify([as_vpolytope(polar(f)).generators for f in factors])
        A = kron_rows(blocks)
        vals = np.abs(A @ u)
        j = int(np.argmax(num.to_float(vals)))
        return GaugeResult(vals[j], {"active_constraint": j})
    ells = _ellipsoid_factors(factors)
    if ells is not None:
        res = tensor_spectral_norm(_whitened(shape, ells, u), rng=rng)
        return GaugeResult(res.value, {"factors": res.factors})
    raise NotPolytopal("injective gauge supports polytopal or ellipsoid factors")
