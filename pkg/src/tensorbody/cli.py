"""Command-line front end.

Exit codes: 0 when the computed verdict is true (or the command simply
succeeded), 1 when it is false, 2 on any input or validation error; errors
are printed as ``{"error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import _numeric as num
from .bm_distance import classical_bm_upper, tensorial_bm_upper, verify_witness
from .bodies import (
    as_hpolytope,
    as_vpolytope,
    polar,
    random_rational_vpolytope,
    random_vpolytope,
    standard_ball,
)
from .ellipsoids import (
    BlockMatrixWitness,
    bilinear_identity_check,
    is_tensorial_ellipsoid,
    block_identity_check,
    sandwich_check_euclidean,
)
from .errors import ShapeMismatch, TensorBodyError
from .products import eps_product, hilbert_product, pi_product
from .serialization import InvalidInput, body_from_json, dumps, matrix_from_json
from .tensor_space import TensorShape
from .tensoriality import counterexample_body, is_tensorial, sections


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInput(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--shape", type=TensorShape.parse, help="factor dimensions, e.g. 2,2")
    p.add_argument("--mode", choices=("float", "exact"), default="float")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=20)
    p.add_argument("-i", "--input", action="append", default=[], help="JSON input file (repeatable)")
    p.add_argument("-o", "--output", help="write JSON here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="tensorbody", description="Convex bodies on tensor products of real spaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    body = sub.add_parser("body", help="construct or convert bodies")
    bsub = body.add_subparsers(dest="action", required=True, parser_class=_Parser)
    lp = bsub.add_parser("lp", parents=[common], help="standard l_p ball")
    lp.add_argument("--dim", type=int)
    lp.add_argument("--p", required=True)
    lp.add_argument("--materialize", action="store_true")
    ce = bsub.add_parser("counterexample", parents=[common], help="non-tensorial diagonal ellipsoid")
    ce.add_argument("--m", type=int, required=True)
    ce.add_argument("--n", type=int, required=True)
    bsub.add_parser("polar", parents=[common], help="polar body")
    cv = bsub.add_parser("convert", parents=[common], help="switch between V- and H-representation")
    cv.add_argument("--to", choices=("v", "h"), required=True)
    rnd = bsub.add_parser("random", parents=[common], help="random V-polytope")
    rnd.add_argument("--dim", type=int, required=True)
    rnd.add_argument("--generators", type=int, required=True)

    tensor = sub.add_parser("tensor", parents=[common], help="tensor products of bodies")
    tensor.add_argument("kind", choices=("pi", "eps", "hilbert"))

    sub.add_parser("check-tensorial", parents=[common], help="decide whether a body is tensorial")
    sub.add_parser("sections", parents=[common], help="section bodies at the canonical anchor")
    bm = sub.add_parser("bm-distance", parents=[common], help="tensorial Banach-Mazur estimate")
    bm.add_argument("--classical", action="store_true", help="also run the unrestricted search")

    ell = sub.add_parser("ellipsoid", help="ellipsoid analysis")
    esub = ell.add_subparsers(dest="action", required=True, parser_class=_Parser)
    esub.add_parser("decompose", parents=[common], help="Kronecker factors of an ellipsoid")
    sw = esub.add_parser("sandwich", parents=[common], help="Euclidean sandwich check")
    sw.add_argument("--restarts", type=int, default=20)
    esub.add_parser("block-identity", parents=[common], help="block-matrix identity check")
    bl = esub.add_parser("bilinear", parents=[common], help="bilinear identity check for a map")
    bl.add_argument("--samples", type=int, default=1000)

    vp = sub.add_parser("verify", parents=[common], help="run the claim battery")
    vp.add_argument("--only", action="append", default=[], help="claim id (repeatable)")
    vp.add_argument("--list", action="store_true", help="list claim ids and exit")
    return parser


def _read_inputs(args, count=None) -> list:
    paths = args.input
    if count is not None and len(paths) != count:
        raise InvalidInput(f"expected {count} input file(s), got {len(paths)}")
    out = []
    for p in paths:
        try:
            with open(p) as fh:
                out.append(json.load(fh))
        except OSError as exc:
            raise InvalidInput(f"cannot read {p}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{p} is not valid JSON: {exc}") from exc
    return out


def _exact(args) -> bool:
    return args.mode == "exact"


def _bodies(args, count=None):
    return [body_from_json(o, exact=_exact(args)) for o in _read_inputs(args, count)]


def _shape(args, d=None) -> TensorShape:
    if args.shape is None:
        raise InvalidInput("--shape is required")
    if d is not None and args.shape.d != d:
        raise ShapeMismatch(f"shape {args.shape} has dimension {args.shape.d}, body has {d}")
    return args.shape


def cmd_body(args):
    exact = _exact(args)
    if args.action == "lp":
        d = args.dim if args.dim is not None else (args.shape.d if args.shape else None)
        if d is None:
            raise InvalidInput("give --dim or --shape")
        p = args.p if args.p in ("inf", "infinity") else float(args.p)
        return standard_ball(d, p, materialize=args.materialize, exact=exact), 0
    if args.action == "counterexample":
        return counterexample_body(args.m, args.n, exact=exact), 0
    if args.action == "random":
        rng = np.random.default_rng(args.seed)
        maker = random_rational_vpolytope if exact else random_vpolytope
        return maker(args.dim, args.generators, rng), 0
    (body,) = _bodies(args, 1)
    if args.action == "polar":
        return polar(body), 0
    return (as_vpolytope(body) if args.to == "v" else as_hpolytope(body)), 0


def cmd_tensor(args):
    factors = _bodies(args)
    shape = _shape(args)
    op = {"pi": pi_product, "eps": eps_product, "hilbert": hilbert_product}[args.kind]
    return op(shape, factors), 0


def cmd_check(args):
    (Q,) = _bodies(args, 1)
    shape = _shape(args, Q.dim)
    r = is_tensorial(shape, Q, args.tol, seed=args.seed)
    return r, 0 if r.verdict else 1


def cmd_sections(args):
    (Q,) = _bodies(args, 1)
    return sections(_shape(args, Q.dim), Q), 0


def cmd_distance(args):
    P, Q = _bodies(args, 2)
    shape = _shape(args, P.dim)
    r = tensorial_bm_upper(shape, P, Q, budget=args.budget, seed=args.seed)
    out = {
        "tensorial": r,
        "witness_valid": verify_witness(P, Q, r.witness, r.upper),
    }
    if args.classical:
        out["classical"] = classical_bm_upper(shape, P, Q, budget=args.budget, seed=args.seed,
                                              seed_map=r.witness)
    return out, 0


def _block_witness(obj) -> BlockMatrixWitness:
    try:
        blocks = {(int(b["k"]) - 1, int(b["i"]) - 1): np.asarray(num.to_float(num.as_array(b["block"])))
                  for b in obj.get("blocks", [])}
        return BlockMatrixWitness(int(obj["m"]), int(obj["n"]), blocks)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput("block-identity input needs m, n and blocks [{k, i, block}]") from exc


def cmd_ellipsoid(args):
    if args.action == "block-identity":
        (obj,) = _read_inputs(args, 1)
        r = block_identity_check(_block_witness(obj), tol=args.tol)
        if r.block is not None:
            r.block = tuple(k + 1 for k in r.block)
        return r, 0 if r.status == "confirmed" else 1
    (obj,) = _read_inputs(args, 1)
    M = matrix_from_json(obj, exact=_exact(args))
    shape = _shape(args, M.shape[0])
    if args.action == "decompose":
        r = is_tensorial_ellipsoid(shape, M, tol=args.tol)
        return r, 0 if r.verdict else 1
    if args.action == "sandwich":
        r = sandwich_check_euclidean(shape, M, tol=args.tol, restarts=args.restarts, seed=args.seed)
        return r, 0 if r.passed else 1
    r = bilinear_identity_check(shape, M, n_samples=args.samples, tol=args.tol, seed=args.seed)
    return r, 0 if r.passed else 1


def cmd_verify(args):
    from .verify import CLAIMS, run_all

    if args.list:
        return {"claims": list(CLAIMS)}, 0
    try:
        results = run_all(only=args.only or None, exact_only=_exact(args), seed=args.seed)
    except KeyError as exc:
        raise InvalidInput(str(exc.args[0])) from exc
    failed = [r.id for r in results if not r.passed]
    summary = {
        "claims": [{k: getattr(r, k) for k in ("id", "title", "passed", "measured", "tolerance", "details")}
                   for r in results],
        "failed": failed,
        "passed": not failed,
    }
    return summary, 0 if not failed else 1


COMMANDS = {
    "body": cmd_body,
    "tensor": cmd_tensor,
    "check-tensorial": cmd_check,
    "sections": cmd_sections,
    "bm-distance": cmd_distance,
    "ellipsoid": cmd_ellipsoid,
    "verify": cmd_verify,
}


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = None
    try:
        args = build_parser().parse_args(argv)
        result, code = COMMANDS[args.command](args)
        _emit(dumps(result), args.output)
        return code
    except TensorBodyError as exc:
        sys.stdout.write(dumps({"error": exc.to_dict()}))
        return 2
    except (OverflowError, ValueError, np.linalg.LinAlgError) as exc:
        sys.stdout.write(dumps({"error": {"code": "invalid-input", "message": str(exc)}}))
        return 2


if __name__ == "__main__":
    sys.exit(main())
