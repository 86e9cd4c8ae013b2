"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can emit
``{"error": {"code": ..., "message": ...}}`` payloads.
"""

from __future__ import annotations


class TensorBodyError(ValueError):
    code = "error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def to_dict(self) -> dict:
        out = {"code": self.code, "message": str(self)}
        if self.details:
            out["details"] = {k: _plain(v) for k, v in self.details.items()}
        return out


def _plain(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)


class IndexOutOfRange(TensorBodyError):
    code = "index-out-of-range"


class ShapeMismatch(TensorBodyError):
    code = "shape-mismatch"


class InvalidDimension(TensorBodyError):
    code = "invalid-dimension"


class SingularFactor(TensorBodyError):
    code = "singular-factor"


class SingularMatrix(TensorBodyError):
    code = "singular-matrix"


class NotDecomposable(TensorBodyError):
    code = "not-decomposable"


class ZeroVector(TensorBodyError):
    code = "zero-vector"


class DegenerateBody(TensorBodyError):
    code = "degenerate-body"


class DegenerateSection(TensorBodyError):
    code = "degenerate-section"


class DimensionTooLarge(TensorBodyError):
    code = "dimension-too-large"


class NotPolytopal(TensorBodyError):
    code = "not-polytopal"


class InvalidP(TensorBodyError):
    code = "invalid-p"


class NumericallyAmbiguous(TensorBodyError):
    code = "numerically-ambiguous"


class NotProportional(TensorBodyError):
    code = "not-proportional"


class NotKronecker(TensorBodyError):
    code = "not-kronecker"


class NotPD(TensorBodyError):
    code = "not-positive-definite"


class NotUnitVector(TensorBodyError):
    code = "not-unit-vector"
