"""Dense symmetric / positive definite kernels that the rest of the package builds on.

All inverses are realized through Cholesky solves; an explicit inverse matrix is
formed only when it is itself the requested result. Matrices are real symmetric,
dense, and desk scale (dimensions up to a few dozen).
"""

from __future__ import annotations

import json

import numpy as np
import scipy.linalg

from ._util import atomic_write_text
from .errors import (
    CholeskyFailure,
    ConvergenceFailure,
    DimensionMismatch,
    InvalidArgument,
    ParseError,
    ShapeMismatch,
)

SYMMETRY_TOL = 1e-8  # matrix JSON reader


def _as_square(entries) -> np.ndarray:
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ShapeMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument("matrix entries must be finite")
    return a


class SymMatrix:
    """Real symmetric matrix; input is symmetrized as (A + A^T)/2 on construction."""

    __slots__ = ("a",)

    def __init__(self, entries):
        a = _as_square(entries)
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self.a = a

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def __repr__(self) -> str:
        return f"SymMatrix(n={self.n})"


class SpdMatrix:
    """Symmetric positive definite matrix, validated by Cholesky on construction.

    Input is symmetrized as (A + A^T)/2 first, which removes the roundoff drift
    the iteration maps would otherwise accumulate. The Cholesky factor is cached
    and reused by every solve against this matrix. Instances are immutable and
    safe to share between threads.
    """

    __slots__ = ("a", "chol")

    def __init__(self, entries):
        a = _as_square(entries)
        a = 0.5 * (a + a.T)
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise CholeskyFailure("matrix is not positive definite") from exc
        a.setflags(write=False)
        chol.setflags(write=False)
        self.a = a
        self.chol = chol

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @classmethod
    def identity(cls, n: int) -> "SpdMatrix":
        return cls(np.eye(n))

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in ascending order."""
        return np.linalg.eigvalsh(self.a)

    def trace(self) -> float:
        return float(np.trace(self.a))

    def __repr__(self) -> str:
        return f"SpdMatrix(n={self.n})"


def _mat(x) -> np.ndarray:
    return x.a if isinstance(x, (SpdMatrix, SymMatrix)) else np.asarray(x, dtype=float)


def log_det(x: SpdMatrix) -> float:
    """log of the determinant, accumulated from the Cholesky diagonal."""
    return 2.0 * float(np.sum(np.log(np.diag(x.chol))))


def spd_solve(x: SpdMatrix, b) -> np.ndarray:
    """Solve x @ s = b using the cached Cholesky factor."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != x.n:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, matrix is {x.n}x{x.n}")
    return scipy.linalg.cho_solve((x.chol, True), b, check_finite=False)


def spd_inverse(x: SpdMatrix) -> np.ndarray:
    """Explicit inverse, for the few places where the inverse is the result."""
    inv = spd_solve(x, np.eye(x.n))
    return 0.5 * (inv + inv.T)


def sym_eig(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, orthonormal eigenvectors as columns), so that
    s = V @ diag(vals) @ V.T.
    """
    try:
        vals, vecs = np.linalg.eigh(_mat(s))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("symmetric eigensolver did not converge") from exc
    return vals, vecs


def sym_op_norm(s) -> float:
    """Operator (spectral) norm of a symmetric matrix: max |eigenvalue|."""
    return float(np.max(np.abs(np.linalg.eigvalsh(_mat(s)))))


def max_gen_eig(x: SpdMatrix, y: SpdMatrix) -> float:
    """Smallest lam > 0 with x <= lam * y in the semidefinite order.

    Computed as the top eigenvalue of L^{-1} x L^{-T} where y = L L^T, i.e. one
    Cholesky (cached on y) plus one symmetric eigensolve.
    """
    if x.n != y.n:
        raise DimensionMismatch(f"dimensions differ: {x.n} vs {y.n}")
    w = scipy.linalg.solve_triangular(y.chol, x.a, lower=True, check_finite=False)
    w = scipy.linalg.solve_triangular(y.chol, w.T, lower=True, check_finite=False)
    vals = np.linalg.eigvalsh(0.5 * (w + w.T))
    return float(vals[-1])


def matrix_exp_sym(s: SymMatrix) -> SpdMatrix:
    """Matrix exponential of a symmetric matrix; the result is positive definite."""
    vals, vecs = sym_eig(s)
    return SpdMatrix((vecs * np.exp(vals)) @ vecs.T)


def spd_power(x: SpdMatrix, t: float) -> SpdMatrix:
    """Real matrix power x^t through the eigendecomposition."""
    vals, vecs = np.linalg.eigh(x.a)
    return SpdMatrix((vecs * vals**t) @ vecs.T)


# --- matrix JSON interface ---------------------------------------------------
#
# {"n": <int>, "data": [[row], ...]} with row-major nested arrays.


def _reject_constant(token: str):
    raise ParseError(f"non-finite number {token!r} is not allowed")


def matrix_to_json_obj(x) -> dict:
    a = _mat(x)
    return {"n": int(a.shape[0]), "data": [[float(v) for v in row] for row in a]}


def matrix_from_json_obj(obj) -> SpdMatrix:
    if not isinstance(obj, dict) or "n" not in obj or "data" not in obj:
        raise ParseError('matrix object must have fields "n" and "data"')
    n = obj["n"]
    data = obj["data"]
    if not isinstance(n, int) or n < 1:
        raise ParseError('field "n" must be a positive integer')
    if not isinstance(data, list) or len(data) != n or any(len(row) != n for row in data):
        raise ShapeMismatch(f'field "data" must be {n} rows of {n} numbers')
    a = np.array(data, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ParseError("matrix entries must be finite")
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise ParseError(f"matrix is asymmetric beyond tolerance {SYMMETRY_TOL:g}")
    return SpdMatrix(a)


def save_matrix(x, path: str) -> None:
    atomic_write_text(path, json.dumps(matrix_to_json_obj(x), allow_nan=False) + "\n")


def load_matrix(path: str) -> SpdMatrix:
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return matrix_from_json_obj(obj)
