"""Problem data: m surjective linear maps of shape d'xd plus a weight vector.

Covers construction and validation, generators for the closed-form instances
and for random instances, JSON persistence, and the brute-force subdeterminant
constant.

Storage convention: each map is kept as the d'xd matrix L_j acting on column
vectors, and every quadratic form downstream uses the pushforward
T_j(X) = L_j X L_j^T of a dxd matrix X to a d'xd' matrix.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._util import atomic_write_text
from .errors import InvalidShape, ParseError, ShapeMismatch, TooLarge

RANK_RTOL = 1e-10  # singular values below RANK_RTOL * sigma_max count as zero
SCALING_TOL = 1e-10
_SUBSPACE_SLACK = 1e-9
_COORD_SUBSPACE_CAP = 20000  # per dimension; sampled beyond this


@dataclass(frozen=True, eq=False)
class BLDatum:
    """m linear maps of shape dprime x d with weights, stored immutably."""

    d: int
    dprime: int
    m: int
    maps: tuple
    weights: np.ndarray

    @classmethod
    def from_maps(cls, maps, weights) -> "BLDatum":
        mats = []
        for j, raw in enumerate(maps):
            a = np.array(raw, dtype=float)
            if a.ndim != 2:
                raise ShapeMismatch(f"map {j} is not a matrix")
            if not np.all(np.isfinite(a)):
                raise ShapeMismatch(f"map {j} has non-finite entries")
            mats.append(a)
        if not mats:
            raise ShapeMismatch("a datum needs at least one map")
        dprime, d = mats[0].shape
        for j, a in enumerate(mats):
            if a.shape != (dprime, d):
                raise ShapeMismatch(f"map {j} has shape {a.shape}, expected {(dprime, d)}")
        w = np.array(weights, dtype=float)
        if w.ndim != 1 or w.shape[0] != len(mats):
            raise ShapeMismatch(f"expected {len(mats)} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ShapeMismatch("weights must be finite")
        for a in mats:
            a.setflags(write=False)
        w.setflags(write=False)
        return cls(d=d, dprime=dprime, m=len(mats), maps=tuple(mats), weights=w)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BLDatum)
            and self.d == other.d
            and self.dprime == other.dprime
            and self.m == other.m
            and np.array_equal(self.weights, other.weights)
            and all(np.array_equal(a, b) for a, b in zip(self.maps, other.maps))
        )

    def __repr__(self) -> str:
        return f"BLDatum(d={self.d}, dprime={self.dprime}, m={self.m})"


@dataclass
class ValidationReport:
    """Outcome of validate(); a datum is solvable iff the hard checks pass.

    The subspace check is a sampled heuristic: it can exhibit violations but
    never proves feasibility. `subspace_heuristic_ok is None` means the
    heuristic was skipped.
    """

    rank_ok: list
    scaling_ok: bool
    scaling_residual: float
    weight_range_ok: bool
    subspace_heuristic_ok: bool | None
    sampled_violations: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return bool(all(self.rank_ok) and self.scaling_ok and self.weight_range_ok)

    def to_json_obj(self) -> dict:
        return {
            "rank_ok": [bool(v) for v in self.rank_ok],
            "scaling_ok": bool(self.scaling_ok),
            "scaling_residual": float(self.scaling_residual),
            "weight_range_ok": bool(self.weight_range_ok),
            "subspace_heuristic_ok": self.subspace_heuristic_ok,
            "sampled_violations": list(self.sampled_violations),
            "accepted": self.accepted,
        }


def _matrix_rank(a: np.ndarray) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def _subspace_violation(datum: BLDatum, basis: np.ndarray, label: str):
    """Check dim(H) <= sum_j w_j dim(L_j H) for H spanned by the basis columns."""
    k = basis.shape[1]
    rhs = 0.0
    for L, w in zip(datum.maps, datum.weights):
        rhs += w * _matrix_rank(L @ basis)
    if k > rhs + _SUBSPACE_SLACK:
        return f"{label}: dim {k} > weighted image dims {rhs:.6g}"
    return None


def validate(
    datum: BLDatum,
    *,
    subspace_checks: bool = True,
    random_per_dim: int = 100,
    seed: int = 0,
) -> ValidationReport:
    """Validate a datum for solving.

    Hard checks (gate solving): every map has full row rank, weights lie in
    (0, 1], and the dimensions satisfy sum_j w_j * dprime = d within 1e-10.
    The heuristic part samples subspaces against the dimension condition: all
    coordinate subspaces (capped per dimension) plus `random_per_dim` uniform
    random subspaces per dimension 1..d-1. It reports only "no violation
    found", never a proof.
    """
    rank_ok = [_matrix_rank(L) == datum.dprime for L in datum.maps]
    weight_range_ok = bool(np.all(datum.weights > 0.0) and np.all(datum.weights <= 1.0))
    residual = abs(float(np.sum(datum.weights) * datum.dprime) - datum.d)
    scaling_ok = residual <= SCALING_TOL

    if not subspace_checks:
        return ValidationReport(rank_ok, scaling_ok, residual, weight_range_ok, None)

    violations = []
    rng = np.random.default_rng(seed)
    eye = np.eye(datum.d)
    for k in range(1, datum.d):
        n_coord = math.comb(datum.d, k)
        if n_coord <= _COORD_SUBSPACE_CAP:
            index_sets = itertools.combinations(range(datum.d), k)
        else:
            index_sets = (
                tuple(sorted(rng.choice(datum.d, size=k, replace=False)))
                for _ in range(_COORD_SUBSPACE_CAP)
            )
        for idx in index_sets:
            v = _subspace_violation(datum, eye[:, list(idx)], f"coordinate subspace {idx}")
            if v:
                violations.append(v)
        for t in range(random_per_dim):
            q, _ = np.linalg.qr(rng.standard_normal((datum.d, k)))
            v = _subspace_violation(datum, q, f"random subspace (dim {k}, draw {t})")
            if v:
                violations.append(v)

    return ValidationReport(
        rank_ok, scaling_ok, residual, weight_range_ok, not violations, violations
    )


# --- generators ---------------------------------------------------------------


def gen_holder(d: int, m: int) -> BLDatum:
    """m identity maps on R^d with uniform weights 1/m."""
    if d < 1 or m < 1:
        raise InvalidShape("need d >= 1 and m >= 1")
    return BLDatum.from_maps([np.eye(d)] * m, np.full(m, 1.0 / m))


def gen_young() -> BLDatum:
    """The three coordinate/difference maps R^2 -> R with weights 2/3 each."""
    maps = [[[1.0, 0.0]], [[0.0, 1.0]], [[1.0, -1.0]]]
    return BLDatum.from_maps(maps, [2.0 / 3.0] * 3)


def gen_random(d: int, dprime: int, m: int, seed: int) -> BLDatum:
    """Random datum with standard normal maps and uniform weights d/(m*dprime).

    Deterministic for a given seed. Weights are chosen so the scaling condition
    holds exactly; any rank-deficient draw is regenerated.
    """
    if dprime > d:
        raise InvalidShape(f"dprime={dprime} must not exceed d={d}")
    w = d / (m * dprime)
    if not 0.0 < w < 1.0:
        raise InvalidShape(f"uniform weight d/(m*dprime) = {w:g} is outside (0, 1)")
    rng = np.random.default_rng(seed)
    maps = []
    for _ in range(m):
        while True:
            L = rng.standard_normal((dprime, d))
            if _matrix_rank(L) == dprime:
                break
        maps.append(L)
    return BLDatum.from_maps(maps, np.full(m, w))


# --- subdeterminant constant ----------------------------------------------------


def critical_c(datum: BLDatum, limit: int = 10**6) -> float:
    """min over maps of the largest |det| over all dprime x dprime column minors.

    Pure brute force over column index sets; guarded by comb(d, dprime) <= limit.
    """
    n_sets = math.comb(datum.d, datum.dprime)
    if n_sets > limit:
        raise TooLarge(f"comb({datum.d},{datum.dprime}) = {n_sets} exceeds limit {limit}")
    best_per_map = []
    for L in datum.maps:
        best = 0.0
        for idx in itertools.combinations(range(datum.d), datum.dprime):
            best = max(best, abs(float(np.linalg.det(L[:, idx]))))
        best_per_map.append(best)
    return min(best_per_map)


# --- JSON persistence -----------------------------------------------------------
#
# {"d": int, "dprime": int, "m": int, "weights": [...], "maps": [[[row]...]...]}


def datum_to_json_obj(datum: BLDatum) -> dict:
    return {
        "d": datum.d,
        "dprime": datum.dprime,
        "m": datum.m,
        "weights": [float(w) for w in datum.weights],
        "maps": [[[float(v) for v in row] for row in L] for L in datum.maps],
    }


def datum_from_json_obj(obj) -> BLDatum:
    if not isinstance(obj, dict):
        raise ParseError("datum file must contain a JSON object")
    for key in ("d", "dprime", "m", "weights", "maps"):
        if key not in obj:
            raise ParseError(f'missing field "{key}"')
    d, dprime, m = obj["d"], obj["dprime"], obj["m"]
    for key, val in (("d", d), ("dprime", dprime), ("m", m)):
        if not isinstance(val, int) or val < 1:
            raise ParseError(f'field "{key}" must be a positive integer')
    if not isinstance(obj["maps"], list) or len(obj["maps"]) != m:
        raise ShapeMismatch(f'field "maps" must list {m} matrices')
    if not isinstance(obj["weights"], list) or len(obj["weights"]) != m:
        raise ShapeMismatch(f'field "weights" must list {m} numbers')
    datum = BLDatum.from_maps(obj["maps"], obj["weights"])
    if datum.d != d or datum.dprime != dprime:
        raise ShapeMismatch(
            f"declared shape ({dprime}x{d}) does not match maps "
            f"({datum.dprime}x{datum.d})"
        )
    return datum


def _reject_constant(token: str):
    raise ParseError(f"non-finite number {token!r} is not allowed")


def save_datum(datum: BLDatum, path: str) -> None:
    atomic_write_text(path, json.dumps(datum_to_json_obj(datum), allow_nan=False) + "\n")


def load_datum(path: str) -> BLDatum:
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return datum_from_json_obj(obj)
