"""Picard iterations for the fixed-point maps, with stopping logic and traces.

Three maps share one driver:

    plain_g      X <- (sum_j w_j L_j^T (L_j X L_j^T)^{-1} L_j)^{-1}
    regularized  X <- (mu*I + sum_j w_j L_j^T (L_j X L_j^T)^{-1} L_j)^{-1}
    normalized   the plain step followed by division by the trace

Iteration stops when the Thompson length of the step drops below `tol`, the
metric in which the maps are non-expansive (and, with mu > 0, contractive).
The gradient norm is reported but never used for stopping.

A practical note on the regularized map: for feasible data the objective is
scale invariant, so the trace term has no interior stationary point and the
regularized iterates track the optimal ray while drifting toward the origin by
a factor of roughly (1 - mu*lambda) per step. The Thompson step length
therefore plateaus near mu * lambda_max(X) instead of reaching 0. Choose
`tol` above that plateau (tol of the order of `epsilon` works; the constant
exp(-F/2) is scale invariant and already accurate there), or accept a MaxIter
status whose bl_constant is still correct.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ._util import atomic_write_text
from .cone import thompson
from .datum import BLDatum, validate
from .errors import CholeskyFailure, DimensionMismatch, InvalidArgument, ValidationFailed
from .matcore import SpdMatrix, spd_solve, sym_op_norm
from .objective import eval_F, pre_inversion_sum

CONVERGED = "Converged"
MAX_ITER = "MaxIter"
INFEASIBILITY_SUSPECTED = "InfeasibilitySuspected"

SOLVERS = ("plain_g", "regularized", "normalized")


@dataclass
class SolveConfig:
    solver: str = "plain_g"
    tol: float = 1e-10
    max_iter: int = 10000
    epsilon: float = 1e-6
    mu_override: float | None = None
    x0: SpdMatrix | None = None  # None means the identity
    blowup_cond: float = 1e12

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise InvalidArgument(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.tol <= 0.0:
            raise InvalidArgument("tol must be positive")
        if self.max_iter < 1:
            raise InvalidArgument("max_iter must be at least 1")
        if self.epsilon <= 0.0:
            raise InvalidArgument("epsilon must be positive")
        if self.mu_override is not None and self.mu_override <= 0.0:
            raise InvalidArgument("mu_override must be positive when given")


@dataclass
class SolveResult:
    X_star: SpdMatrix
    bl_constant: float
    F_value: float
    iterations: int
    converged: bool
    residual: float
    grad_norm: float  # operator norm of the unregularized gradient at X_star
    status: str


@dataclass
class TraceRow:
    iter: int
    F: float
    F_mu: float
    grad_norm: float
    thompson_step: float
    min_eig: float
    max_eig: float
    time_ns: int


class IterTrace:
    """Per-iteration log; row 0 is the start point (its thompson_step is nan).

    `grad_norm` is the operator norm of the gradient of the objective actually
    iterated (regularized when mu > 0). `mu_events` records (iteration, mu)
    whenever the regularization parameter is set or re-derived.
    """

    HEADER = ("iter", "F", "F_mu", "grad_norm", "thompson_step", "min_eig", "max_eig", "time_ns")

    def __init__(self):
        self.rows: list[TraceRow] = []
        self.mu_events: list[tuple[int, float]] = []

    def append(self, row: TraceRow) -> None:
        self.rows.append(row)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def write_csv(self, path: str) -> None:
        lines = [",".join(self.HEADER)]
        for r in self.rows:
            lines.append(
                f"{r.iter},{r.F!r},{r.F_mu!r},{r.grad_norm!r},{r.thompson_step!r},"
                f"{r.min_eig!r},{r.max_eig!r},{r.time_ns}"
            )
        atomic_write_text(path, "\n".join(lines) + "\n")


def step_G(datum: BLDatum, x: SpdMatrix) -> SpdMatrix:
    """One plain fixed-point step: invert the weighted pullback sum."""
    s = SpdMatrix(pre_inversion_sum(datum, x))
    return SpdMatrix(spd_solve(s, np.eye(x.n)))


def step_G_mu(datum: BLDatum, x: SpdMatrix, mu: float) -> SpdMatrix:
    """One regularized step; eigenvalues of the result lie strictly below 1/mu."""
    if mu <= 0.0:
        raise InvalidArgument("mu must be positive")
    s = SpdMatrix(pre_inversion_sum(datum, x) + mu * np.eye(x.n))
    return SpdMatrix(spd_solve(s, np.eye(x.n)))


def step_G_tilde(datum: BLDatum, x: SpdMatrix) -> SpdMatrix:
    """One normalized step: the plain step scaled to unit trace.

    The map is homogeneous, so normalizing picks the unit-trace representative
    of the same ray; any other norm would serve, the trace is linear and exact.
    """
    g = step_G(datum, x)
    return SpdMatrix(g.a / g.trace())


def choose_mu(epsilon: float, r_est: float, d: int) -> float:
    """Regularization weight for a target accuracy: (eps/2) / (2 r (d - eps/4)).

    `r_est` bounds the operator norms seen along the run; larger bounds force a
    smaller mu so the trace term cannot perturb the value by more than the
    accuracy target.
    """
    if epsilon <= 0.0:
        raise InvalidArgument("epsilon must be positive")
    if r_est <= 0.0:
        raise InvalidArgument("r_est must be positive")
    if d < 1:
        raise InvalidArgument("d must be a positive integer")
    if d <= epsilon / 4.0:
        raise InvalidArgument("d must exceed epsilon/4")
    return (epsilon / 2.0) / (2.0 * r_est * (d - epsilon / 4.0))


def contraction_diagnostic(
    datum: BLDatum, x: SpdMatrix, y: SpdMatrix, mu: float
) -> tuple[float, float]:
    """Observed step distance versus the contraction bound gamma/(gamma+mu) * d(x,y).

    gamma is the larger operator norm of the two pre-inversion sums. Returns
    (lhs, bound); non-expansivity corresponds to mu = 0 where the bound is
    d(x, y) itself.
    """
    if mu < 0.0:
        raise InvalidArgument("mu must be nonnegative")
    sx = pre_inversion_sum(datum, x)
    sy = pre_inversion_sum(datum, y)
    gamma = max(sym_op_norm(sx), sym_op_norm(sy))
    eye = np.eye(x.n)
    gx = SpdMatrix(spd_solve(SpdMatrix(sx + mu * eye), eye))
    gy = SpdMatrix(spd_solve(SpdMatrix(sy + mu * eye), eye))
    lhs = thompson(gx, gy)
    bound = gamma / (gamma + mu) * thompson(x, y)
    return lhs, bound


def _steps_growing(steps: list) -> bool:
    tail = [s for s in steps[-11:] if not math.isnan(s)]
    return len(tail) >= 2 and tail[-1] > tail[0]


def solve_fixed_point(datum: BLDatum, config: SolveConfig) -> tuple[SolveResult, IterTrace]:
    """Iterate the selected map from x0 until the Thompson step is below tol.

    Raises ValidationFailed unless the datum passes the hard checks (ranks,
    weight range, scaling). Flags InfeasibilitySuspected when the iterate's
    condition number exceeds blowup_cond, or on MaxIter with growing steps;
    infeasible data have no finite fixed point, so blowup is the expected
    signature. Numeric failures carry the iteration index.
    """
    report = validate(datum, subspace_checks=False)
    if not report.accepted:
        raise ValidationFailed(
            "datum rejected: "
            f"rank_ok={report.rank_ok}, scaling_ok={report.scaling_ok} "
            f"(residual {report.scaling_residual:g}), weight_range_ok={report.weight_range_ok}"
        )
    x = config.x0 if config.x0 is not None else SpdMatrix.identity(datum.d)
    if x.n != datum.d:
        raise DimensionMismatch(f"x0 is {x.n}x{x.n}, datum has d={datum.d}")

    trace = IterTrace()
    mu = 0.0
    r_seen = r_base = 0.0
    if config.solver == "regularized":
        r_seen = r_base = max(1.0, float(x.eigenvalues()[-1]))
        mu = config.mu_override if config.mu_override is not None else choose_mu(
            config.epsilon, r_base, datum.d
        )
        trace.mu_events.append((0, mu))

    t0 = time.perf_counter_ns()

    def record(k: int, xk: SpdMatrix, step_len: float) -> tuple[float, float]:
        ev = eval_F(datum, xk)
        f_mu = ev.value + mu * xk.trace()
        g = ev.gradient.a if mu == 0.0 else ev.gradient.a + mu * np.eye(xk.n)
        eigs = xk.eigenvalues()
        trace.append(
            TraceRow(
                iter=k,
                F=ev.value,
                F_mu=f_mu,
                grad_norm=sym_op_norm(g),
                thompson_step=step_len,
                min_eig=float(eigs[0]),
                max_eig=float(eigs[-1]),
                time_ns=time.perf_counter_ns() - t0,
            )
        )
        return float(eigs[0]), float(eigs[-1])

    try:
        record(0, x, math.nan)
    except CholeskyFailure as exc:
        raise CholeskyFailure(f"iteration 0: {exc}") from exc
    status = MAX_ITER
    iterations = 0
    step_len = math.nan

    for k in range(1, config.max_iter + 1):
        try:
            if config.solver == "plain_g":
                x_next = step_G(datum, x)
            elif config.solver == "regularized":
                x_next = step_G_mu(datum, x, mu)
            else:
                x_next = step_G_tilde(datum, x)
            step_len = thompson(x_next, x)
            x = x_next
            iterations = k
            lo, hi = record(k, x, step_len)
        except CholeskyFailure as exc:
            raise CholeskyFailure(f"iteration {k}: {exc}") from exc

        if config.solver == "regularized" and config.mu_override is None:
            r_seen = max(r_seen, hi)
            if r_seen > 2.0 * r_base:  # restart the contraction budget
                r_base = r_seen
                mu = choose_mu(config.epsilon, r_base, datum.d)
                trace.mu_events.append((k, mu))

        if lo <= 0.0 or hi / lo > config.blowup_cond:
            status = INFEASIBILITY_SUSPECTED
            break
        if step_len <= config.tol:
            status = CONVERGED
            break

    if status == MAX_ITER and _steps_growing(trace.column("thompson_step")):
        status = INFEASIBILITY_SUSPECTED

    final = eval_F(datum, x)
    result = SolveResult(
        X_star=x,
        bl_constant=math.exp(-0.5 * final.value),
        F_value=final.value,
        iterations=iterations,
        converged=status == CONVERGED,
        residual=step_len,
        grad_norm=sym_op_norm(final.gradient),
        status=status,
    )
    return result, trace
