"""Riemannian gradient descent on the positive definite cone, for comparison.

Uses the affine-invariant metric <A, B>_X = trace(X^{-1} A X^{-1} B), under
which the Riemannian gradient is X * grad(X) * X and the exact exponential map
Exp_X(V) = X^{1/2} expm(X^{-1/2} V X^{-1/2}) X^{1/2} is affordable at desk
scale. Backtracking keeps the objective monotone, which makes the baseline a
reproducible competitor for the fixed-point solvers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .cone import thompson
from .datum import BLDatum, validate
from .errors import StepFailure, ValidationFailed
from .matcore import SpdMatrix, SymMatrix, log_det, sym_op_norm
from .objective import eval_F, pushforwards
from .solve import CONVERGED, MAX_ITER, IterTrace, SolveResult, TraceRow


@dataclass
class RgdConfig:
    step_size: float = 0.1
    backtracking: bool = True
    backtrack_factor: float = 0.5
    sufficient_decrease: float = 1e-4
    tol_grad: float = 1e-8  # on the Riemannian gradient norm
    max_iter: int = 10000

    def __post_init__(self):
        if self.step_size <= 0.0:
            raise ValueError("step_size must be positive")


def riem_grad(datum: BLDatum, x: SpdMatrix) -> SymMatrix:
    """Riemannian gradient sym(X * grad(X) * X) under the affine-invariant metric."""
    g = eval_F(datum, x).gradient.a
    return SymMatrix(x.a @ g @ x.a)


def riem_grad_norm(x: SpdMatrix, xi: SymMatrix) -> float:
    """sqrt(trace(X^{-1} xi X^{-1} xi)), the metric norm of a tangent vector."""
    w = scipy.linalg.solve_triangular(x.chol, xi.a, lower=True, check_finite=False)
    w = scipy.linalg.solve_triangular(x.chol, w.T, lower=True, check_finite=False)
    return float(np.linalg.norm(w))


def _sqrt_pair(x: SpdMatrix) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(x.a)
    rt = np.sqrt(vals)
    return (vecs * rt) @ vecs.T, (vecs / rt) @ vecs.T


def _exp_step(x_half: np.ndarray, x_inv_half: np.ndarray, xi: np.ndarray, eta: float) -> SpdMatrix:
    inner = x_inv_half @ (-eta * xi) @ x_inv_half
    vals, vecs = np.linalg.eigh(0.5 * (inner + inner.T))
    e = (vecs * np.exp(vals)) @ vecs.T
    return SpdMatrix(x_half @ e @ x_half)


def rgd_step(datum: BLDatum, x: SpdMatrix, eta: float) -> SpdMatrix:
    """Exponential-map update Exp_X(-eta * riem_grad(X)); stays on the cone."""
    if eta < 0.0:
        raise ValueError("eta must be nonnegative")
    x_half, x_inv_half = _sqrt_pair(x)
    return _exp_step(x_half, x_inv_half, riem_grad(datum, x).a, eta)


def _f_value_scale(datum: BLDatum, x: SpdMatrix) -> tuple[float, float]:
    """Objective value plus the magnitude scale of its cancelling terms.

    The scale bounds the roundoff noise of the value: the objective is a sum of
    log-determinants, so its evaluation noise tracks their sizes rather than
    the (possibly tiny) final value.
    """
    terms = [w * log_det(t) for w, t in zip(datum.weights, pushforwards(datum, x))]
    ld = log_det(x)
    value = float(sum(terms) - ld)
    scale = 1.0 + sum(abs(t) for t in terms) + abs(ld)
    return value, scale


def solve_rgd(datum: BLDatum, config: RgdConfig) -> tuple[SolveResult, IterTrace]:
    """Descend the objective from the identity; stop on the Riemannian gradient norm.

    With backtracking on, each accepted step satisfies an Armijo decrease; once
    the requested decrease falls below the double-precision noise of the value,
    steps are accepted on non-increase up to that noise (measured differences
    are pure roundoff there, while the gradient keeps contracting). If not even
    that succeeds the run stops as stalled rather than loop forever. In the
    SolveResult, residual is the final Riemannian gradient norm and grad_norm
    the Euclidean one.
    """
    report = validate(datum, subspace_checks=False)
    if not report.accepted:
        raise ValidationFailed("datum rejected by hard validation checks")

    x = SpdMatrix.identity(datum.d)
    trace = IterTrace()
    t0 = time.perf_counter_ns()

    ev = eval_F(datum, x)
    f = ev.value
    xi = SymMatrix(x.a @ ev.gradient.a @ x.a)
    rnorm = riem_grad_norm(x, xi)
    eigs = x.eigenvalues()
    trace.append(
        TraceRow(0, f, f, rnorm, math.nan, float(eigs[0]), float(eigs[-1]),
                 time.perf_counter_ns() - t0)
    )

    status = MAX_ITER
    iterations = 0
    eta_prev = config.step_size
    step_len = math.nan
    f_scale = 1.0 + abs(f)
    stalled = False

    for k in range(1, config.max_iter + 1):
        if rnorm <= config.tol_grad:
            status = CONVERGED
            break
        x_half, x_inv_half = _sqrt_pair(x)
        if config.backtracking:
            eta = min(config.step_size, 2.0 * eta_prev)
            # below this, the Armijo decrease is invisible in double precision
            fp_floor = 1e-14 * f_scale
            at_noise_floor = config.sufficient_decrease * eta * rnorm * rnorm <= fp_floor
            cand = None
            while True:
                trial = _exp_step(x_half, x_inv_half, xi.a, eta)
                f_trial, trial_scale = _f_value_scale(datum, trial)
                need = config.sufficient_decrease * eta * rnorm * rnorm
                if f_trial <= f - need or (need <= fp_floor and f_trial <= f + fp_floor):
                    cand = trial
                    break
                eta *= config.backtrack_factor
                if eta < 1e-16:
                    if at_noise_floor:  # value differences are all noise here
                        stalled = True
                        break
                    raise StepFailure(f"iteration {k}: backtracking underflow")
            if stalled:
                break
            eta_prev = eta
            f_scale = trial_scale
        else:
            cand = _exp_step(x_half, x_inv_half, xi.a, config.step_size)

        step_len = thompson(cand, x)
        x = cand
        iterations = k
        ev = eval_F(datum, x)
        f = ev.value
        xi = SymMatrix(x.a @ ev.gradient.a @ x.a)
        rnorm = riem_grad_norm(x, xi)
        eigs = x.eigenvalues()
        trace.append(
            TraceRow(k, ev.value, ev.value, rnorm, step_len, float(eigs[0]),
                     float(eigs[-1]), time.perf_counter_ns() - t0)
        )
    else:
        if rnorm <= config.tol_grad:
            status = CONVERGED

    final = eval_F(datum, x)
    result = SolveResult(
        X_star=x,
        bl_constant=math.exp(-0.5 * final.value),
        F_value=final.value,
        iterations=iterations,
        converged=status == CONVERGED,
        residual=rnorm,
        grad_norm=sym_op_norm(final.gradient),
        status=status,
    )
    return result, trace
