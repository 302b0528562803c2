"""Maximum-likelihood estimation of one MNL model on one dataset.

Newton iterations on the exact Hessian with step-halving, starting from
theta = 0 (the objective is globally concave, so the start only affects the
iteration count). If the Hessian solve fails the step falls back to a BFGS
secant approximation of the inverse curvature. Covariance comes from the
observed information (inverse negative Hessian) at the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .data import Dataset
from .errors import (
    NonConvergenceError,
    NonIdentificationError,
    NumericError,
    UndefinedStatisticError,
)
from .modelspec import ModelSpec, ParameterVector, bind_design
from .likelihood import _design_inputs


@dataclass(frozen=True)
class EstimateOptions:
    gradient_tol: float = 1e-6  # max-norm convergence threshold
    ll_rel_tol: float = 1e-10  # relative LL-change convergence threshold
    max_iterations: int = 200
    max_halvings: int = 30
    condition_limit: float = 1e10  # beyond this the information matrix is singular

    def as_dict(self) -> dict:
        return {
            "gradient_tol": self.gradient_tol,
            "ll_rel_tol": self.ll_rel_tol,
            "max_iterations": self.max_iterations,
            "max_halvings": self.max_halvings,
            "condition_limit": self.condition_limit,
        }


@dataclass(frozen=True)
class EstimationResult:
    """Converged parameters with covariance, t-ratios, and fit log-likelihoods."""

    theta_hat: ParameterVector
    covariance: np.ndarray
    t_ratios: np.ndarray
    ll_converged: float
    ll_null: float
    ll_zero: float
    iterations: int
    converged: bool
    gradient_max: float
    n_obs: int
    diagnostics: tuple[str, ...] = ()
    options: EstimateOptions = field(default_factory=EstimateOptions)

    @property
    def n_params(self) -> int:
        return self.theta_hat.layout.n_params

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    def slot_names(self) -> tuple[str, ...]:
        return self.theta_hat.layout.slot_names()


@dataclass(frozen=True)
class FitStatistics:
    rho_squared: float
    rho_squared_adj: float


def null_log_likelihood(dataset: Dataset) -> float:
    """Saturated constants-only LL: sum over outcomes of W_i * ln(W_i / W)."""
    weights = dataset.weights
    total = float(weights.sum())
    value = 0.0
    for i in range(dataset.outcome_set.n_outcomes):
        w_i = float(weights[dataset.outcome_indices == i].sum())
        if w_i > 0.0:
            value += w_i * math.log(w_i / total)
    return value


def _bfgs_update(h_inv: np.ndarray, step: np.ndarray, grad_delta: np.ndarray) -> np.ndarray:
    # update for the inverse of the negated Hessian; curvature pair (s, y) with y = -delta(grad)
    y = -grad_delta
    sy = float(step @ y)
    if sy <= 1e-12:
        return h_inv
    rho = 1.0 / sy
    k = step.shape[0]
    eye = np.eye(k)
    left = eye - rho * np.outer(step, y)
    return left @ h_inv @ left.T + rho * np.outer(step, step)


def _deficient_slots(neg_hessian: np.ndarray, condition_limit: float) -> list[int]:
    eigvals, eigvecs = np.linalg.eigh(neg_hessian)
    cutoff = max(eigvals.max(), 0.0) / condition_limit
    slots: set[int] = set()
    for j in range(eigvals.shape[0]):
        if eigvals[j] <= cutoff:
            vec = np.abs(eigvecs[:, j])
            slots.update(int(i) for i in np.flatnonzero(vec >= 0.5 * vec.max()))
    return sorted(slots)


def estimate(
    model: ModelSpec, dataset: Dataset, options: EstimateOptions | None = None
) -> EstimationResult:
    """Fit the model by maximum likelihood.

    Raises
    ------
    NonConvergenceError
        Iteration cap exceeded or the line search stalled away from an
        optimum; the exception carries the last iterate.
    NonIdentificationError
        The information matrix at the optimum is singular past the condition
        limit; the exception names the offending slots.
    """
    options = options or EstimateOptions()
    if dataset.n_obs == 0:
        raise ValueError("dataset is empty")

    design = bind_design(model, dataset.variable_names)
    layout = design.layout
    n_params = layout.n_params
    inputs = _design_inputs(design, dataset)
    n_outcomes = design.n_outcomes

    diagnostics: list[str] = []
    referenced = sorted({int(o) for o in design.entry_outcome})
    counts = dataset.outcome_counts()
    for out in referenced:
        if counts[out] == 0:
            diagnostics.append(
                f"outcome {model.outcome_set.labels[out]!r} appears in the model "
                "but never in the data; its coefficients are not identified"
            )
    max_floored = 0

    def full_eval(values: np.ndarray):
        nonlocal max_floored
        ll, grad, hess, n_floored = _kernels.loglik_grad_hess(*inputs, values, n_outcomes)
        if not math.isfinite(ll):
            raise NumericError("log-likelihood is not finite")
        max_floored = max(max_floored, n_floored)
        return ll, grad, hess

    def ll_only(values: np.ndarray) -> float:
        nonlocal max_floored
        ll, n_floored = _kernels.loglik(*inputs, values, n_outcomes)
        max_floored = max(max_floored, n_floored)
        return ll

    theta = np.zeros(n_params)
    ll, grad, hess = full_eval(theta)
    ll_zero = ll
    h_inv_approx = np.eye(n_params)
    used_fallback = False
    line_search_failed = False
    ll_stalls = 0  # consecutive sub-threshold LL gains
    iterations = 0
    converged = False

    while True:
        if float(np.abs(grad).max()) < options.gradient_tol:
            converged = True
            break
        if ll_stalls >= 3:
            # LL-change criterion: the objective has stopped moving. Requiring
            # consecutive stalls lets the quadratic Newton tail push the
            # gradient under its own tolerance first in well-posed problems.
            diagnostics.append(
                "converged on log-likelihood stall with gradient max-norm "
                f"{float(np.abs(grad).max()):.3e} above {options.gradient_tol:g}"
            )
            converged = True
            break
        if iterations >= options.max_iterations:
            break

        neg_hess = -hess
        direction = None
        try:
            np.linalg.cholesky(neg_hess)  # positive-definiteness probe
            direction = np.linalg.solve(neg_hess, grad)
        except np.linalg.LinAlgError:
            direction = None
        if direction is not None and (
            not np.isfinite(direction).all() or float(grad @ direction) <= 0.0
        ):
            direction = None
        if direction is None:
            direction = h_inv_approx @ grad
            used_fallback = True

        # accept within summation-noise slack: near the optimum the true Newton
        # gain sinks below the evaluation noise of a several-thousand-unit LL
        slack = 1e-12 * (abs(ll) + 1.0)
        step = 1.0
        new_theta = theta + direction
        new_ll = ll_only(new_theta)
        halvings = 0
        while not (math.isfinite(new_ll) and new_ll >= ll - slack) and halvings < options.max_halvings:
            step *= 0.5
            halvings += 1
            new_theta = theta + step * direction
            new_ll = ll_only(new_theta)

        iterations += 1
        if not (math.isfinite(new_ll) and new_ll >= ll - slack):
            line_search_failed = True
            break

        prev_ll, prev_grad, prev_theta = ll, grad, theta
        theta = new_theta
        ll, grad, hess = full_eval(theta)
        h_inv_approx = _bfgs_update(h_inv_approx, theta - prev_theta, grad - prev_grad)
        ll_stalls = ll_stalls + 1 if _ll_converged(ll, prev_ll, options.ll_rel_tol) else 0

    gradient_max = float(np.abs(grad).max())
    if not converged:
        converged = gradient_max < options.gradient_tol

    if max_floored > 0:
        diagnostics.append(
            f"observed-outcome probability floored for {max_floored} observation(s) "
            "during optimization (possible quasi-separation)"
        )
    if used_fallback:
        diagnostics.append("Hessian solve failed at least once; used quasi-Newton secant step")

    result_stub = ParameterVector(theta.copy(), layout)
    if not converged:
        partial = _build_result(
            result_stub, np.full((n_params, n_params), np.nan), np.full(n_params, np.nan),
            ll, dataset, ll_zero, iterations, False, gradient_max, diagnostics, options,
        )
        reason = (
            f"line search stalled after {options.max_halvings} halvings"
            if line_search_failed
            else f"no convergence after {iterations} iterations"
        )
        raise NonConvergenceError(
            f"{reason} (gradient max-norm {gradient_max:.3e} >= {options.gradient_tol:g})",
            last_result=partial,
        )

    neg_hess = -hess
    eigvals = np.linalg.eigvalsh(neg_hess)
    min_eig = float(eigvals.min())
    max_eig = float(eigvals.max())
    singular = (
        not math.isfinite(min_eig)
        or min_eig <= 0.0
        or max_eig / min_eig > options.condition_limit
    )
    if singular:
        slots = _deficient_slots(neg_hess, options.condition_limit)
        names = ", ".join(layout.slot_names()[i] for i in slots) or "unknown"
        raise NonIdentificationError(
            "information matrix is singular or near-singular at the optimum "
            f"(condition {max_eig / max(min_eig, 1e-300):.2e}); "
            f"unidentified slots: {names}",
            slots=slots,
        )
    condition = max_eig / min_eig
    if condition > 0.01 * options.condition_limit:
        diagnostics.append(
            f"information matrix is ill-conditioned (condition {condition:.2e}); "
            "standard errors for weakly identified slots are unreliable"
        )

    covariance = np.linalg.inv(neg_hess)
    covariance = 0.5 * (covariance + covariance.T)
    std = np.sqrt(np.maximum(np.diag(covariance), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_ratios = np.where(std > 0.0, theta / std, 0.0)

    return _build_result(
        result_stub, covariance, t_ratios, ll, dataset, ll_zero,
        iterations, True, gradient_max, diagnostics, options,
    )


def _ll_converged(new_ll: float, old_ll: float, rel_tol: float) -> bool:
    return abs(new_ll - old_ll) < rel_tol * (abs(new_ll) + 1.0)


def _build_result(
    theta_hat, covariance, t_ratios, ll, dataset, ll_zero,
    iterations, converged, gradient_max, diagnostics, options,
) -> EstimationResult:
    return EstimationResult(
        theta_hat=theta_hat,
        covariance=covariance,
        t_ratios=np.asarray(t_ratios, dtype=np.float64),
        ll_converged=float(ll),
        ll_null=null_log_likelihood(dataset),
        ll_zero=float(ll_zero),
        iterations=iterations,
        converged=converged,
        gradient_max=gradient_max,
        n_obs=dataset.n_obs,
        diagnostics=tuple(diagnostics),
        options=options,
    )


def fit_statistics(result: EstimationResult) -> FitStatistics:
    """McFadden rho-squared against the theta = 0 baseline, plus the K-adjusted variant."""
    if not result.converged:
        raise ValueError("fit statistics require a converged result")
    if result.ll_zero == 0.0:
        raise UndefinedStatisticError("baseline log-likelihood is zero; rho-squared undefined")
    rho = 1.0 - result.ll_converged / result.ll_zero
    rho_adj = 1.0 - (result.ll_converged - result.n_params) / result.ll_zero
    return FitStatistics(rho_squared=rho, rho_squared_adj=rho_adj)
