"""Maximum-likelihood calibration through the Kalman likelihood.

Free parameters are optimized in a transform space (log for speeds, diffusions
and the measurement variance; identity for ``mu`` and ``theta1``) with a
Nelder-Mead simplex and seeded random restarts.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .affine import ModelParams
from .data_io import YieldPanel
from .kalman import FilterError, log_likelihood
from .state_space import build_system

logger = logging.getLogger(__name__)

# each key maps to the ModelParams fields it sets; group keys tie components together
PARAM_GROUPS: dict[str, tuple[str, ...]] = {
    "mu_r": ("mu_r",),
    "mu_lambda": ("mu_lambda",),
    "zeta1_r": ("zeta1_r",),
    "zeta1_lambda": ("zeta1_lambda",),
    "zeta2_r": ("zeta2_r",),
    "zeta2_lambda": ("zeta2_lambda",),
    "kappa11": ("kappa11",),
    "kappa12": ("kappa12",),
    "theta1": ("theta1",),
    "h_meas": ("h_meas",),
    "mu": ("mu_r", "mu_lambda"),
    "zeta1": ("zeta1_r", "zeta1_lambda"),
    "zeta2": ("zeta2_r", "zeta2_lambda"),
}
UNCONSTRAINED = {"mu_r", "mu_lambda", "theta1"}

# a single yield series identifies an intercept, persistence, state variance and noise
SINGLE_TENOR_CAPACITY = 4
FAILED_LOGLIK = -1e12


class CalibrationError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class IdentificationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CalibrationConfig:
    """What to estimate and how.

    ``free`` lists keys of :data:`PARAM_GROUPS`; all other parameters stay at
    their value in ``initial``. ``tol`` is the absolute log-likelihood
    tolerance of the simplex.
    """

    initial: ModelParams
    free: tuple[str, ...] = ("mu", "zeta1", "kappa11", "h_meas")
    dt: float = 1.0 / 252
    restarts: int = 5
    tol: float = 1e-6
    xtol: float = 1e-6
    max_iter: int = 4000
    seed: int = 0
    spread: float = 0.5
    init: str = "stationary"

    def __post_init__(self):
        object.__setattr__(self, "free", tuple(self.free))
        if not self.free:
            raise ValueError("at least one parameter must be free")
        unknown = [k for k in self.free if k not in PARAM_GROUPS]
        if unknown:
            raise ValueError(f"unknown free parameter(s): {unknown}")
        covered = [f for k in self.free for f in PARAM_GROUPS[k]]
        if len(covered) != len(set(covered)):
            raise ValueError(f"free parameters overlap: {self.free}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass
class RestartRecord:
    index: int
    start: dict[str, float]
    start_loglik: float
    loglik: float
    iterations: int
    converged: bool
    message: str


@dataclass
class CalibrationResult:
    params: ModelParams
    std_errors: dict[str, float]
    loglik: float
    iterations: int
    converged: bool
    best_restart: int
    std_errors_available: bool
    free: tuple[str, ...]
    restarts: list[RestartRecord] = field(default_factory=list)

    def estimates(self) -> dict[str, float]:
        return {k: self.params.value(PARAM_GROUPS[k][0]) for k in self.free}

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "estimates": self.estimates(),
            "std_errors": self.std_errors,
            "std_errors_available": self.std_errors_available,
            "loglik": self.loglik,
            "iterations": self.iterations,
            "converged": self.converged,
            "best_restart": self.best_restart,
            "restarts": [r.__dict__ for r in self.restarts],
        }


def _is_log(key: str) -> bool:
    return PARAM_GROUPS[key][0] not in UNCONSTRAINED


def to_transform(params: ModelParams, free: Sequence[str]) -> np.ndarray:
    out = []
    for key in free:
        value = params.value(PARAM_GROUPS[key][0])
        if _is_log(key) and value <= 0:
            raise ValueError(f"{key} is optimized on a log scale and needs a positive starting value")
        out.append(np.log(value) if _is_log(key) else value)
    return np.array(out, dtype=float)


def from_transform(u: np.ndarray, base: ModelParams, free: Sequence[str]) -> ModelParams:
    changes = {}
    for key, ui in zip(free, u):
        value = float(np.exp(ui)) if _is_log(key) else float(ui)
        for name in PARAM_GROUPS[key]:
            changes[name] = value
    return base.replace(**changes)


def model_loglik(params: ModelParams, panel: YieldPanel, dt: float, init="stationary") -> float:
    system = build_system(params, dt, panel.tenors)
    return log_likelihood(system, panel, init)


def _objective(panel: YieldPanel, config: CalibrationConfig) -> Callable[[np.ndarray], float]:
    def negloglik(u: np.ndarray) -> float:
        try:
            params = from_transform(u, config.initial, config.free)
            value = model_loglik(params, panel, config.dt, config.init)
        except (FilterError, ValueError, FloatingPointError, OverflowError):
            return -FAILED_LOGLIK
        return -value if np.isfinite(value) else -FAILED_LOGLIK

    return negloglik


def _nelder_mead(fun, x0: np.ndarray, config: CalibrationConfig):
    options = {"xatol": config.xtol, "fatol": config.tol, "maxiter": config.max_iter, "maxfev": 2 * config.max_iter}
    first = minimize(fun, x0, method="Nelder-Mead", options=options)
    # fresh simplex around the optimum guards against a collapsed simplex
    polish = minimize(fun, first.x, method="Nelder-Mead", options=options)
    best = polish if polish.fun <= first.fun else first
    return best, int(first.nit + polish.nit), bool(polish.success), str(polish.message)


def _check_identifiability(panel: YieldPanel, config: CalibrationConfig) -> None:
    n_free = len(config.free)
    if panel.n_observed_steps < 2 * n_free:
        raise ValueError(
            f"panel has {panel.n_observed_steps} observed steps; "
            f"need at least {2 * n_free} for {n_free} free parameters"
        )
    if panel.tenors.size == 1 and n_free > SINGLE_TENOR_CAPACITY:
        warnings.warn(
            f"{n_free} free parameters with a single tenor: at most "
            f"{SINGLE_TENOR_CAPACITY} combinations are identified",
            IdentificationWarning,
            stacklevel=3,
        )


def calibrate(panel: YieldPanel, config: CalibrationConfig) -> CalibrationResult:
    """Maximize the Kalman log-likelihood over the free parameters.

    Restart 0 starts at ``config.initial``; restart ``k`` perturbs it in
    transform space with Gaussian noise of scale ``config.spread`` drawn from
    the ``k``-th child of ``SeedSequence(config.seed)``. The best likelihood
    wins, ties going to the lowest restart index.
    """
    _check_identifiability(panel, config)
    fun = _objective(panel, config)
    u0 = to_transform(config.initial, config.free)
    if fun(u0) >= -FAILED_LOGLIK:
        raise CalibrationError(
            f"log-likelihood is not finite at the initial guess {config.initial.to_dict()}",
            {"initial": config.initial.to_dict()},
        )

    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    records: list[RestartRecord] = []
    best = None
    for k, child in enumerate(children):
        start = u0 if k == 0 else u0 + config.spread * np.random.default_rng(child).standard_normal(u0.size)
        start_value = fun(start)
        if start_value >= -FAILED_LOGLIK:
            records.append(
                RestartRecord(k, _natural(start, config), FAILED_LOGLIK, FAILED_LOGLIK, 0, False,
                              "non-finite likelihood at start")
            )
            continue
        res, nit, converged, message = _nelder_mead(fun, start, config)
        rec = RestartRecord(
            index=k,
            start=_natural(start, config),
            start_loglik=-float(start_value),
            loglik=-float(res.fun),
            iterations=nit,
            converged=converged,
            message=str(message),
        )
        records.append(rec)
        logger.debug("restart %d: loglik %.6f converged=%s", k, rec.loglik, converged)
        if best is None or rec.loglik > best[0].loglik:
            best = (rec, res.x)

    if best is None or not any(r.converged for r in records):
        top = best[0].__dict__ if best else None
        raise CalibrationError(
            "no restart converged",
            {"best_so_far": top, "restarts": [r.__dict__ for r in records]},
        )

    rec, u_best = best
    params = from_transform(u_best, config.initial, config.free)
    se, available = standard_errors(panel, params, config)
    return CalibrationResult(
        params=params,
        std_errors=se,
        loglik=rec.loglik,
        iterations=rec.iterations,
        converged=rec.converged,
        best_restart=rec.index,
        std_errors_available=available,
        free=config.free,
        restarts=records,
    )


def _natural(u: np.ndarray, config: CalibrationConfig) -> dict[str, float]:
    params = from_transform(u, config.initial, config.free)
    return {k: params.value(PARAM_GROUPS[k][0]) for k in config.free}


def numerical_hessian(fun: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """Central finite-difference Hessian."""
    x = np.asarray(x, dtype=float)
    n = x.size
    hess = np.empty((n, n))
    f0 = fun(x)
    e = np.eye(n) * step
    for i in range(n):
        hess[i, i] = (fun(x + e[i]) - 2.0 * f0 + fun(x - e[i])) / step**2
        for j in range(i):
            val = (
                fun(x + e[i] + e[j]) - fun(x + e[i] - e[j]) - fun(x - e[i] + e[j]) + fun(x - e[i] - e[j])
            ) / (4.0 * step**2)
            hess[i, j] = hess[j, i] = val
    return hess


def hessian_standard_errors(loglik: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-4):
    """Standard errors from the inverse negative Hessian of ``loglik`` at ``x``.

    Returns ``(se, available)``; ``se`` is all-NaN when the negative Hessian
    is not positive definite.
    """
    neg_hess = -numerical_hessian(loglik, x, step)
    neg_hess = 0.5 * (neg_hess + neg_hess.T)
    try:
        np.linalg.cholesky(neg_hess)
    except np.linalg.LinAlgError:
        return np.full(x.size, np.nan), False
    cov = np.linalg.inv(neg_hess)
    return np.sqrt(np.diag(cov)), True


def standard_errors(
    panel: YieldPanel,
    params: ModelParams,
    config: CalibrationConfig,
    step: float = 1e-4,
) -> tuple[dict[str, float], bool]:
    """Delta-method standard errors of the free parameters at ``params``."""
    free = config.free
    base = config.initial.replace(**params.to_dict())
    u = to_transform(base, free)

    def loglik(v: np.ndarray) -> float:
        try:
            return model_loglik(from_transform(v, base, free), panel, config.dt, config.init)
        except (FilterError, ValueError):
            return np.nan

    se_u, available = hessian_standard_errors(loglik, u, step)
    if not available or not np.all(np.isfinite(se_u)):
        return {k: float("nan") for k in free}, False
    # d(natural)/d(transform) is the value itself under the log map
    jac = np.array([np.exp(ui) if _is_log(k) else 1.0 for k, ui in zip(free, u)])
    return {k: float(s) for k, s in zip(free, se_u * jac)}, True
