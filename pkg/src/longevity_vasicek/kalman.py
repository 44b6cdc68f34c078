"""Kalman filter and exact Gaussian log-likelihood over a :class:`DiscreteSystem`.

Prediction::

    a = T x,            P = T B T' + V

Update on the observed entries of ``y``::

    v = y - (d + Z a),  F = H + Z P Z'
    x = a + P Z' F^-1 v,  B = P - P Z' F^-1 Z P

and the step contributes ``-0.5 (m log 2 pi + log|F| + v' F^-1 v)`` to the
log-likelihood. When every entry of a step is missing the prediction is
carried forward. The next prediction is then taken from the last updated
state across the whole elapsed interval, which is exact for the OU
transition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from . import _kernels
from .data_io import YieldPanel
from .state_space import DiscreteSystem, system_stationary_moments

LOG_2PI = np.log(2.0 * np.pi)
DIFFUSE_SCALE = 1e6


class FilterError(RuntimeError):
    """The innovation covariance of a step could not be factorized."""

    def __init__(self, message: str, step: int | None = None, condition_number: float | None = None):
        self.step = step
        self.condition_number = condition_number
        detail = []
        if step is not None:
            detail.append(f"step {step}")
        if condition_number is not None:
            detail.append(f"cond(F) = {condition_number:.3g}")
        super().__init__(f"{message} ({', '.join(detail)})" if detail else message)


@dataclass(eq=False)
class FilterStep:
    predicted_mean: np.ndarray
    predicted_cov: np.ndarray
    filtered_mean: np.ndarray
    filtered_cov: np.ndarray
    innovation: np.ndarray | None
    innovation_cov: np.ndarray | None
    step_loglik: float
    observed: np.ndarray


@dataclass(eq=False)
class FilterOutput:
    steps: list[FilterStep]
    total_loglik: float

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def filtered_means(self) -> np.ndarray:
        return np.array([s.filtered_mean for s in self.steps]).reshape(-1, 2)

    @property
    def filtered_covs(self) -> np.ndarray:
        return np.array([s.filtered_cov for s in self.steps]).reshape(-1, 2, 2)

    @property
    def predicted_means(self) -> np.ndarray:
        return np.array([s.predicted_mean for s in self.steps]).reshape(-1, 2)

    @property
    def predicted_covs(self) -> np.ndarray:
        return np.array([s.predicted_cov for s in self.steps]).reshape(-1, 2, 2)

    @property
    def step_logliks(self) -> np.ndarray:
        return np.array([s.step_loglik for s in self.steps])


class Update(NamedTuple):
    mean: np.ndarray
    cov: np.ndarray
    innovation: np.ndarray | None
    innovation_cov: np.ndarray | None
    step_loglik: float


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def predict(
    prev_mean: np.ndarray,
    prev_cov: np.ndarray,
    system: DiscreteSystem,
    dt: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """One-interval prediction; ``dt`` defaults to the system's interval."""
    T, V = system.transition_over(system.dt if dt is None else dt)
    mean = T @ np.asarray(prev_mean, dtype=float)
    cov = _sym(T @ np.asarray(prev_cov, dtype=float) @ T.T + V)
    return mean, cov


def update(
    pred_mean: np.ndarray,
    pred_cov: np.ndarray,
    obs: np.ndarray,
    system: DiscreteSystem,
    step: int | None = None,
) -> Update:
    """Condition the prediction on the non-NaN entries of ``obs``."""
    obs = np.asarray(obs, dtype=float).reshape(-1)
    if obs.size != system.n_tenors:
        raise ValueError(f"observation has {obs.size} entries, system has {system.n_tenors} tenors")
    seen = ~np.isnan(obs)
    if not seen.any():
        return Update(pred_mean, pred_cov, None, None, 0.0)

    Z = system.loading[seen]
    d = system.intercept[seen]
    H = system.meas_cov[np.ix_(seen, seen)]
    v = obs[seen] - (d + Z @ pred_mean)
    F = _sym(H + Z @ pred_cov @ Z.T)
    try:
        chol = linalg.cho_factor(F, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        raise FilterError(
            "innovation covariance is singular",
            step=step,
            condition_number=float(np.linalg.cond(F)),
        ) from None
    PZt = pred_cov @ Z.T
    mean = pred_mean + PZt @ linalg.cho_solve(chol, v)
    cov = _sym(pred_cov - PZt @ linalg.cho_solve(chol, PZt.T))
    logdet = 2.0 * np.log(np.diag(chol[0])).sum()
    loglik = -0.5 * (seen.sum() * LOG_2PI + logdet + v @ linalg.cho_solve(chol, v))
    return Update(mean, cov, v, F, float(loglik))


def information_form_cov(pred_cov: np.ndarray, loading: np.ndarray, meas_cov: np.ndarray) -> np.ndarray:
    """Updated covariance as ``(P^-1 + Z' H^-1 Z)^-1``; needs invertible ``P`` and ``H``."""
    info = np.linalg.inv(pred_cov) + loading.T @ np.linalg.solve(meas_cov, loading)
    return _sym(np.linalg.inv(info))


def initial_moments(system: DiscreteSystem, init=None) -> tuple[np.ndarray, np.ndarray]:
    """Resolve ``init``: None or ``"stationary"``, ``"diffuse"``, or an explicit ``(mean, cov)``."""
    if init is None or (isinstance(init, str) and init == "stationary"):
        return system_stationary_moments(system)
    if isinstance(init, str):
        if init == "diffuse":
            mean, cov = system_stationary_moments(system)
            # a degenerate stationary law (kappa = 0) still needs a proper prior
            cov = DIFFUSE_SCALE * np.where(cov > 0, cov, 1.0) * np.eye(2)
            return mean, cov
        raise ValueError(f"unknown initialization {init!r}")
    mean, cov = init
    return np.asarray(mean, dtype=float).reshape(2), np.asarray(cov, dtype=float).reshape(2, 2)


def _check_tenors(system: DiscreteSystem, panel: YieldPanel) -> None:
    if panel.tenors.shape != system.tenors.shape or not np.allclose(
        panel.tenors, system.tenors, rtol=1e-12, atol=0.0
    ):
        raise ValueError(f"panel tenors {panel.tenors.tolist()} do not match system tenors {system.tenors.tolist()}")


def _elapsed_clock(system: DiscreteSystem, panel: YieldPanel):
    """Return ``elapsed(n, anchor)``, the time from step ``anchor`` (-1 = prior) to step ``n``."""
    if panel.times is None:
        return lambda n, anchor: system.dt * (n - anchor)
    times = panel.times
    start = times[0] - system.dt
    return lambda n, anchor: times[n] - (start if anchor < 0 else times[anchor])


def run_filter(system: DiscreteSystem, panel: YieldPanel, init=None) -> FilterOutput:
    _check_tenors(system, panel)
    mean, cov = initial_moments(system, init)
    elapsed = _elapsed_clock(system, panel)
    anchor = -1
    steps: list[FilterStep] = []
    total = 0.0
    for n in range(len(panel)):
        a, P = predict(mean, cov, system, dt=elapsed(n, anchor))
        upd = update(a, P, panel.values[n], system, step=n)
        seen = ~np.isnan(panel.values[n])
        if seen.any():
            mean, cov, anchor = upd.mean, upd.cov, n
        total += upd.step_loglik
        steps.append(FilterStep(a, P, upd.mean, upd.cov, upd.innovation, upd.innovation_cov, upd.step_loglik, seen))
    return FilterOutput(steps=steps, total_loglik=float(total))


def log_likelihood(system: DiscreteSystem, panel: YieldPanel, init=None) -> float:
    """Total log-likelihood of the panel (compiled path; same result as :func:`run_filter`)."""
    _check_tenors(system, panel)
    mean, cov = initial_moments(system, init)
    if panel.times is None:
        times = system.dt * np.arange(1, len(panel) + 1, dtype=float)
        use_times = False
    else:
        times = panel.times
        use_times = True
    total, bad_step = _kernels.filter_loglik(
        system.intercept,
        np.ascontiguousarray(system.loading),
        np.ascontiguousarray(np.diag(system.meas_cov)),
        system.mean_reversion,
        system.diffusion,
        system.dt,
        np.ascontiguousarray(panel.values),
        np.ascontiguousarray(times, dtype=float),
        use_times,
        mean,
        np.ascontiguousarray(cov),
    )
    if bad_step >= 0:
        # rerun the reference path to get the structured error for that step
        run_filter(system, panel, init)
        raise FilterError("innovation covariance is singular", step=int(bad_step))
    return float(total)


def stack_innovations(output: FilterOutput, n_tenors: int) -> np.ndarray:
    """Innovations as an ``(N, M)`` array with NaN where an entry was missing."""
    out = np.full((len(output), n_tenors), np.nan)
    for i, s in enumerate(output.steps):
        if s.innovation is not None:
            out[i, s.observed] = s.innovation
    return out


def filter_yields(system: DiscreteSystem, output: FilterOutput) -> np.ndarray:
    """Model yields at the filtered states, shape ``(N, M)``."""
    return system.intercept + output.filtered_means @ system.loading.T

