"""Exact discrete-time state-space form of the model.

State equation (exact OU transition over an interval ``dt``)::

    X_n = T X_{n-1} + eta_n,        eta_n ~ N(0, V)

Measurement equation over a tenor grid::

    y_n = d + Z X_n + eps_n,        eps_n ~ N(0, h_meas I)

``T`` and ``Z`` are the ``transition`` and ``loading`` members.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .affine import ModelParams, asymptotic_yield, h_func, w_tau


def ou_transition(zeta: np.ndarray, dt: float) -> np.ndarray:
    return np.exp(-zeta * dt)


def ou_variance(zeta: np.ndarray, kappa: float, dt: float) -> np.ndarray:
    """Conditional variance ``kappa^2 (1 - exp(-2 zeta dt)) / (2 zeta)``."""
    # kappa^2 dt H(2 zeta dt) has the random-walk limit built in
    return kappa**2 * dt * h_func(2.0 * zeta * dt)


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    dt: float
    transition: np.ndarray
    process_cov: np.ndarray
    loading: np.ndarray
    intercept: np.ndarray
    meas_cov: np.ndarray
    tenors: np.ndarray
    mean_reversion: np.ndarray
    diffusion: float

    @property
    def n_tenors(self) -> int:
        return self.tenors.size

    def transition_over(self, dt: float) -> tuple[np.ndarray, np.ndarray]:
        """Transition matrix and process covariance for an arbitrary interval."""
        if dt == self.dt:
            return self.transition, self.process_cov
        if dt <= 0:
            raise ValueError(f"interval must be positive, got {dt!r}")
        return (
            np.diag(ou_transition(self.mean_reversion, dt)),
            np.diag(ou_variance(self.mean_reversion, self.diffusion, dt)),
        )


def build_system(params: ModelParams, dt: float, tenors: Sequence[float]) -> DiscreteSystem:
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive, got {dt!r}")
    tenors = np.atleast_1d(np.asarray(tenors, dtype=float))
    if tenors.ndim != 1 or tenors.size == 0:
        raise ValueError("tenors must be a non-empty 1-d sequence")
    if np.any(~np.isfinite(tenors)) or np.any(tenors <= 0):
        raise ValueError("tenors must be strictly positive")
    if np.any(np.diff(tenors) <= 0):
        raise ValueError("tenors must be strictly increasing (no duplicates)")

    zeta = params.zeta1
    loading = -h_func(zeta[None, :] * tenors[:, None])
    intercept = (asymptotic_yield(params) - w_tau(params, tenors)).sum(axis=-1)
    for arr in (loading, intercept):
        arr.setflags(write=False)
    return DiscreteSystem(
        dt=float(dt),
        transition=np.diag(ou_transition(zeta, dt)),
        process_cov=np.diag(ou_variance(zeta, params.kappa11, dt)),
        loading=loading,
        intercept=intercept,
        meas_cov=params.h_meas * np.eye(tenors.size),
        tenors=tenors,
        mean_reversion=zeta,
        diffusion=float(params.kappa11),
    )


def stationary_moments(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Stationary mean and covariance of the factor, ``(0, diag(kappa^2 / (2 zeta)))``."""
    zeta = params.zeta1
    if np.any(zeta <= 0):
        raise ValueError("stationary law requires positive mean reversion")
    return np.zeros(2), np.diag(params.kappa11**2 / (2.0 * zeta))


def system_stationary_moments(system: DiscreteSystem) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros(2), np.diag(system.diffusion**2 / (2.0 * system.mean_reversion))
