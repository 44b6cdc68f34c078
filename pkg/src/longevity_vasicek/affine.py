"""Closed-form pricing for the two-component Vasicek longevity model.

The joint process is ``z(t) = mu - X(t)`` where ``z = (r, lambda)`` stacks the
short rate and the mortality intensity and each component of ``X`` is an
Ornstein-Uhlenbeck factor. A zero-coupon longevity bond discounts at
``r + lambda``, so its yield is the sum of the two per-component affine yields

    R(tau) = R_inf - w(tau) - H(zeta1 * tau) * x

All rates are decimals per year.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, fields, replace
from typing import Union

import numpy as np
from numpy.typing import ArrayLike

# below this |gamma| the closed form of H loses digits to cancellation
H_SERIES_THRESHOLD = 1e-4


class NegativeIntensityWarning(UserWarning):
    """Survival probability above one, i.e. the implied intensity went negative."""


@dataclass(frozen=True)
class ModelParams:
    """Static parameters of the rate and mortality components.

    ``zeta2_*`` and ``kappa12`` only enter the cross terms of the yield
    adjustment ``w``. An unset (None) ``zeta2_*`` tracks ``zeta1_*``, which
    with the default ``kappa12 = 0`` is the one-factor configuration.
    """

    mu_r: float
    mu_lambda: float
    zeta1_r: float
    zeta1_lambda: float
    kappa11: float
    theta1: float = 0.0
    h_meas: float = 0.0
    kappa12: float = 0.0
    zeta2_r: float | None = None
    zeta2_lambda: float | None = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None and f.name.startswith("zeta2"):
                continue
            if not np.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
        for name in ("zeta1_r", "zeta1_lambda", "zeta2_r", "zeta2_lambda"):
            if self.value(name) <= 0:
                raise ValueError(f"{name} must be strictly positive, got {self.value(name)!r}")
        for name in ("kappa11", "kappa12", "h_meas"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)!r}")

    def value(self, name: str) -> float:
        """Field value with an unset ``zeta2_*`` resolved to its ``zeta1_*``."""
        v = getattr(self, name)
        if v is None:
            return getattr(self, name.replace("zeta2", "zeta1"))
        return v

    @property
    def mu(self) -> np.ndarray:
        return np.array([self.mu_r, self.mu_lambda])

    @property
    def zeta1(self) -> np.ndarray:
        return np.array([self.zeta1_r, self.zeta1_lambda])

    @property
    def zeta2(self) -> np.ndarray:
        return np.array([self.value("zeta2_r"), self.value("zeta2_lambda")])

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def with_exact_convexity(self) -> "ModelParams":
        """Set ``kappa12 = kappa11`` and ``zeta2 = zeta1``.

        With these cross terms the yield adjustment carries the full variance
        of the integrated factor, so prices equal the expectation of
        ``exp(-integral of (r + lambda))`` under the factor dynamics (when
        ``theta1 = 0``).
        """
        return replace(self, kappa12=self.kappa11, zeta2_r=None, zeta2_lambda=None)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        return cls(**{k: (None if v is None else float(v)) for k, v in data.items()})


@dataclass(frozen=True)
class FactorState:
    """Deviation of the latent factors from their long-run means."""

    x_r: float = 0.0
    x_lambda: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.x_r) and np.isfinite(self.x_lambda)):
            raise ValueError("factor state must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x_r, self.x_lambda])


StateLike = Union[FactorState, ArrayLike]


def _state_array(state: StateLike) -> np.ndarray:
    if isinstance(state, FactorState):
        return state.as_array()
    x = np.asarray(state, dtype=float)
    if x.shape != (2,):
        raise ValueError(f"factor state must have shape (2,), got {x.shape}")
    return x


def _tenor_array(tau: ArrayLike) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if np.any(~np.isfinite(tau)) or np.any(tau < 0):
        raise ValueError("tenors must be finite and non-negative")
    return tau


def h_func(gamma: ArrayLike) -> np.ndarray | float:
    """``H(gamma) = (1 - exp(-gamma)) / gamma`` with ``H(0) = 1``.

    A four-term Taylor series is used for ``|gamma| < 1e-4``.
    """
    g = np.asarray(gamma, dtype=float)
    small = np.abs(g) < H_SERIES_THRESHOLD
    safe = np.where(small, 1.0, g)
    closed = -np.expm1(-safe) / safe
    series = 1.0 - g / 2.0 + g * g / 6.0 - g**3 / 24.0
    out = np.where(small, series, closed)
    return out if out.ndim else float(out)


def asymptotic_yield(params: ModelParams) -> np.ndarray:
    """Infinite-maturity yield of each component, shape ``(2,)``."""
    ratio = params.kappa11 / params.zeta1
    return params.mu + params.theta1 * ratio - 0.5 * ratio**2


def w_tau(params: ModelParams, tau: ArrayLike) -> np.ndarray:
    """Finite-maturity yield adjustment, shape ``tau.shape + (2,)``."""
    tau = _tenor_array(tau)[..., None]
    z1, z2 = params.zeta1, params.zeta2
    cross = params.kappa11 * params.kappa12 / (z1 * z2)
    return (
        h_func(z1 * tau) * (params.theta1 * params.kappa11 / z1 - cross)
        + 0.5 * h_func((z1 + z2) * tau) * cross
    )


def component_yields(params: ModelParams, state: StateLike, tau: ArrayLike) -> np.ndarray:
    """Per-component affine yields ``R_inf - w(tau) - H(zeta1 tau) x``.

    Defined at ``tau = 0`` as the limit (instantaneous rates under the
    pricing adjustment). Shape ``tau.shape + (2,)``.
    """
    x = _state_array(state)
    tau = _tenor_array(tau)
    loading = h_func(params.zeta1 * tau[..., None])
    return asymptotic_yield(params) - w_tau(params, tau) - loading * x


def zclb_yield(params: ModelParams, state: StateLike, tau: ArrayLike) -> np.ndarray | float:
    """Continuously compounded yield of the zero-coupon longevity bond."""
    tau_arr = _tenor_array(tau)
    if np.any(tau_arr == 0):
        raise ValueError("yield is undefined at zero tenor; use zclb_price")
    out = component_yields(params, state, tau_arr).sum(axis=-1)
    return out if out.ndim else float(out)


def component_prices(params: ModelParams, state: StateLike, tau: ArrayLike) -> np.ndarray:
    """Rate-only and survival-only discount factors, shape ``tau.shape + (2,)``."""
    tau = _tenor_array(tau)
    return np.exp(-tau[..., None] * component_yields(params, state, tau))


def zclb_price(params: ModelParams, state: StateLike, tau: ArrayLike) -> np.ndarray | float:
    """Price of the zero-coupon longevity bond, ``exp(-tau * yield)``; 1 at ``tau = 0``."""
    tau = _tenor_array(tau)
    out = np.exp(-tau * component_yields(params, state, tau).sum(axis=-1))
    return out if out.ndim else float(out)


def survival_prob(params: ModelParams, state: StateLike, tau: ArrayLike) -> np.ndarray | float:
    """Survival index implied by the mortality component alone.

    The Gaussian factor can drive the intensity negative, in which case the
    value exceeds one. It is returned unclipped and a
    :class:`NegativeIntensityWarning` is emitted.
    """
    tau = _tenor_array(tau)
    out = np.exp(-tau * component_yields(params, state, tau)[..., 1])
    if np.any(out > 1.0):
        warnings.warn(
            "survival probability exceeds 1 (negative implied mortality intensity)",
            NegativeIntensityWarning,
            stacklevel=2,
        )
    return out if out.ndim else float(out)
