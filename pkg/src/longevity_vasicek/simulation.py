"""Exact simulation of the factor process, synthetic panels and survival paths.

Random streams are keyed on ``(seed, purpose, block)`` through
``numpy.random.SeedSequence`` spawn keys. Paths are generated in fixed blocks
of :data:`BLOCK_SIZE`, so the draws for a given path never depend on how many
other paths are requested alongside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .affine import FactorState, ModelParams
from .data_io import YieldPanel
from .state_space import build_system, ou_transition, ou_variance, stationary_moments

BLOCK_SIZE = 4096
_STATES, _NOISE, _SURVIVAL = 0, 1, 2


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass(frozen=True)
class SimulationConfig:
    dt: float = 1.0 / 252
    n_steps: int = 500
    tenors: tuple[float, ...] = (1.0, 5.0, 10.0)
    seed: int = 0
    n_paths: int = 1
    initial_state: FactorState | None = None  # None: draw from the stationary law

    def __post_init__(self):
        object.__setattr__(self, "tenors", tuple(float(t) for t in self.tenors))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")


def _initial_block(params: ModelParams, config: SimulationConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    if config.initial_state is not None:
        return np.broadcast_to(config.initial_state.as_array(), (n, 2)).copy()
    _, cov = stationary_moments(params)
    return rng.standard_normal((n, 2)) * np.sqrt(np.diag(cov))


def simulate_paths(params: ModelParams, config: SimulationConfig) -> np.ndarray:
    """Factor paths ``X_1..X_n`` for every path, shape ``(n_paths, n_steps, 2)``."""
    T = ou_transition(params.zeta1, config.dt)
    sd = np.sqrt(ou_variance(params.zeta1, params.kappa11, config.dt))
    out = np.empty((config.n_paths, config.n_steps, 2))
    for b, lo in enumerate(range(0, config.n_paths, BLOCK_SIZE)):
        hi = min(lo + BLOCK_SIZE, config.n_paths)
        rng = _stream(config.seed, _STATES, b)
        x = _initial_block(params, config, rng, BLOCK_SIZE)
        eps = rng.standard_normal((BLOCK_SIZE, config.n_steps, 2))
        for n in range(config.n_steps):
            x = T * x + sd * eps[:, n]
            out[lo:hi, n] = x[: hi - lo]
    return out


def simulate_states(params: ModelParams, config: SimulationConfig) -> np.ndarray:
    """One factor path ``X_1..X_n``, shape ``(n_steps, 2)``."""
    return simulate_paths(params, replace(config, n_paths=1))[0]


@dataclass(eq=False)
class SimulatedPanel:
    panel: YieldPanel
    noiseless: np.ndarray
    states: np.ndarray


def business_dates(n: int, start: str = "2000-01-03") -> np.ndarray:
    return np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")


def simulate_panel(params: ModelParams, config: SimulationConfig) -> SimulatedPanel:
    """Yields ``d + Z X_n + eps_n`` with ``eps_n ~ N(0, h_meas I)`` on the config's tenors."""
    system = build_system(params, config.dt, config.tenors)
    states = simulate_states(params, config)
    noiseless = system.intercept + states @ system.loading.T
    noise = _stream(config.seed, _NOISE).standard_normal(noiseless.shape)
    observed = noiseless + math.sqrt(params.h_meas) * noise
    panel = YieldPanel(
        dates=business_dates(config.n_steps),
        tenors=system.tenors,
        values=observed,
        source={"synthetic": True, "seed": config.seed, "dt": config.dt, "units": "decimal"},
    )
    return SimulatedPanel(panel=panel, noiseless=noiseless, states=states)


@dataclass(eq=False)
class SurvivalTable:
    horizons: np.ndarray
    mean: np.ndarray
    std_error: np.ndarray
    p05: np.ndarray
    p95: np.ndarray
    negative_fraction: np.ndarray  # share of paths whose intensity went below 0 by each horizon
    n_paths: int

    def rows(self) -> list[dict[str, float]]:
        return [
            {
                "horizon": float(h),
                "mean": float(m),
                "std_error": float(s),
                "p05": float(lo),
                "p95": float(hi),
                "negative_fraction": float(nf),
            }
            for h, m, s, lo, hi, nf in zip(
                self.horizons, self.mean, self.std_error, self.p05, self.p95, self.negative_fraction
            )
        ]


def monte_carlo_survival(
    params: ModelParams,
    config: SimulationConfig,
    horizons: Sequence[float],
) -> SurvivalTable:
    """Monte Carlo survival index ``exp(-integral of lambda)`` at each horizon.

    The intensity ``lambda = mu_lambda - X_lambda`` is simulated exactly on a
    grid of spacing ``config.dt`` and integrated with the trapezoid rule;
    horizons between grid points are linearly interpolated. Negative
    intensities are counted, not clipped.
    """
    horizons = np.asarray(horizons, dtype=float)
    if horizons.ndim != 1 or horizons.size == 0:
        raise ValueError("horizons must be a non-empty 1-d sequence")
    if np.any(horizons < 0) or np.any(np.diff(horizons) <= 0):
        raise ValueError("horizons must be non-negative and strictly increasing")

    dt = config.dt
    n_grid = max(1, math.ceil(horizons[-1] / dt - 1e-9))
    zeta = params.zeta1_lambda
    T = math.exp(-zeta * dt)
    sd = math.sqrt(float(ou_variance(np.array([zeta]), params.kappa11, dt)[0]))
    # interpolation weights of each horizon on the grid
    pos = np.minimum(horizons / dt, n_grid)
    k = np.minimum(np.floor(pos).astype(int), n_grid - 1)
    frac = pos - k

    values = np.empty((config.n_paths, horizons.size))
    negative = np.zeros(horizons.size)
    for b, lo in enumerate(range(0, config.n_paths, BLOCK_SIZE)):
        hi = min(lo + BLOCK_SIZE, config.n_paths)
        rng = _stream(config.seed, _SURVIVAL, b)
        x0 = _initial_block(params, config, rng, BLOCK_SIZE)[:, 1]
        eps = rng.standard_normal((BLOCK_SIZE, n_grid))
        lam = np.empty((BLOCK_SIZE, n_grid + 1))
        lam[:, 0] = params.mu_lambda - x0
        x = x0
        for n in range(n_grid):
            x = T * x + sd * eps[:, n]
            lam[:, n + 1] = params.mu_lambda - x
        lam = lam[: hi - lo]
        cum = np.zeros_like(lam)
        cum[:, 1:] = np.cumsum(0.5 * dt * (lam[:, 1:] + lam[:, :-1]), axis=1)
        integral = cum[:, k] * (1.0 - frac) + cum[:, k + 1] * frac
        values[lo:hi] = np.exp(-integral)
        went_negative = np.minimum.accumulate(lam, axis=1) < 0
        # a horizon counts the grid points up to and including the one it reaches
        last = np.minimum(np.ceil(pos - 1e-12).astype(int), n_grid)
        negative += went_negative[:, last].sum(axis=0)
    values[:, horizons == 0] = 1.0

    n = config.n_paths
    std = values.std(axis=0, ddof=1) if n > 1 else np.zeros(horizons.size)
    return SurvivalTable(
        horizons=horizons,
        mean=values.mean(axis=0),
        std_error=std / math.sqrt(n),
        p05=np.percentile(values, 5, axis=0),
        p95=np.percentile(values, 95, axis=0),
        negative_fraction=negative / n,
        n_paths=n,
    )
