"""Compiled likelihood recursion used inside the optimizer.

Mirrors :func:`longevity_vasicek.kalman.run_filter` for a diagonal
transition and diagonal measurement noise.
"""

import math

import numpy as np
from numba import njit

_LOG_2PI = math.log(2.0 * math.pi)
_H_SERIES_THRESHOLD = 1e-4


@njit(cache=True)
def _h(g):
    if abs(g) < _H_SERIES_THRESHOLD:
        return 1.0 - g / 2.0 + g * g / 6.0 - g * g * g / 24.0
    return -math.expm1(-g) / g


@njit(cache=True)
def filter_loglik(intercept, loading, meas_var, zeta, kappa, dt, values, times, use_times, mean0, cov0):
    """Return ``(total_loglik, bad_step)``; ``bad_step`` is -1 unless a factorization failed."""
    n_steps, n_ten = values.shape
    mean = mean0.copy()
    cov = cov0.copy()
    a = np.empty(2)
    P = np.empty((2, 2))
    idx = np.empty(n_ten, dtype=np.int64)
    F = np.empty((n_ten, n_ten))
    L = np.zeros((n_ten, n_ten))
    v = np.empty(n_ten)
    PZt = np.empty((n_ten, 2))
    total = 0.0
    anchor = -1
    for n in range(n_steps):
        if use_times:
            if anchor < 0:
                elapsed = times[n] - (times[0] - dt)
            else:
                elapsed = times[n] - times[anchor]
        else:
            elapsed = dt * (n - anchor)
        m = 0
        for k in range(n_ten):
            if not math.isnan(values[n, k]):
                idx[m] = k
                m += 1
        if m == 0:
            continue

        t0 = math.exp(-zeta[0] * elapsed)
        t1 = math.exp(-zeta[1] * elapsed)
        a[0] = t0 * mean[0]
        a[1] = t1 * mean[1]
        P[0, 0] = t0 * t0 * cov[0, 0] + kappa * kappa * elapsed * _h(2.0 * zeta[0] * elapsed)
        P[1, 1] = t1 * t1 * cov[1, 1] + kappa * kappa * elapsed * _h(2.0 * zeta[1] * elapsed)
        P[0, 1] = 0.5 * t0 * t1 * (cov[0, 1] + cov[1, 0])
        P[1, 0] = P[0, 1]

        for i in range(m):
            k = idx[i]
            z0 = loading[k, 0]
            z1 = loading[k, 1]
            v[i] = values[n, k] - (intercept[k] + z0 * a[0] + z1 * a[1])
            PZt[i, 0] = P[0, 0] * z0 + P[0, 1] * z1
            PZt[i, 1] = P[1, 0] * z0 + P[1, 1] * z1
        for i in range(m):
            for j in range(i + 1):
                kj = idx[j]
                f = loading[kj, 0] * PZt[i, 0] + loading[kj, 1] * PZt[i, 1]
                if i == j:
                    f += meas_var[idx[i]]
                F[i, j] = f
                F[j, i] = f

        # Cholesky F = L L'
        for i in range(m):
            for j in range(i + 1):
                s = F[i, j]
                for k in range(j):
                    s -= L[i, k] * L[j, k]
                if i == j:
                    if not (s > 0.0) or not math.isfinite(s):
                        return total, n
                    L[i, i] = math.sqrt(s)
                else:
                    L[i, j] = s / L[j, j]

        # forward solves: w = L^-1 v, U = L^-1 PZt
        logdet = 0.0
        quad = 0.0
        for i in range(m):
            s = v[i]
            u0 = PZt[i, 0]
            u1 = PZt[i, 1]
            for k in range(i):
                s -= L[i, k] * v[k]
                u0 -= L[i, k] * PZt[k, 0]
                u1 -= L[i, k] * PZt[k, 1]
            v[i] = s / L[i, i]
            PZt[i, 0] = u0 / L[i, i]
            PZt[i, 1] = u1 / L[i, i]
            logdet += 2.0 * math.log(L[i, i])
            quad += v[i] * v[i]

        g0 = 0.0
        g1 = 0.0
        c00 = 0.0
        c01 = 0.0
        c11 = 0.0
        for i in range(m):
            g0 += PZt[i, 0] * v[i]
            g1 += PZt[i, 1] * v[i]
            c00 += PZt[i, 0] * PZt[i, 0]
            c01 += PZt[i, 0] * PZt[i, 1]
            c11 += PZt[i, 1] * PZt[i, 1]
        mean[0] = a[0] + g0
        mean[1] = a[1] + g1
        cov[0, 0] = P[0, 0] - c00
        cov[0, 1] = P[0, 1] - c01
        cov[1, 0] = cov[0, 1]
        cov[1, 1] = P[1, 1] - c11
        anchor = n
        total += -0.5 * (m * _LOG_2PI + logdet + quad)
    return total, -1
