"""Brute-force references that share no code path with the recursive filter."""

import numpy as np


def joint_gaussian(mean0, cov0, transitions, process_covs, loading, intercept, meas_cov):
    """Stack X_1..X_N and Y_1..Y_N as one Gaussian.

    ``X_n = T_n X_{n-1} + eta_n`` with ``X_0 ~ N(mean0, cov0)``;
    ``Y_n = d + Z X_n + eps_n``. Returns ``(mu_x, mu_y, S_xx, S_xy, S_yy)``
    with states flattened as ``(N*2,)`` and observations as ``(N*M,)``.
    """
    N = len(transitions)
    M = loading.shape[0]
    # X = a + A xi, xi = (X_0 - mean0, eta_1, ..., eta_N)
    A = np.zeros((2 * N, 2 * (N + 1)))
    a = np.zeros(2 * N)
    prev_A = np.hstack([np.eye(2), np.zeros((2, 2 * N))])
    prev_a = np.asarray(mean0, dtype=float)
    for n in range(N):
        T = transitions[n]
        cur_A = T @ prev_A
        cur_A[:, 2 * (n + 1): 2 * (n + 2)] += np.eye(2)
        cur_a = T @ prev_a
        A[2 * n: 2 * n + 2] = cur_A
        a[2 * n: 2 * n + 2] = cur_a
        prev_A, prev_a = cur_A, cur_a
    xi_cov = np.zeros((2 * (N + 1), 2 * (N + 1)))
    xi_cov[:2, :2] = cov0
    for n in range(N):
        xi_cov[2 * (n + 1): 2 * (n + 2), 2 * (n + 1): 2 * (n + 2)] = process_covs[n]
    S_xx = A @ xi_cov @ A.T
    bigZ = np.kron(np.eye(N), loading)
    mu_y = np.tile(intercept, N) + bigZ @ a
    S_xy = S_xx @ bigZ.T
    S_yy = bigZ @ S_xx @ bigZ.T + np.kron(np.eye(N), meas_cov)
    return a, mu_y, S_xx, S_xy, S_yy


def condition(mu_x, mu_y, S_xx, S_xy, S_yy, y, keep):
    """Mean and covariance of X given the entries of ``y`` selected by ``keep``."""
    if not keep.any():
        return mu_x, S_xx
    Syy = S_yy[np.ix_(keep, keep)]
    Sxy = S_xy[:, keep]
    gain = np.linalg.solve(Syy, Sxy.T).T
    return mu_x + gain @ (y[keep] - mu_y[keep]), S_xx - gain @ Sxy.T


def gaussian_logpdf(x, mean, cov):
    k = x.size
    if k == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(cov)
    assert sign > 0
    diff = x - mean
    return -0.5 * (k * np.log(2 * np.pi) + logdet + diff @ np.linalg.solve(cov, diff))


def oracle_filter(mean0, cov0, system, values, dts=None):
    """Filtered means/covs per step and the total log-likelihood by direct conditioning."""
    values = np.asarray(values, dtype=float)
    N, M = values.shape
    dts = [system.dt] * N if dts is None else dts
    Ts, Vs = zip(*(system.transition_over(d) for d in dts))
    mu_x, mu_y, S_xx, S_xy, S_yy = joint_gaussian(
        mean0, cov0, Ts, Vs, system.loading, system.intercept, system.meas_cov
    )
    y = values.reshape(-1)
    observed = ~np.isnan(y)
    means, covs = [], []
    for n in range(N):
        keep = observed.copy()
        keep[(n + 1) * M:] = False
        m, c = condition(mu_x, mu_y, S_xx, S_xy, S_yy, np.nan_to_num(y), keep)
        means.append(m[2 * n: 2 * n + 2])
        covs.append(c[2 * n: 2 * n + 2, 2 * n: 2 * n + 2])
    loglik = gaussian_logpdf(y[observed], mu_y[observed], S_yy[np.ix_(observed, observed)])
    return np.array(means), np.array(covs), loglik
