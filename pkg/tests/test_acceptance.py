"""Acceptance criteria 1-9, one test each, at their stated tolerances.

Run ``pytest tests/test_acceptance.py`` for a PASS/FAIL summary line per
criterion at the end of the report.
"""

import math
import time

import numpy as np
from conftest import random_params
from oracles import oracle_filter

from longevity_vasicek import (
    CalibrationConfig,
    FactorState,
    ModelParams,
    SimulationConfig,
    YieldPanel,
    asymptotic_yield,
    build_system,
    calibrate,
    h_func,
    log_likelihood,
    monte_carlo_survival,
    parse_treasury_csv,
    run_filter,
    simulate_panel,
    survival_prob,
    update,
    w_tau,
    zclb_price,
    zclb_yield,
)
from longevity_vasicek.calibration import model_loglik
from longevity_vasicek.cli import default_guess, main
from longevity_vasicek.kalman import information_form_cov, initial_moments
from longevity_vasicek.simulation import business_dates, simulate_paths

# recovery truth: mean level 3 percent as 0.03 per component, speed 0.5, diffusion 1
RECOVERY_TRUTH = ModelParams(mu_r=0.03, mu_lambda=0.03, zeta1_r=0.5, zeta1_lambda=0.5, kappa11=1.0, h_meas=0.0102)


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.2f} s, limit {self.limit} s"


def test_c1_closed_form_suite():
    with Timer(1.0):
        assert h_func(0.0) == 1.0
        assert abs(h_func(1.0) - 0.632121) < 1e-6
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = random_params(rng, kappa11=rng.uniform(0, 0.05), kappa12=rng.uniform(0, 0.05))
            x = rng.uniform(-0.02, 0.02, 2)
            assert zclb_price(p, x, 0.0) == 1.0
            tau = rng.uniform(0.1, 40.0, 5)
            np.testing.assert_allclose(-np.log(zclb_price(p, x, tau)) / tau, zclb_yield(p, x, tau), rtol=0, atol=1e-12)
            det = p.replace(kappa11=0.0, kappa12=0.0)
            np.testing.assert_allclose(
                zclb_price(det, [0, 0], tau), np.exp(-(det.mu_r + det.mu_lambda) * tau), rtol=0, atol=1e-12
            )


def test_c2_asymptotics():
    # parameter sets drawn over the valid domain at decimal rate scale, state at its stationary mean
    with Timer(1.0):
        rng = np.random.default_rng(2)
        worst_w = worst_y = 0.0
        for _ in range(100):
            p = random_params(rng, kappa11=rng.uniform(0, 0.05), kappa12=rng.uniform(0, 0.05))
            w = w_tau(p, 1e6)
            gap = abs(zclb_yield(p, [0.0, 0.0], 1e6) - asymptotic_yield(p).sum())
            worst_w = max(worst_w, float(np.abs(w).max()))
            worst_y = max(worst_y, gap)
        print(f"max |w(1e6)| = {worst_w:.3e}, max yield gap = {worst_y:.3e}")
        assert worst_w < 1e-8
        assert worst_y < 1e-8


def _random_filter_instance(rng):
    p = random_params(rng)
    M = int(rng.integers(1, 4))
    N = int(rng.integers(1, 6))
    tenors = np.sort(rng.choice(np.arange(1, 31), size=M, replace=False)).astype(float)
    system = build_system(p, float(rng.choice([1 / 252, 1 / 12, 0.5])), tenors)
    values = system.intercept + rng.normal(scale=0.5, size=(N, M))
    values[rng.random((N, M)) < 0.15] = np.nan
    return system, YieldPanel(dates=business_dates(N), tenors=tenors, values=values)


def test_c3_filter_oracle_equivalence():
    with Timer(10.0):
        rng = np.random.default_rng(3)
        for _ in range(50):
            system, panel = _random_filter_instance(rng)
            mean0, cov0 = initial_moments(system)
            means, covs, ll = oracle_filter(mean0, cov0, system, panel.values)
            out = run_filter(system, panel)
            np.testing.assert_allclose(out.filtered_means, means, rtol=0, atol=1e-10)
            np.testing.assert_allclose(out.filtered_covs, covs, rtol=0, atol=1e-10)
            assert abs(out.total_loglik - ll) < 1e-10
            assert abs(log_likelihood(system, panel) - ll) < 1e-10


def test_c4_covariance_update_identity():
    with Timer(1.0):
        rng = np.random.default_rng(4)
        for _ in range(100):
            A = rng.normal(size=(2, 2))
            P = A @ A.T + rng.uniform(0.05, 1.0) * np.eye(2)
            M = int(rng.integers(1, 4))
            params = random_params(rng, h_meas=rng.uniform(0.05, 2.0))
            system = build_system(params, 0.1, np.sort(rng.choice(np.arange(1, 31), M, replace=False)).astype(float))
            upd = update(np.zeros(2), P, rng.normal(size=M), system)
            info = information_form_cov(P, system.loading, system.meas_cov)
            np.testing.assert_allclose(upd.cov, info, rtol=0, atol=1e-10)


def test_c5_missing_step_contract(treasury_csv):
    with Timer(1.0):
        panel = parse_treasury_csv(treasury_csv)
        gap = int(np.flatnonzero(panel.missing[:, 0])[0])
        dt = 1 / 252
        params = ModelParams(mu_r=0.03, mu_lambda=0.03, zeta1_r=0.5, zeta1_lambda=0.2, kappa11=0.01, h_meas=1e-5)
        system = build_system(params, dt, panel.tenors)
        # explicit clock: the row after the gap is 2 dt after the row before it
        times = dt * np.arange(1, len(panel) + 1)
        with_gap = YieldPanel(dates=panel.dates, tenors=panel.tenors, values=panel.values, times=times)
        keep = ~panel.missing[:, 0]
        removed = with_gap.select(keep)
        assert np.isclose(removed.times[gap] - removed.times[gap - 1], 2 * dt)

        out = run_filter(system, with_gap)
        step = out.steps[gap]
        np.testing.assert_array_equal(step.filtered_mean, step.predicted_mean)
        np.testing.assert_array_equal(step.filtered_cov, step.predicted_cov)
        assert step.step_loglik == 0.0

        full = run_filter(system, with_gap).total_loglik
        short = run_filter(system, removed).total_loglik
        assert full - short == 0.0
        assert log_likelihood(system, with_gap) - log_likelihood(system, removed) == 0.0
        # the default equally spaced clock gives the same answer
        assert run_filter(system, panel).total_loglik == full


def test_c6_recovery_experiment():
    with Timer(300.0):
        truth = RECOVERY_TRUTH
        free = ("mu", "zeta1", "kappa11", "h_meas")
        bumped = truth.replace(
            mu_r=1.25 * truth.mu_r,
            mu_lambda=1.25 * truth.mu_lambda,
            zeta1_r=1.25 * truth.zeta1_r,
            zeta1_lambda=1.25 * truth.zeta1_lambda,
            kappa11=1.25 * truth.kappa11,
            h_meas=1.25 * truth.h_meas,
        )
        hits = 0
        for trial in range(20):
            sim = simulate_panel(truth, SimulationConfig(dt=1 / 252, n_steps=500, tenors=(1.0, 5.0, 10.0), seed=trial))
            config = CalibrationConfig(initial=default_guess(sim.panel), free=free, restarts=5, seed=trial)
            res = calibrate(sim.panel, config)
            zeta_ok = abs(res.params.zeta1_r / truth.zeta1_r - 1) <= 0.5
            h_ok = abs(res.params.h_meas / truth.h_meas - 1) <= 0.3
            hits += zeta_ok and h_ok
            ll_bumped = model_loglik(bumped, sim.panel, config.dt)
            print(
                f"trial {trial:2d}: zeta {res.params.zeta1_r:.4f} h {res.params.h_meas:.5f} "
                f"loglik {res.loglik:.3f} vs bumped truth {ll_bumped:.3f}"
            )
            assert res.loglik > ll_bumped
        print(f"recovered in {hits}/20 trials")
        assert hits >= 16


def test_c7_simulation_moments():
    with Timer(60.0):
        params = ModelParams(mu_r=0.02, mu_lambda=0.01, zeta1_r=0.5, zeta1_lambda=1.0, kappa11=0.02)
        cfg = SimulationConfig(dt=0.25, n_steps=60, n_paths=100_000, seed=7, initial_state=FactorState())
        x_end = simulate_paths(params, cfg)[:, -1]
        n = x_end.shape[0]
        for j, zeta in enumerate(params.zeta1):
            target = params.kappa11**2 / (2 * zeta)
            var = x_end[:, j].var(ddof=1)
            # s.e. of a sample variance, from the sample fourth moment
            centered = x_end[:, j] - x_end[:, j].mean()
            se = math.sqrt((np.mean(centered**4) - var**2) / n)
            assert abs(var - target) < 3 * se, (var, target, se)
            assert abs(x_end[:, j].mean()) < 3 * math.sqrt(var / n)

        # the exact-convexity configuration prices the expectation of exp(-integral of lambda)
        surv = ModelParams(mu_r=0.02, mu_lambda=0.01, zeta1_r=0.5, zeta1_lambda=0.5, kappa11=0.01).with_exact_convexity()
        horizons = [1.0, 5.0, 10.0]
        mc_cfg = SimulationConfig(dt=1 / 52, n_paths=100_000, seed=11, initial_state=FactorState())
        table = monte_carlo_survival(surv, mc_cfg, horizons)
        affine = survival_prob(surv, [0.0, 0.0], horizons)
        for h, m, se, a in zip(horizons, table.mean, table.std_error, affine):
            assert abs(m - a) < 3 * se, (h, m, a, se)


def test_c8_ingestion_golden(treasury_csv):
    with Timer(1.0):
        panel = parse_treasury_csv(treasury_csv)
        assert len(panel) == 20
        assert panel.n_observed == 19
        assert int(panel.missing.sum()) == 1
        assert abs(panel.values[0, 0] - 0.0670) < 1e-15


def test_c9_cli_determinism(tmp_path, capsys):
    with Timer(60.0):
        params = ["--mu-r", "0.03", "--mu-lambda", "0.01", "--zeta-r", "0.5", "--zeta-lambda", "0.3",
                  "--kappa11", "0.01", "--h-meas", "1e-6"]
        synthetic = tmp_path / "synthetic.csv"
        assert main(["simulate", *params, "--n-steps", "250", "--seed", "3", "--out", str(synthetic)]) == 0
        commands = {
            "simulate": ["simulate", *params, "--n-steps", "250", "--seed", "3"],
            "calibrate": ["calibrate", "--data", str(synthetic), "--restarts", "5", "--seed", "7", "--format", "json"],
            "survival": ["survival", *params, "--n-paths", "20000", "--seed", "3"],
        }
        for name, argv in commands.items():
            blobs = []
            for run in range(2):
                out = tmp_path / f"{name}{run}.out"
                assert main([*argv, "--out", str(out)]) == 0, name
                blobs.append(out.read_bytes())
            assert blobs[0] and blobs[0] == blobs[1], name
        assert synthetic.read_bytes() == (tmp_path / "simulate0.out").read_bytes()
