"""Filter the bundled 10-year Treasury sample (Dec 1992 - Jan 1993).

One maturity only, so the two factors are not separately identified; the
filtered sum still tracks the quoted yield. The 1993-01-18 row is missing
and contributes nothing to the likelihood.
"""

from longevity_vasicek import ModelParams, build_system, parse_treasury_csv, run_filter
from longevity_vasicek.data_io import treasury_sample_path
from longevity_vasicek.kalman import filter_yields

panel = parse_treasury_csv(treasury_sample_path())
params = ModelParams(mu_r=0.045, mu_lambda=0.02, zeta1_r=0.3, zeta1_lambda=0.3, kappa11=0.01, h_meas=1e-6)
system = build_system(params, 1 / 252, panel.tenors)
out = run_filter(system, panel)
fitted = filter_yields(system, out)

print(f"{len(panel)} rows, {panel.n_observed} observed, log-likelihood {out.total_loglik:.3f}")
for date, obs, fit, step in zip(panel.dates, panel.values[:, 0], fitted[:, 0], out.steps):
    print(f"{date}  quoted {obs:8.5f}  filtered {fit:8.5f}  loglik {step.step_loglik:8.3f}")
