"""Longevity bond prices and yields across maturities.

Compares the deterministic curve with one that carries a market price of
risk, and splits each price into its discount and survival parts.
"""

import numpy as np

from longevity_vasicek import ModelParams, component_prices, zclb_price, zclb_yield

base = ModelParams(mu_r=0.04, mu_lambda=0.012, zeta1_r=0.6, zeta1_lambda=0.25, kappa11=0.0)
risky = base.replace(kappa11=0.012, theta1=0.3)
state = np.array([0.005, -0.002])  # rates below and mortality above their long-run levels
tenors = np.array([1, 2, 5, 10, 20, 30], dtype=float)

print(f"{'tenor':>6} {'price':>9} {'yield':>8} {'price(risk)':>12} {'yield(risk)':>12} {'discount':>9} {'survival':>9}")
for tau, p0, y0, p1, y1, (disc, surv) in zip(
    tenors,
    zclb_price(base, state, tenors),
    zclb_yield(base, state, tenors),
    zclb_price(risky, state, tenors),
    zclb_yield(risky, state, tenors),
    component_prices(risky, state, tenors),
):
    print(f"{tau:6.0f} {p0:9.5f} {y0:8.5f} {p1:12.5f} {y1:12.5f} {disc:9.5f} {surv:9.5f}")
