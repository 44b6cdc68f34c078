"""Two-component Vasicek model of zero-coupon longevity bonds.

Closed-form prices and yields, the exact state-space form, Kalman filtering,
maximum-likelihood calibration and Monte Carlo survival simulation.
"""

from .affine import (
    FactorState,
    ModelParams,
    NegativeIntensityWarning,
    asymptotic_yield,
    component_prices,
    component_yields,
    h_func,
    survival_prob,
    w_tau,
    zclb_price,
    zclb_yield,
)
from .calibration import (
    CalibrationConfig,
    CalibrationError,
    CalibrationResult,
    IdentificationWarning,
    calibrate,
    standard_errors,
)
from .data_io import DataError, YieldPanel, load_panel, parse_treasury_csv, read_panel_csv, write_panel_csv
from .kalman import FilterError, FilterOutput, FilterStep, log_likelihood, predict, run_filter, update
from .simulation import (
    SimulationConfig,
    SurvivalTable,
    monte_carlo_survival,
    simulate_panel,
    simulate_paths,
    simulate_states,
)
from .state_space import DiscreteSystem, build_system, stationary_moments

__version__ = "0.1.0"
