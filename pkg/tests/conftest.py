from pathlib import Path

import numpy as np
import pytest

from longevity_vasicek import ModelParams

DATA = Path(__file__).parent / "data"


@pytest.fixture
def treasury_csv():
    return DATA / "treasury_sample.csv"


@pytest.fixture
def desk_params():
    return ModelParams(
        mu_r=0.04,
        mu_lambda=0.012,
        zeta1_r=0.8,
        zeta1_lambda=0.3,
        kappa11=0.015,
        theta1=0.2,
        h_meas=1e-6,
        kappa12=0.01,
        zeta2_r=1.1,
        zeta2_lambda=0.6,
    )


def random_params(rng: np.random.Generator, **overrides) -> ModelParams:
    values = dict(
        mu_r=rng.uniform(0.0, 0.1),
        mu_lambda=rng.uniform(0.0, 0.05),
        zeta1_r=rng.uniform(0.1, 3.0),
        zeta1_lambda=rng.uniform(0.1, 3.0),
        zeta2_r=rng.uniform(0.1, 3.0),
        zeta2_lambda=rng.uniform(0.1, 3.0),
        kappa11=rng.uniform(0.0, 0.5),
        kappa12=rng.uniform(0.0, 0.5),
        theta1=rng.uniform(-1.0, 1.0),
        h_meas=rng.uniform(0.01, 0.5),
    )
    values.update(overrides)
    return ModelParams(**values)


_acceptance_lines: list[str] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        _acceptance_lines.append(f"{status}  {name}  ({report.duration:.2f} s)")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
