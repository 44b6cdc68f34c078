"""Command-line interface: ``simulate``, ``filter``, ``calibrate``, ``price``, ``survival``.

Every command writes CSV (default) or JSON (``--format json``) to ``--out``
or stdout. Failures exit with status 1 and a one-line JSON reason on stderr;
usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from typing import Sequence

import numpy as np

from .affine import FactorState, ModelParams, component_prices, zclb_price, zclb_yield
from .calibration import PARAM_GROUPS, CalibrationConfig, CalibrationError, calibrate
from .data_io import (
    DataError,
    TRADING_DAYS_PER_YEAR,
    YieldPanel,
    atomic_write_text,
    csv_text,
    format_float,
    load_panel,
    load_params,
    panel_rows,
)
from .kalman import FilterError, run_filter, stack_innovations
from .simulation import SimulationConfig, monte_carlo_survival, simulate_panel
from .state_space import build_system

PARAM_FLAGS = {
    "mu_r": "--mu-r",
    "mu_lambda": "--mu-lambda",
    "zeta1_r": "--zeta-r",
    "zeta1_lambda": "--zeta-lambda",
    "zeta2_r": "--zeta2-r",
    "zeta2_lambda": "--zeta2-lambda",
    "kappa11": "--kappa11",
    "kappa12": "--kappa12",
    "theta1": "--theta1",
    "h_meas": "--h-meas",
}
REQUIRED_PARAMS = ("mu_r", "mu_lambda", "zeta1_r", "zeta1_lambda", "kappa11")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return None if math.isnan(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def _emit(args, text: str, path: str | None = None) -> None:
    path = path if path is not None else args.out
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(path, text)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default: stdout)")


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", help="JSON file with model parameters")
    for name, flag in PARAM_FLAGS.items():
        p.add_argument(flag, dest=name, type=float, default=None)


def _params_from_args(args, required: bool = True) -> ModelParams | None:
    data = load_params(args.params).to_dict() if args.params else {}
    for name in PARAM_FLAGS:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if not data and not required:
        return None
    missing = [PARAM_FLAGS[n] for n in REQUIRED_PARAMS if n not in data]
    if missing:
        raise ValueError(f"missing model parameters: {', '.join(missing)} (or pass --params)")
    return ModelParams.from_dict(data)


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="Treasury quote CSV or wide panel CSV")
    p.add_argument("--column", default=None, help="quote column of a Treasury file (default: Adj Close)")
    p.add_argument("--tenors", type=_float_list, default=None, help="maturity of a Treasury series, years")
    p.add_argument("--from", dest="start", default=None, help="first date kept (YYYY-MM-DD)")
    p.add_argument("--to", dest="end", default=None, help="last date kept (YYYY-MM-DD)")
    p.add_argument("--dt", type=float, default=1.0 / TRADING_DAYS_PER_YEAR, help="years between rows")
    p.add_argument("--init", choices=("stationary", "diffuse"), default="stationary")


def _panel_from_args(args) -> YieldPanel:
    tenor = None
    if args.tenors is not None:
        if len(args.tenors) != 1:
            raise ValueError("--tenors for a Treasury file takes a single maturity")
        tenor = args.tenors[0]
    panel = load_panel(args.data, column=args.column, tenor=tenor)
    if args.tenors is not None and panel.source.get("units") == "decimal":
        raise ValueError("--tenors only applies to Treasury quote files; panel files carry their tenors")
    panel = panel.window(args.start, args.end)
    if len(panel) == 0:
        raise DataError("no rows inside the requested date window")
    return panel


def cmd_price(args) -> None:
    params = _params_from_args(args)
    tenors = np.asarray(args.tenor or [], dtype=float)
    if args.tenors:
        tenors = np.concatenate([tenors, args.tenors])
    if tenors.size == 0:
        raise ValueError("give at least one --tenor")
    state = FactorState(args.x_r, args.x_lambda)
    prices = np.atleast_1d(zclb_price(params, state, tenors))
    parts = component_prices(params, state, tenors).reshape(-1, 2)
    rows = []
    for tau, price, (rate_part, surv_part) in zip(tenors, prices, parts):
        y = float(zclb_yield(params, state, tau)) if tau > 0 else math.nan
        rows.append({"tenor": tau, "price": price, "yield": y, "discount": rate_part, "survival": surv_part})
    _emit_rows(args, rows)


def _emit_rows(args, rows: list[dict], header: Sequence[str] | None = None) -> None:
    header = list(header or (rows[0].keys() if rows else []))
    if args.format == "json":
        _emit(args, _json_text(rows))
    else:
        body = [[_cell(r.get(h)) for h in header] for r in rows]
        _emit(args, csv_text(header, body))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return str(value)


def cmd_simulate(args) -> None:
    params = _params_from_args(args)
    x0 = None if args.x0 is None else FactorState(*args.x0)
    config = SimulationConfig(dt=args.dt, n_steps=args.n_steps, tenors=tuple(args.tenors), seed=args.seed, initial_state=x0)
    sim = simulate_panel(params, config)
    states_header = ["Date", "x_r", "x_lambda"] + [f"noiseless_{_tenor_label(t)}" for t in sim.panel.tenors]
    states_rows = [
        [str(d), format_float(s[0]), format_float(s[1])] + [format_float(v) for v in y]
        for d, s, y in zip(sim.panel.dates, sim.states, sim.noiseless)
    ]
    if args.format == "json":
        header, rows = panel_rows(sim.panel)
        doc = {
            "panel": {"columns": header, "rows": rows},
            "states": {"columns": states_header, "rows": states_rows},
        }
        _emit(args, _json_text(doc))
        return
    _emit(args, csv_text(*panel_rows(sim.panel)))
    if args.states_out:
        atomic_write_text(args.states_out, csv_text(states_header, states_rows))


def _tenor_label(tau: float) -> str:
    return repr(float(tau)).removesuffix(".0")


def cmd_filter(args) -> None:
    params = _params_from_args(args)
    panel = _panel_from_args(args)
    system = build_system(params, args.dt, panel.tenors)
    out = run_filter(system, panel, args.init)
    innov = stack_innovations(out, panel.tenors.size)
    labels = [f"innovation_{_tenor_label(t)}" for t in panel.tenors]
    rows = []
    for d, step, v in zip(panel.dates, out.steps, innov):
        row = {
            "date": str(d),
            "x_r": step.filtered_mean[0],
            "x_lambda": step.filtered_mean[1],
            "var_r": step.filtered_cov[0, 0],
            "var_lambda": step.filtered_cov[1, 1],
        }
        row.update(dict(zip(labels, v)))
        row["step_loglik"] = step.step_loglik
        rows.append(row)
    if args.format == "json":
        _emit(args, _json_text({"total_loglik": out.total_loglik, "n_steps": len(out), "steps": rows}))
    else:
        header = ["date", "x_r", "x_lambda", "var_r", "var_lambda", *labels, "step_loglik"]
        _emit_rows(args, rows, header)


def default_guess(panel: YieldPanel) -> ModelParams:
    """Data-driven starting point when no ``--params`` is given."""
    level = float(np.nanmean(panel.values))
    spread = float(np.nanstd(panel.values)) or 1e-3
    return ModelParams(
        mu_r=level / 2,
        mu_lambda=level / 2,
        zeta1_r=1.0,
        zeta1_lambda=1.0,
        kappa11=spread,
        h_meas=max(0.1 * spread**2, 1e-10),
    )


def cmd_calibrate(args) -> None:
    panel = _panel_from_args(args)
    initial = _params_from_args(args, required=False) or default_guess(panel)
    config = CalibrationConfig(
        initial=initial,
        free=tuple(args.free),
        dt=args.dt,
        restarts=args.restarts,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        init=args.init,
    )
    result = calibrate(panel, config)
    if args.format == "json":
        _emit(args, _json_text(result.to_dict()))
        return
    rows = []
    for name, value in result.params.to_dict().items():
        se = next((result.std_errors[k] for k in result.free if name in PARAM_GROUPS[k]), None)
        rows.append({"name": name, "value": value, "std_error": se, "free": se is not None})
    for name in ("loglik", "iterations", "converged", "best_restart"):
        rows.append({"name": name, "value": getattr(result, name)})
    _emit_rows(args, rows, ["name", "value", "std_error", "free"])


def cmd_survival(args) -> None:
    params = _params_from_args(args)
    x0 = None if args.x_lambda is None else FactorState(0.0, args.x_lambda)
    config = SimulationConfig(dt=args.dt, n_steps=1, seed=args.seed, n_paths=args.n_paths, initial_state=x0)
    table = monte_carlo_survival(params, config, args.horizons)
    _emit_rows(args, table.rows())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="longevity-vasicek", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", help="bond prices and yields over a tenor grid")
    _add_params(p)
    p.add_argument("--tenor", type=float, action="append", help="maturity in years (repeatable)")
    p.add_argument("--tenors", type=_float_list, default=None, help="comma-separated maturities")
    p.add_argument("--x-r", type=float, default=0.0)
    p.add_argument("--x-lambda", type=float, default=0.0)
    _add_output(p)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("simulate", help="synthetic yield panel and true factor path")
    _add_params(p)
    p.add_argument("--dt", type=float, default=1.0 / TRADING_DAYS_PER_YEAR)
    p.add_argument("--n-steps", type=int, default=500)
    p.add_argument("--tenors", type=_float_list, default=[1.0, 5.0, 10.0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x0", type=_float_list, default=None, help="initial x_r,x_lambda (default: stationary draw)")
    p.add_argument("--states-out", default=None, help="CSV file for the true states and noiseless yields")
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("filter", help="Kalman-filter a panel")
    _add_params(p)
    _add_data(p)
    _add_output(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("calibrate", help="maximum-likelihood parameter estimates")
    _add_params(p)
    _add_data(p)
    p.add_argument("--free", type=lambda s: [t.strip() for t in s.split(",") if t.strip()],
                   default=["mu", "zeta1", "kappa11", "h_meas"])
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=4000)
    _add_output(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("survival", help="Monte Carlo survival table")
    _add_params(p)
    p.add_argument("--horizons", type=_float_list, default=[1.0, 5.0, 10.0])
    p.add_argument("--dt", type=float, default=1.0 / 52)
    p.add_argument("--n-paths", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x-lambda", type=float, default=None, help="initial mortality factor (default: stationary draw)")
    _add_output(p)
    p.set_defaults(func=cmd_survival)
    return parser


DOMAIN_ERRORS = (ValueError, DataError, FilterError, CalibrationError, OSError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _warn_to_stderr
            args.func(args)
    except DOMAIN_ERRORS as exc:
        reason = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "row", None) is not None:
            reason["row"] = exc.row
        if getattr(exc, "step", None) is not None:
            reason["step"] = exc.step
        sys.stderr.write(json.dumps(reason) + "\n")
        return 1
    return 0


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    sys.stderr.write(json.dumps({"warning": category.__name__, "message": str(message)}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
