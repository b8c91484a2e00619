"""Command-line front end.

Subcommands: analytic, simulate, gr, exponents, strength, quench,
figure1, audit.  Every run is a pure function of its configuration
(flags, optionally merged over a flat key=value config file), so repeated
runs produce byte-identical output.

Exit codes: 0 success, 2 usage/config error, 3 model-domain error,
4 estimation/convergence error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__, analysis, dynamics, mc
from .analytic import (
    ModelParams,
    correlation_length,
    critical_occupation,
    declared_exponents,
    filtering_probability,
    mean_cluster_size,
    percolation_strength_closed,
    percolation_strength_fixed_point,
    scaling_law_audit,
)
from .errors import ConvergenceError, DivergenceError, DomainError, EstimationError
from .output import OutputEnvelope, Table, write_output
from .seeding import PRNG_NAME

USAGE_EXIT = 2
DOMAIN_EXIT = 3
ESTIMATION_EXIT = 4


class UsageError(Exception):
    """Bad flag/config combination; maps to exit code 2."""


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return values


def _convert(key: str, text: str, kind):
    try:
        if kind is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        return kind(text)
    except ValueError as exc:
        raise UsageError(f"config key {key}={text!r}: {exc}") from exc


# Flag registry: dest -> (flag, type, default, help).  Config-file keys are
# the dest names; flags override the file, the file overrides defaults.
FLAGS = {
    "p": ("--p", float, None, "occupation probability"),
    "pe": ("--pe", float, None, "filtering success probability"),
    "tau": ("--tau", float, None, "Schmidt weight; implies pe = 2*tau*(1-tau)"),
    "pmin": ("--pmin", float, None, "grid lower edge for p"),
    "pmax": ("--pmax", float, None, "grid upper edge for p"),
    "steps": ("--steps", int, None, "number of grid/schedule points"),
    "convention": ("--convention", str, "paper_additive",
                   f"edge-state convention, one of {mc.CONVENTIONS}"),
    "length": ("--length", int, 100_000, "chain length in nodes"),
    "trials": ("--trials", int, 20, "Monte Carlo trials"),
    "seed": ("--seed", int, 42, "master seed (64-bit)"),
    "rmax": ("--rmax", int, 10, "largest pair-connectivity separation"),
    "release_p": ("--release-p", float, None, "occupation probability at filter release"),
    "release_step": ("--release-step", int, None, "schedule step at filter release"),
    "include_zero_open": ("--include-zero-open", bool, False,
                          "count clusters with no open channel (i0 = 0 sum)"),
    "source": ("--source", str, "analytic", "exponent data source: analytic or mc"),
    "pe_delayed": ("--pe-delayed", float, 0.49, "filtering probability of the delayed curve"),
    "out": ("--out", str, None, "output path (default: stdout)"),
    "format": ("--format", str, "csv", "output format: csv or json"),
}

COMMAND_FLAGS = {
    "analytic": ["pe", "tau", "pmin", "pmax", "steps", "include_zero_open", "out", "format"],
    "simulate": ["p", "pe", "tau", "pmin", "pmax", "steps", "convention", "length",
                 "trials", "seed", "rmax", "include_zero_open", "out", "format"],
    "gr": ["p", "pe", "tau", "convention", "length", "trials", "seed", "rmax",
           "out", "format"],
    "exponents": ["pe", "tau", "source", "convention", "length", "trials", "seed",
                  "steps", "out", "format"],
    "strength": ["pe", "tau", "pmin", "pmax", "steps", "out", "format"],
    "quench": ["pe", "tau", "steps", "release_p", "release_step", "out", "format"],
    "figure1": ["pe", "pe_delayed", "release_p", "steps", "out", "format"],
    "audit": ["out", "format"],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qperc",
        description="Hybrid classical/quantum 1D percolation: closed forms and Monte Carlo.",
    )
    parser.add_argument("--version", action="version", version=f"qperc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "analytic": "closed-form table over a p grid: S, strength, correlation length",
        "simulate": "Monte Carlo sweep (single p or a p grid at fixed pe)",
        "gr": "estimated pair connectivity g_hat(r) vs the additive (p+pe)^r",
        "exponents": "fitted critical exponents gamma, nu, sigma, beta and tau",
        "strength": "closed-form vs fixed-point percolation strength over a p grid",
        "quench": "strength trajectory with filtering released at a chosen point",
        "figure1": "continuous (pe) vs delayed-release (pe_delayed) strength curves",
        "audit": "scaling-law audit of the declared exponents",
    }
    for command, flag_names in COMMAND_FLAGS.items():
        cmd_parser = sub.add_parser(command, help=descriptions[command])
        cmd_parser.add_argument("--config", type=str, default=None,
                                help="flat key=value file; flags override it")
        for name in flag_names:
            flag, kind, _, help_text = FLAGS[name]
            if kind is bool:
                cmd_parser.add_argument(flag, dest=name, action="store_const", const=True,
                                        default=None, help=help_text)
            else:
                cmd_parser.add_argument(flag, dest=name, type=kind, default=None,
                                        help=help_text)
    return parser


def _merge_config(ns: argparse.Namespace, command: str) -> dict:
    file_values = _parse_config_file(ns.config) if ns.config else {}
    config = {}
    for name in COMMAND_FLAGS[command]:
        _, kind, default, _ = FLAGS[name]
        value = getattr(ns, name)
        if value is None and name in file_values:
            value = _convert(name, file_values[name], kind)
        if value is None:
            value = default
        config[name] = value
    unknown = set(file_values) - set(COMMAND_FLAGS[command])
    if unknown:
        raise UsageError(
            f"config keys not used by '{command}': {', '.join(sorted(unknown))}"
        )
    if config.get("format") not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {config.get('format')!r}")
    return config


def _resolve_pe(config: dict, required: bool = True) -> float | None:
    pe, tau = config.get("pe"), config.get("tau")
    if pe is not None and tau is not None:
        raise UsageError("--pe and --tau are mutually exclusive")
    if tau is not None:
        try:
            return filtering_probability(tau)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
    if pe is None and required:
        raise UsageError("one of --pe or --tau is required")
    return pe


def _p_grid(config: dict, default_steps: int = 101) -> np.ndarray:
    pmin = config.get("pmin")
    pmax = config.get("pmax")
    steps = config.get("steps")
    pmin = 0.0 if pmin is None else pmin
    pmax = 1.0 if pmax is None else pmax
    steps = default_steps if steps is None else steps
    if not pmin < pmax:
        raise UsageError(f"grid requires pmin < pmax, got {pmin!r} >= {pmax!r}")
    if steps < 2:
        raise UsageError(f"grid requires steps >= 2, got {steps}")
    if pmin < 0.0 or pmax > 1.0:
        raise UsageError("grid must lie inside [0, 1]")
    return np.linspace(pmin, pmax, steps)


def _metadata(command: str, config: dict, **extra) -> dict:
    meta = {
        "artifact": "qperc",
        "version": __version__,
        "command": command,
        "prng": PRNG_NAME,
        "timestamps_excluded": True,
    }
    meta.update(extra)
    meta["config"] = {k: v for k, v in sorted(config.items()) if k not in ("out", "format")}
    return meta


def cmd_analytic(config: dict) -> OutputEnvelope:
    p_e = _resolve_pe(config)
    grid = _p_grid(config)
    include_zero = config["include_zero_open"]
    rows = []
    for p in grid:
        params = ModelParams(p=float(p), p_e=p_e)
        p_c = params.p_c
        if params.q >= 1.0:
            s_value: float | None = math.inf
        else:
            try:
                s_value = mean_cluster_size(params, include_zero_open=include_zero)
            except DomainError:
                s_value = None  # identically-zero weights (p = 0, p_e = 0, i0 = 1)
        if params.q >= 1.0:
            xi: float | None = math.inf
        elif params.q <= 0.0:
            xi = None
        else:
            xi = correlation_length(params)
        strength = percolation_strength_closed(params).strength_p
        rows.append(
            {
                "p": float(p),
                "p_e": p_e,
                "p_c": p_c,
                "mean_cluster_size": s_value,
                "strength": strength,
                "correlation_length": xi,
            }
        )
    table = Table(
        columns=["p", "p_e", "p_c", "mean_cluster_size", "strength", "correlation_length"],
        rows=rows,
        divergent_columns=("mean_cluster_size", "correlation_length"),
    )
    return OutputEnvelope(metadata=_metadata("analytic", config, p_e=p_e), table=table)


def cmd_strength(config: dict) -> OutputEnvelope:
    p_e = _resolve_pe(config)
    grid = _p_grid(config)
    rows = []
    for p in grid:
        params = ModelParams(p=float(p), p_e=p_e)
        closed = percolation_strength_closed(params)
        fixed = percolation_strength_fixed_point(params)
        rows.append(
            {
                "p": float(p),
                "p_e": p_e,
                "product_x_closed": closed.product_x,
                "strength_closed": closed.strength_p,
                "root_used": closed.root_used,
                "product_x_fixed_point": fixed.product_x,
                "strength_fixed_point": fixed.strength_p,
                "iterations": fixed.iterations,
                "strength_abs_diff": abs(closed.strength_p - fixed.strength_p),
            }
        )
    table = Table(
        columns=[
            "p", "p_e", "product_x_closed", "strength_closed", "root_used",
            "product_x_fixed_point", "strength_fixed_point", "iterations",
            "strength_abs_diff",
        ],
        rows=rows,
    )
    return OutputEnvelope(metadata=_metadata("strength", config, p_e=p_e), table=table)


def _sweep_columns(r_max: int) -> list[str]:
    cols = [
        "p", "p_e", "convention", "length_nodes", "trials", "error",
        "mean_cluster_size", "mean_cluster_size_stderr",
        "mean_cluster_size_weighted", "mean_cluster_size_weighted_stderr",
        "order_parameter", "order_parameter_stderr", "spanning_fraction",
    ]
    for r in range(r_max + 1):
        cols.append(f"ghat_{r}")
        cols.append(f"ghat_stderr_{r}")
    return cols


def cmd_simulate(config: dict) -> OutputEnvelope:
    p_e = _resolve_pe(config)
    convention = config["convention"]
    if convention not in mc.CONVENTIONS:
        raise UsageError(f"convention must be one of {mc.CONVENTIONS}, got {convention!r}")
    if config.get("pmin") is not None or config.get("pmax") is not None:
        grid = [(float(p), p_e) for p in _p_grid(config)]
    else:
        if config.get("p") is None:
            raise UsageError("simulate needs --p, or --pmin/--pmax/--steps for a grid")
        # single-point mode: an invalid cell is a hard model-domain error
        params = ModelParams(p=config["p"], p_e=p_e)
        mc.edge_state_probabilities(params, convention)
        grid = [(config["p"], p_e)]
    result = mc.run_sweep(
        grid,
        convention=convention,
        length_nodes=config["length"],
        trials=config["trials"],
        master_seed=config["seed"],
        r_max=config["rmax"],
        restrict_min_one_open=not config["include_zero_open"],
    )
    rows = []
    for row in result.rows:
        flat = {
            "p": row.p,
            "p_e": row.p_e,
            "convention": convention,
            "length_nodes": result.length_nodes,
            "trials": result.trials,
            "error": row.error,
            "mean_cluster_size": row.mean_cluster_size.value if row.mean_cluster_size else None,
            "mean_cluster_size_stderr": row.mean_cluster_size.stderr if row.mean_cluster_size else None,
            "mean_cluster_size_weighted": (
                row.mean_cluster_size_weighted.value if row.mean_cluster_size_weighted else None
            ),
            "mean_cluster_size_weighted_stderr": (
                row.mean_cluster_size_weighted.stderr if row.mean_cluster_size_weighted else None
            ),
            "order_parameter": row.order_parameter.value if row.order_parameter else None,
            "order_parameter_stderr": row.order_parameter.stderr if row.order_parameter else None,
            "spanning_fraction": row.spanning_fraction,
        }
        for r in range(result.r_max + 1):
            has = row.g_hat and r < len(row.g_hat)
            flat[f"ghat_{r}"] = row.g_hat[r] if has else None
            flat[f"ghat_stderr_{r}"] = row.g_stderr[r] if has else None
        rows.append(flat)
    table = Table(columns=_sweep_columns(result.r_max), rows=rows)
    meta = _metadata(
        "simulate", config, p_e=p_e, master_seed=result.master_seed,
        convention=convention, restrict_min_one_open=result.restrict_min_one_open,
    )
    return OutputEnvelope(metadata=meta, table=table)


def cmd_gr(config: dict) -> OutputEnvelope:
    p_e = _resolve_pe(config)
    if config.get("p") is None:
        raise UsageError("gr needs --p")
    convention = config["convention"]
    if convention not in mc.CONVENTIONS:
        raise UsageError(f"convention must be one of {mc.CONVENTIONS}, got {convention!r}")
    params = ModelParams(p=config["p"], p_e=p_e)
    mc.edge_state_probabilities(params, convention)
    samples = mc.sweep_cell_samples(
        params, convention, config["length"], config["trials"], config["seed"]
    )
    gtable = mc.estimate_pair_connectivity(samples, config["rmax"])
    additive_defined = params.q <= 1.0
    rows = []
    for i, r in enumerate(gtable.r):
        rows.append(
            {
                "r": int(r),
                "g_hat": float(gtable.g_hat[i]),
                "g_stderr": float(gtable.stderr[i]),
                "g_additive": params.q ** int(r) if additive_defined else None,
            }
        )
    table = Table(columns=["r", "g_hat", "g_stderr", "g_additive"], rows=rows)
    meta = _metadata(
        "gr", config, p_e=p_e, master_seed=config["seed"], convention=convention,
    )
    return OutputEnvelope(metadata=meta, table=table)


def _fit_row(name: str, source: str, fit: analysis.FitResult | None,
             error: str | None = None, note: str = "") -> dict:
    return {
        "exponent": name,
        "source": source,
        "estimate": fit.exponent_estimate if fit else None,
        "stderr": fit.stderr if fit else None,
        "r_squared": fit.r_squared if fit else None,
        "window_lo": fit.fit_window[0] if fit else None,
        "window_hi": fit.fit_window[1] if fit else None,
        "points_used": fit.points_used if fit else None,
        "error": error,
        "note": note,
    }


def cmd_exponents(config: dict) -> OutputEnvelope:
    p_e = _resolve_pe(config)
    source = config["source"]
    if source not in ("analytic", "mc"):
        raise UsageError(f"source must be analytic or mc, got {source!r}")
    rows = []
    gamma_fit = sigma_fit = None
    if source == "analytic":
        gamma_fit = analysis.estimate_gamma(p_e)
        nu_fit = analysis.estimate_nu(p_e)
        sigma_fit = analysis.estimate_sigma(p_e)
        rows.append(_fit_row("gamma", "analytic", gamma_fit))
        rows.append(_fit_row("nu", "analytic", nu_fit))
        rows.append(_fit_row("sigma", "analytic", sigma_fit))
    else:
        p_c = critical_occupation(p_e)
        n_points = config["steps"] if config.get("steps") else 6
        eps = analysis.default_eps_grid(analysis.GAMMA_WINDOW, n_points)
        grid = [(float(p_c - e), p_e) for e in eps]
        convention = config["convention"]
        if convention not in mc.CONVENTIONS:
            raise UsageError(f"convention must be one of {mc.CONVENTIONS}, got {convention!r}")
        sweep = mc.run_sweep(
            grid,
            convention=convention,
            length_nodes=config["length"],
            trials=config["trials"],
            master_seed=config["seed"],
            r_max=20,
            collect_histograms=True,
        )
        good = [row for row in sweep.rows if row.error is None and row.mean_cluster_size]
        ps = [row.p for row in good]
        s_values = [row.mean_cluster_size.value for row in good]
        g_tables = {row.p: (row.g_r, row.g_hat) for row in good}
        histograms = {
            row.p: (row.histogram_sizes, row.histogram_counts) for row in good
        }
        try:
            gamma_fit = analysis.estimate_gamma(p_e, p_grid=ps, s_values=s_values)
            rows.append(_fit_row("gamma", "mc", gamma_fit))
        except (EstimationError, DomainError) as exc:
            rows.append(_fit_row("gamma", "mc", None, error=str(exc)))
        try:
            nu_fit = analysis.estimate_nu(p_e, g_tables=g_tables)
            rows.append(_fit_row("nu", "mc", nu_fit))
        except (EstimationError, DomainError) as exc:
            rows.append(_fit_row("nu", "mc", None, error=str(exc)))
        try:
            sigma_fit = analysis.estimate_sigma(p_e, histograms=histograms)
            rows.append(_fit_row("sigma", "mc", sigma_fit))
        except (EstimationError, DomainError) as exc:
            sigma_fit = None
            rows.append(_fit_row("sigma", "mc", None, error=str(exc)))
    beta_fit = analysis.estimate_beta(p_e)
    beta_note = (
        "" if source == "analytic"
        else "no Monte Carlo estimator: the strength is a self-consistency construct, "
             "not a finite-chain observable; closed-form fit reported"
    )
    rows.append(_fit_row("beta", "analytic", beta_fit, note=beta_note))
    if gamma_fit is not None and sigma_fit is not None:
        tau, tau_err = analysis.tau_from_scaling_fit(gamma_fit, sigma_fit)
        rows.append(
            {
                "exponent": "tau_fisher", "source": source, "estimate": tau,
                "stderr": tau_err, "r_squared": None, "window_lo": None,
                "window_hi": None, "points_used": None, "error": None,
                "note": "from gamma and sigma via gamma = (3 - tau)/sigma",
            }
        )
    table = Table(
        columns=["exponent", "source", "estimate", "stderr", "r_squared",
                 "window_lo", "window_hi", "points_used", "error", "note"],
        rows=rows,
    )
    meta = _metadata("exponents", config, p_e=p_e, master_seed=config.get("seed"))
    return OutputEnvelope(metadata=meta, table=table)


def cmd_audit(config: dict) -> OutputEnvelope:
    audit = scaling_law_audit(declared_exponents())
    rows = [
        {
            "relation": rel.relation,
            "left": rel.left,
            "right": rel.right,
            "holds": rel.holds,
            "tolerance": rel.tolerance,
        }
        for rel in audit.relations
    ]
    table = Table(columns=["relation", "left", "right", "holds", "tolerance"], rows=rows)
    return OutputEnvelope(metadata=_metadata("audit", config), table=table)


def _release_step_from_p(schedule: dynamics.Schedule, release_p: float) -> int:
    for t, p in enumerate(schedule.p_of_t):
        if p >= release_p:
            return t
    raise UsageError(f"schedule never reaches release_p = {release_p!r}")


def cmd_quench(config: dict) -> OutputEnvelope:
    p_e = _resolve_pe(config)
    steps = config["steps"] if config.get("steps") else 201
    if steps < 2:
        raise UsageError("steps must be >= 2")
    schedule = dynamics.linear_ramp(steps)
    release_p = config.get("release_p")
    release_step = config.get("release_step")
    if release_p is None and release_step is None:
        raise UsageError("quench needs --release-p or --release-step")
    if release_p is not None and release_step is not None:
        raise UsageError("--release-p and --release-step are mutually exclusive")
    if release_step is None:
        release_step = _release_step_from_p(schedule, release_p)
    if not 0 <= release_step < steps:
        raise UsageError(f"release step must lie in [0, {steps - 1}], got {release_step}")
    points = dynamics.delayed_trajectory(schedule, p_e, release_step)
    rows = [
        {
            "step": pt.step,
            "p": pt.p,
            "filtering_active": pt.filtering_active,
            "strength": pt.strength,
        }
        for pt in points
    ]
    table = Table(columns=["step", "p", "filtering_active", "strength"], rows=rows)
    meta = _metadata("quench", config, p_e=p_e, release_step=release_step)
    return OutputEnvelope(metadata=meta, table=table)


def cmd_figure1(config: dict) -> OutputEnvelope:
    p_e = config.get("pe")
    p_e = 0.25 if p_e is None else p_e
    pe_delayed = config["pe_delayed"]
    release_p = config.get("release_p")
    release_p = 0.6 if release_p is None else release_p
    steps = config["steps"] if config.get("steps") else 201
    if steps < 2:
        raise UsageError("steps must be >= 2")
    schedule = dynamics.linear_ramp(steps)
    continuous = dynamics.continuous_trajectory(schedule, p_e)
    release_step = _release_step_from_p(schedule, release_p)
    delayed = dynamics.delayed_trajectory(schedule, pe_delayed, release_step)
    rows = [
        {
            "p": c.p,
            "strength_continuous": c.strength,
            "strength_delayed": d.strength,
        }
        for c, d in zip(continuous, delayed)
    ]
    table = Table(columns=["p", "strength_continuous", "strength_delayed"], rows=rows)
    meta = _metadata(
        "figure1", config, p_e=p_e, pe_delayed=pe_delayed,
        release_p=release_p, release_step=release_step,
    )
    return OutputEnvelope(metadata=meta, table=table)


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "gr": cmd_gr,
    "exponents": cmd_exponents,
    "strength": cmd_strength,
    "quench": cmd_quench,
    "figure1": cmd_figure1,
    "audit": cmd_audit,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        config = _merge_config(ns, ns.command)
        envelope = COMMANDS[ns.command](config)
        write_output(envelope, config.get("out"), config.get("format", "csv"))
    except UsageError as exc:
        print(f"qperc: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (DivergenceError, DomainError) as exc:
        print(f"qperc: {exc}", file=sys.stderr)
        return DOMAIN_EXIT
    except (ConvergenceError, EstimationError) as exc:
        print(f"qperc: {exc}", file=sys.stderr)
        return ESTIMATION_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
