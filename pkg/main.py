#!/usr/bin/env python3
"""
PME Repeater Toolkit
====================
Command-line front end for the repeater analytics, the Monte Carlo and the
quantum verification battery.

Subcommands:
- analytic: rate table (p_r, p_b, p_i, T_tot, fidelity bound, cited comparison)
- simulate: Monte Carlo per nesting level against the closed form
- verify:   exact Fock-space checks of every heralded stage
- sweep:    rate table over one protocol parameter

The config comes from --config, else $REPEATER_CONFIG, else the bundled paper.json.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence

import config
import reporting
from repeater.analytics import (
    RATE_COLUMNS, cavity_snr, free_space_snr, rate_breakdown, reference_comparison, sweep,
)
from repeater.common import ConfigError, FockError, SimulationError, log
from repeater.run_config import RunConfig, load_run_config, resolve_config_path, with_overrides
from repeater.simulation import CONVERGENCE_COLUMNS, convergence_report
from repeater.verification import CHECK_COLUMNS, run_verification

ANALYTIC_COLUMNS = RATE_COLUMNS + (
    "T_tot_sps", "T_tot_dlcz", "speedup_sps", "speedup_dlcz", "R_sn", "R_sn_free",
)


def parse_values(text: str) -> List[float]:
    """Parse "a..b" (inclusive integer range) or a comma-separated list."""
    text = text.strip()
    if ".." in text:
        start, _, stop = text.partition("..")
        try:
            values = list(range(int(start), int(stop) + 1))
        except ValueError as e:
            raise ConfigError(f"values: bad range {text!r}") from e
    else:
        try:
            values = [float(v) for v in text.split(",") if v.strip()]
        except ValueError as e:
            raise ConfigError(f"values: bad list {text!r}") from e
    if not values:
        raise ConfigError(f"values: empty range {text!r}")
    return values


def cmd_analytic(cfg: RunConfig) -> int:
    breakdown = rate_breakdown(cfg.protocol)
    comparison = {row["protocol"]: row for row in reference_comparison(cfg.protocol)}
    record: Dict[str, Any] = breakdown.as_record()
    record.update({
        "T_tot_sps": comparison["sps"]["T_tot"],
        "T_tot_dlcz": comparison["dlcz"]["T_tot"],
        "speedup_sps": comparison["sps"]["speedup"],
        "speedup_dlcz": comparison["dlcz"]["speedup"],
        "R_sn": cavity_snr(cfg.cavity) if cfg.cavity is not None else None,
        "R_sn_free": free_space_snr(cfg.cavity) if cfg.cavity is not None else None,
    })
    log(f"T_tot = {breakdown.T_tot:.6g} s over {cfg.protocol.L_n} km at n={cfg.protocol.n}")
    reporting.write_records([record], ANALYTIC_COLUMNS, cfg.output, cfg.output_path)
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.sim is None:
        raise ConfigError("sim: missing required section")
    rows = convergence_report(cfg.sim, rate_breakdown(cfg.protocol))
    reporting.write_records([row.as_record() for row in rows], CONVERGENCE_COLUMNS,
                            cfg.output, cfg.output_path)
    return 0


def cmd_verify(cfg: RunConfig, phase_grid: int = config.VERIFY_PHASE_GRID) -> int:
    if phase_grid < 1:
        raise ConfigError(f"phase_grid: must be at least 1, got {phase_grid}")
    rows = run_verification(cfg.protocol, phase_grid)
    reporting.write_records([row.as_record() for row in rows], CHECK_COLUMNS,
                            cfg.output, cfg.output_path)
    return 0 if all(row.passed for row in rows) else 1


def cmd_sweep(cfg: RunConfig, axis: str, values: Sequence[float]) -> int:
    if not values:
        raise ConfigError("values: empty range")
    records = []
    for value, breakdown in sweep(cfg.protocol, axis, values):
        record = {axis: value}
        record.update({k: v for k, v in breakdown.as_record().items() if k != axis})
        records.append(record)
    columns = (axis,) + tuple(c for c in RATE_COLUMNS if c != axis)
    reporting.write_records(records, columns, cfg.output, cfg.output_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML run config")
    common.add_argument("--output", choices=config.OUTPUT_FORMATS, help="output format")
    common.add_argument("--output-path", help="write the table to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="repeater", description="PME quantum repeater toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analytic", parents=[common], help="closed-form rate table")

    simulate = sub.add_parser("simulate", parents=[common], help="Monte Carlo convergence report")
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--trials", type=int)
    simulate.add_argument("--workers", type=int)

    verify = sub.add_parser("verify", parents=[common], help="Fock-space verification battery")
    verify.add_argument("--phase-grid", type=int, default=config.VERIFY_PHASE_GRID,
                        help="points per phase parameter")

    sweep_cmd = sub.add_parser("sweep", parents=[common], help="rate table over one parameter")
    sweep_cmd.add_argument("--axis", required=True, help="ProtocolParams field to vary")
    sweep_cmd.add_argument("--values", required=True, help='"a..b" or a comma-separated list')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point. Returns the process exit code."""
    args = build_parser().parse_args(argv)
    config.validate_config()

    try:
        path = resolve_config_path(args.config)
        log(f"Using config {path}")
        cfg = with_overrides(
            load_run_config(path),
            output=args.output,
            output_path=args.output_path,
            seed=getattr(args, "seed", None),
            trials=getattr(args, "trials", None),
            workers=getattr(args, "workers", None),
        )

        if args.command == "analytic":
            return cmd_analytic(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.phase_grid)
        return cmd_sweep(cfg, args.axis, parse_values(args.values))

    except ConfigError as e:
        log(f"Invalid configuration: {e}", "ERROR")
        return 2
    except (FockError, SimulationError) as e:
        log(f"Error during {args.command}: {e}", "ERROR")
        return 1
    except OSError as e:
        log(f"I/O error during {args.command}: {e}", "ERROR")
        return 1


if __name__ == "__main__":
    sys.exit(main())
