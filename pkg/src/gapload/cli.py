"""Command-line entry point: ``gapload {channel,gap-table,run,sweep,compare}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .channel import load_channel, subchannel_gains, write_gains_csv
from .coding import build_gap_table, db
from .config import DEFAULT_CONFIG, load_config
from .errors import ConfigError, GaploadError
from .fileio import format_float, write_csv
from .loading import default_workers
from .scenario import (
    VARIANTS,
    energy_comparison,
    length_sweep,
    run_scenario,
    run_variants,
    write_allocation_csv,
    write_energy_csv,
    write_summary_csv,
    write_throughput_csv,
)

def parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=DEFAULT_CONFIG,
                        help="scenario file; bundled names (reference.cfg, profiles.cfg) also resolve")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set lc=1 --set coding=off (repeatable)")
    common.add_argument("--out", type=Path, default=None, help="directory for CSV output")
    common.add_argument("--quiet", action="store_true", help="suppress summary lines")

    p = argparse.ArgumentParser(prog="gapload",
                                description="Coding-aware DMT / LP-DMT loading over power-line channels")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ch = sub.add_parser("channel", parents=[common], help="evaluate carrier gains of a channel model")
    ch.add_argument("--model", type=Path, default=None, help="channel parameter file (overrides config)")
    ch.add_argument("--csv", type=Path, default=None, help="write subcarrier_index,freq_hz,gain_db here")

    sub.add_parser("gap-table", parents=[common], help="print uncoded and coded SNR gaps per order")
    sub.add_parser("run", parents=[common], help="run the configured variant once")
    sub.add_parser("sweep", parents=[common], help="throughput versus length for every profile")
    sub.add_parser("compare", parents=[common], help="all four variants on one channel + energy profiles")
    return p


def _emit(args, line: str) -> None:
    if not args.quiet:
        print(line)


def cmd_channel(args, run) -> None:
    cfg = run.system
    model = load_channel(args.model, run.channel.propagation_speed) if args.model else run.channel.build()
    gains = subchannel_gains(model, cfg.grid)
    target = args.csv or ((args.out or Path(".")) / "channel.csv")
    write_gains_csv(target, cfg.grid, gains)
    _emit(args, f"channel N={gains.size} min_db={db(gains.min()):.2f} max_db={db(gains.max()):.2f} -> {target}")


def cmd_gap_table(args, run) -> None:
    cfg = run.system
    unc = build_gap_table(cfg.coding, False, cfg.b_max)
    cod = build_gap_table(cfg.coding, True, cfg.b_max)
    header = ("order_bits", "gap_db_uncoded", "gap_db_coded")
    rows = [(b, unc.gap_db(b), cod.gap_db(b)) for b in range(1, cfg.b_max + 1)]
    if args.out:
        write_csv(args.out / "gap_table.csv", header, rows)
    print(",".join(header))
    for b, u, c in rows:
        print(f"{b},{format_float(u)},{format_float(c)}")


def cmd_run(args, run, workers) -> None:
    result = run_scenario(run.system, run.channel.build(), workers=workers)
    if args.out:
        write_allocation_csv(args.out / "allocation.csv", result)
    _emit(args, result.summary_line())


def cmd_sweep(args, run, workers) -> None:
    sw = run.sweep
    rows = length_sweep(run.system, sw.profiles, sw.distances,
                        propagation_speed=run.channel.propagation_speed, workers=workers)
    target = (args.out or Path(".")) / "throughput.csv"
    write_throughput_csv(target, rows)
    for r in rows:
        _emit(args, f"{r.profile} {r.distance:g}m {r.variant} raw={r.raw_bits} useful={r.useful_bits:.1f}")


def cmd_compare(args, run, workers) -> None:
    model = run.channel.build()
    results = run_variants(run.system, model, VARIANTS, workers=workers)
    out = args.out or Path(".")
    write_summary_csv(out / "summary.csv", results.values())
    cmp = energy_comparison(run.system, model, workers=workers)
    write_energy_csv(out / "energy.csv", cmp)
    for r in results.values():
        _emit(args, r.summary_line())
    _emit(args, f"mean utilization dmt={cmp.dmt_utilization:.4f} lpdmt={cmp.lpdmt_utilization:.4f}")


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    try:
        run = load_config(args.config, args.overrides)
        workers = default_workers()
        if args.command == "channel":
            cmd_channel(args, run)
        elif args.command == "gap-table":
            cmd_gap_table(args, run)
        elif args.command == "run":
            cmd_run(args, run, workers)
        elif args.command == "sweep":
            cmd_sweep(args, run, workers)
        elif args.command == "compare":
            cmd_compare(args, run, workers)
    except ConfigError as exc:
        print(f"gapload: configuration error in {args.command}: {exc}", file=sys.stderr)
        return 2
    except GaploadError as exc:
        print(f"gapload: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
