"""Command-line entry point: ``lpi-isac {simulate,sweep,analyze,goldens,secret}``.

Exit codes: 0 ok, 1 configuration error, 2 runtime error, 3 golden mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .config import load_config
from .errors import ConfigError, LpiSimError
from .harness import DESK_FRAME, emit_goldens, preset, run_campaign, simulate, verify_goldens
from .impair import ImpairmentMode, generate_secret
from .metrics import MaskSpec, evaluate
from .rdmap import WindowSpec

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3
DEFAULT_GOLDEN_DIR = "goldens"

log = logging.getLogger("lpi_isac")


def _scenarios(args):
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        scenarios = load_config(args.config)
    else:
        try:
            scenarios = preset(args.preset or args.default_preset)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    if getattr(args, "scenario", None):
        scenarios = [s for s in scenarios if s.name in args.scenario]
        if not scenarios:
            raise ConfigError(f"no scenario named {args.scenario}")
    if args.seed is not None:
        scenarios = [replace(s, secret_seed=args.seed) for s in scenarios]
    return scenarios


def _fmt(record: dict) -> str:
    return (f"{record['scenario']},{record['image_sinr_db']:.2f},{record['pslr_db']:.2f},"
            f"{record['islr_db']:.2f},{record['ser']:.4f}")


def cmd_simulate(args) -> int:
    scenarios = _scenarios(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print("scenario,image_sinr_db,pslr_db,islr_db,ser")
    for s in scenarios:
        trial = simulate(s)
        if args.format == "bin":
            io.write_map_bin(trial.rdm, out / f"{s.name}.rdmap.bin")
        else:
            io.write_map_csv(trial.rdm, out / f"{s.name}.rdmap.csv")
        io.write_cut_csv(trial.rdm, trial.report.peak[0], out / f"{s.name}.cut.csv")
        record = trial.record()
        io.write_json(record, out / f"{s.name}.metrics.json")
        print(_fmt(record))
    return EXIT_OK


def cmd_sweep(args) -> int:
    result = run_campaign(_scenarios(args), args.trials, workers=args.workers)
    result.write(args.out_dir)
    print("scenario,sinr_median_db,pslr_median_db,islr_median_db,ser_median,n_trials")
    for name, stats in result.summary().items():
        print(f"{name},{stats['image_sinr_db']['median']:.2f},{stats['pslr_db']['median']:.2f},"
              f"{stats['islr_db']['median']:.2f},{stats['ser']['median']:.4f},"
              f"{stats['ser']['n']}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    window = WindowSpec(args.window, args.sidelobe_db)
    reader = io.read_map_csv if str(args.map).endswith(".csv") else io.read_map_bin
    rdm = reader(args.map, window, args.grid)
    mask = MaskSpec(zero_velocity_halfwidth=args.zero_velocity,
                    peak_search_halfwidth_bins=args.search)
    near = tuple(int(x) for x in args.near.split(",")) if args.near else None
    report = evaluate(rdm, mask, near)
    print(json.dumps(report.to_record(scenario=str(args.map)), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_goldens(args) -> int:
    scenarios = _scenarios(args)
    if args.verify:
        problems = [p for s in scenarios for p in verify_goldens(s, args.out_dir)]
        for p in problems:
            print(f"FAIL {p}")
        if problems:
            return EXIT_CHECK
        print(f"ok: {len(scenarios)} scenarios match {args.out_dir}")
        return EXIT_OK
    for s in scenarios:
        for path in emit_goldens(s, args.out_dir).values():
            print(path)
    return EXIT_OK


def cmd_secret(args) -> int:
    cfg = _scenarios(args)[0].frame if (args.config or args.preset) else DESK_FRAME
    if args.action == "generate":
        secret = generate_secret(cfg, args.mode, args.seed if args.seed is not None else 1)
        if args.out:
            io.write_secret(secret, cfg, args.out)
        print(json.dumps(io.secret_record(secret, cfg), indent=2, sort_keys=True))
        return EXIT_OK
    if not args.file:
        raise ConfigError("secret inspect needs a record file")
    secret = io.read_secret(args.file, cfg)
    summary = dict(io.secret_record(secret, cfg))
    summary.update(
        phase_min_rad=float(secret.phase.min()), phase_max_rad=float(secret.phase.max()),
        doppler_min_hz=float(secret.doppler.min()), doppler_max_hz=float(secret.doppler.max()),
        symbol_wise_broadcast=bool((secret.phase == secret.phase[:1]).all()),
    )
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def _source_flags(p: argparse.ArgumentParser, default_preset: str) -> None:
    p.add_argument("--config", help="JSON scenario file")
    p.add_argument("--preset", help="built-in scenario set (fig3, fig3-full, golden)")
    p.add_argument("--seed", type=int, help="override the secret seed (campaign base)")
    p.set_defaults(default_preset=default_preset)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpi-isac", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run scenarios once and export maps and metrics")
    _source_flags(p, "golden")
    p.add_argument("--scenario", action="append", help="only run this scenario (repeatable)")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Monte-Carlo campaign with median/IQR summaries")
    _source_flags(p, "fig3")
    p.add_argument("--scenario", action="append")
    p.add_argument("--trials", type=int, help="trials per scenario (default from config)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="metrics on an existing map file (.rdmap.bin or .csv)")
    p.add_argument("map")
    p.add_argument("--window", choices=("chebyshev", "rectangular"), default="chebyshev")
    p.add_argument("--sidelobe-db", type=float, default=100.0)
    p.add_argument("--grid", choices=("full", "pilot"), default="full")
    p.add_argument("--zero-velocity", type=float, default=5.0, help="mask half-width, m/s")
    p.add_argument("--near", help="restrict the peak search to RANGE_BIN,DOPPLER_BIN")
    p.add_argument("--search", type=int, default=0, help="search half-width around --near")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("goldens", help="emit or verify golden reference vectors")
    _source_flags(p, "golden")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--emit", action="store_true")
    mode.add_argument("--verify", action="store_true")
    p.add_argument("--out-dir", default=DEFAULT_GOLDEN_DIR)
    p.set_defaults(func=cmd_goldens)

    p = sub.add_parser("secret", help="generate or inspect a shared secret record")
    p.add_argument("action", choices=("generate", "inspect"))
    p.add_argument("file", nargs="?", help="record to inspect")
    _source_flags(p, "golden")
    p.add_argument("--mode", choices=[m.value for m in ImpairmentMode], default="subcarrier_wise")
    p.add_argument("--out", help="write the record here")
    p.set_defaults(func=cmd_secret)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LpiSimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
