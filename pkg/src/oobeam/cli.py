"""Command line entry point.

Subcommands: simulate, sweep, verify, dump-spectrum; `--dump-config` prints
the embedded defaults as JSON.  Exit codes: 0 success, 1 verification
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .channel import derive_path_set, place_scenario
from .config import ConfigError, ScenarioConfig, dump_config, load_config
from .harness import build_artifacts, sweep, verify
from .spectrum import analytic_spectrum, spectrum_csv_lines

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oobeam",
        description="Uplink mmWave beam selection with low-band side information",
    )
    parser.add_argument("--dump-config", action="store_true",
                        help="print the default configuration as JSON and exit")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--trials", type=int, help="override trial count")
        p.add_argument("--seed", type=int, help="override master seed")
        p.add_argument("--workers", type=int, default=1, help="worker processes")

    p_sim = sub.add_parser("simulate", help="run trials at one operating point")
    common(p_sim)
    p_sim.add_argument("--out", default="results.csv", help="output CSV path")

    p_sweep = sub.add_parser("sweep", help="sweep SNR or disk radius")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=("snr", "radius"))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated sweep values")
    p_sweep.add_argument("--out", default="sweep.csv", help="output CSV path")

    p_verify = sub.add_parser("verify", help="run the verification oracles")
    p_verify.add_argument("--budget", type=int, default=1_000_000,
                          help="max joint selections for exhaustive search")
    p_verify.add_argument("--seed", type=int, default=0)

    p_spec = sub.add_parser("dump-spectrum", help="export one UE's low-band spectrum")
    common(p_spec)
    p_spec.add_argument("--ue", type=int, default=0, help="UE index")
    p_spec.add_argument("--trial", type=int, default=0, help="trial index for the draw")
    p_spec.add_argument("--out", default="heatmap.csv", help="output CSV path")
    return parser


def _load(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    return dataclasses.replace(config, **overrides) if overrides else config


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.dump_config:
        print(dump_config(ScenarioConfig()))
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG_ERROR

    try:
        if args.command == "verify":
            report = verify(budget=args.budget, seed=args.seed)
            print(report.table())
            return EXIT_OK if report.all_passed else EXIT_VERIFY_FAILED

        config = _load(args)
        if args.command == "simulate":
            _, text = sweep(config, "snr_db", [config.snr_db],
                            num_trials=config.trials, workers=args.workers)
            _write(args.out, text)
            print(f"wrote {args.out}")
            return EXIT_OK

        if args.command == "sweep":
            axis = "snr_db" if args.axis == "snr" else "disk_radius_m"
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad sweep values: {exc}") from exc
            if not values:
                raise ConfigError("sweep needs at least one value")
            _, text = sweep(config, axis, values,
                            num_trials=config.trials, workers=args.workers)
            _write(args.out, text)
            print(f"wrote {args.out}")
            return EXIT_OK

        if args.command == "dump-spectrum":
            if not 0 <= args.ue < config.num_ues:
                raise ConfigError(f"ue must be in [0, {config.num_ues})")
            art = build_artifacts(config)
            rng = np.random.default_rng((config.master_seed, args.trial))
            geometry = place_scenario(config, rng)
            sub6_paths = derive_path_set(geometry, "sub6", config)
            spec = analytic_spectrum(sub6_paths, art.sub6_bs, art.sub6_ue)
            _write(args.out, "\n".join(spectrum_csv_lines(spec, args.ue)) + "\n")
            print(f"wrote {args.out}")
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return EXIT_CONFIG_ERROR


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


if __name__ == "__main__":
    raise SystemExit(main())
