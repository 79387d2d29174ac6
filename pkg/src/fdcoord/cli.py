"""Command-line front end.

Subcommands:

    fdcoord gen-map  --out MAP.txt [--config CFG.json] [--seed N]
    fdcoord build-db --map MAP.txt --out DB.txt [--config CFG.json]
    fdcoord simulate --out DIR [--map MAP.txt] [--db DB.txt] [--config CFG.json]
                     [--seed N] [--trials N] [--schemes a,b,c] [--bs-power P]
                     [--threads N] [--no-figures]

Flags override config-file values, which override built-in defaults. All
commands exit 0 on success and nonzero with a one-line diagnostic on failure;
identical inputs and seed produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import config as cfgmod
from .radio_map import MapFormatError, generate_synthetic_map, load_radio_map, save_radio_map
from .regions import (
    DatabaseFormatError,
    build_database,
    crossing_floor_oracle,
    detect_obstructions,
    load_database,
    save_database,
)
from .report import summary_table, write_campaign_outputs
from .sim import run_campaign, summarize_campaigns


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdcoord",
        description="Full-duplex interference coordination: maps, region databases, simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        p.add_argument("--seed", type=int, metavar="N", help="override scenario.seed")
        p.add_argument(
            "--threads",
            type=int,
            default=os.cpu_count() or 1,
            metavar="N",
            help="worker cap for parallel sections (default: available parallelism)",
        )

    p_gen = sub.add_parser("gen-map", help="write a synthetic radio-map grid file")
    common(p_gen)
    p_gen.add_argument("--out", required=True, metavar="FILE", help="output map file")

    p_db = sub.add_parser("build-db", help="extract isolated region pairs from a map")
    common(p_db)
    p_db.add_argument("--map", required=True, metavar="FILE", help="input radio-map file")
    p_db.add_argument("--out", required=True, metavar="FILE", help="output database file")

    p_sim = sub.add_parser("simulate", help="run Monte-Carlo campaigns and write reports")
    common(p_sim)
    p_sim.add_argument("--map", metavar="FILE", help="radio-map file (default: generate from config)")
    p_sim.add_argument("--db", metavar="FILE", help="database file (default: build from config)")
    p_sim.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p_sim.add_argument("--trials", type=int, metavar="N", help="override scenario.trials")
    p_sim.add_argument(
        "--schemes", metavar="A,B,...", help="comma-separated override of scenario.schemes"
    )
    p_sim.add_argument(
        "--bs-power", type=float, metavar="DBM", help="override link_budget.bs_tx_power_dbm"
    )
    p_sim.add_argument(
        "--no-figures", action="store_true", help="skip figure rendering, keep CSV/JSON only"
    )
    return parser


def _apply_overrides(config: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "seed", None) is not None:
        config["scenario"]["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        config["scenario"]["trials"] = args.trials
    if getattr(args, "schemes", None):
        config["scenario"]["schemes"] = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if getattr(args, "bs_power", None) is not None:
        config["link_budget"]["bs_tx_power_dbm"] = args.bs_power
    return config


def _default_oracle(config: dict, radio_map, params):
    rects = [o.bounds for o in detect_obstructions(radio_map, params.detection_threshold_db)]
    link = cfgmod.build_link_budget(config)
    return crossing_floor_oracle(rects, cfgmod.isolation_floor_db(config), link.dl_band_center_mhz)


def _cmd_gen_map(args: argparse.Namespace) -> int:
    config = _apply_overrides(cfgmod.load_config(args.config), args)
    cfgmod.validate_config(config)
    spec = cfgmod.build_map_spec(config)
    radio_map = generate_synthetic_map(spec, seed=config["scenario"]["seed"])
    save_radio_map(radio_map, args.out)
    print(f"wrote {args.out}: {radio_map.n_cols} x {radio_map.n_rows} pixels "
          f"({radio_map.n_cols * radio_map.pixel_size:g} x "
          f"{radio_map.n_rows * radio_map.pixel_size:g} m)")
    return 0


def _cmd_build_db(args: argparse.Namespace) -> int:
    config = _apply_overrides(cfgmod.load_config(args.config), args)
    cfgmod.validate_config(config)
    radio_map = load_radio_map(args.map)
    params = cfgmod.build_extraction_params(config)
    oracle = _default_oracle(config, radio_map, params)
    db = build_database(radio_map, params, oracle)
    save_database(db, args.out)
    print(f"wrote {args.out}: {len(db)} region pair(s)")
    if db.pairs:
        alphas = ", ".join(f"alpha_{p.index}={p.alpha_db:g} dB" for p in db.pairs)
        print(alphas)
    else:
        print("warning: no region pair cleared the admission threshold", file=sys.stderr)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _apply_overrides(cfgmod.load_config(args.config), args)
    cfgmod.validate_config(config)

    if args.map:
        radio_map = load_radio_map(args.map)
    else:
        radio_map = generate_synthetic_map(cfgmod.build_map_spec(config))
    params = cfgmod.build_extraction_params(config)
    if args.db:
        db = load_database(args.db)
        if db.map_id != radio_map.content_id():
            print(
                f"warning: database was built for map {db.map_id}, "
                f"simulating on {radio_map.content_id()}",
                file=sys.stderr,
            )
    else:
        db = build_database(radio_map, params, _default_oracle(config, radio_map, params))

    link = cfgmod.build_link_budget(config)
    results = {}
    for scheme in cfgmod.scheme_list(config):
        scenario = cfgmod.build_scenario(config, scheme)
        results[scheme] = run_campaign(scenario, radio_map, db, threads=max(1, args.threads))
    summary = summarize_campaigns(results, link, db)
    write_campaign_outputs(
        Path(args.out), results, summary, resolved_config=config, figures=not args.no_figures
    )
    print(summary_table(summary), end="")
    print(f"outputs written to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "gen-map": _cmd_gen_map,
        "build-db": _cmd_build_db,
        "simulate": _cmd_simulate,
    }
    try:
        return handlers[args.command](args)
    except (cfgmod.ConfigError, MapFormatError, DatabaseFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
