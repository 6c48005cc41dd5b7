"""Command-line entry points: serve, run-sim, calibrate, make-mix."""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from importlib import resources
from pathlib import Path

from .catalog import load_catalog
from .config import EngineConfig, load_config, write_thresholds
from .errors import ConvRecError
from .routing import calibrate_thresholds, generate_query_mix, load_query_mix, routed_fractions, save_query_mix
from .simulation import ExperimentConfig, run_experiment


def _data_path(name: str) -> Path:
    return Path(str(resources.files("convrec").joinpath("data", name)))


def _load_engine_config(path: str | None) -> EngineConfig:
    if path:
        return load_config(path)
    return load_config(_data_path("demo_config.ini"))


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = _load_engine_config(args.config)
    catalog_path = (
        args.catalog or os.environ.get("CONVREC_CATALOG") or config.catalog_path
        or str(_data_path("demo_catalog.txt"))
    )
    port = args.port or int(os.environ.get("CONVREC_PORT", 0)) or config.port
    catalog = load_catalog(catalog_path)
    app = create_app(
        config, {"demo": catalog}, "demo",
        journal_path=args.journal or config.journal_path or None,
    )
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def _experiment_from_ini(path: str) -> dict:
    p = configparser.ConfigParser(delimiters=("=",), interpolation=None)
    if not p.read(path):
        raise ConvRecError(f"cannot read experiment config {path}")
    if not p.has_section("experiment"):
        return {}
    out: dict = {}
    section = p["experiment"]
    for key in ("n_users", "n_items", "vocab_size", "k", "patience"):
        if key in section:
            out[key] = section.getint(key)
    for key in ("accept_threshold", "disclosure_rate", "tau1", "tau2"):
        if key in section:
            out[key] = section.getfloat(key)
    if "variant" in section:
        out["variant"] = section.get("variant")
    if "seeds" in section:
        out["seeds"] = tuple(int(s) for s in section.get("seeds").split(","))
    return out


def cmd_run_sim(args: argparse.Namespace) -> int:
    kwargs = _experiment_from_ini(args.config) if args.config else {}
    if args.variant:
        kwargs["variant"] = args.variant
    if args.seeds:
        kwargs["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    if args.users is not None:
        kwargs["n_users"] = args.users
    if args.items is not None:
        kwargs["n_items"] = args.items
    if args.k is not None:
        kwargs["k"] = args.k
    config = ExperimentConfig(**kwargs)
    report = run_experiment(config, out_dir=args.out)
    print(report.to_json(), end="")
    if args.out:
        print(f"wrote {Path(args.out) / 'report.json'} and conversations.jsonl", file=sys.stderr)
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = _load_engine_config(args.config)
    descriptors = load_query_mix(args.mix)
    values = [d.complexity(config.router_betas, config.turn_saturation) for d in descriptors]
    tau1, tau2 = calibrate_thresholds(values)
    fractions = routed_fractions(values, (tau1, tau2))
    print(f"tau1 = {tau1!r}")
    print(f"tau2 = {tau2!r}")
    print(
        "routed fractions: rapid {:.1%}, reasoning {:.1%}, deep {:.1%}".format(*fractions)
    )
    if args.write:
        if not args.config:
            print("refusing to write thresholds into the packaged demo config; "
                  "pass --config", file=sys.stderr)
            return 2
        write_thresholds(args.config, tau1, tau2)
        print(f"updated {args.config}")
    return 0


def cmd_make_mix(args: argparse.Namespace) -> int:
    descriptors = generate_query_mix(args.seed, args.n)
    save_query_mix(descriptors, args.out)
    print(f"wrote {args.n} query descriptors to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convrec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--config", help="engine config INI (default: packaged demo)")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--catalog", help="catalog file (default: packaged demo)")
    p.add_argument("--journal", help="append-only session journal for recovery")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("run-sim", help="run a simulated evaluation experiment")
    p.add_argument("--config", help="experiment INI with an [experiment] section")
    p.add_argument("--variant", choices=("Full", "FixedUniformWeights", "NoRefineRound", "Tier2Only"))
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--users", type=int, help="conversations per seed")
    p.add_argument("--items", type=int, help="catalog size")
    p.add_argument("--k", type=int, help="recommendation cutoff")
    p.add_argument("--out", help="output directory for report.json + conversations.jsonl")
    p.set_defaults(func=cmd_run_sim)

    p = sub.add_parser("calibrate", help="calibrate tier thresholds from a query mix")
    p.add_argument("--config", help="engine config INI to read betas from (and update)")
    p.add_argument("--mix", required=True, help="query-mix file (one descriptor per line)")
    p.add_argument("--write", action="store_true", help="write tau1/tau2 back to the config")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("make-mix", help="generate a reference query-mix file")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_mix)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConvRecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
