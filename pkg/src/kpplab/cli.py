"""Command line front end: one subcommand per experiment kind.

Each subcommand accepts ``--config PATH`` (repeatable; defaults to the
kind's built-in example config), ``--out DIR``, ``--seed N`` (overrides
the config) and ``--jobs K`` for running independent configs in
parallel.  Exit status: 0 when every run passes its criteria, 1 when a
criterion fails, 2 on configuration or numerical errors.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import ConfigError
from .harness import KINDS, RunConfig, parse_config, run


def _load_configs(kind, paths):
    if not paths:
        return [RunConfig(kind=kind)]
    configs = []
    for p in paths:
        cfg = parse_config(Path(p).read_text())
        if cfg.kind != kind:
            raise ConfigError(
                f"config {p} declares kind {cfg.kind!r}, expected {kind!r}")
        configs.append(cfg)
    return configs


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kpplab",
        description="reaction-diffusion front experiments in "
                    "time-varying environments")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind!r} experiment")
        p.add_argument("--config", action="append", default=[],
                       metavar="PATH", help="JSON run config (repeatable)")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="output root (default: config's out field)")
        p.add_argument("--seed", type=int, default=None, metavar="N",
                       help="master seed override")
        p.add_argument("--jobs", type=int, default=1, metavar="K",
                       help="independent configs run in parallel")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        configs = _load_configs(args.kind, args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    def one(cfg):
        return run(cfg, out=args.out, seed=args.seed)

    if args.jobs > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            manifests = list(pool.map(one, configs))
    else:
        manifests = [one(cfg) for cfg in configs]

    code = 0
    for m in manifests:
        root = Path(m.config["out"]) / m.run_id
        if m.error is not None:
            status = f"ERROR ({m.error['type']}: {m.error['message']})"
        elif m.passed:
            status = "pass"
        else:
            failed = [k for k, v in m.criteria.items() if not v]
            status = "FAIL (" + ", ".join(failed) + ")"
        print(f"{m.run_id}: {status}  [{m.wall_time:.2f}s]  -> {root}")
        code = max(code, m.exit_code)
    return code


if __name__ == "__main__":
    sys.exit(main())
