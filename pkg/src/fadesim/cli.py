"""Command line entry point.

    fadesim run <config> [--out DIR] [--seed N] [--jobs N] [--dump-stages]
    fadesim validate <config>
    fadesim presets list

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .config import ConfigError, describe, validate_config
from .runner import run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def preset_names() -> list[str]:
    return sorted(p.name for p in resources.files("fadesim.presets").iterdir() if p.name.endswith(".cfg"))


def read_config_text(ref: str) -> str:
    """Read a scenario from a path, falling back to a bundled preset of that name."""
    path = Path(ref)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    name = path.name if path.name.endswith(".cfg") else path.name + ".cfg"
    if name in preset_names():
        return resources.files("fadesim.presets").joinpath(name).read_text(encoding="utf-8")
    raise FileNotFoundError(f"no such config file or preset: {ref}")


def _load(ref: str):
    try:
        text = read_config_text(ref)
    except FileNotFoundError as exc:
        raise ConfigError([str(exc)]) from None
    return validate_config(text)


def _cmd_run(args) -> int:
    cfg = _load(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 1 << 64:
            raise ConfigError(["--seed: must fit in 64 unsigned bits"])
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if args.jobs < 1:
        raise ConfigError(["--jobs: must be >= 1"])
    out = Path(args.out) if args.out else Path("runs") / cfg.name
    summary = run_scenario(cfg, out, jobs=args.jobs, dump_stages=args.dump_stages)
    for combo, rep in summary.rows:
        print(f"M={combo.modulation:<3d} {combo.channel:<19s} Es/N0={combo.esn0_db:>5g} dB "
              f"fd={combo.doppler_hz:>4g} Hz  BER={rep.ber:.6g} ({rep.bit_errors}/{rep.bits_compared})")
    print(f"wrote {len(summary.artifacts)} artifact(s) to {out} in {summary.wall_time_s:.1f} s")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = _load(args.config)
    print(json.dumps(describe(cfg), indent=2, default=str))
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name in preset_names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fadesim", description="M-PSK link simulator over AWGN and Rayleigh fading")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or preset")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (default runs/<name>)")
    run.add_argument("--seed", type=int, help="override master_seed")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--dump-stages", action="store_true", help="save every chain stage of trial 0")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a scenario and print the resolved config")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)

    pre = sub.add_parser("presets", help="bundled scenario presets")
    pre.add_argument("action", choices=["list"])
    pre.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
