"""Run every bundled preset (or the ones named) into runs/<preset>/."""

import argparse
import sys
from pathlib import Path

from fadesim.cli import main, preset_names


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("presets", nargs="*", help="preset names (default: all)")
    parser.add_argument("--out", default="runs")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)

    status = 0
    for name in args.presets or preset_names():
        stem = name.removesuffix(".cfg")
        print(f"== {stem}")
        rc = main(["run", name, "--out", str(Path(args.out) / stem), "--jobs", str(args.jobs)])
        status = max(status, rc)
    return status


if __name__ == "__main__":
    sys.exit(run())
