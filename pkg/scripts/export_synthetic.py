"""
export_synthetic.py
--------------------
Writes a synthetic group-lasso instance to the flat binary dump format so
other solver implementations can be compared on identical data.

Usage:
    python scripts/export_synthetic.py out.bin --N 10000 --n 1000 --groups 10 --ratio 0.5 --seed 0
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------
import argparse
import sys
from pathlib import Path

from hspg_ops.config import SYNTH_NUM_GROUPS
from hspg_ops.data import export_synthetic, gen_synthetic
from hspg_ops.logging import get_logger

# ---------------------------------------------------------------------
# Logger
# ---------------------------------------------------------------------
log = get_logger("export_synthetic")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Dump a synthetic recovery instance.")
    parser.add_argument("output", type=Path, help="Destination file")
    parser.add_argument("--N", type=int, default=10000)
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--groups", type=int, default=SYNTH_NUM_GROUPS)
    parser.add_argument("--ratio", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        instance = gen_synthetic(args.N, args.n, args.groups, args.ratio, args.seed)
    except ValueError as e:
        log.error(f"Cannot generate instance: {e}")
        return 1

    args.output.parent.mkdir(parents=True, exist_ok=True)
    export_synthetic(instance, args.output)
    log.info(f"Zero groups of x*: {sorted(instance.true_zero_groups)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
