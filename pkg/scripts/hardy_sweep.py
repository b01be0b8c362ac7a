"""Sweep the Hardy success probability over the state/setting angle.

    python scripts/hardy_sweep.py [--step 0.01] [--out sweep.csv]

Writes angle,probability rows and reports the refined optimum.
"""
import argparse
import csv
import math
import sys

import numpy as np

from eprlab.scenarios import HARDY_GRID_STEP, hardy_success_probability, optimize_hardy


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--out", help="CSV destination (default stdout)")
    args = ap.parse_args(argv)

    angles = np.arange(args.step, math.pi / 2, args.step)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["angle", "probability"])
    for a in angles:
        w.writerow([f"{a:.6f}", f"{hardy_success_probability(float(a)):.17g}"])
    if args.out:
        fh.close()

    opt = optimize_hardy(HARDY_GRID_STEP)
    print(f"optimum {opt.probability:.17g} at angle {opt.angle:.15g} "
          f"(sin^2 = {math.sin(opt.angle) ** 2:.12g})", file=sys.stderr)


if __name__ == "__main__":
    main()
