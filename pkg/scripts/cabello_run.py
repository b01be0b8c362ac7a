"""End-to-end run on the four-particle singlet scenario.

    python scripts/cabello_run.py [--n 80000] [--seed 42]

Prints the recomputed prediction table, the element-of-reality search with its
derivation, the disturbance of each certain prediction, and a sampled run.
"""
import argparse

from eprlab.cli import fraction_text
from eprlab.disturbance import loophole_matrix
from eprlab.lhv import explain_contradiction
from eprlab.scenarios import build_cabello, prediction_table
from eprlab.verification import run_lhv_check, sampling_summary


def show(x):
    frac = fraction_text(x)
    return f"{x:.6g}" + (f" ({frac})" if frac else "")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=80_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args(argv)

    scen = build_cabello()
    print("predictions")
    for rc in prediction_table(scen).rows:
        print(f"  {rc.row.name:<44} {show(rc.computed)}")

    for check in scen.lhv_checks:
        rep = run_lhv_check(scen, check)
        print(f"\nlhv '{check.name}': {len(rep.models)} of {rep.searched} assignments survive")
        if rep.contradiction:
            for step in explain_contradiction(rep).steps:
                print(f"  {step}")

    print("\ndisturbance")
    for rep in loophole_matrix(scen):
        print(f"  {rep.prediction:<24} {show(rep.p_before)} -> {show(rep.p_after)}")

    s = sampling_summary(scen, args.n, args.seed)
    print(f"\nsampling n={args.n} seed={args.seed}")
    for r in s["rows"]:
        print(f"  {r['outcome']}  {r['count']:>6}  z {r['z']:+.2f}")


if __name__ == "__main__":
    main()
