"""Regenerate the simulator-derived GHZ and Hardy fixtures.

    python scripts/freeze_fixtures.py [--check]

With --check, recompute and compare against the stored files instead of writing.
"""
import argparse
import json
import math
import sys
from pathlib import Path

from eprlab.scenarios import HARDY_GRID_STEP, derive_ghz_outcomes, optimize_hardy

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "eprlab" / "fixtures"


def ghz_fixture():
    return {
        "state": "(|000> + |111>)/sqrt(2), qubit k = particle k+1",
        "convention": "composites X1Y2Y3, Y1X2Y3, Y1Y2X3, X1X2X3 with +1 sign; "
        "outcome values read off the statevector simulator",
        "outcomes": derive_ghz_outcomes(),
    }


def hardy_fixture():
    opt = optimize_hardy(HARDY_GRID_STEP)
    return {
        "state": "a(|01> + |10>) - a cot(angle)|11>; A0 = B0 tilted by 2*angle from Z toward X; A1 = B1 = Z",
        "grid_step": opt.grid_step,
        "refinement": "scipy golden-section around the best grid point, tol 1e-10",
        "grid_angle": opt.grid_angle,
        "angle": opt.angle,
        "success_probability": opt.probability,
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args(argv)
    status = 0
    for name, data in (("ghz.json", ghz_fixture()), ("hardy.json", hardy_fixture())):
        path = FIXTURES / name
        if args.check:
            stored = json.loads(path.read_text())
            same = all(
                stored.get(k) == v
                if not isinstance(v, float)
                else math.isclose(stored.get(k), v, rel_tol=0, abs_tol=1e-12)
                for k, v in data.items()
            )
            print(f"{name}: {'ok' if same else 'DIFFERS'}")
            status |= not same
        else:
            path.write_text(json.dumps(data, indent=2) + "\n")
            print(f"wrote {path}")
    return status


if __name__ == "__main__":
    sys.exit(main())
