"""Per-scenario self-checks behind ``eprlab verify``."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import lhv
from .disturbance import loophole_matrix
from .measurement import (
    NonCommuting,
    chained_distribution,
    joint_distribution,
    make_context,
    sample_outcomes,
)
from .quantum_core import ATOL, PauliString, expectation
from .scenarios import (
    SCENARIOS,
    PredictionTable,
    Scenario,
    build_hardy,
    check_composites,
    check_locality,
    optimize_hardy,
    prediction_table,
)

SAMPLE_SEED = 42
SAMPLE_SIZE = 80_000
SIGMAS = 4.0
FIXTURE_TOL = 1e-6


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def run_lhv_check(scenario: Scenario, check, event=None) -> lhv.ModelReport:
    rows = PredictionTable(tuple(scenario.predictions.row(r) for r in check.rows))
    cons = lhv.constraints_from_predictions(rows, scenario.quantity_names)
    ev = check.event if event is None else event
    return lhv.find_models(scenario.quantity_names, cons, ev, scenario.compatible)


def sampling_summary(scenario: Scenario, n: int, seed: int) -> dict:
    state, ctx = scenario.frame(scenario.joint_context)
    dist = joint_distribution(state, ctx)
    counts = sample_outcomes(state, ctx, n, seed)
    rows = []
    for outcome, p in dist.entries.items():
        sigma = math.sqrt(n * p * (1 - p))
        expected = n * p
        c = counts.get(outcome, 0)
        z = (c - expected) / sigma if sigma > 0 else (0.0 if c == expected else math.inf)
        rows.append({"outcome": outcome, "probability": p, "count": c,
                     "expected": expected, "sigma": sigma, "z": z})
    return {"labels": ctx.labels, "n": n, "seed": seed, "rows": rows,
            "within": all(abs(r["z"]) <= SIGMAS for r in rows)}


def _table_checks(scenario: Scenario) -> list[Check]:
    out = []
    for rc in prediction_table(scenario).rows:
        shown = "null condition" if rc.computed is None else f"{rc.computed:.15g}"
        out.append(Check(f"prediction {rc.row.name} = {rc.row.probability:g}",
                         rc.deviation <= ATOL, f"computed {shown}"))
    return out


def _structure_checks(scenario: Scenario) -> list[Check]:
    bad_c, bad_l = check_composites(scenario), check_locality(scenario)
    return [
        Check("composites factor into local quantities", not bad_c, ", ".join(bad_c)),
        Check("each quantity is local to its observer", not bad_l, ", ".join(bad_l)),
    ]


def _lhv_checks(scenario: Scenario) -> list[Check]:
    out = []
    for chk in scenario.lhv_checks:
        rep = run_lhv_check(scenario, chk)
        out.append(Check(
            f"lhv {chk.name}: {chk.expected_models} models",
            len(rep.models) == chk.expected_models,
            f"searched {rep.searched}, found {len(rep.models)}",
        ))
    return out


def cabello_checks(scenario: Scenario) -> list[Check]:
    checks = _table_checks(scenario) + _structure_checks(scenario)
    state, ctx = scenario.frame(scenario.joint_context)
    dist = joint_distribution(state, ctx)
    eighths = len(dist.entries) == 8 and all(abs(p - 0.125) <= ATOL for p in dist.entries.values())
    checks.append(Check("joint distribution: 8 outcomes of 1/8", eighths, f"{len(dist.entries)} outcomes"))
    prod_ok = all(math.prod(o) == -1 for o in dist.entries)
    yyyy = expectation(scenario.state, PauliString.from_label("YYYY"))
    checks.append(Check("outcome product is -1 on every outcome", prod_ok))
    checks.append(Check("<Y1Y2Y3Y4> = +1", abs(yyyy - 1) <= ATOL, f"{yyyy:.15g}"))
    for a, b in (("Z2", "X2Z4"), ("Z4", "Z2X4")):
        try:
            make_context([PauliString.from_particles(4, a), PauliString.from_particles(4, b)])
            rejected = False
        except NonCommuting:
            rejected = True
        checks.append(Check(f"{{{a}, {b}}} rejected as non-commuting", rejected))
    checks += _lhv_checks(scenario)
    for rep in loophole_matrix(scenario):
        ok = abs(rep.p_before - 1) <= ATOL and abs(rep.p_after - 0.5) <= ATOL
        checks.append(Check(f"disturbance {rep.prediction}: 1 -> 1/2", ok,
                            f"before {rep.p_before:.15g}, after {rep.p_after:.15g}"))
    worst = 0.0
    for perm in itertools.permutations(range(len(ctx))):
        chained = chained_distribution(state, ctx, perm)
        keys = set(chained.entries) | set(dist.entries)
        worst = max(worst, max(abs(chained.prob(k) - dist.prob(k)) for k in keys))
    checks.append(Check("collapse order invariance (24 orders)", worst <= ATOL, f"max diff {worst:.3g}"))
    s1 = sampling_summary(scenario, SAMPLE_SIZE, SAMPLE_SEED)
    s2 = sampling_summary(scenario, SAMPLE_SIZE, SAMPLE_SEED)
    checks.append(Check(f"sampling n={SAMPLE_SIZE} seed={SAMPLE_SEED} within {SIGMAS:g} sigma",
                        s1["within"], f"max |z| {max(abs(r['z']) for r in s1['rows']):.3f}"))
    checks.append(Check("sampling reproducible for a fixed seed", s1 == s2))
    return checks


def ghz_checks(scenario: Scenario) -> list[Check]:
    checks = _table_checks(scenario) + _structure_checks(scenario)
    for label in scenario.joint_context:
        d = scenario.distribution([label])
        checks.append(Check(f"{label} is definite", len(d.entries) == 1, str(d.entries)))
    try:
        scenario.frame(scenario.joint_context)
        joint = True
    except ValueError:
        joint = False
    checks.append(Check("GHZ composites pairwise commute", joint))
    checks += _lhv_checks(scenario)
    for rep in loophole_matrix(scenario):
        checks.append(Check(f"disturbance {rep.prediction}: after < 1",
                            rep.p_after < 1 - ATOL and abs(rep.p_before - 1) <= ATOL,
                            f"before {rep.p_before:.15g}, after {rep.p_after:.15g}"))
    return checks


def hardy_checks(scenario: Scenario) -> list[Check]:
    checks = _table_checks(scenario) + _structure_checks(scenario)
    success = scenario.evaluate(scenario.predictions.rows[-1])
    checks.append(Check("Hardy success probability > 0", success > ATOL, f"{success:.15g}"))
    checks += _lhv_checks(scenario)
    fixture = scenario.notes.get("fixture", build_hardy().notes["fixture"])
    opt = optimize_hardy(fixture["grid_step"])
    checks.append(Check(
        "optimized Hardy probability matches fixture",
        abs(opt.probability - fixture["success_probability"]) <= FIXTURE_TOL,
        f"{opt.probability:.15g} at angle {opt.angle:.12g}",
    ))
    return checks


CHECKS = {"cabello": cabello_checks, "ghz": ghz_checks, "hardy": hardy_checks}


def verify(name: str, scenario: Scenario | None = None) -> list[Check]:
    scenario = SCENARIOS[name]() if scenario is None else scenario
    return CHECKS[name](scenario)

