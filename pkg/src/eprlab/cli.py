"""
Command-line reports.

    eprlab scenario cabello --format json
    eprlab lhv cabello --event "A1A3=+1,a1a3=+1,B2b4=+1,b2B4=-1"
    eprlab lhv cabello --reduced
    eprlab disturb cabello
    eprlab sample cabello --n 80000 --seed 42
    eprlab verify cabello

Exit status: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from .disturbance import commutation_audit, intervening_context, loophole_matrix
from .lhv import explain_contradiction
from .measurement import parse_event
from .quantum_core import ATOL
from .scenarios import SCENARIOS, LhvCheck, Scenario, UnknownQuantity, prediction_table
from .verification import SIGMAS, run_lhv_check, sampling_summary, verify

SCHEMA_VERSION = "1"
MAX_DENOMINATOR = 64


class UsageError(Exception):
    pass


def fraction_text(x: float) -> str | None:
    """Exact dyadic fraction (denominator <= 64) within 1e-12 of ``x``, else None."""
    if not math.isfinite(x):
        return None
    f = Fraction(x).limit_denominator(MAX_DENOMINATOR)
    if abs(float(f) - x) > ATOL or f.denominator & (f.denominator - 1):
        return None
    return str(f)


def _prob(x: float | None) -> dict:
    return {"value": x, "fraction": None if x is None else fraction_text(x)}


def outcome_text(outcome) -> str:
    return ",".join(f"{v:+d}" for v in outcome)


# --- serialization --------------------------------------------------------------

def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits (exact round trip)."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite number {obj!r} in report")
        return f"{obj:.17g}"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _flatten(obj, path: str = ""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{path}.{k}" if path else str(k))
    elif isinstance(obj, (list, tuple)) and any(isinstance(v, (dict, list, tuple)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{path}[{i}]")
    elif isinstance(obj, (list, tuple)):
        yield path, ";".join(_scalar(v) for v in obj)
    else:
        yield path, _scalar(obj)


def _scalar(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "value"])
    for row in _flatten(report):
        w.writerow(row)
    return buf.getvalue()


def _p(x: dict | float | None) -> str:
    if isinstance(x, dict):
        x = x["value"]
    if x is None:
        return "n/a"
    frac = fraction_text(x)
    return f"{x:.15g}" + (f" ({frac})" if frac is not None else "")


def to_text(report: dict) -> str:
    lines = [f"eprlab report v{report['schema_version']}: {report['command']} {report['scenario']}"]
    sec = report["sections"]
    if "predictions" in sec:
        lines.append("")
        lines.append("predictions (stored | computed | deviation)")
        for r in sec["predictions"]["rows"]:
            lines.append(f"  {r['row']:<44} {_p(r['stored'])} | {_p(r['computed'])} | {r['deviation']:.3g}")
        lines.append(f"  max deviation {sec['predictions']['max_deviation']:.3g}")
    if "distribution" in sec:
        d = sec["distribution"]
        lines.append("")
        lines.append(f"joint distribution over ({', '.join(d['labels'])})")
        for e in d["entries"]:
            lines.append(f"  ({e['outcome']})  {_p(e['probability'])}")
    if "lhv" in sec:
        m = sec["lhv"]
        lines.append("")
        lines.append(f"element-of-reality search '{m['check']}' over {', '.join(m['quantities'])}")
        lines.append(f"  event: {m['event'] or 'none'}")
        for c in m["constraints"]:
            lines.append(f"  constraint: {c}")
        lines.append(f"  searched {m['searched']}, models {m['model_count']}, contradiction {m['contradiction']}")
        lines.append(f"  mixes incompatible contexts: {m['mixes_contexts']}")
        if m["incompatible_pairs"]:
            lines.append("  incompatible pairs: " + ", ".join("/".join(p) for p in m["incompatible_pairs"]))
        for step in m.get("derivation", []):
            lines.append(f"  | {step}")
    if "disturbance" in sec:
        lines.append("")
        lines.append("disturbance (before -> after)")
        for r in sec["disturbance"]:
            lines.append(f"  {r['prediction']:<28} {_p(r['p_before'])} -> {_p(r['p_after'])}")
            lines.append(f"    {r['ordering']}")
            for b in r["branches"]:
                lines.append(
                    f"    {'/'.join(r['intervening_labels'])} = ({b['intervening_outcome']}): "
                    f"weight {_p(b['probability'])}, target {_p(b['target_probability'])}"
                )
    if "audit" in sec:
        lines.append("")
        lines.append("commutation audit (quantity vs intervening observable)")
        for a in sec["audit"]:
            lines.append(f"  {a['quantity']:<4} {a['label']:<8} {'commutes' if a['commutes'] else 'does not commute'}")
    if "sampling" in sec:
        s = sec["sampling"]
        lines.append("")
        lines.append(f"sampling n={s['n']} seed={s['seed']} over ({', '.join(s['labels'])})")
        for r in s["rows"]:
            lines.append(f"  ({r['outcome']})  count {r['count']}  expected {r['expected']:.15g}  z {r['z']:+.3f}")
        lines.append(f"  all within {SIGMAS:g} sigma: {s['within']}")
    if "checks" in sec:
        lines.append("")
        for c in sec["checks"]:
            lines.append(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}" + (f"  [{c['detail']}]" if c["detail"] else ""))
    lines.append("")
    lines.append(f"status: {'ok' if report['ok'] else 'FAILED'}")
    return "\n".join(lines) + "\n"


# --- sections -------------------------------------------------------------------

def predictions_section(scenario: Scenario) -> tuple[dict, bool]:
    check = prediction_table(scenario)
    rows = [
        {
            "row": rc.row.name,
            "target": str(rc.row.target),
            "given": None if rc.row.given is None else str(rc.row.given),
            "stored": _prob(rc.row.probability),
            "computed": _prob(rc.computed),
            "deviation": rc.deviation,
        }
        for rc in check.rows
    ]
    return {"rows": rows, "max_deviation": check.max_deviation}, check.max_deviation <= ATOL


def distribution_section(scenario: Scenario) -> dict:
    dist = scenario.distribution(scenario.joint_context)
    return {
        "labels": list(dist.labels),
        "entries": [{"outcome": outcome_text(o), "probability": _prob(p)} for o, p in dist.entries.items()],
    }


def lhv_section(scenario: Scenario, check: LhvCheck, event_spec: str | None) -> tuple[dict, bool]:
    event = parse_event(event_spec) if event_spec else None
    rep = run_lhv_check(scenario, check, event)
    shown_event = event if event is not None else check.event
    section = {
        "check": check.name,
        "quantities": list(rep.quantities),
        "event": None if shown_event is None else str(shown_event),
        "constraints": [str(c) for c in rep.constraints],
        "searched": rep.searched,
        "model_count": len(rep.models),
        "contradiction": rep.contradiction,
        "mixes_contexts": rep.mixes_contexts,
        "incompatible_pairs": [list(p) for p in rep.incompatible_pairs or ()],
        "models": [[m[q] for q in rep.quantities] for m in rep.models],
    }
    if rep.contradiction:
        expl = explain_contradiction(rep)
        section["core"] = [str(c) for c in expl.core]
        section["derivation"] = list(expl.steps)
    ok = event is not None or len(rep.models) == check.expected_models
    if event is None:
        section["expected_models"] = check.expected_models
    return section, ok


def disturbance_sections(scenario: Scenario) -> tuple[list, list, bool]:
    reports = loophole_matrix(scenario)
    out = []
    ok = True
    audited: dict[tuple[str, ...], None] = {}
    for row, rep in zip([r for r in scenario.predictions if r.given is not None and r.probability == 1.0], reports):
        ok &= abs(rep.p_before - row.probability) <= ATOL
        audited.setdefault(row.intervening, None)
        out.append({
            "prediction": rep.prediction,
            "p_before": _prob(rep.p_before),
            "p_after": _prob(rep.p_after),
            "ordering": rep.ordering,
            "intervening_labels": list(rep.intervening_labels),
            "branches": [
                {
                    "given_outcome": outcome_text(b.given_outcome),
                    "intervening_outcome": outcome_text(b.intervening_outcome),
                    "probability": _prob(b.probability),
                    "target_probability": _prob(b.target_probability),
                }
                for b in rep.branches
            ],
        })
    audit = []
    pauli_quantities = [q for q in scenario.quantities if not q.basis_angle]
    for labels in audited:
        for e in commutation_audit(pauli_quantities, intervening_context(scenario, labels)).entries:
            audit.append({"quantity": e.quantity, "label": e.label, "commutes": e.commutes})
    return out, audit, ok


def _sampling_section(scenario: Scenario, n: int, seed: int) -> dict:
    s = sampling_summary(scenario, n, seed)
    s["labels"] = list(s["labels"])
    for r in s["rows"]:
        r["outcome"] = outcome_text(r["outcome"])
    return s


# --- commands -------------------------------------------------------------------

def build_report(args) -> dict:
    scenario = SCENARIOS[args.scenario]()
    sections: dict = {}
    metadata = {"tolerance": ATOL}
    ok = True
    if args.command == "scenario":
        sections["predictions"], ok = predictions_section(scenario)
        sections["distribution"] = distribution_section(scenario)
    elif args.command == "lhv":
        name = "reduced" if args.reduced else "full"
        checks = {c.name: c for c in scenario.lhv_checks}
        if name not in checks:
            raise UsageError(f"--reduced: scenario {scenario.name!r} has no reduced check")
        try:
            sections["lhv"], ok = lhv_section(scenario, checks[name], args.event)
        except (ValueError, UnknownQuantity) as exc:
            raise UsageError(f"--event: {exc}") from exc
    elif args.command == "disturb":
        sections["disturbance"], sections["audit"], ok = disturbance_sections(scenario)
    elif args.command == "sample":
        sections["sampling"] = _sampling_section(scenario, args.n, args.seed)
        metadata.update(seed=args.seed, sample_size=args.n, sigmas=SIGMAS)
        ok = sections["sampling"]["within"]
    elif args.command == "verify":
        checks = verify(args.scenario, scenario)
        sections["checks"] = [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
        ok = all(c.passed for c in checks)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "scenario": scenario.name,
        "sections": sections,
        "metadata": metadata,
        "ok": ok,
    }


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report) + "\n"
    if fmt == "csv":
        return to_csv(report)
    return to_text(report)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", choices=sorted(SCENARIOS))
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")

    ap = argparse.ArgumentParser(prog="eprlab", description=__doc__.split("\n\n")[0].strip())
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("scenario", parents=[common], help="recompute the prediction table")
    p = sub.add_parser("lhv", parents=[common], help="exhaustive element-of-reality search")
    p.add_argument("--event", metavar="SPEC", help='e.g. "A1A3=+1,a1a3=+1" or "B2=B4"')
    p.add_argument("--reduced", action="store_true", help="use the reduced constraint set")
    sub.add_parser("disturb", parents=[common], help="prediction disturbance reports")
    p = sub.add_parser("sample", parents=[common], help="seeded sampling of the joint context")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    sub.add_parser("verify", parents=[common], help="run every self-check, one line each")
    return ap


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "sample":
        if args.n < 1:
            ap.print_usage(sys.stderr)
            print("eprlab: error: --n must be at least 1", file=sys.stderr)
            return 2
        if not 0 <= args.seed < 2 ** 64:
            ap.print_usage(sys.stderr)
            print("eprlab: error: --seed must be in [0, 2**64)", file=sys.stderr)
            return 2
    try:
        report = build_report(args)
    except UsageError as exc:
        print(f"eprlab: error: {exc}", file=sys.stderr)
        return 2
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0 if report["ok"] else 1


def main():
    sys.exit(run())
