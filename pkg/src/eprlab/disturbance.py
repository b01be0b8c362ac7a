"""
How an intervening joint measurement changes a conditional prediction.

``p_before`` is the prediction read off a single joint measurement of the
given and target observables. ``p_after`` first measures the given
observables together with the intervening context (every branch kept, i.e.
non-selectively), keeps the branches consistent with the given event, and
only then measures the target on each collapsed branch.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .measurement import (
    ATOL,
    CommutingContext,
    ConditioningOnNull,
    EventPredicate,
    branch_states,
    conditional_probability,
    joint_distribution,
    make_context,
)
from .quantum_core import RegisterMismatch, commutes
from .scenarios import LocalQuantity, Scenario


@dataclass(frozen=True)
class AuditEntry:
    quantity: str
    label: str
    commutes: bool


@dataclass(frozen=True)
class CommutationAudit:
    entries: tuple[AuditEntry, ...]

    def lookup(self, quantity: str, label: str) -> bool:
        for e in self.entries:
            if (e.quantity, e.label) == (quantity, label):
                return e.commutes
        raise KeyError((quantity, label))


def commutation_audit(quantities: Sequence[LocalQuantity], ctx: CommutingContext) -> CommutationAudit:
    entries = []
    for q in quantities:
        if q.basis_angle:
            raise ValueError(f"{q.name} is not a Pauli observable")
        for label, obs in zip(ctx.labels, ctx.observables):
            if obs.num_qubits != q.observable.num_qubits:
                raise RegisterMismatch(f"{q.name} and {label} live on different registers")
            entries.append(AuditEntry(q.name, label, commutes(q.observable, obs)))
    return CommutationAudit(tuple(entries))


@dataclass(frozen=True)
class Branch:
    given_outcome: tuple[int, ...]
    intervening_outcome: tuple[int, ...]
    probability: float
    target_probability: float


@dataclass(frozen=True)
class DisturbanceReport:
    prediction: str
    p_before: float
    p_after: float
    ordering: str
    given_labels: tuple[str, ...]
    intervening_labels: tuple[str, ...]
    branches: tuple[Branch, ...]

    @property
    def given_probability(self) -> float:
        return sum(b.probability for b in self.branches)


def prediction_stability(
    scenario: Scenario,
    given: EventPredicate,
    intervening: CommutingContext,
    target: EventPredicate,
    *,
    intervening_filter: EventPredicate | None = None,
    intervening_first: bool = False,
    order: Sequence[int] | None = None,
    name: str | None = None,
) -> DisturbanceReport:
    """Compare a conditional prediction with and without an intervening measurement.

    ``order`` permutes the intervening observables' collapse sequence;
    ``intervening_first`` collapses them before the given observables.
    ``intervening_filter`` keeps only the intervening branches it accepts
    (selective reading); by default all branches are kept.
    """
    given_labels = given.labels()
    target_labels = target.labels()
    combined = tuple(dict.fromkeys(given_labels + target_labels))
    state, ctx = scenario.frame(combined)
    p_before = conditional_probability(state, ctx, target, given)

    stage1 = make_context(
        [scenario.observable(l) for l in given_labels] + list(intervening.observables),
        list(given_labels) + list(intervening.labels),
    )
    stage2 = make_context([scenario.observable(l) for l in target_labels], list(target_labels))
    g, m = len(given_labels), len(intervening)
    inter = list(range(g, g + m))
    if order is not None:
        if sorted(order) != list(range(m)):
            raise ValueError(f"{order} is not a permutation of the intervening context")
        inter = [g + i for i in order]
    seq = inter + list(range(g)) if intervening_first else list(range(g)) + inter

    branches = []
    for outcome, prob, post in branch_states(scenario.state, stage1, seq):
        values = dict(zip(stage1.labels, outcome))
        if not given.holds(values):
            continue
        if intervening_filter is not None and not intervening_filter.holds(values):
            continue
        t = joint_distribution(post, stage2).probability(target)
        branches.append(Branch(outcome[:g], outcome[g:], prob, t))

    kept = sum(b.probability for b in branches)
    if kept <= ATOL:
        raise ConditioningOnNull(f"P({given}) after the intervening stage is {kept!r}")
    p_after = sum(b.probability * b.target_probability for b in branches) / kept

    first = ", ".join(stage1.labels[i] for i in seq) or "nothing"
    ordering = f"measure {first}; keep {given}"
    if intervening_filter is not None:
        ordering += f" and {intervening_filter}"
    ordering += f"; then measure {', '.join(target_labels)}"
    return DisturbanceReport(
        prediction=name or f"P({target} | {given})",
        p_before=p_before,
        p_after=p_after,
        ordering=ordering,
        given_labels=tuple(given_labels),
        intervening_labels=intervening.labels,
        branches=tuple(branches),
    )


def intervening_context(scenario: Scenario, labels: Sequence[str]) -> CommutingContext:
    return make_context([scenario.observable(l) for l in labels], list(labels))


def loophole_matrix(scenario: Scenario) -> list[DisturbanceReport]:
    """One report per certain conditional prediction, disturbed by the
    measurement it is conjoined with in the scenario's argument."""
    reports = []
    for row in scenario.predictions:
        if row.given is None or row.probability != 1.0:
            continue
        ctx = intervening_context(scenario, row.intervening)
        reports.append(prediction_stability(scenario, row.given, ctx, row.target, name=row.name))
    return reports
