"""
Cabello, GHZ and Hardy constructions.

A scenario bundles a state, the observers' local +-1 quantities, labeled
composite observables (``A1A3`` is the product of ``A1`` and ``A3``) and a
table of stored predictions that can be recomputed from the state.

GHZ and Hardy predictions are not hand-written: they were produced by the
simulator itself (``scripts/freeze_fixtures.py``) and live in
``fixtures/*.json`` as regression data.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize

from .measurement import (
    ATOL,
    ConditioningOnNull,
    Distribution,
    EventPredicate,
    Fixed,
    NonCommuting,
    Relation,
    conditional_probability,
    joint_distribution,
    make_context,
    parse_event,
)
from .quantum_core import PauliString, StateVector, rotate_y, singlet_pair, tensor

ALICE, BOB, CHARLIE = "Alice", "Bob", "Charlie"


class ContextConstructionFailure(ValueError):
    """The observables a row refers to cannot be measured jointly."""


class UnknownQuantity(KeyError):
    pass


@dataclass(frozen=True)
class LocalQuantity:
    """A +-1 valued quantity measured by one observer on one particle.

    ``basis_angle`` tilts the measured axis from ``observable`` (which must
    then be +Z) toward +X, i.e. the quantity is cos(t) Z + sin(t) X.
    """

    name: str
    observer: str
    observable: PauliString
    basis_angle: float = 0.0

    def __post_init__(self):
        if len(self.observable.support) != 1:
            raise ValueError(f"{self.name} must act on exactly one particle")
        if self.basis_angle and (self.observable.sign != 1 or self.axis != "Z"):
            raise ValueError("tilted quantities are parameterized from +Z")

    @property
    def qubit(self) -> int:
        return self.observable.support[0]

    @property
    def axis(self) -> str:
        return self.observable.axes[self.qubit]


@dataclass(frozen=True)
class PredictionRow:
    """``P(target | given) = probability``; ``given=None`` means a joint probability.

    ``intervening`` names the other observer's joint measurement that the
    prediction is conjoined with in the nonlocality argument.
    """

    target: EventPredicate
    given: EventPredicate | None
    probability: float
    intervening: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        if self.given is None:
            return f"P({self.target})"
        return f"P({self.target} | {self.given})"

    def labels(self) -> tuple[str, ...]:
        labs = dict.fromkeys(self.target.labels())
        if self.given is not None:
            labs.update(dict.fromkeys(self.given.labels()))
        return tuple(labs)


@dataclass(frozen=True)
class PredictionTable:
    rows: tuple[PredictionRow, ...] = ()

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def row(self, name: str) -> PredictionRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


@dataclass(frozen=True)
class LhvCheck:
    """A named element-of-reality search with its expected model count."""

    name: str
    rows: tuple[str, ...]
    event: EventPredicate | None
    expected_models: int


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    state: StateVector
    quantities: tuple[LocalQuantity, ...]
    composites: Mapping[str, PauliString]
    predictions: PredictionTable
    parties: Mapping[str, tuple[int, ...]]
    joint_context: tuple[str, ...] = ()
    lhv_checks: tuple[LhvCheck, ...] = ()
    notes: Mapping[str, object] = field(default_factory=dict)

    @property
    def quantity_names(self) -> tuple[str, ...]:
        return tuple(q.name for q in self.quantities)

    def quantity(self, name: str) -> LocalQuantity:
        for q in self.quantities:
            if q.name == name:
                return q
        raise UnknownQuantity(name)

    def factors(self, label: str) -> tuple[str, ...]:
        return factor_label(label, self.quantity_names)

    def observable(self, label: str) -> PauliString:
        if label in self.composites:
            return self.composites[label]
        q = self.quantity(label)
        if q.basis_angle:
            raise ContextConstructionFailure(f"{label} is not a Pauli observable")
        return q.observable

    def frame(self, labels: Sequence[str]):
        """Return (state in the measurement frame, commuting context) for ``labels``.

        Tilted quantities are measured as Z after a local Y rotation; labels
        asking for two different frames on one particle cannot share a context.
        """
        n = self.state.num_qubits
        angles: dict[int, tuple[float, str]] = {}
        observables = []
        for lab in labels:
            if lab in self.composites:
                p, want = self.composites[lab], [(q, 0.0) for q in self.composites[lab].support]
            else:
                try:
                    qty = self.quantity(lab)
                except UnknownQuantity:
                    raise ContextConstructionFailure(f"unknown label {lab!r}") from None
                p, want = qty.observable, [(qty.qubit, qty.basis_angle)]
            for q, ang in want:
                prev = angles.setdefault(q, (ang, lab))
                if prev[0] != ang:
                    raise ContextConstructionFailure(
                        f"{prev[1]} and {lab} need different bases on particle {q + 1}"
                    )
            observables.append(p)
        state = self.state
        for q, (ang, _) in sorted(angles.items()):
            if ang:
                state = rotate_y(state, q, -ang)
        try:
            ctx = make_context(observables, list(labels))
        except NonCommuting as exc:
            raise ContextConstructionFailure(str(exc)) from exc
        if n != ctx.num_qubits:
            raise ContextConstructionFailure("context and state registers differ")
        return state, ctx

    def distribution(self, labels: Sequence[str]) -> Distribution:
        state, ctx = self.frame(labels)
        return joint_distribution(state, ctx)

    def compatible(self, a: str, b: str) -> bool:
        try:
            self.frame([a] if a == b else [a, b])
        except ContextConstructionFailure:
            return False
        return True

    def evaluate(self, row: PredictionRow) -> float:
        state, ctx = self.frame(row.labels())
        if row.given is None:
            return joint_distribution(state, ctx).probability(row.target)
        return conditional_probability(state, ctx, row.target, row.given)

    def with_state(self, state: StateVector) -> "Scenario":
        return replace(self, state=state)


def factor_label(label: str, names: Sequence[str]) -> tuple[str, ...]:
    """Split a composite label into quantity names, e.g. ``A1A3 -> (A1, A3)``."""
    ordered = sorted(set(names), key=len, reverse=True)

    @functools.lru_cache(maxsize=None)
    def split(rest: str):
        if not rest:
            return ()
        for nm in ordered:
            if rest.startswith(nm):
                tail = split(rest[len(nm):])
                if tail is not None:
                    return (nm,) + tail
        return None

    out = split(label)
    if out is None:
        raise UnknownQuantity(f"{label!r} is not a product of {list(names)}")
    return out


@dataclass(frozen=True)
class RowCheck:
    row: PredictionRow
    computed: float | None
    deviation: float


@dataclass(frozen=True)
class TableCheck:
    rows: tuple[RowCheck, ...]

    @property
    def max_deviation(self) -> float:
        return max((r.deviation for r in self.rows), default=0.0)


def prediction_table(scenario: Scenario) -> TableCheck:
    """Recompute every stored row from the scenario's state.

    A row whose conditioning event has become impossible reports
    ``computed=None`` and deviation 1.
    """
    checks = []
    for row in scenario.predictions:
        try:
            value = scenario.evaluate(row)
        except ConditioningOnNull:
            checks.append(RowCheck(row, None, 1.0))
            continue
        checks.append(RowCheck(row, value, abs(value - row.probability)))
    return TableCheck(tuple(checks))


def check_composites(scenario: Scenario) -> list[str]:
    """Composite observables that are not the plain product of their factors."""
    bad = []
    for label, obs in scenario.composites.items():
        prod = None
        for nm in scenario.factors(label):
            p = scenario.quantity(nm).observable
            prod = p if prod is None else prod * p
        if prod != obs:
            bad.append(label)
    return bad


def check_locality(scenario: Scenario) -> list[str]:
    """Quantities acting outside their observer's particles."""
    return [
        q.name
        for q in scenario.quantities
        if q.qubit + 1 not in scenario.parties.get(q.observer, ())
    ]


# --- Cabello ------------------------------------------------------------------

CABELLO_CONTEXT = ("A1A3", "a1a3", "B2b4", "b2B4")
CABELLO_RUN = "A1A3=+1,a1a3=+1,B2b4=+1,b2B4=-1"
CABELLO_PAIR = "A1A3=+1,a1a3=+1"


def cabello_state() -> StateVector:
    """Singlets on particles (1,2) and (3,4), in register order 1,2,3,4."""
    # pairs (1,2) and (3,4) occupy adjacent register slots, so no reordering
    return tensor(singlet_pair(), singlet_pair())


def build_cabello(state: StateVector | None = None) -> Scenario:
    n = 4
    P = lambda text: PauliString.from_particles(n, text)
    quantities = (
        LocalQuantity("A1", ALICE, P("Z1")),
        LocalQuantity("a1", ALICE, P("X1")),
        LocalQuantity("A3", ALICE, P("Z3")),
        LocalQuantity("a3", ALICE, P("X3")),
        LocalQuantity("B2", BOB, P("Z2")),
        LocalQuantity("b2", BOB, P("X2")),
        LocalQuantity("B4", BOB, P("Z4")),
        LocalQuantity("b4", BOB, P("X4")),
    )
    composites = {"A1A3": P("Z1Z3"), "a1a3": P("X1X3"), "B2b4": P("Z2X4"), "b2B4": P("X2Z4")}
    alice_joint, bob_joint = ("A1A3", "a1a3"), ("B2b4", "b2B4")
    ev = parse_event
    rows = (
        PredictionRow(ev("B2=B4"), ev("A1A3=+1"), 1.0, bob_joint),
        PredictionRow(ev("b2=b4"), ev("a1a3=+1"), 1.0, bob_joint),
        PredictionRow(ev("A1=a3"), ev("B2b4=+1"), 1.0, alice_joint),
        PredictionRow(ev("a1=-A3"), ev("b2B4=-1"), 1.0, alice_joint),
        PredictionRow(ev(CABELLO_RUN), None, 0.125),
        PredictionRow(ev(CABELLO_PAIR), None, 0.25),
    )
    table = PredictionTable(rows)
    conditionals = tuple(r.name for r in rows[:4])
    checks = (
        LhvCheck("full", conditionals, ev(CABELLO_RUN), 0),
        LhvCheck("reduced", conditionals[:2], ev(CABELLO_PAIR), 16),
    )
    return Scenario(
        name="cabello",
        state=cabello_state() if state is None else state,
        quantities=quantities,
        composites=composites,
        predictions=table,
        parties={ALICE: (1, 3), BOB: (2, 4)},
        joint_context=CABELLO_CONTEXT,
        lhv_checks=checks,
        notes={"register": "qubit k holds particle k+1; pairs (1,2) and (3,4) are singlets"},
    )


# --- GHZ ----------------------------------------------------------------------

GHZ_COMPOSITES = ("X1Y2Y3", "Y1X2Y3", "Y1Y2X3", "X1X2X3")


def _load_fixture(name: str) -> dict:
    text = resources.files("eprlab").joinpath("fixtures").joinpath(name).read_text()
    return json.loads(text)


def ghz_state() -> StateVector:
    r = math.sqrt(0.5)
    amps = np.zeros(8)
    amps[0b000] = amps[0b111] = r
    return StateVector(3, amps)


def derive_ghz_outcomes(tol: float = ATOL) -> dict[str, int]:
    """Definite values of the four GHZ composites, read off the simulator."""
    state = ghz_state()
    out = {}
    for label in GHZ_COMPOSITES:
        dist = joint_distribution(state, make_context([PauliString.from_particles(3, label)], [label]))
        (value,) = [o[0] for o, p in dist.entries.items() if abs(p - 1.0) <= tol] or [None]
        if value is None:
            raise ArithmeticError(f"{label} is not definite on the GHZ state: {dist.entries}")
        out[label] = value
    return out


def build_ghz() -> Scenario:
    fixture = _load_fixture("ghz.json")
    n = 3
    parties = {ALICE: (1,), BOB: (2,), CHARLIE: (3,)}
    owner = {1: ALICE, 2: BOB, 3: CHARLIE}
    quantities = tuple(
        LocalQuantity(f"{ax}{k}", owner[k], PauliString.from_particles(n, f"{ax}{k}"))
        for k in (1, 2, 3)
        for ax in ("X", "Y")
    )
    composites = {lab: PauliString.from_particles(n, lab) for lab in GHZ_COMPOSITES}
    other = {"X": "Y", "Y": "X"}
    rows = []
    for lab in GHZ_COMPOSITES:
        rows.append(PredictionRow(EventPredicate((Fixed(lab, fixture["outcomes"][lab]),)), None, 1.0))
    for lab in GHZ_COMPOSITES:
        first, second, third = factor_label(lab, [q.name for q in quantities])
        value = fixture["outcomes"][lab]
        swap = tuple(other[f[0]] + f[1:] for f in (second, third))
        rows.append(
            PredictionRow(
                EventPredicate((Relation(second, third, value),)),
                EventPredicate((Fixed(first, 1),)),
                1.0,
                swap,
            )
        )
    return Scenario(
        name="ghz",
        state=ghz_state(),
        quantities=quantities,
        composites=composites,
        predictions=PredictionTable(tuple(rows)),
        parties=parties,
        joint_context=GHZ_COMPOSITES,
        lhv_checks=(LhvCheck("full", tuple(r.name for r in rows), None, 0),),
        notes={"convention": fixture["convention"]},
    )


# --- Hardy --------------------------------------------------------------------

HARDY_ZEROS = ("A1=+1,B1=+1", "A0=+1,B1=-1", "A1=-1,B0=+1")
HARDY_SUCCESS = "A0=+1,B0=+1"
HARDY_GRID_STEP = 1e-4


def hardy_state(angle: float) -> StateVector:
    """a(|01> + |10>) - a cot(angle) |11>, normalized; 0 < angle < pi/2.

    With A0 = B0 measured along the Bloch axis tilted by ``2*angle`` from Z
    toward X and A1 = B1 = Z, the three Hardy zero conditions hold for every
    angle in range.
    """
    if not 0.0 < angle < math.pi / 2:
        raise ValueError("angle must lie strictly between 0 and pi/2")
    amps = np.array([0.0, 1.0, 1.0, -1.0 / math.tan(angle)])
    return StateVector.from_unnormalized(2, amps)


def _hardy_scenario(angle: float, stored_success: float) -> Scenario:
    n = 2
    Z = lambda k: PauliString.from_particles(n, f"Z{k}")
    tilt = 2.0 * angle
    quantities = (
        LocalQuantity("A0", ALICE, Z(1), tilt),
        LocalQuantity("A1", ALICE, Z(1)),
        LocalQuantity("B0", BOB, Z(2), tilt),
        LocalQuantity("B1", BOB, Z(2)),
    )
    rows = tuple(PredictionRow(parse_event(e), None, 0.0) for e in HARDY_ZEROS)
    rows += (PredictionRow(parse_event(HARDY_SUCCESS), None, stored_success),)
    return Scenario(
        name="hardy",
        state=hardy_state(angle),
        quantities=quantities,
        composites={},
        predictions=PredictionTable(rows),
        parties={ALICE: (1,), BOB: (2,)},
        joint_context=("A0", "B0"),
        lhv_checks=(
            LhvCheck("full", tuple(r.name for r in rows), parse_event(HARDY_SUCCESS), 0),
        ),
        notes={"angle": angle},
    )


_HARDY_SUCCESS_CONTEXT = make_context(
    [PauliString.from_particles(2, "Z1"), PauliString.from_particles(2, "Z2")], ["A0", "B0"]
)


def hardy_success_probability(angle: float) -> float:
    """P(A0=+1, B0=+1) on the Hardy state, computed by the simulator.

    Same frame change as :meth:`Scenario.frame`, without rebuilding the scenario.
    """
    state = hardy_state(angle)
    for q in (0, 1):
        state = rotate_y(state, q, -2.0 * angle)
    return joint_distribution(state, _HARDY_SUCCESS_CONTEXT).prob((1, 1))


@dataclass(frozen=True)
class HardyOptimum:
    angle: float
    probability: float
    grid_step: float
    grid_angle: float


@functools.lru_cache(maxsize=4)
def optimize_hardy(step: float = HARDY_GRID_STEP) -> HardyOptimum:
    """Grid sweep of the state angle at ``step`` then golden-section refinement."""
    grid = np.arange(step, math.pi / 2, step)
    values = [hardy_success_probability(a) for a in grid]
    k = int(np.argmax(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(
        lambda a: -hardy_success_probability(a),
        bracket=(lo, grid[k], hi),
        method="golden",
        tol=1e-10,
    )
    return HardyOptimum(float(res.x), -float(res.fun), step, float(grid[k]))


def build_hardy(angle: float | None = None) -> Scenario:
    """Hardy scenario at the frozen optimal angle, or at ``angle``.

    For a non-default angle the stored success probability is recomputed
    rather than read from the fixture.
    """
    fixture = _load_fixture("hardy.json")
    if angle is None:
        scen = _hardy_scenario(fixture["angle"], fixture["success_probability"])
        return replace(scen, notes={**scen.notes, "fixture": fixture})
    return _hardy_scenario(angle, hardy_success_probability(angle))


SCENARIOS = {"cabello": build_cabello, "ghz": build_ghz, "hardy": build_hardy}
