import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprlab.lhv import (
    EVENT,
    IMPLICATION,
    Constraint,
    Literal,
    NotAContradiction,
    TooManyQuantities,
    constraints_from_predictions,
    explain_contradiction,
    find_models,
    is_satisfiable,
    literal,
    minimal_core,
)
from eprlab.measurement import parse_event
from eprlab.scenarios import CABELLO_PAIR, CABELLO_RUN, UnknownQuantity, prediction_table
from eprlab.verification import run_lhv_check


def brute_force(names, constraints):
    """Reference count: plain itertools loop, reverse enumeration order."""
    count = 0
    for values in itertools.product((-1, 1), repeat=len(names)):
        a = dict(zip(names, values))
        if all(c.holds(a) for c in constraints):
            count += 1
    return count


def _cabello_constraints(scenario, rows=4):
    return constraints_from_predictions(
        type(scenario.predictions)(scenario.predictions.rows[:rows]), scenario.quantity_names
    )


def test_literal_reduction():
    names = ["A1", "A3", "a1", "a3"]
    assert literal(parse_event("A1A3=+1").atoms[0], names) == Literal(("A1", "A3"), 1, "A1A3=+1")
    assert literal(parse_event("a1=-A3").atoms[0], names).value == -1
    # repeated factors cancel in the parity
    assert literal(parse_event("A1A3=A3").atoms[0], names).names == ("A1",)


def test_cabello_full_search_is_contradictory(cabello):
    cons = _cabello_constraints(cabello)
    assert [str(c) for c in cons] == [
        "A1A3=+1 => B2=B4",
        "a1a3=+1 => b2=b4",
        "B2b4=+1 => A1=a3",
        "b2B4=-1 => a1=-A3",
    ]
    rep = find_models(cabello.quantity_names, cons, parse_event(CABELLO_RUN), cabello.compatible)
    assert rep.searched == 256
    assert rep.models == ()
    assert rep.contradiction
    assert rep.mixes_contexts
    assert ("B2", "b2B4") in rep.incompatible_pairs and ("B2", "B2b4") not in rep.incompatible_pairs


def test_quantum_boundary_event_has_positive_probability_but_no_model(cabello):
    rep = run_lhv_check(cabello, cabello.lhv_checks[0])
    assert rep.contradiction
    checked = {rc.row.name: rc.computed for rc in prediction_table(cabello).rows}
    assert checked[f"P({CABELLO_RUN})"] == pytest.approx(0.125, abs=1e-12)


def test_reduced_check_has_sixteen_models(cabello):
    cons = _cabello_constraints(cabello, rows=2)
    rep = find_models(cabello.quantity_names, cons, parse_event(CABELLO_PAIR))
    assert rep.searched == 256 and len(rep.models) == 16
    assert brute_force(rep.quantities, rep.constraints) == 16
    for m in rep.models:
        assert m["A1"] * m["A3"] == 1 and m["a1"] * m["a3"] == 1
        assert m["B2"] == m["B4"] and m["b2"] == m["b4"]
    assert rep.mixes_contexts is None


def test_models_are_lexicographic_plus_first():
    rep = find_models(["b", "a"], [])
    assert rep.quantities == ("a", "b")
    assert [tuple(m.values()) for m in rep.models] == [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    assert len(find_models(["x"], []).models) == 2


def test_too_many_quantities():
    with pytest.raises(TooManyQuantities):
        find_models([f"q{i}" for i in range(25)], [])


def test_unknown_quantity_in_constraint(cabello):
    cons = _cabello_constraints(cabello)
    with pytest.raises(UnknownQuantity):
        find_models(["A1", "A3"], cons)
    with pytest.raises(UnknownQuantity):
        find_models(cabello.quantity_names, cons, parse_event("C5=+1"))


@st.composite
def random_systems(draw):
    k = draw(st.integers(1, 8))
    names = [f"q{i}" for i in range(k)]

    def lit():
        chosen = draw(st.lists(st.sampled_from(names), min_size=1, max_size=3, unique=True))
        value = draw(st.sampled_from((1, -1)))
        return Literal(tuple(sorted(chosen)), value, f"{'*'.join(sorted(chosen))}={value:+d}")

    cons = []
    for _ in range(draw(st.integers(0, 7))):
        kind = draw(st.sampled_from((IMPLICATION, EVENT)))
        if kind == EVENT:
            cons.append(Constraint(EVENT, (), (lit(),)))
        else:
            ante = tuple(lit() for _ in range(draw(st.integers(0, 2))))
            cons.append(Constraint(IMPLICATION, ante, (lit(),), negated=draw(st.booleans())))
    return names, cons


@settings(max_examples=150, deadline=None)
@given(random_systems())
def test_enumerator_agrees_with_brute_force(system):
    names, cons = system
    rep = find_models(names, cons)
    assert rep.searched == 2 ** len(names)
    assert len(rep.models) == brute_force(names, cons)
    # soundness: every reported model satisfies every constraint
    assert all(c.holds(m) for m in rep.models for c in cons)
    # no duplicates
    assert len({tuple(m.values()) for m in rep.models}) == len(rep.models)


@settings(max_examples=100, deadline=None)
@given(random_systems(), st.data())
def test_adding_constraints_never_adds_models(system, data):
    names, cons = system
    if not cons:
        return
    cut = data.draw(st.integers(0, len(cons)))
    assert len(find_models(names, cons).models) <= len(find_models(names, cons[:cut]).models)


@settings(max_examples=60, deadline=None)
@given(random_systems())
def test_minimal_core_is_minimal(system):
    names, cons = system
    if is_satisfiable(names, cons):
        with pytest.raises(NotAContradiction):
            minimal_core(names, cons)
        return
    core = minimal_core(names, cons)
    assert not is_satisfiable(names, core)
    for r in range(len(core)):
        for subset in itertools.combinations(core, r):
            assert is_satisfiable(names, list(subset))


def test_cabello_core_and_trace(cabello):
    rep = run_lhv_check(cabello, cabello.lhv_checks[0])
    expl = explain_contradiction(rep)
    assert 1 <= len(expl.core) <= 5
    assert not is_satisfiable(rep.quantities, list(expl.core))
    assert expl.steps[0].startswith("observed:")
    assert "+1" in expl.steps[-1] and "-1" in expl.steps[-1]
    assert any("B2b4=+1 => A1=a3" in s for s in expl.steps)


def test_explain_rejects_satisfiable(cabello):
    rep = run_lhv_check(cabello, cabello.lhv_checks[1])
    with pytest.raises(NotAContradiction):
        explain_contradiction(rep)


def test_ghz_contradiction(ghz):
    (check,) = ghz.lhv_checks
    rep = run_lhv_check(ghz, check)
    assert rep.searched == 64 and rep.contradiction
    assert brute_force(rep.quantities, rep.constraints) == 0
    expl = explain_contradiction(rep)
    assert len(expl.core) == 4
    assert "product is +1" in expl.steps[-1]


def test_hardy_contradiction(hardy):
    full = next(c for c in hardy.lhv_checks if c.expected_models == 0)
    rep = run_lhv_check(hardy, full)
    assert rep.searched == 16 and rep.contradiction
    expl = explain_contradiction(rep)
    assert len(expl.core) == 4
    assert "= 0" in expl.steps[-1]
    # the quantum probability of the forbidden-by-LHV event is positive
    assert hardy.evaluate(hardy.predictions.rows[-1]) > 0.09
