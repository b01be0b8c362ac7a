"""
Deterministic +-1 assignments (elements of reality) and exhaustive model search.

Every atom reduces to a parity literal: a product of local quantities equals
+1 or -1. ``A1A3=+1`` is ``A1*A3 = +1``; ``B2=B4`` is ``B2*B4 = +1``;
``a1=-A3`` is ``a1*A3 = -1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .measurement import EventPredicate, Fixed, Relation
from .scenarios import PredictionTable, UnknownQuantity, factor_label

MAX_QUANTITIES = 24
_CHUNK = 1 << 16

IMPLICATION, EVENT = "implication", "event"


class TooManyQuantities(ValueError):
    pass


class NotAContradiction(ValueError):
    pass


@dataclass(frozen=True)
class Literal:
    """``prod(names) == value``; ``text`` is the atom it came from."""

    names: tuple[str, ...]
    value: int
    text: str

    def holds(self, assignment: Mapping[str, int]) -> bool:
        prod = 1
        for nm in self.names:
            prod *= assignment[nm]
        return prod == self.value

    def __str__(self):
        return self.text


def literal(atom, names: Sequence[str]) -> Literal:
    if isinstance(atom, Fixed):
        factors = factor_label(atom.label, names)
        value = atom.value
    elif isinstance(atom, Relation):
        factors = factor_label(atom.left, names) + factor_label(atom.right, names)
        value = atom.sign
    else:
        raise TypeError(f"unsupported atom {atom!r}")
    odd = tuple(sorted(nm for nm in set(factors) if factors.count(nm) % 2))
    return Literal(odd, value, str(atom))


def literals(event: EventPredicate, names: Sequence[str]) -> tuple[Literal, ...]:
    return tuple(literal(a, names) for a in event.atoms)


@dataclass(frozen=True)
class Constraint:
    """Implication ``antecedent => consequent`` (or its negation), or a bare event.

    ``negated`` implications forbid the consequent: they come from
    probability-0 predictions. ``context`` lists the labels measured together
    in the prediction the constraint was derived from.
    """

    kind: str
    antecedent: tuple[Literal, ...]
    consequent: tuple[Literal, ...]
    negated: bool = False
    source: str = ""
    context: tuple[str, ...] = ()

    def holds(self, assignment: Mapping[str, int]) -> bool:
        if self.kind == EVENT:
            return all(l.holds(assignment) for l in self.consequent)
        if not all(l.holds(assignment) for l in self.antecedent):
            return True
        return all(l.holds(assignment) for l in self.consequent) != self.negated

    def __str__(self):
        cons = " and ".join(map(str, self.consequent))
        if self.kind == EVENT:
            return f"event {cons}"
        cons = f"not ({cons})" if self.negated else cons
        if not self.antecedent:
            return cons
        return f"{' and '.join(map(str, self.antecedent))} => {cons}"


def event_constraint(event: EventPredicate, names: Sequence[str], source: str = "") -> Constraint:
    return Constraint(EVENT, (), literals(event, names), source=source or str(event),
                      context=event.labels())


def constraints_from_predictions(table: PredictionTable, names: Sequence[str]) -> list[Constraint]:
    """Turn certain predictions into implications over the quantities ``names``.

    Probability 1 gives ``given => target``; probability 0 gives
    ``given => not target``; anything in between gives nothing. Rows with no
    conditioning event have an empty antecedent. Raises ``UnknownQuantity``
    when a label does not factor into ``names``.
    """
    out = []
    for row in table:
        if row.probability not in (0.0, 1.0):
            continue
        antecedent = literals(row.given, names) if row.given is not None else ()
        out.append(
            Constraint(
                IMPLICATION,
                antecedent,
                literals(row.target, names),
                negated=row.probability == 0.0,
                source=row.name,
                context=row.labels(),
            )
        )
    return out


@dataclass(frozen=True)
class ModelReport:
    quantities: tuple[str, ...]
    searched: int
    models: tuple[dict[str, int], ...]
    constraints: tuple[Constraint, ...] = field(repr=False)
    incompatible_pairs: tuple[tuple[str, str], ...] | None = None

    @property
    def contradiction(self) -> bool:
        return not self.models

    @property
    def mixes_contexts(self) -> bool | None:
        """Whether the constraints were read off mutually incompatible measurements.

        ``None`` when no compatibility oracle was supplied.
        """
        if self.incompatible_pairs is None:
            return None
        return bool(self.incompatible_pairs)


def _assignment_block(k: int, start: int, stop: int) -> np.ndarray:
    """Rows of +-1 values for assignment indices [start, stop); bit 0 (MSB) is +1."""
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)[None, :]
    return (1 - 2 * ((idx >> shifts) & 1)).astype(np.int8)


def _eval_literals(block: np.ndarray, lits: Iterable[Literal], col: Mapping[str, int]) -> np.ndarray:
    ok = np.ones(block.shape[0], dtype=bool)
    for lit in lits:
        prod = np.ones(block.shape[0], dtype=np.int8)
        for nm in lit.names:
            prod = prod * block[:, col[nm]]
        ok &= prod == lit.value
    return ok


def _satisfied(block: np.ndarray, c: Constraint, col: Mapping[str, int]) -> np.ndarray:
    cons = _eval_literals(block, c.consequent, col)
    if c.kind == EVENT:
        return cons
    ante = _eval_literals(block, c.antecedent, col)
    return ~ante | (cons != c.negated)


def incompatible_pairs(
    constraints: Sequence[Constraint], compatible: Callable[[str, str], bool]
) -> tuple[tuple[str, str], ...]:
    """Label pairs, drawn from different constraints, that cannot be measured jointly."""
    found = set()
    for c1, c2 in itertools.combinations(constraints, 2):
        for a in c1.context:
            for b in c2.context:
                if a != b and not compatible(a, b):
                    found.add(tuple(sorted((a, b))))
    return tuple(sorted(found))


def find_models(
    quantities: Sequence[str],
    constraints: Sequence[Constraint],
    event: Constraint | EventPredicate | None = None,
    compatible: Callable[[str, str], bool] | None = None,
) -> ModelReport:
    """Enumerate all 2**k assignments and keep those satisfying every constraint.

    Quantities are sorted by name; assignment ``i`` gives quantity ``j`` the
    value -1 iff bit ``k-1-j`` of ``i`` is set, so models come out in
    lexicographic order with +1 first.
    """
    names = tuple(sorted(set(quantities)))
    k = len(names)
    if k > MAX_QUANTITIES:
        raise TooManyQuantities(f"{k} quantities exceed the exhaustive bound {MAX_QUANTITIES}")
    cons = list(constraints)
    if isinstance(event, EventPredicate):
        event = event_constraint(event, names)
    if event is not None:
        cons.append(event)
    col = {nm: j for j, nm in enumerate(names)}
    for c in cons:
        for lit in c.antecedent + c.consequent:
            missing = [nm for nm in lit.names if nm not in col]
            if missing:
                raise UnknownQuantity(f"{missing} in {c} not among {list(names)}")
    total = 1 << k
    models = []
    for start in range(0, total, _CHUNK):
        block = _assignment_block(k, start, min(start + _CHUNK, total))
        ok = np.ones(block.shape[0], dtype=bool)
        for c in cons:
            ok &= _satisfied(block, c, col)
        for row in block[ok]:
            models.append(dict(zip(names, (int(v) for v in row))))
    pairs = incompatible_pairs(cons, compatible) if compatible is not None else None
    return ModelReport(names, total, tuple(models), tuple(cons), pairs)


def is_satisfiable(quantities: Sequence[str], constraints: Sequence[Constraint]) -> bool:
    return not find_models(quantities, constraints).contradiction


# --- explanations ---------------------------------------------------------------

@dataclass(frozen=True)
class Explanation:
    core: tuple[Constraint, ...]
    steps: tuple[str, ...]


def minimal_core(quantities: Sequence[str], constraints: Sequence[Constraint]) -> list[Constraint]:
    """Deletion-based minimal unsatisfiable subset.

    Each constraint is dropped in turn if the rest stays unsatisfiable; by
    monotonicity every proper subset of the result is satisfiable.
    """
    core = list(constraints)
    if is_satisfiable(quantities, core):
        raise NotAContradiction("constraint set has models")
    for c in list(core):
        trial = [d for d in core if d is not c]
        if not is_satisfiable(quantities, trial):
            core = trial
    return core


def _parity_vector(lit: Literal, col: Mapping[str, int]) -> tuple[int, int]:
    mask = 0
    for nm in lit.names:
        mask ^= 1 << col[nm]
    return mask, int(lit.value < 0)


class _ParitySystem:
    """GF(2) row echelon form that remembers which facts each row combines."""

    def __init__(self):
        self.rows: dict[int, tuple[int, int, frozenset[int]]] = {}  # pivot -> (mask, rhs, used)

    def reduce(self, mask: int, rhs: int, used: frozenset[int]):
        while mask:
            pivot = mask.bit_length() - 1
            if pivot not in self.rows:
                break
            m, r, u = self.rows[pivot]
            mask, rhs, used = mask ^ m, rhs ^ r, used ^ u
        return mask, rhs, used

    def add(self, mask: int, rhs: int, used: frozenset[int]):
        mask, rhs, used = self.reduce(mask, rhs, used)
        if mask:
            self.rows[mask.bit_length() - 1] = (mask, rhs, used)
            return None
        return (rhs, used) if rhs else None  # (1, used) means 1 = -1


def explain_contradiction(report: ModelReport, constraints: Sequence[Constraint] | None = None) -> Explanation:
    """Minimal unsatisfiable core plus a readable derivation of the clash.

    The derivation multiplies known products: event atoms are facts, an
    implication fires once its antecedent follows from the facts, and the
    trace ends with the set of facts whose product reads +1 = -1. Cores with
    forbidden (probability-0) conjunctions are not pure parity systems; for
    those the last step states that exhaustive search found no assignment.
    """
    if not report.contradiction:
        raise NotAContradiction(f"{len(report.models)} models exist")
    cons = list(report.constraints if constraints is None else constraints)
    core = minimal_core(report.quantities, cons)
    col = {nm: j for j, nm in enumerate(report.quantities)}

    facts: list[Literal] = []
    steps: list[str] = []
    system = _ParitySystem()
    clash = None

    def learn(lit: Literal):
        nonlocal clash
        facts.append(lit)
        mask, rhs = _parity_vector(lit, col)
        hit = system.add(mask, rhs, frozenset([len(facts) - 1]))
        if hit is not None and clash is None:
            clash = hit[1]

    for c in core:
        if c.kind == EVENT:
            steps.append(f"observed: {', '.join(map(str, c.consequent))}")
            for lit in c.consequent:
                learn(lit)

    def entailed(lit: Literal) -> bool:
        mask, rhs, _ = system.reduce(*_parity_vector(lit, col), frozenset())
        return mask == 0 and rhs == 0

    pending = [c for c in core if c.kind == IMPLICATION]
    forbidden_hit = None
    progress = True
    while pending and progress and clash is None and forbidden_hit is None:
        progress = False
        for c in list(pending):
            if not all(entailed(lit) for lit in c.antecedent):
                continue
            ref = f"   [{c.source} = {0 if c.negated else 1}]"
            if not c.negated:
                pending.remove(c)
                progress = True
                head = ", ".join(map(str, c.antecedent))
                body = ", ".join(map(str, c.consequent))
                steps.append((f"{head} => {body}" if head else body) + ref)
                for lit in c.consequent:
                    learn(lit)
                continue
            open_lits = [lit for lit in c.consequent if not entailed(lit)]
            if not open_lits:
                forbidden_hit = c
                break
            if len(open_lits) == 1:
                (lit,) = open_lits
                flipped = Literal(lit.names, -lit.value, f"not ({lit})")
                pending.remove(c)
                progress = True
                known = [str(x) for x in c.antecedent + c.consequent if x is not lit]
                steps.append(f"{', '.join(known)} => {flipped}" + ref)
                learn(flipped)
    if clash is not None:
        used = [facts[i] for i in sorted(clash)]
        steps.append(
            "multiplying " + ", ".join(map(str, used)) + ": every quantity appears an even "
            "number of times, so the product is +1, yet the values multiply to -1"
        )
    elif forbidden_hit is not None:
        steps.append(
            f"{', '.join(map(str, forbidden_hit.consequent))} all hold, "
            f"but {forbidden_hit.source} = 0"
        )
    else:
        steps.append(
            f"no assignment of {', '.join(report.quantities)} satisfies the core "
            f"({report.searched} checked)"
        )
    return Explanation(tuple(core), tuple(steps))
