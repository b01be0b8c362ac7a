"""
Joint projective measurement of commuting Pauli observables.

Outcome tuples are ordered lexicographically with +1 before -1, so the
first tuple of a context of size m is (+1, ..., +1).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .quantum_core import (
    ATOL,
    PauliString,
    RegisterMismatch,
    StateVector,
    commutes,
    pauli_action,
)

Outcome = tuple[int, ...]


class NonCommuting(ValueError):
    def __init__(self, i: int, j: int, left: str, right: str):
        self.i, self.j = i, j
        super().__init__(f"observables {i} ({left}) and {j} ({right}) do not commute")


class ConditioningOnNull(ZeroDivisionError):
    pass


class ZeroProbabilityBranch(ValueError):
    pass


class LabelNotInContext(KeyError):
    pass


@dataclass(frozen=True)
class CommutingContext:
    observables: tuple[PauliString, ...]
    labels: tuple[str, ...]

    def __len__(self):
        return len(self.observables)

    @property
    def num_qubits(self) -> int | None:
        return self.observables[0].num_qubits if self.observables else None

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelNotInContext(
                f"{label!r} is not measured in context {list(self.labels)}"
            ) from None

    def observable(self, label: str) -> PauliString:
        return self.observables[self.index(label)]

    def permuted(self, order: Sequence[int]) -> "CommutingContext":
        return CommutingContext(
            tuple(self.observables[i] for i in order), tuple(self.labels[i] for i in order)
        )


def make_context(observables: Sequence[PauliString], labels: Sequence[str] | None = None) -> CommutingContext:
    """Validate pairwise commutation and return a jointly measurable context.

    Labels default to the sparse operator notation (``Z1Z3``).
    """
    observables = tuple(observables)
    if labels is None:
        labels = [p.sparse_label() for p in observables]
    labels = tuple(labels)
    if len(labels) != len(observables):
        raise ValueError("one label per observable is required")
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate labels in {labels}")
    sizes = {p.num_qubits for p in observables}
    if len(sizes) > 1:
        raise RegisterMismatch(f"observables span registers of sizes {sorted(sizes)}")
    for (i, p), (j, q) in itertools.combinations(enumerate(observables), 2):
        if not commutes(p, q):
            raise NonCommuting(i, j, labels[i], labels[j])
    return CommutingContext(observables, labels)


# --- events -----------------------------------------------------------------

@dataclass(frozen=True)
class Fixed:
    """Atom ``label = value``."""

    label: str
    value: int

    def holds(self, values: Mapping[str, int]) -> bool:
        return values[self.label] == self.value

    def labels(self) -> tuple[str, ...]:
        return (self.label,)

    def __str__(self):
        return f"{self.label}={self.value:+d}"


@dataclass(frozen=True)
class Relation:
    """Atom ``left = sign * right``."""

    left: str
    right: str
    sign: int = 1

    def holds(self, values: Mapping[str, int]) -> bool:
        return values[self.left] == self.sign * values[self.right]

    def labels(self) -> tuple[str, ...]:
        return (self.left, self.right)

    def __str__(self):
        return f"{self.left}={'-' if self.sign < 0 else ''}{self.right}"


Atom = Fixed | Relation


@dataclass(frozen=True)
class EventPredicate:
    """Conjunction of atoms over the labels of a context."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("an event needs at least one atom")

    def labels(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for atom in self.atoms:
            for lab in atom.labels():
                seen.setdefault(lab, None)
        return tuple(seen)

    def holds(self, values: Mapping[str, int]) -> bool:
        return all(a.holds(values) for a in self.atoms)

    def __and__(self, other: "EventPredicate") -> "EventPredicate":
        return EventPredicate(self.atoms + other.atoms)

    def __str__(self):
        return ",".join(str(a) for a in self.atoms)


_ATOM_RE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9]*)\s*=\s*(?:([+-]?1)|(-?)([A-Za-z][A-Za-z0-9]*))\s*$")


def parse_event(spec: str) -> EventPredicate:
    """Parse ``"A1A3=+1,B2=B4,a1=-A3"`` into an :class:`EventPredicate`."""
    atoms: list[Atom] = []
    for part in spec.split(","):
        m = _ATOM_RE.match(part)
        if not m:
            raise ValueError(f"bad event atom {part.strip()!r}")
        name, value, neg, other = m.groups()
        if value is not None:
            atoms.append(Fixed(name, int(value)))
        else:
            atoms.append(Relation(name, other, -1 if neg else 1))
    return EventPredicate(tuple(atoms))


def _check_event(ctx: CommutingContext, event: EventPredicate) -> None:
    for lab in event.labels():
        ctx.index(lab)


# --- distributions ----------------------------------------------------------

@dataclass(frozen=True)
class Distribution:
    labels: tuple[str, ...]
    entries: dict[Outcome, float] = field(hash=False)

    def total(self) -> float:
        return float(sum(self.entries.values()))

    def prob(self, outcome: Sequence[int]) -> float:
        return self.entries.get(tuple(outcome), 0.0)

    def probability(self, event: EventPredicate) -> float:
        missing = [lab for lab in event.labels() if lab not in self.labels]
        if missing:
            raise LabelNotInContext(f"{missing} not in {list(self.labels)}")
        return float(
            sum(p for o, p in self.entries.items() if event.holds(dict(zip(self.labels, o))))
        )

    def marginal(self, keep: Sequence[str]) -> "Distribution":
        pos = [self.labels.index(k) for k in keep]
        acc: dict[Outcome, float] = {}
        for o, p in self.entries.items():
            key = tuple(o[i] for i in pos)
            acc[key] = acc.get(key, 0.0) + p
        ordered = {o: acc[o] for o in _outcomes(len(pos)) if acc.get(o, 0.0) > ATOL}
        return Distribution(tuple(keep), ordered)


def _outcomes(m: int) -> Iterable[Outcome]:
    return itertools.product((1, -1), repeat=m)


def _project(p: PauliString, vec: np.ndarray, outcome: int) -> np.ndarray:
    return 0.5 * (vec + outcome * pauli_action(p, vec))


def _branches(vec: np.ndarray, observables: Sequence[PauliString]):
    """Yield (outcome, unnormalized projected vector) for every branch above ATOL."""
    if not observables:
        yield (), vec
        return
    head, rest = observables[0], observables[1:]
    for v in (1, -1):
        proj = _project(head, vec, v)
        if np.vdot(proj, proj).real <= ATOL:
            continue
        for tail, out in _branches(proj, rest):
            yield (v,) + tail, out


def joint_distribution(s: StateVector, ctx: CommutingContext) -> Distribution:
    """Born probabilities of every joint outcome of a commuting context.

    Each probability is the squared norm of the product of eigenprojectors
    (I + v_i P_i)/2 applied to the state.
    """
    if ctx.observables and ctx.num_qubits != s.num_qubits:
        raise RegisterMismatch(f"context on {ctx.num_qubits} qubits, state on {s.num_qubits}")
    entries = {}
    for outcome, vec in _branches(s.amps, ctx.observables):
        p = float(np.vdot(vec, vec).real)
        if p > ATOL:
            entries[outcome] = p
    return Distribution(ctx.labels, entries)


def conditional_probability(
    s: StateVector, ctx: CommutingContext, target: EventPredicate, given: EventPredicate
) -> float:
    """P(target | given) over one joint measurement of ``ctx``."""
    _check_event(ctx, target)
    _check_event(ctx, given)
    dist = joint_distribution(s, ctx)
    p_given = dist.probability(given)
    if p_given <= ATOL:
        raise ConditioningOnNull(f"P({given}) = {p_given!r}")
    return dist.probability(target & given) / p_given


def collapse(s: StateVector, p: PauliString, outcome: int) -> tuple[StateVector, float]:
    """Project onto the ``outcome`` eigenspace of ``p``; return (state, probability)."""
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")
    if p.num_qubits != s.num_qubits:
        raise RegisterMismatch(f"{p.num_qubits}-qubit observable on {s.num_qubits}-qubit state")
    proj = _project(p, s.amps, outcome)
    prob = float(np.vdot(proj, proj).real)
    if prob <= ATOL:
        raise ZeroProbabilityBranch(f"P({p.sparse_label()}={outcome:+d}) = {prob!r}")
    return StateVector(s.num_qubits, proj / np.sqrt(prob)), prob


def chained_distribution(
    s: StateVector, ctx: CommutingContext, order: Sequence[int] | None = None
) -> Distribution:
    """Same statistics as :func:`joint_distribution`, built by repeated
    :func:`collapse` with renormalization in the given measurement order.

    Tuples are reported in the context's own coordinate order.
    """
    entries = {o: p for o, p, _ in branch_states(s, ctx, order)}
    return Distribution(ctx.labels, entries)


def sample_outcomes(
    s: StateVector, ctx: CommutingContext, n: int, seed: int
) -> dict[Outcome, int]:
    """Draw ``n`` independent joint outcomes.

    Generator: numpy PCG64 seeded with ``seed`` (0 <= seed < 2**64); each draw
    inverts the cumulative distribution, in tuple order, at a uniform double
    from ``Generator.random``. Both are stable across platforms and numpy
    releases. Every tuple in the support is reported, including zero counts.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    dist = joint_distribution(s, ctx)
    outcomes = list(dist.entries)
    cum = np.cumsum([dist.entries[o] for o in outcomes])
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(n) * cum[-1]
    idx = np.minimum(np.searchsorted(cum, u, side="right"), len(outcomes) - 1)
    counts = np.bincount(idx, minlength=len(outcomes))
    return {o: int(c) for o, c in zip(outcomes, counts)}


def branch_states(
    s: StateVector, ctx: CommutingContext, order: Sequence[int] | None = None
) -> list[tuple[Outcome, float, StateVector]]:
    """Every nonzero branch of measuring ``ctx`` one observable at a time.

    Returns (outcome in context order, branch probability, collapsed state),
    with outcomes listed in the lexicographic tuple order.
    """
    order = list(range(len(ctx))) if order is None else list(order)
    if sorted(order) != list(range(len(ctx))):
        raise ValueError(f"{order} is not a permutation of the context")
    out: dict[Outcome, tuple[float, StateVector]] = {}

    def walk(state, depth, partial, prob):
        if depth == len(order):
            values = [0] * len(ctx)
            for k, v in zip(order, partial):
                values[k] = v
            out[tuple(values)] = (prob, state)
            return
        for v in (1, -1):
            try:
                post, p = collapse(state, ctx.observables[order[depth]], v)
            except ZeroProbabilityBranch:
                continue
            if prob * p > ATOL:
                walk(post, depth + 1, partial + (v,), prob * p)

    walk(s, 0, (), 1.0)
    return [(o,) + out[o] for o in _outcomes(len(ctx)) if o in out]
