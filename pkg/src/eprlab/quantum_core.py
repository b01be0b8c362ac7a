"""
Exact statevectors and signed Pauli strings.

Qubit ``k`` (0-based) is particle ``k + 1``. Basis index bit ``n - 1 - k``
holds qubit ``k``, so ket labels read left to right as |b1 b2 ... bn>.
Pauli action is computed by index permutation with phase tracking; no dense
operator is ever built here.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

ATOL = 1e-12
AXES = ("I", "X", "Y", "Z")

# (a, b) -> (phase, c) with a*b = phase * c for single-qubit Paulis
_PRODUCT = {
    ("I", "I"): (1, "I"),
    ("I", "X"): (1, "X"),
    ("I", "Y"): (1, "Y"),
    ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"),
    ("Y", "I"): (1, "Y"),
    ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"),
    ("Y", "Y"): (1, "I"),
    ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


class RegisterMismatch(ValueError):
    """Operands address registers of different sizes."""


class NonHermitianProduct(ValueError):
    """A Pauli product picked up a phase of +-i."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits."""

    num_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 2 ** self.num_qubits:
            raise RegisterMismatch(
                f"expected {2 ** self.num_qubits} amplitudes, got {amps.shape[0]}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (squared norm {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_unnormalized(cls, num_qubits: int, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=np.complex128)
        norm = np.sqrt(np.vdot(amps, amps).real)
        if norm <= ATOL:
            raise ValueError("cannot normalize the zero vector")
        return cls(num_qubits, amps / norm)

    @property
    def dim(self) -> int:
        return 2 ** self.num_qubits

    def allclose(self, other: "StateVector", atol: float = ATOL) -> bool:
        return self.num_qubits == other.num_qubits and bool(
            np.allclose(self.amps, other.amps, rtol=0.0, atol=atol)
        )

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.num_qubits == other.num_qubits and bool(
            np.array_equal(self.amps, other.amps)
        )

    def __hash__(self):
        return hash((self.num_qubits, self.amps.tobytes()))

    def ket(self, atol: float = ATOL) -> str:
        """Compact ket notation of the nonzero amplitudes, for reports."""
        terms = []
        for idx in np.flatnonzero(np.abs(self.amps) > atol):
            bits = format(idx, f"0{self.num_qubits}b")
            a = self.amps[idx]
            coef = f"{a.real:+.6g}" if abs(a.imag) <= atol else f"({a:.6g})"
            terms.append(f"{coef}|{bits}>")
        return " ".join(terms)


@dataclass(frozen=True)
class PauliString:
    """Hermitian Pauli operator: a sign of +-1 times a tensor product of I/X/Y/Z.

    Examples:
        >>> str(PauliString.from_particles(4, "Z1Z3"))
        '+ZIZI'
        >>> str(PauliString.from_label("ZIZI") * PauliString.from_label("XIXI"))
        '-YIYI'
    """

    sign: int
    axes: tuple[str, ...]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        axes = tuple(self.axes)
        if not axes:
            raise ValueError("a Pauli string needs at least one qubit")
        bad = [a for a in axes if a not in AXES]
        if bad:
            raise ValueError(f"unknown Pauli axes {bad}")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a dense label such as ``"-XIZ"`` (optional leading sign)."""
        label = label.strip()
        sign = 1
        if label[:1] in "+-":
            sign = -1 if label[0] == "-" else 1
            label = label[1:]
        return cls(sign, tuple(label.upper()))

    @classmethod
    def from_particles(cls, num_qubits: int, text: str, sign: int = 1) -> "PauliString":
        """Parse a sparse product like ``"Z2X4"`` with 1-based particle numbers."""
        tokens = re.findall(r"([IXYZ])(\d+)", text.upper())
        if "".join(a + k for a, k in tokens) != text.upper().replace(" ", ""):
            raise ValueError(f"cannot parse Pauli product {text!r}")
        return cls.on(num_qubits, {int(k) - 1: a for a, k in tokens}, sign)

    @classmethod
    def on(cls, num_qubits: int, factors: Mapping[int, str], sign: int = 1) -> "PauliString":
        """Build from a ``{qubit_index: axis}`` map (0-based); other qubits get I."""
        axes = ["I"] * num_qubits
        for q, a in factors.items():
            if not 0 <= q < num_qubits:
                raise IndexError(f"qubit {q} outside register of {num_qubits}")
            axes[q] = a
        return cls(sign, tuple(axes))

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliString":
        return cls(1, ("I",) * num_qubits)

    @property
    def num_qubits(self) -> int:
        return len(self.axes)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, a in enumerate(self.axes) if a != "I")

    @property
    def is_identity(self) -> bool:
        return not self.support

    def __neg__(self) -> "PauliString":
        return PauliString(-self.sign, self.axes)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if not isinstance(other, PauliString):
            return NotImplemented
        _check_sizes(self.num_qubits, other.num_qubits)
        phase: complex = self.sign * other.sign
        axes = []
        for a, b in zip(self.axes, other.axes):
            ph, c = _PRODUCT[(a, b)]
            phase *= ph
            axes.append(c)
        if phase not in (1, -1):
            raise NonHermitianProduct(f"{self} * {other} has phase {phase}")
        return PauliString(int(phase.real), tuple(axes))

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + "".join(self.axes)

    def sparse_label(self) -> str:
        """1-based product notation, e.g. ``Z2X4``; identity prints as ``I``."""
        body = "".join(f"{a}{q + 1}" for q, a in enumerate(self.axes) if a != "I") or "I"
        return body if self.sign > 0 else "-" + body


def _check_sizes(n1: int, n2: int) -> None:
    if n1 != n2:
        raise RegisterMismatch(f"register sizes differ: {n1} vs {n2}")


def basis_state(num_qubits: int, bits: Sequence[int]) -> StateVector:
    if len(bits) != num_qubits:
        raise RegisterMismatch(f"{len(bits)} bits given for {num_qubits} qubits")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"bits must be 0/1, got {list(bits)}")
    idx = int("".join(str(b) for b in bits), 2)
    amps = np.zeros(2 ** num_qubits, dtype=np.complex128)
    amps[idx] = 1.0
    return StateVector(num_qubits, amps)


def singlet_pair() -> StateVector:
    """(|01> - |10>)/sqrt(2)."""
    r = np.sqrt(0.5)
    return StateVector(2, [0.0, r, -r, 0.0])


def tensor(left: StateVector, right: StateVector) -> StateVector:
    """Left factor occupies the lower-numbered qubits."""
    return StateVector.from_unnormalized(
        left.num_qubits + right.num_qubits, np.kron(left.amps, right.amps)
    )


@functools.lru_cache(maxsize=1024)
def _action_table(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Source index and phase per output index: (p @ v)[j] = phase[j] * v[src[j]]."""
    n = p.num_qubits
    x_mask = z_mask = n_y = 0
    for q, a in enumerate(p.axes):
        bit = 1 << (n - 1 - q)
        if a in ("X", "Y"):
            x_mask |= bit
        if a in ("Z", "Y"):
            z_mask |= bit
        n_y += a == "Y"
    src = np.arange(2 ** n) ^ x_mask
    parity = np.bitwise_count(src & z_mask) & 1
    # Y = i X Z: Z acts on the source bit, then X flips it
    phase = p.sign * (1j ** n_y) * (1 - 2 * parity.astype(np.int8))
    src.setflags(write=False)
    phase.setflags(write=False)
    return src, phase


def pauli_action(p: PauliString, vec: np.ndarray) -> np.ndarray:
    """Return ``p @ vec`` for a raw amplitude array (normalized or not)."""
    vec = np.asarray(vec, dtype=np.complex128)
    if vec.shape != (2 ** p.num_qubits,):
        raise RegisterMismatch(
            f"{p.num_qubits}-qubit Pauli string applied to array of shape {vec.shape}"
        )
    src, phase = _action_table(p)
    return phase * vec[src]


def apply(p: PauliString, s: StateVector) -> StateVector:
    _check_sizes(p.num_qubits, s.num_qubits)
    return StateVector(s.num_qubits, pauli_action(p, s.amps))


def expectation(s: StateVector, p: PauliString) -> float:
    """<s|p|s>; raises if the result is not real to within 1e-12."""
    _check_sizes(p.num_qubits, s.num_qubits)
    val = np.vdot(s.amps, pauli_action(p, s.amps))
    if abs(val.imag) > ATOL:
        raise ArithmeticError(f"expectation has imaginary part {val.imag!r}")
    return float(val.real)


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff an even number of qubits carry distinct non-identity axes."""
    _check_sizes(p.num_qubits, q.num_qubits)
    clashes = sum(a != "I" and b != "I" and a != b for a, b in zip(p.axes, q.axes))
    return clashes % 2 == 0


def rotate_y(s: StateVector, qubit: int, angle: float) -> StateVector:
    """Apply exp(-i angle Y / 2) to one qubit.

    Used only as a local change of measurement frame: measuring Z on
    ``rotate_y(s, q, -t)`` is measuring cos(t) Z + sin(t) X on ``s``.
    """
    if not 0 <= qubit < s.num_qubits:
        raise IndexError(f"qubit {qubit} outside register of {s.num_qubits}")
    c, sn = np.cos(angle / 2.0), np.sin(angle / 2.0)
    rot = np.array([[c, -sn], [sn, c]])
    psi = s.amps.reshape((2,) * s.num_qubits)
    psi = np.moveaxis(np.tensordot(rot, psi, axes=([1], [qubit])), 0, qubit)
    return StateVector.from_unnormalized(s.num_qubits, psi.reshape(-1))
