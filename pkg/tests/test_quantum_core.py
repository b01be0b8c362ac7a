import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprlab.quantum_core import (
    AXES,
    NonHermitianProduct,
    PauliString,
    RegisterMismatch,
    StateVector,
    apply,
    basis_state,
    commutes,
    expectation,
    pauli_action,
    rotate_y,
    singlet_pair,
    tensor,
)

from conftest import pauli_strings, states
from oracles import cabello_vector, commutator_norm, dense_of, ket, ry, singlet

P4 = lambda text: PauliString.from_particles(4, text)


def test_basis_states():
    assert np.array_equal(basis_state(1, [0]).amps, [1, 0])
    assert np.array_equal(basis_state(2, [0, 1]).amps, ket([0, 1]))
    assert basis_state(4, [1, 0, 1, 0]).amps[0b1010] == 1
    with pytest.raises(RegisterMismatch):
        basis_state(3, [0, 1])


def test_state_must_be_normalized():
    with pytest.raises(ValueError):
        StateVector(1, [1.0, 1.0])
    with pytest.raises(RegisterMismatch):
        StateVector(2, [1.0, 0.0])


def test_singlet_amplitudes():
    s = singlet_pair()
    assert np.array_equal(s.amps, [0, 0.7071067811865476, -0.7071067811865476, 0])
    np.testing.assert_allclose(s.amps, singlet(), atol=1e-15)


@pytest.mark.parametrize("axes", ["ZZ", "XX", "YY"])
def test_singlet_anticorrelated_on_every_axis(axes):
    s = singlet_pair()
    oracle = np.vdot(singlet(), dense(axes) @ singlet()).real
    assert oracle == pytest.approx(-1, abs=1e-12)
    assert expectation(s, PauliString.from_label(axes)) == pytest.approx(-1, abs=1e-12)


def dense(label):
    return dense_of(PauliString.from_label(label))


def test_tensor_orders_left_factor_first():
    assert tensor(basis_state(1, [0]), basis_state(1, [1])) == basis_state(2, [0, 1])


def test_tensor_of_singlets_matches_hand_expansion():
    psi = tensor(singlet_pair(), singlet_pair())
    np.testing.assert_allclose(psi.amps, cabello_vector(), atol=1e-15)
    assert np.count_nonzero(np.abs(psi.amps) > 1e-12) == 4


def test_pauli_action_single_qubit():
    zero, one = basis_state(1, [0]), basis_state(1, [1])
    assert apply(PauliString.from_label("Z"), zero) == zero
    assert apply(PauliString.from_label("X"), zero) == one
    np.testing.assert_allclose(apply(PauliString.from_label("Y"), zero).amps, [0, 1j])
    np.testing.assert_allclose(apply(PauliString.from_label("Y"), one).amps, [-1j, 0])


def test_z1z3_maps_cabello_state_to_orthogonal_vector():
    psi = tensor(singlet_pair(), singlet_pair())
    out = apply(P4("Z1Z3"), psi)
    np.testing.assert_allclose(out.amps, dense_of(P4("Z1Z3")) @ cabello_vector(), atol=1e-15)
    assert abs(np.vdot(psi.amps, out.amps)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_strings(n), states(n))))
def test_pauli_action_matches_dense_oracle(case):
    p, s = case
    np.testing.assert_allclose(apply(p, s).amps, dense_of(p) @ s.amps, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_strings(n), states(n))))
def test_pauli_action_is_involution(case):
    p, s = case
    np.testing.assert_allclose(apply(p, apply(p, s)).amps, s.amps, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_strings(n), states(n))))
def test_expectation_real_and_bounded(case):
    p, s = case
    e = expectation(s, p)
    assert -1 - 1e-12 <= e <= 1 + 1e-12
    assert e == pytest.approx(np.vdot(s.amps, dense_of(p) @ s.amps).real, abs=1e-12)


def test_expectation_examples():
    assert expectation(basis_state(1, [0]), PauliString.from_label("X")) == pytest.approx(0, abs=1e-15)
    psi = tensor(singlet_pair(), singlet_pair())
    assert expectation(psi, PauliString.from_label("YYYY")) == pytest.approx(1, abs=1e-12)


def test_commutation_examples():
    assert commutes(P4("Z1Z3"), P4("X1X3"))
    assert not commutes(P4("Z2"), P4("X2Z4"))
    assert not commutes(P4("Z4"), P4("Z2X4"))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_symbolic_commutation_matches_matrix_oracle_exhaustively(n):
    strings = [PauliString(1, a) for a in itertools.product(AXES, repeat=n)]
    for p, q in itertools.product(strings, repeat=2):
        assert commutes(p, q) == (commutator_norm(p, q) < 1e-12), (p, q)


@given(pauli_strings(3), pauli_strings(3))
def test_commutes_symmetric_and_reflexive(p, q):
    assert commutes(p, q) == commutes(q, p)
    assert commutes(p, p)


@settings(max_examples=200)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(pauli_strings(n), pauli_strings(n))))
def test_product_matches_dense_or_rejects_imaginary_phase(pq):
    p, q = pq
    if commutes(p, q):
        np.testing.assert_allclose(dense_of(p * q), dense_of(p) @ dense_of(q), atol=1e-12)
    else:
        with pytest.raises(NonHermitianProduct):
            p * q


def test_register_mismatch_raises():
    with pytest.raises(RegisterMismatch):
        commutes(PauliString.from_label("Z"), PauliString.from_label("ZZ"))
    with pytest.raises(RegisterMismatch):
        apply(PauliString.from_label("ZZ"), basis_state(1, [0]))
    with pytest.raises(RegisterMismatch):
        pauli_action(PauliString.from_label("Z"), np.ones(4))


def test_pauli_parsing():
    assert str(PauliString.from_particles(4, "Z2X4")) == "+IZIX"
    assert PauliString.from_particles(4, "Z2X4").sparse_label() == "Z2X4"
    assert str(PauliString.from_label("-xyz")) == "-XYZ"
    with pytest.raises(ValueError):
        PauliString.from_particles(4, "Z2Q4")
    with pytest.raises(ValueError):
        PauliString(2, ("Z",))


@settings(max_examples=50, deadline=None)
@given(states(2), st.floats(-np.pi, np.pi), st.integers(0, 1))
def test_rotate_y_matches_dense(s, angle, qubit):
    ops = [np.eye(2), np.eye(2)]
    ops[qubit] = ry(angle)
    np.testing.assert_allclose(
        rotate_y(s, qubit, angle).amps, np.kron(*ops) @ s.amps, atol=1e-12
    )


@settings(max_examples=50)
@given(states(2), states(1))
def test_tensor_preserves_norm(a, b):
    t = tensor(a, b)
    assert np.vdot(t.amps, t.amps).real == pytest.approx(1, abs=1e-12)
