"""Exact statevector laboratory for the Cabello, GHZ and Hardy arguments."""
from .quantum_core import PauliString, StateVector, apply, basis_state, commutes, expectation, singlet_pair, tensor
from .measurement import (
    CommutingContext,
    Distribution,
    EventPredicate,
    collapse,
    conditional_probability,
    joint_distribution,
    make_context,
    parse_event,
    sample_outcomes,
)
from .scenarios import build_cabello, build_ghz, build_hardy, prediction_table

__version__ = "0.1.0"
