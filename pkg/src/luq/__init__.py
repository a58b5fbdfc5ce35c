"""Local-unitary equivalence of multi-qubit pure states, with certificates."""

from .states import (
    DensityMatrix,
    LocalUnitaryLayer,
    PureState,
    Spectrum,
    apply_local_layer,
    conjugate_state,
    entropy,
    marginal_spectrum,
    partial_trace,
    pauli_expectation,
    state_equal_up_to_phase,
)
from .verdicts import Verdict, Witness

__all__ = [
    "DensityMatrix",
    "LocalUnitaryLayer",
    "PureState",
    "Spectrum",
    "Verdict",
    "Witness",
    "apply_local_layer",
    "conjugate_state",
    "entropy",
    "marginal_spectrum",
    "partial_trace",
    "pauli_expectation",
    "state_equal_up_to_phase",
]

__version__ = "0.1.0"
