"""Constructors for the named states and families used throughout the package."""

from __future__ import annotations

import numpy as np

from .errors import InvalidState, InvalidSubset
from .states import DensityMatrix, PureState

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


def bell(kind: str) -> PureState:
    """One of the four Bell states; kind in {phi+, phi-, psi+, psi-}."""
    kind = kind.lower()
    if kind not in BELL_KINDS:
        raise InvalidSubset(f"unknown Bell state {kind!r}, expected one of {BELL_KINDS}")
    amp = np.zeros(4, dtype=complex)
    if kind.startswith("phi"):
        amp[0], amp[3] = 1.0, 1.0 if kind.endswith("+") else -1.0
    else:
        amp[1], amp[2] = 1.0, 1.0 if kind.endswith("+") else -1.0
    return PureState(2, amp / np.sqrt(2))


def ghz(n: int) -> PureState:
    """(|0...0> + |1...1>)/sqrt(2)."""
    amp = np.zeros(2**n, dtype=complex)
    amp[0] = amp[-1] = 1 / np.sqrt(2)
    return PureState(n, amp)


def w_state(n: int) -> PureState:
    """Equal superposition of all weight-one bit strings."""
    amp = np.zeros(2**n, dtype=complex)
    for k in range(n):
        amp[1 << k] = 1.0
    return PureState(n, amp / np.sqrt(n))


def lme_phase_state(n: int, phases) -> PureState:
    """State with all amplitude moduli 2^{-n/2} and the given per-index phases."""
    phases = np.asarray(phases, dtype=float).reshape(-1)
    if phases.shape[0] != 2**n:
        raise InvalidSubset(f"need {2 ** n} phases, got {phases.shape[0]}")
    return PureState(n, np.exp(1j * phases) / np.sqrt(2**n))


def controlled_phase_all(n: int, phi: float) -> PureState:
    """Apply the n-qubit phase gate 1 - (1 - e^{i phi})|1..1><1..1| to |+>^n."""
    phases = np.zeros(2**n)
    phases[-1] = phi
    return lme_phase_state(n, phases)


def cphase_marginal_eigenvalues(n: int) -> tuple:
    """Closed-form single-qubit marginal spectrum of controlled_phase_all(n, pi/2)."""
    root = np.sqrt(8.0 - 2.0 ** (2 + n) + 2.0 ** (2 * n))
    hi = 0.5 * (1.0 + root / 2.0**n)
    return hi, 1.0 - hi


def bell_pair_phase_state(lam: float, g1: float, g2: float, g3: float) -> PureState:
    """Four-qubit state of matched Bell pairs on (1,2) x (3,4) with phases.

    |phi+ phi+> + e^{i g1}|phi- phi-> + e^{i g2}|psi+ psi+>
    + sqrt(1-lam) e^{i g3}|psi- psi->, normalized.  The (1,2) marginal is the
    two-qubit Werner state werner_two_qubit(lam).
    """
    if not 0.0 <= lam <= 1.0:
        raise InvalidState(f"lambda must lie in [0, 1], got {lam}")
    coeff = [1.0, np.exp(1j * g1), np.exp(1j * g2), np.sqrt(1.0 - lam) * np.exp(1j * g3)]
    kinds = ("phi+", "phi-", "psi+", "psi-")
    amp = np.zeros(16, dtype=complex)
    for c, kind in zip(coeff, kinds):
        pair = bell(kind).amp
        amp += c * np.kron(pair, pair)
    return PureState.from_amplitudes(amp, renormalize=True)


def werner_two_qubit(lam: float) -> DensityMatrix:
    """(I - lam |psi-><psi-|) / (4 - lam), full rank for lam < 1."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidState(f"lambda must lie in [0, 1], got {lam}")
    p = np.outer(bell("psi-").amp, bell("psi-").amp.conj())
    return DensityMatrix(4, (np.eye(4) - lam * p) / (4.0 - lam))


def magic_basis_matrix() -> np.ndarray:
    """Columns (phi+, -i phi-, psi-, -i psi+); realifies product unitaries."""
    cols = [
        bell("phi+").amp,
        -1j * bell("phi-").amp,
        bell("psi-").amp,
        -1j * bell("psi+").amp,
    ]
    return np.column_stack(cols)


def five_qubit_all_pairs_mixed(alpha: float) -> PureState:
    """Five-qubit state whose every two-qubit marginal is completely mixed.

    Qubit 1 carries |+>/|->, qubits (2,3) and (4,5) carry matched Bell pairs:

        |+>(|phi+ phi+> + |psi+ psi->) + e^{i alpha}|->(|phi- phi-> + |psi- psi+>)

    normalized.  Every pair marginal equals I/4 and the (1,2,3) marginal is
    (I + XXX)/8, both to machine precision.
    """
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    terms = (
        (1.0, plus, "phi+", "phi+"),
        (1.0, plus, "psi+", "psi-"),
        (np.exp(1j * alpha), minus, "phi-", "phi-"),
        (np.exp(1j * alpha), minus, "psi-", "psi+"),
    )
    amp = np.zeros(32, dtype=complex)
    for c, top, k23, k45 in terms:
        amp += c * np.kron(top, np.kron(bell(k23).amp, bell(k45).amp))
    return PureState.from_amplitudes(amp, renormalize=True)
