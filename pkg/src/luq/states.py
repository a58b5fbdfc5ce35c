"""Dense n-qubit states and the elementary linear algebra everything else uses.

Indexing convention (fixed package-wide): basis index ``i`` of an n-qubit
amplitude vector encodes the bit string ``(i_1, ..., i_n)`` with qubit 1 as
the most significant bit, i.e. bit of qubit ``k`` is ``(i >> (n - k)) & 1``.
Qubit labels are 1-based everywhere in the public API.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidState, InvalidSubset, NonUnitary

TOL_NORM = 1e-9
TOL_HERM = 1e-10
DEGENERACY_THRESHOLD = 1e-9

# Pauli matrices, indexed 1..3 as X, Y, Z (slot 0 is the identity).
ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (ID2, PAULI_X, PAULI_Y, PAULI_Z)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

_AXIS = {"X": 1, "Y": 2, "Z": 3}


def phase_gate(alpha: float) -> np.ndarray:
    """diag(1, e^{i alpha})."""
    return np.array([[1, 0], [0, np.exp(1j * alpha)]], dtype=complex)


@dataclass(frozen=True)
class PureState:
    """Normalized pure state of ``n`` qubits as a dense amplitude vector."""

    n: int
    amp: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amp, dtype=complex).reshape(-1)
        if not (1 <= self.n <= 12):
            raise InvalidState(f"qubit count {self.n} outside supported range 1..12")
        if amp.shape[0] != 2**self.n:
            raise DimensionMismatch(
                f"amplitude vector has length {amp.shape[0]}, expected {2 ** self.n}"
            )
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > TOL_NORM:
            raise InvalidState(f"state is not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        object.__setattr__(self, "amp", amp)

    @staticmethod
    def from_amplitudes(amp, renormalize: bool = False) -> "PureState":
        amp = np.asarray(amp, dtype=complex).reshape(-1)
        n = int(round(np.log2(amp.shape[0])))
        if 2**n != amp.shape[0]:
            raise DimensionMismatch(f"length {amp.shape[0]} is not a power of two")
        if renormalize:
            norm = np.linalg.norm(amp)
            if norm == 0:
                raise InvalidState("cannot normalize the zero vector")
            amp = amp / norm
        return PureState(n, amp)

    @staticmethod
    def basis(n: int, index: int) -> "PureState":
        amp = np.zeros(2**n, dtype=complex)
        amp[index] = 1.0
        return PureState(n, amp)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qubit (axis k-1 = qubit k)."""
        return self.amp.reshape((2,) * self.n)

    def bit(self, index: int, qubit: int) -> int:
        return (index >> (self.n - qubit)) & 1

    def overlap(self, other: "PureState") -> complex:
        if other.n != self.n:
            raise DimensionMismatch("states describe different qubit counts")
        return complex(np.vdot(self.amp, other.amp))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, trace-one matrix on ``k`` qubits."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"matrix shape {m.shape} does not match dim {self.dim}")
        if np.max(np.abs(m - m.conj().T)) > TOL_HERM:
            raise InvalidState("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        if abs(np.trace(m).real - 1.0) > TOL_HERM:
            raise InvalidState(f"density matrix trace {np.trace(m).real} != 1")
        if np.linalg.eigvalsh(m).min() < -TOL_HERM:
            raise InvalidState("density matrix is not positive semidefinite")
        object.__setattr__(self, "entries", m)

    @property
    def num_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    @staticmethod
    def from_pure(state: PureState) -> "DensityMatrix":
        return DensityMatrix(2**state.n, np.outer(state.amp, state.amp.conj()))


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.sort(np.asarray(self.eigenvalues, dtype=float))[::-1]
        if ev.size and ev[-1] < -1e-8:
            raise InvalidState(f"negative eigenvalue {ev[-1]:.3e} in spectrum")
        object.__setattr__(self, "eigenvalues", ev)

    def close_to(self, other: "Spectrum", tol: float = 1e-9) -> bool:
        if self.eigenvalues.shape != other.eigenvalues.shape:
            return False
        return bool(np.max(np.abs(self.eigenvalues - other.eigenvalues)) <= tol)


def check_unitary(u: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    if u.shape != (d, d):
        raise NonUnitary(f"matrix shape {u.shape} is not square")
    if np.max(np.abs(u @ u.conj().T - np.eye(d))) > tol:
        raise NonUnitary("matrix is not unitary")
    return u


@dataclass(frozen=True)
class LocalUnitaryLayer:
    """Global phase plus one 2x2 unitary per qubit.

    Acts on a state as ``e^{i global_phase} (U_1 x ... x U_n)``.
    """

    global_phase: float
    units: tuple = field(default_factory=tuple)

    def __post_init__(self):
        units = tuple(check_unitary(np.asarray(u, dtype=complex)) for u in self.units)
        for u in units:
            if u.shape != (2, 2):
                raise DimensionMismatch("layer factors must be 2x2")
        object.__setattr__(self, "units", units)
        object.__setattr__(self, "global_phase", float(self.global_phase) % (2 * np.pi))

    @staticmethod
    def identity(n: int) -> "LocalUnitaryLayer":
        return LocalUnitaryLayer(0.0, tuple(ID2 for _ in range(n)))

    @staticmethod
    def from_units(units, global_phase: float = 0.0) -> "LocalUnitaryLayer":
        return LocalUnitaryLayer(global_phase, tuple(units))

    @property
    def n(self) -> int:
        return len(self.units)

    def inverse(self) -> "LocalUnitaryLayer":
        return LocalUnitaryLayer(-self.global_phase, tuple(u.conj().T for u in self.units))

    def compose(self, other: "LocalUnitaryLayer") -> "LocalUnitaryLayer":
        """Layer equal to ``self`` applied after ``other``."""
        if other.n != self.n:
            raise DimensionMismatch("layers act on different qubit counts")
        return LocalUnitaryLayer(
            self.global_phase + other.global_phase,
            tuple(a @ b for a, b in zip(self.units, other.units)),
        )

    def conj(self) -> "LocalUnitaryLayer":
        return LocalUnitaryLayer(-self.global_phase, tuple(u.conj() for u in self.units))

    def matrix(self) -> np.ndarray:
        """Full 2^n x 2^n matrix (small n only; used by tests and the CLI)."""
        out = np.array([[np.exp(1j * self.global_phase)]], dtype=complex)
        for u in self.units:
            out = np.kron(out, u)
        return out


def apply_single_qubit(state: PureState, u: np.ndarray, qubit: int) -> PureState:
    """Apply one 2x2 unitary to the given qubit."""
    if not 1 <= qubit <= state.n:
        raise InvalidSubset(f"qubit {qubit} out of range 1..{state.n}")
    t = state.tensor()
    t = np.tensordot(np.asarray(u, dtype=complex), t, axes=([1], [qubit - 1]))
    t = np.moveaxis(t, 0, qubit - 1)
    return PureState(state.n, t.reshape(-1))


def apply_local_layer(state: PureState, layer: LocalUnitaryLayer) -> PureState:
    """Apply ``e^{i phase} U_1 x ... x U_n`` to the state."""
    if layer.n != state.n:
        raise DimensionMismatch(
            f"layer has {layer.n} factors, state has {state.n} qubits"
        )
    t = state.tensor()
    for k, u in enumerate(layer.units):
        t = np.tensordot(u, t, axes=([1], [k]))
        t = np.moveaxis(t, 0, k)
    amp = t.reshape(-1) * np.exp(1j * layer.global_phase)
    return PureState(state.n, amp)


def _check_subset(n: int, keep) -> tuple:
    keep = tuple(int(q) for q in keep)
    if not keep:
        raise InvalidSubset("subset is empty")
    if any(not 1 <= q <= n for q in keep):
        raise InvalidSubset(f"subset {keep} not within 1..{n}")
    if any(b <= a for a, b in zip(keep, keep[1:])):
        raise InvalidSubset(f"subset {keep} is not strictly increasing")
    return keep


def _split_matrix(state: PureState, keep) -> np.ndarray:
    """Amplitudes as a (2^|keep| x 2^|rest|) matrix, kept qubits first."""
    keep = _check_subset(state.n, keep)
    rest = [q for q in range(1, state.n + 1) if q not in keep]
    order = [q - 1 for q in keep] + [q - 1 for q in rest]
    t = np.transpose(state.tensor(), order)
    return t.reshape(2 ** len(keep), 2 ** len(rest))


def partial_trace(state: PureState, keep) -> DensityMatrix:
    """Reduced density matrix of the kept qubits (strictly increasing labels)."""
    m = _split_matrix(state, keep)
    return DensityMatrix(m.shape[0], m @ m.conj().T)


def cross_partial_trace(a: PureState, b: PureState, keep) -> np.ndarray:
    """tr over the complement of ``keep`` of the operator |a><b|.

    Not a density matrix in general; this is the workhorse behind the
    pair-witness and orthogonal-pair pinning rules.
    """
    if a.n != b.n:
        raise DimensionMismatch("states describe different qubit counts")
    ma = _split_matrix(a, keep)
    mb = _split_matrix(b, keep)
    return ma @ mb.conj().T


def marginal_spectrum(state: PureState, keep) -> Spectrum:
    rho = partial_trace(state, keep)
    return Spectrum(np.linalg.eigvalsh(rho.entries))


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits, with 0 log 0 := 0."""
    ev = np.linalg.eigvalsh(rho.entries)
    ev = ev[ev > 1e-15]
    return float(-np.sum(ev * np.log2(ev)))


def pauli_expectation(state: PureState, qubit: int, axis: str) -> float:
    """<state| sigma_axis on the given qubit |state>, a real number in [-1, 1]."""
    if axis not in _AXIS:
        raise InvalidSubset(f"axis must be one of X, Y, Z, got {axis!r}")
    moved = apply_single_qubit(state, PAULIS[_AXIS[axis]], qubit)
    val = state.overlap(moved)
    if abs(val.imag) > 1e-10:
        raise InvalidState(f"Pauli expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def conjugate_state(state: PureState) -> PureState:
    """Componentwise complex conjugate in the computational basis."""
    return PureState(state.n, state.amp.conj())


def state_equal_up_to_phase(a: PureState, b: PureState, tol: float = 1e-9) -> bool:
    """True iff 1 - |<a|b>| <= tol."""
    if a.n != b.n:
        raise DimensionMismatch("states describe different qubit counts")
    return 1.0 - abs(a.overlap(b)) <= tol


def eig2_hermitian(m: np.ndarray):
    """Closed-form eigensystem of a 2x2 Hermitian matrix.

    Returns (eigenvalues descending, unitary W) with W m W^dag = diag(ev).
    Eigenvector phases are fixed deterministically (largest component real
    positive) so repeated calls give identical certificates.
    """
    a = m[0, 0].real
    c = m[1, 1].real
    b = m[0, 1]
    half_gap = np.hypot((a - c) / 2.0, abs(b))
    mean = (a + c) / 2.0
    ev = np.array([mean + half_gap, mean - half_gap])
    if abs(b) < 1e-14 * max(1.0, abs(a), abs(c)):
        w = ID2.copy() if a >= c else PAULI_X.copy()
        return ev, w
    # Eigenvector for the larger eigenvalue; pick the numerically safer pivot.
    v1 = np.array([b, ev[0] - a])
    if abs(ev[0] - a) < abs(ev[0] - c):
        v1 = np.array([ev[0] - c, b.conjugate()])
    v1 = v1 / np.linalg.norm(v1)
    v2 = np.array([-v1[1].conjugate(), v1[0].conjugate()])
    w = np.vstack([v1.conj(), v2.conj()])
    for row in range(2):
        k = int(np.argmax(np.abs(w[row])))
        ph = w[row, k] / abs(w[row, k])
        w[row] = w[row] / ph
    return ev, w


def random_state(n: int, rng: np.random.Generator) -> PureState:
    amp = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return PureState.from_amplitudes(amp, renormalize=True)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR of a Ginibre matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_layer(n: int, rng: np.random.Generator) -> LocalUnitaryLayer:
    return LocalUnitaryLayer(
        float(rng.uniform(0, 2 * np.pi)),
        tuple(random_unitary(2, rng) for _ in range(n)),
    )
