"""Decide whether two states differ by local phase gates, and extract the phases.

The feasibility question is: do there exist a global phase a0 and per-qubit
angles a1..an with  psi = e^{i a0} (Z(a1) x ... x Z(an)) phi,
Z(a) = diag(1, e^{ia})?  On the common support this is the linear system

    arg(psi_i / phi_i)  =  a0 + sum_k a_k i_k   (mod 2pi)

over the bit strings i with nonzero amplitude.  The solver eliminates the
0/1 coefficient matrix with exact integer row operations (unimodular, so the
reduced system is equivalent to the original), back-substitutes with free
angles set to zero, and verifies the candidate by direct application.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import DimensionMismatch, InvalidState
from .states import LocalUnitaryLayer, PureState, apply_local_layer, phase_gate

TOL_ZERO_REL = 1e-9
TOL_FEASIBLE = 1e-8


@dataclass(frozen=True)
class PhaseAssignment:
    """Global phase plus one phase-gate angle per qubit, radians in [0, 2pi)."""

    global_phase: float
    angles: tuple

    def __post_init__(self):
        object.__setattr__(self, "global_phase", float(self.global_phase) % (2 * np.pi))
        object.__setattr__(
            self, "angles", tuple(float(a) % (2 * np.pi) for a in self.angles)
        )

    @property
    def n(self) -> int:
        return len(self.angles)

    def layer(self) -> LocalUnitaryLayer:
        return LocalUnitaryLayer(
            self.global_phase, tuple(phase_gate(a) for a in self.angles)
        )

    def phase_at(self, index: int) -> float:
        """a0 + sum of angles over the set bits of the basis index."""
        total = self.global_phase
        for k, a in enumerate(self.angles):
            if (index >> (self.n - 1 - k)) & 1:
                total += a
        return total


@dataclass(frozen=True)
class ZeroSupport:
    """Basis indices with amplitude at or below the zero threshold."""

    indices: frozenset
    threshold: float
    fragile: tuple = ()


@dataclass(frozen=True)
class QuotientVector:
    """Componentwise ratio psi /. phi together with its operands."""

    values: np.ndarray
    source: PureState
    target: PureState


def zero_support(state: PureState, tol_zero: float | None = None) -> ZeroSupport:
    """Split basis indices by amplitude threshold (relative to the max modulus).

    Indices within a factor 10 of the threshold on either side are reported
    as fragile; downstream diagnostics surface them.
    """
    mags = np.abs(state.amp)
    thr = (TOL_ZERO_REL * mags.max()) if tol_zero is None else tol_zero
    zeros = frozenset(int(i) for i in np.flatnonzero(mags <= thr))
    fragile = tuple(
        int(i) for i in np.flatnonzero((mags > thr / 10.0) & (mags < thr * 10.0))
    )
    return ZeroSupport(zeros, thr, fragile)


def pad_state(state: PureState, support: ZeroSupport | None = None) -> np.ndarray:
    """Amplitudes with every zero entry replaced by 2 (unnormalized)."""
    support = support or zero_support(state)
    amp = state.amp.copy()
    for i in support.indices:
        amp[i] = 2.0
    return amp


def pad_state_with_phases(
    state: PureState, trial: PhaseAssignment, support: ZeroSupport | None = None
) -> np.ndarray:
    """Amplitudes with zero entries replaced by 2 e^{-i(trial phase at index)}."""
    support = support or zero_support(state)
    amp = state.amp.copy()
    for i in support.indices:
        amp[i] = 2.0 * np.exp(-1j * trial.phase_at(i))
    return amp


def hadamard_quotient(psi: PureState, phi: PureState) -> QuotientVector:
    """Componentwise ratio psi /. phi; phi must have full support."""
    if psi.n != phi.n:
        raise DimensionMismatch("states describe different qubit counts")
    if np.min(np.abs(phi.amp)) <= TOL_ZERO_REL * np.max(np.abs(phi.amp)):
        raise InvalidState("quotient denominator has (numerically) zero entries")
    return QuotientVector(psi.amp / phi.amp, psi, phi)


def is_product_state(vec, tol: float = 1e-8):
    """Factor a 2^n vector into single-qubit tensor factors, or return None.

    Peels one qubit at a time with a rank test on the 2 x 2^{n-1} reshaping.
    The returned factors satisfy ||vec - f_1 x ... x f_n|| <= tol * ||vec||.
    """
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    n = int(round(np.log2(vec.shape[0])))
    scale = np.linalg.norm(vec)
    if scale == 0:
        raise InvalidState("zero vector has no product structure")
    rest = vec / scale
    factors = []
    for _ in range(n - 1):
        m = rest.reshape(2, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        if s[1] > tol * s[0]:
            return None
        factors.append(u[:, 0] * s[0])
        rest = vh[0]
    factors.append(rest)
    factors[0] = factors[0] * scale
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    if np.linalg.norm(out - vec) > tol * scale:
        return None
    return factors


def _reduce_mod_rows(rows, targets, weights):
    """Integer echelon reduction of constraint rows with complex unit targets.

    Row operations are unimodular (swap, add integer multiples), so the
    reduced triangular system has exactly the solutions of the original one
    modulo 2pi.  ``weights`` tracks the L1 mass of original rows mixed into
    each working row, used to scale the consistency tolerance.
    """
    m = len(rows)
    ncols = len(rows[0])
    pivots = []
    r = 0
    for col in range(ncols):
        # Euclid within the column to leave a single nonzero entry at row r.
        while True:
            live = [i for i in range(r, m) if rows[i][col] != 0]
            if not live:
                break
            i0 = min(live, key=lambda i: abs(rows[i][col]))
            rows[r], rows[i0] = rows[i0], rows[r]
            targets[r], targets[i0] = targets[i0], targets[r]
            weights[r], weights[i0] = weights[i0], weights[r]
            done = True
            for i in range(r + 1, m):
                if rows[i][col] == 0:
                    continue
                q = rows[i][col] // rows[r][col]
                if q != 0:
                    rows[i] = [x - q * y for x, y in zip(rows[i], rows[r])]
                    targets[i] = targets[i] * targets[r] ** (-q)
                    weights[i] = weights[i] + abs(q) * weights[r]
                if rows[i][col] != 0:
                    done = False
            if done:
                break
        if any(rows[i][col] != 0 for i in range(r, m)):
            pivots.append((r, col))
            r += 1
            if r == m:
                break
    return pivots, r


def solve_phase_system(indices, phases, n: int, tol: float = 1e-7):
    """Solve arg constraints a0 + sum_k a_k i_k = phases[i] (mod 2pi).

    ``indices`` are the support bit strings; returns a PhaseAssignment with
    free angles set to zero, or None when the system is inconsistent.
    Targets are carried as complex units so wrap-around needs no bookkeeping.
    """
    rows = []
    for idx in indices:
        rows.append([1] + [(idx >> (n - 1 - k)) & 1 for k in range(n)])
    targets = [complex(np.exp(1j * p)) for p in phases]
    weights = [1] * len(rows)
    pivots, rank = _reduce_mod_rows(rows, targets, weights)

    for i in range(rank, len(rows)):
        # Zero rows: an exact integer combination of constraints must vanish.
        if abs(targets[i] - 1.0) > tol * max(1, weights[i]):
            return None

    sol = [0.0] * (n + 1)
    for r, col in reversed(pivots):
        acc = targets[r]
        for c in range(col + 1, n + 1):
            if rows[r][c] != 0:
                acc = acc * np.exp(-1j * rows[r][c] * sol[c])
        sol[col] = float(np.angle(acc)) / rows[r][col]
    return PhaseAssignment(sol[0], tuple(sol[1:]))


def phase_gate_feasible(
    psi: PureState, phi: PureState, tol: float = TOL_FEASIBLE
):
    """Find phases with psi = e^{i a0} (x Z(a_k)) phi, or None.

    Checks, in order: equal zero supports, equal moduli on the support, and
    solvability of the support phase system.  Any returned assignment has
    been verified by direct application (1 - |overlap| <= tol).
    """
    if psi.n != phi.n:
        raise DimensionMismatch("states describe different qubit counts")
    sup_psi = zero_support(psi)
    sup_phi = zero_support(phi)
    if sup_psi.indices != sup_phi.indices:
        return None
    support = [i for i in range(2**psi.n) if i not in sup_psi.indices]
    if not support:
        raise InvalidState("state has empty support")
    a = psi.amp[support]
    b = phi.amp[support]
    if np.max(np.abs(np.abs(a) - np.abs(b))) > tol:
        return None
    assignment = solve_phase_system(
        support, list(np.angle(a / b)), psi.n
    )
    if assignment is None:
        return None
    moved = apply_local_layer(phi, assignment.layer())
    if 1.0 - abs(psi.overlap(moved)) > tol:
        return None
    return assignment


def extract_phases(q: QuotientVector, tol: float = TOL_FEASIBLE):
    """Read a PhaseAssignment off a product-structured quotient, or None."""
    factors = is_product_state(q.values, tol=1e-6)
    if factors is None:
        return None
    n = q.source.n
    angles = []
    a0 = 0.0
    for f in factors:
        if abs(f[0]) < 1e-12:
            return None
        a0 += float(np.angle(f[0]))
        angles.append(float(np.angle(f[1] / f[0])))
    assignment = PhaseAssignment(a0, tuple(angles))
    moved = apply_local_layer(q.target, assignment.layer())
    if 1.0 - abs(q.source.overlap(moved)) > tol:
        return None
    return assignment


def phase_gate_feasible_quotient(
    psi: PureState, phi: PureState, tol: float = TOL_FEASIBLE
):
    """Quotient-route feasibility: psi /. phi must be a product of phase factors.

    With zero amplitudes present, both states are padded first (the trial
    phases for the padding come from the support system, which must be
    solvable for any padding to exist).
    """
    if psi.n != phi.n:
        raise DimensionMismatch("states describe different qubit counts")
    sup_psi = zero_support(psi)
    sup_phi = zero_support(phi)
    if sup_psi.indices != sup_phi.indices:
        return None
    if sup_psi.indices:
        support = [i for i in range(2**psi.n) if i not in sup_psi.indices]
        a = psi.amp[support]
        b = phi.amp[support]
        if np.max(np.abs(np.abs(a) - np.abs(b))) > tol:
            return None
        trial = solve_phase_system(support, list(np.angle(a / b)), psi.n)
        if trial is None:
            return None
        num = pad_state(psi, sup_psi)
        den = pad_state_with_phases(phi, trial, sup_phi)
        scale = np.linalg.norm(num)
        psi_p = PureState(psi.n, num / scale)
        phi_p = PureState(phi.n, den / np.linalg.norm(den))
    else:
        psi_p, phi_p = psi, phi
    if np.max(np.abs(np.abs(psi_p.amp) - np.abs(phi_p.amp))) > tol:
        return None
    q = hadamard_quotient(psi_p, phi_p)
    assignment = extract_phases(q)
    if assignment is None:
        return None
    moved = apply_local_layer(phi, assignment.layer())
    if 1.0 - abs(psi.overlap(moved)) > tol:
        return None
    return assignment


def product_condition_holds(psi: PureState, phi: PureState, tol: float = 1e-9) -> bool:
    """Exhaustive cross-ratio check equivalent to phase-gate relatedness.

    For every qubit i and every pair of suffix strings k, l:
    <0k|psi><1l|psi><1k|phi><0l|phi> == <1k|psi><0l|psi><0k|phi><1l|phi>.
    Exponential in n; used as an oracle on small states.
    """
    n = psi.n
    for i in range(1, n + 1):
        t_psi = np.moveaxis(psi.tensor(), i - 1, 0).reshape(2, -1)
        t_phi = np.moveaxis(phi.tensor(), i - 1, 0).reshape(2, -1)
        lhs = np.multiply.outer(t_psi[0] * t_phi[1], t_psi[1] * t_phi[0])
        rhs = np.multiply.outer(t_psi[1] * t_phi[0], t_psi[0] * t_phi[1])
        if np.max(np.abs(lhs - rhs)) > tol:
            return False
    return True


def phase_gate_feasible_product_condition(
    psi: PureState, phi: PureState, tol: float = TOL_FEASIBLE
) -> bool:
    """Feasibility via moduli equality plus the exhaustive cross-ratio check.

    Zero-support states are padded with trial phases from the support system
    first, exactly as in the quotient route.
    """
    if psi.n != phi.n:
        raise DimensionMismatch("states describe different qubit counts")
    sup_psi = zero_support(psi)
    sup_phi = zero_support(phi)
    if sup_psi.indices != sup_phi.indices:
        return False
    if sup_psi.indices:
        support = [i for i in range(2**psi.n) if i not in sup_psi.indices]
        a = psi.amp[support]
        b = phi.amp[support]
        if np.max(np.abs(np.abs(a) - np.abs(b))) > tol:
            return False
        trial = solve_phase_system(support, list(np.angle(a / b)), psi.n)
        if trial is None:
            return False
        num = pad_state(psi, sup_psi)
        den = pad_state_with_phases(phi, trial, sup_phi)
        psi_p = PureState(psi.n, num / np.linalg.norm(num))
        phi_p = PureState(phi.n, den / np.linalg.norm(den))
    else:
        psi_p, phi_p = psi, phi
    if np.max(np.abs(np.abs(psi_p.amp) - np.abs(phi_p.amp))) > tol:
        return False
    return product_condition_holds(psi_p, phi_p, tol=1e-7)
