"""Trace decomposition and the deterministic standard form for generic states.

A trace decomposition is a product-basis choice making every single-qubit
marginal diagonal; "sorted" orders each diagonal descending.  For generic
states (no marginal maximally mixed) the sorted trace decomposition is
unique up to local phase gates, and fixing those phases deterministically
yields a canonical representative of the whole local-unitary orbit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonGenericState
from .states import (
    DEGENERACY_THRESHOLD,
    ID2,
    LocalUnitaryLayer,
    PureState,
    apply_local_layer,
    eig2_hermitian,
    partial_trace,
)


@dataclass(frozen=True)
class TraceDecomposition:
    """A state with diagonal single-qubit marginals plus the layer reaching it."""

    state: PureState
    layer: LocalUnitaryLayer
    sorted: bool
    generic: bool
    mixed_qubits: tuple


def trace_decompose(state: PureState) -> TraceDecomposition:
    """Diagonalize every single-qubit marginal (descending eigenvalue order).

    Qubits with a maximally mixed marginal are left untouched and flagged;
    the result is then not generic.
    """
    units = []
    mixed = []
    for q in range(1, state.n + 1):
        rho = partial_trace(state, (q,))
        ev, w = eig2_hermitian(rho.entries)
        if ev[0] - ev[1] <= DEGENERACY_THRESHOLD:
            units.append(ID2)
            mixed.append(q)
        else:
            units.append(w)
    layer = LocalUnitaryLayer.from_units(units)
    return TraceDecomposition(
        state=apply_local_layer(state, layer),
        layer=layer,
        sorted=True,
        generic=not mixed,
        mixed_qubits=tuple(mixed),
    )


def _select_independent_rows(amps: np.ndarray, n: int, tol_zero: float):
    """Greedy lexicographic pick of support indices with independent bit rows.

    Rows are (1, bits(index)); independence over the reals.
    """
    basis = []
    chosen = []
    for idx in range(amps.shape[0]):
        if abs(amps[idx]) <= tol_zero:
            continue
        row = np.array([1.0] + [float((idx >> (n - 1 - k)) & 1) for k in range(n)])
        resid = row.copy()
        for b in basis:
            resid = resid - (resid @ b) * b
        if np.linalg.norm(resid) > 1e-9:
            basis.append(resid / np.linalg.norm(resid))
            chosen.append((idx, row))
            if len(chosen) == n + 1:
                break
    return chosen


def standard_form(state: PureState) -> tuple:
    """Canonical representative of a generic state's local-unitary orbit.

    Sorted trace decomposition followed by a deterministic phase fix: in
    lexicographic index order, amplitudes at support indices with linearly
    independent (1, bits) rows are made real nonnegative; leftover free
    phases are zero.  Returns (canonical state, layer mapping input to it).
    Raises NonGenericState when some marginal is maximally mixed.
    """
    td = trace_decompose(state)
    if not td.generic:
        raise NonGenericState(
            f"qubits {td.mixed_qubits} have maximally mixed marginals"
        )
    amps = td.state.amp
    tol_zero = 1e-9 * float(np.max(np.abs(amps)))
    chosen = _select_independent_rows(amps, state.n, tol_zero)
    a = np.array([row for _, row in chosen])
    b = np.array([-float(np.angle(amps[idx])) for idx, _ in chosen])
    # Exact solve on pivot columns; free phases stay zero.
    pivots = []
    work = a.copy()
    for col in range(a.shape[1]):
        sub = work[:, pivots + [col]]
        if np.linalg.matrix_rank(sub, tol=1e-9) > len(pivots):
            pivots.append(col)
        if len(pivots) == a.shape[0]:
            break
    sol = np.zeros(a.shape[1])
    sol[pivots] = np.linalg.solve(a[:, pivots], b)
    angles = tuple(sol[1:])
    phase_layer = LocalUnitaryLayer(
        sol[0],
        tuple(np.diag([1.0, np.exp(1j * t)]).astype(complex) for t in angles),
    )
    canon = apply_local_layer(td.state, phase_layer)
    return canon, phase_layer.compose(td.layer)
