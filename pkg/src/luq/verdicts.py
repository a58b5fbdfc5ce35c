"""Tagged decision results shared by the deciders."""

from __future__ import annotations

from dataclasses import dataclass, field

from .states import LocalUnitaryLayer

EQUIVALENT = "equivalent"
NOT_EQUIVALENT = "not_equivalent"
UNDECIDED = "undecided"

SPECTRUM_MISMATCH = "SpectrumMismatch"
SCHMIDT_MISMATCH = "SchmidtMismatch"
PHASE_INFEASIBLE = "PhaseInfeasibleAllBranches"
CLASS_MISMATCH = "ClassMismatch"
BELL_PAIR_PARAM_MISMATCH = "BellPairParamMismatch"
NONLOCAL_CONTENT_MISMATCH = "NonlocalContentMismatch"
CORRELATION_MISMATCH = "CorrelationMismatch"


@dataclass(frozen=True)
class Witness:
    """Reason two states cannot be equivalent, with the differing values."""

    kind: str
    detail: dict = field(default_factory=dict)

    def __str__(self):
        inner = ", ".join(f"{k}={v}" for k, v in self.detail.items())
        return f"{self.kind}({inner})"


@dataclass(frozen=True)
class Verdict:
    """Equivalent (with certificate), NotEquivalent (with witness), or Undecided."""

    status: str
    certificate: LocalUnitaryLayer | None = None
    witness: Witness | None = None
    reason: str = ""
    best_overlap: float | None = None
    log: tuple = ()

    @staticmethod
    def equivalent(certificate: LocalUnitaryLayer, log=()) -> "Verdict":
        return Verdict(EQUIVALENT, certificate=certificate, log=tuple(log))

    @staticmethod
    def not_equivalent(witness: Witness, log=()) -> "Verdict":
        return Verdict(NOT_EQUIVALENT, witness=witness, log=tuple(log))

    @staticmethod
    def undecided(reason: str, best_overlap=None, log=()) -> "Verdict":
        return Verdict(UNDECIDED, reason=reason, best_overlap=best_overlap, log=tuple(log))

    @property
    def is_equivalent(self) -> bool:
        return self.status == EQUIVALENT

    @property
    def is_not_equivalent(self) -> bool:
        return self.status == NOT_EQUIVALENT

    @property
    def is_undecided(self) -> bool:
        return self.status == UNDECIDED


class ContradictionFound(Exception):
    """Internal signal: a sound invariant mismatch surfaced mid-pipeline."""

    def __init__(self, witness: Witness):
        super().__init__(str(witness))
        self.witness = witness
