"""Exception types shared across the package."""


class LuqError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LuqError):
    """Operands describe different numbers of qubits or incompatible shapes."""


class InvalidState(LuqError):
    """Vector or matrix violates a state invariant (norm, hermiticity, ...)."""


class InvalidSubset(LuqError):
    """Qubit subset is empty, out of range, or not strictly increasing."""


class NonUnitary(LuqError):
    """Matrix expected to be unitary (or orthogonal) is not."""


class NotMaximallyMixed(LuqError):
    """Operation requires completely mixed marginals."""


class DegenerateSplit(LuqError):
    """Schmidt split requested on a qubit with a maximally mixed marginal."""


class NonGenericState(LuqError):
    """Standard form requested for a state with a maximally mixed marginal."""


class NotApplicable(LuqError):
    """A pinning rule's precondition does not hold for this input."""


class ProductObstruction(LuqError):
    """Singlet projection degenerates because a splitting is a product state."""
