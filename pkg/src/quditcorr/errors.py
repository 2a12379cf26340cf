"""Exception types raised by quditcorr."""


class QuditCorrError(Exception):
    """Base class for all library errors."""


class StarUndefined(QuditCorrError, ValueError):
    """The star/wedge products carry a 1/(d-2) prefactor and do not exist for qubits."""


class NonUnitaryInput(QuditCorrError, ValueError):
    pass


class NonOrthogonalInput(QuditCorrError, ValueError):
    pass


class NotAState(QuditCorrError, ValueError):
    """A matrix or Bloch data set violates a density-matrix invariant.

    The message names the violated invariant (hermiticity, trace, positivity, shape).
    """


class TOutOfRange(QuditCorrError, ValueError):
    pass


class RejectionExhausted(QuditCorrError, RuntimeError):
    pass


class InvalidConfig(QuditCorrError, ValueError):
    pass


class ConsistencyError(QuditCorrError, RuntimeError):
    """Two independent evaluations of the same quantity disagree (basis or ordering bug)."""
