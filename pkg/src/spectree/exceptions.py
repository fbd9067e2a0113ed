"""Exception hierarchy shared by all spectree modules."""


class SpectreeError(Exception):
    """Base class for every error raised by this package."""


class InvalidSequenceError(SpectreeError, ValueError):
    """Malformed degree-sequence text or a sequence that fails a precondition."""


class InvalidTreeError(SpectreeError, ValueError):
    """Edge data that does not describe a tree on ``0..n-1``."""


class InvalidMoveError(SpectreeError, ValueError):
    """A switching or shifting move whose preconditions do not hold."""


class ConvergenceError(SpectreeError, RuntimeError):
    """The iterative eigensolver hit its iteration cap.

    The best iterate is kept on ``result`` so callers can inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BudgetExceededError(SpectreeError, RuntimeError):
    """An enumeration or search would exceed its configured budget."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class VerificationAnomaly(SpectreeError, AssertionError):
    """A step that a proven statement guarantees was observed to fail."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
